#include "maxlow/mesh.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace maxlow {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
    throw MeshError("line " + std::to_string(line) + ": " + what);
}

bool next_line(std::istringstream& in, std::string& line, int& lineno) {
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        return true;
    }
    return false;
}

template <class T>
void read_fields(const std::string& line, int lineno, T* out, int n, const char* what) {
    std::istringstream ls(line);
    for (int i = 0; i < n; ++i)
        if (!(ls >> out[i])) fail(lineno, std::string("expected ") + what);
    std::string rest;
    if (ls >> rest) fail(lineno, "trailing content '" + rest + "'");
}

}  // namespace

Triangulation parse_mesh(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    if (!next_line(in, line, lineno)) fail(lineno + 1, "empty file");
    {
        std::istringstream ls(line);
        std::string magic, version, rest;
        ls >> magic >> version;
        if (magic != "mesh2d" || version != "v1" || (ls >> rest)) fail(lineno, "expected header 'mesh2d v1'");
    }
    if (!next_line(in, line, lineno)) fail(lineno + 1, "missing counts line");
    long long counts[3];
    read_fields(line, lineno, counts, 3, "'<V> <E> <T>'");
    if (counts[0] <= 0 || counts[2] <= 0 || counts[1] < 0) fail(lineno, "counts must be positive");
    const int nv = static_cast<int>(counts[0]), ne = static_cast<int>(counts[1]), nt = static_cast<int>(counts[2]);
    const int count_line = lineno;

    std::vector<Vec2> V(nv);
    for (int i = 0; i < nv; ++i) {
        if (!next_line(in, line, lineno)) fail(lineno + 1, "missing vertex " + std::to_string(i));
        double xy[2];
        read_fields(line, lineno, xy, 2, "'x y'");
        V[i] = Vec2(xy[0], xy[1]);
    }
    std::vector<std::array<int, 3>> T(nt);
    std::vector<int> tri_line(nt);
    for (int t = 0; t < nt; ++t) {
        if (!next_line(in, line, lineno)) fail(lineno + 1, "missing triangle " + std::to_string(t));
        long long ijk[3];
        read_fields(line, lineno, ijk, 3, "'i j k'");
        for (int k = 0; k < 3; ++k) {
            if (ijk[k] < 0 || ijk[k] >= nv)
                fail(lineno, "triangle references missing vertex " + std::to_string(ijk[k]));
            T[t][k] = static_cast<int>(ijk[k]);
        }
        tri_line[t] = lineno;
    }
    if (next_line(in, line, lineno)) fail(lineno, "unexpected content after last triangle");

    Triangulation m;
    try {
        m = build_triangulation(std::move(V), std::move(T));
    } catch (const MeshError& e) {
        std::string msg = e.what();
        // attribute triangle errors to their line
        const std::string key = "triangle ";
        if (msg.rfind(key, 0) == 0) {
            int t = std::stoi(msg.substr(key.size()));
            if (t >= 0 && t < nt) fail(tri_line[t], msg);
        }
        throw MeshError("invalid mesh: " + msg);
    }
    if (ne != 0 && ne != m.num_edges())
        fail(count_line, "edge count " + std::to_string(ne) + " does not match derived " +
                             std::to_string(m.num_edges()));
    auto issues = validate(m);
    if (!issues.empty()) throw MeshError("invalid mesh: " + issues.front());
    return m;
}

Triangulation read_mesh(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw MeshError("cannot open mesh file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    try {
        return parse_mesh(ss.str());
    } catch (const MeshError& e) {
        throw MeshError(path + ": " + e.what());
    }
}

std::string format_mesh(const Triangulation& m) {
    std::string out = "mesh2d v1\n";
    out += std::to_string(m.num_vertices()) + " " + std::to_string(m.num_edges()) + " " +
           std::to_string(m.num_triangles()) + "\n";
    char buf[96];
    for (const auto& v : m.vertices) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x(), v.y());
        out += buf;
    }
    for (const auto& t : m.triangles) {
        std::snprintf(buf, sizeof buf, "%d %d %d\n", t[0], t[1], t[2]);
        out += buf;
    }
    return out;
}

void write_mesh(const Triangulation& m, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw MeshError("cannot write mesh file '" + path + "'");
    f << format_mesh(m);
    if (!f) throw MeshError("write failed for '" + path + "'");
}

}  // namespace maxlow
