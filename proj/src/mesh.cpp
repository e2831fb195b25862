#include "maxlow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace maxlow {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

std::string tri_str(int t) { return "triangle " + std::to_string(t); }

}  // namespace

double Triangulation::area(int t) const {
    const auto& v = triangles[t];
    return signed_area(vertices[v[0]], vertices[v[1]], vertices[v[2]]);
}

double Triangulation::diameter(int t) const {
    const auto& v = triangles[t];
    double h = 0.0;
    for (int i = 0; i < 3; ++i)
        h = std::max(h, (vertices[v[i]] - vertices[v[(i + 1) % 3]]).norm());
    return h;
}

double Triangulation::h_max() const {
    double h = 0.0;
    for (int t = 0; t < num_triangles(); ++t) h = std::max(h, diameter(t));
    return h;
}

double Triangulation::total_area() const {
    double a = 0.0;
    for (int t = 0; t < num_triangles(); ++t) a += area(t);
    return a;
}

Vec2 Triangulation::tangent(int e) const {
    Vec2 d = vertices[edges[e][1]] - vertices[edges[e][0]];
    return d / d.norm();
}

double Triangulation::edge_length(int e) const {
    return (vertices[edges[e][1]] - vertices[edges[e][0]]).norm();
}

int Triangulation::local_vertex(int t, int v) const {
    for (int i = 0; i < 3; ++i)
        if (triangles[t][i] == v) return i;
    return -1;
}

int Triangulation::find_edge(int a, int b) const {
    if (a > b) std::swap(a, b);
    std::array<int, 2> key{a, b};
    auto it = std::lower_bound(edges.begin(), edges.end(), key);
    if (it == edges.end() || *it != key) return -1;
    return static_cast<int>(it - edges.begin());
}

Triangulation build_triangulation(std::vector<Vec2> vertices,
                                  std::vector<std::array<int, 3>> triangles) {
    Triangulation m;
    m.vertices = std::move(vertices);
    m.triangles = std::move(triangles);
    const int nv = m.num_vertices();
    const int nt = m.num_triangles();
    if (nt == 0) throw MeshError("mesh has no triangles");

    std::set<std::array<int, 3>> seen;
    for (int t = 0; t < nt; ++t) {
        const auto& v = m.triangles[t];
        for (int i = 0; i < 3; ++i)
            if (v[i] < 0 || v[i] >= nv)
                throw MeshError(tri_str(t) + " references missing vertex " + std::to_string(v[i]));
        if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2])
            throw MeshError(tri_str(t) + " has repeated vertices");
        const double a = m.area(t);
        const double scale = m.diameter(t);
        if (!(a > 1e-14 * scale * scale))
            throw MeshError(tri_str(t) + (a < 0 ? " is clockwise" : " is degenerate"));
        auto key = v;
        std::sort(key.begin(), key.end());
        if (!seen.insert(key).second) throw MeshError(tri_str(t) + " is duplicated");
    }

    std::vector<std::array<int, 2>> all;
    all.reserve(3 * nt);
    for (const auto& v : m.triangles)
        for (int i = 0; i < 3; ++i) {
            int a = v[(i + 1) % 3], b = v[(i + 2) % 3];
            all.push_back({std::min(a, b), std::max(a, b)});
        }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    m.edges = std::move(all);
    const int ne = m.num_edges();

    m.tri_edges.resize(nt);
    m.tri_edge_sign.resize(nt);
    m.edge_tris.assign(ne, {-1, -1});
    std::vector<int> count(ne, 0);
    for (int t = 0; t < nt; ++t) {
        const auto& v = m.triangles[t];
        for (int i = 0; i < 3; ++i) {
            int a = v[(i + 1) % 3], b = v[(i + 2) % 3];
            int e = m.find_edge(a, b);
            m.tri_edges[t][i] = e;
            m.tri_edge_sign[t][i] = a < b ? 1 : -1;
            if (count[e] >= 2)
                throw MeshError("edge (" + std::to_string(m.edges[e][0]) + "," +
                                std::to_string(m.edges[e][1]) + ") shared by more than two triangles");
            m.edge_tris[e][count[e]++] = t;
        }
    }
    for (int e = 0; e < ne; ++e) {
        if (count[e] == 2) {
            int t0 = m.edge_tris[e][0], t1 = m.edge_tris[e][1];
            int l0 = -1, l1 = -1;
            for (int i = 0; i < 3; ++i) {
                if (m.tri_edges[t0][i] == e) l0 = i;
                if (m.tri_edges[t1][i] == e) l1 = i;
            }
            if (m.tri_edge_sign[t0][l0] == m.tri_edge_sign[t1][l1])
                throw MeshError("inconsistent orientation across edge (" +
                                std::to_string(m.edges[e][0]) + "," + std::to_string(m.edges[e][1]) + ")");
        }
    }

    m.boundary_edge.assign(ne, 0);
    m.boundary_vertex.assign(nv, 0);
    std::vector<int> bcount(nv, 0);
    for (int e = 0; e < ne; ++e)
        if (count[e] == 1) {
            m.boundary_edge[e] = 1;
            for (int k = 0; k < 2; ++k) {
                m.boundary_vertex[m.edges[e][k]] = 1;
                ++bcount[m.edges[e][k]];
            }
        }

    m.vertex_tris.assign(nv, {});
    for (int t = 0; t < nt; ++t)
        for (int v : m.triangles[t]) m.vertex_tris[v].push_back(t);
    for (int v = 0; v < nv; ++v) {
        if (m.vertex_tris[v].empty()) throw MeshError("vertex " + std::to_string(v) + " is unused");
        if (bcount[v] != 0 && bcount[v] != 2)
            throw MeshError("vertex " + std::to_string(v) + " is non-manifold");
        // the triangles around v must form one fan
        const auto& fan = m.vertex_tris[v];
        std::vector<char> reached(fan.size(), 0);
        std::vector<int> stack{0};
        reached[0] = 1;
        while (!stack.empty()) {
            int i = stack.back();
            stack.pop_back();
            int t = fan[i];
            for (int k = 0; k < 3; ++k) {
                int e = m.tri_edges[t][k];
                if (m.edges[e][0] != v && m.edges[e][1] != v) continue;
                for (int s : m.edge_tris[e]) {
                    if (s < 0) continue;
                    auto it = std::lower_bound(fan.begin(), fan.end(), s);
                    auto j = static_cast<size_t>(it - fan.begin());
                    if (!reached[j]) {
                        reached[j] = 1;
                        stack.push_back(static_cast<int>(j));
                    }
                }
            }
        }
        if (std::find(reached.begin(), reached.end(), 0) != reached.end())
            throw MeshError("vertex " + std::to_string(v) + " is non-manifold");
    }
    return m;
}

std::vector<std::string> validate(const Triangulation& m) {
    std::vector<std::string> issues;
    const int nv = m.num_vertices(), ne = m.num_edges(), nt = m.num_triangles();
    if (nv - ne + nt != 1)
        issues.push_back("Euler characteristic V-E+T = " + std::to_string(nv - ne + nt) + ", expected 1");
    for (int t = 0; t < nt; ++t)
        if (!(m.area(t) > 0)) issues.push_back(tri_str(t) + " not counterclockwise");
    for (int e = 0; e < ne; ++e) {
        int shared = (m.edge_tris[e][0] >= 0) + (m.edge_tris[e][1] >= 0);
        if (m.boundary_edge[e] ? shared != 1 : shared != 2)
            issues.push_back("edge " + std::to_string(e) + " has wrong triangle count");
        if (m.edges[e][0] >= m.edges[e][1])
            issues.push_back("edge " + std::to_string(e) + " not ordered low to high");
    }
    for (int t = 0; t < nt; ++t)
        for (int i = 0; i < 3; ++i) {
            int a = m.triangles[t][(i + 1) % 3], b = m.triangles[t][(i + 2) % 3];
            int e = m.tri_edges[t][i];
            if (e < 0 || e >= ne || m.edges[e] != std::array<int, 2>{std::min(a, b), std::max(a, b)})
                issues.push_back(tri_str(t) + " edge table inconsistent");
            else if (m.tri_edge_sign[t][i] != (a < b ? 1 : -1))
                issues.push_back(tri_str(t) + " edge sign inconsistent");
        }
    double a0 = 0.0;
    for (int t = 0; t < nt; ++t) a0 += std::abs(m.area(t));
    if (std::abs(a0 - m.total_area()) > 1e-12 * a0) issues.push_back("signed and unsigned area differ");
    return issues;
}

namespace {

Triangulation split(const Triangulation& m, bool longest) {
    const int nv = m.num_vertices();
    std::vector<Vec2> V = m.vertices;
    V.reserve(nv + m.num_edges());
    for (const auto& e : m.edges) V.push_back(0.5 * (m.vertices[e[0]] + m.vertices[e[1]]));
    auto mid = [&](int a, int b) { return nv + m.find_edge(a, b); };
    std::vector<std::array<int, 3>> T;
    T.reserve(4 * m.num_triangles());
    for (int t = 0; t < m.num_triangles(); ++t) {
        const auto& v = m.triangles[t];
        if (!longest) {
            int a = v[0], b = v[1], c = v[2];
            int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
            T.push_back({a, ab, ca});
            T.push_back({ab, b, bc});
            T.push_back({ca, bc, c});
            T.push_back({ab, bc, ca});
        } else {
            int i = 0;
            double best = -1.0;
            for (int k = 0; k < 3; ++k) {
                double len = (m.vertices[v[(k + 1) % 3]] - m.vertices[v[(k + 2) % 3]]).norm();
                if (len > best * (1 + 1e-12)) {
                    best = len;
                    i = k;
                }
            }
            int c = v[i], a = v[(i + 1) % 3], b = v[(i + 2) % 3];
            int mm = mid(a, b), ca = mid(c, a), bc = mid(b, c);
            T.push_back({a, mm, ca});
            T.push_back({mm, c, ca});
            T.push_back({mm, b, bc});
            T.push_back({mm, bc, c});
        }
    }
    return build_triangulation(std::move(V), std::move(T));
}

}  // namespace

Triangulation red_refine(const Triangulation& mesh) { return split(mesh, false); }
Triangulation longest_edge_refine(const Triangulation& mesh) { return split(mesh, true); }

Triangulation refine(const Triangulation& mesh, Refinement kind) {
    return kind == Refinement::red ? red_refine(mesh) : longest_edge_refine(mesh);
}

Triangulation square_level0() {
    return build_triangulation({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}});
}

Triangulation lshape_level0() {
    return build_triangulation(
        {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}},
        {{0, 1, 2}, {0, 2, 3}, {3, 4, 5}, {0, 3, 5}, {0, 5, 6}, {0, 6, 7}});
}

Triangulation generate_square(int levels, Refinement kind) {
    if (levels < 0) throw MeshError("levels must be nonnegative");
    Triangulation m = square_level0();
    for (int l = 0; l < levels; ++l) m = refine(m, kind);
    return m;
}

Triangulation generate_lshape(int levels, Refinement kind) {
    if (levels < 0) throw MeshError("levels must be nonnegative");
    Triangulation m = lshape_level0();
    for (int l = 0; l < levels; ++l) m = refine(m, kind);
    return m;
}

Patch make_patch(const Triangulation& m, PatchKind kind, int anchor) {
    Patch p;
    p.kind = kind;
    p.anchor = anchor;
    std::set<int> tris;
    auto add_vertex = [&](int v) { tris.insert(m.vertex_tris[v].begin(), m.vertex_tris[v].end()); };
    switch (kind) {
        case PatchKind::element:
            if (anchor < 0 || anchor >= m.num_triangles())
                throw MeshError("invalid triangle index " + std::to_string(anchor));
            for (int v : m.triangles[anchor]) add_vertex(v);
            break;
        case PatchKind::vertex:
            if (anchor < 0 || anchor >= m.num_vertices())
                throw MeshError("invalid vertex index " + std::to_string(anchor));
            add_vertex(anchor);
            break;
        case PatchKind::extended_edge:
            if (anchor < 0 || anchor >= m.num_edges())
                throw MeshError("invalid edge index " + std::to_string(anchor));
            add_vertex(m.edges[anchor][0]);
            add_vertex(m.edges[anchor][1]);
            break;
    }
    p.triangles.assign(tris.begin(), tris.end());
    std::set<int> verts, edges;
    for (int t : p.triangles)
        for (int i = 0; i < 3; ++i) {
            verts.insert(m.triangles[t][i]);
            edges.insert(m.tri_edges[t][i]);
        }
    p.vertices.assign(verts.begin(), verts.end());
    p.edges.assign(edges.begin(), edges.end());
    for (size_t i = 0; i < p.vertices.size(); ++i)
        for (size_t j = 0; j < i; ++j)
            p.diameter = std::max(p.diameter, (m.vertices[p.vertices[i]] - m.vertices[p.vertices[j]]).norm());
    return p;
}

Triangulation submesh(const Triangulation& m, const Patch& p) {
    std::vector<Vec2> V;
    V.reserve(p.vertices.size());
    for (int v : p.vertices) V.push_back(m.vertices[v]);
    auto local = [&](int v) {
        return static_cast<int>(std::lower_bound(p.vertices.begin(), p.vertices.end(), v) - p.vertices.begin());
    };
    std::vector<std::array<int, 3>> T;
    T.reserve(p.triangles.size());
    for (int t : p.triangles) {
        const auto& v = m.triangles[t];
        T.push_back({local(v[0]), local(v[1]), local(v[2])});
    }
    return build_triangulation(std::move(V), std::move(T));
}

int overlap_constant(const Triangulation& m) {
    // T lies in the closure of omega_K exactly when T is a member of omega_K
    // (conforming meshes), and membership is symmetric.
    int best = 0;
    std::vector<int> mark(m.num_triangles(), -1);
    for (int t = 0; t < m.num_triangles(); ++t) {
        int n = 0;
        for (int v : m.triangles[t])
            for (int k : m.vertex_tris[v])
                if (mark[k] != t) {
                    mark[k] = t;
                    ++n;
                }
        best = std::max(best, n);
    }
    return best;
}

Triangulation scaled(const Triangulation& mesh, double s) {
    std::vector<Vec2> V = mesh.vertices;
    for (auto& v : V) v *= s;
    return build_triangulation(std::move(V), mesh.triangles);
}

Triangulation permuted(const Triangulation& mesh, const std::vector<int>& perm,
                       const std::vector<int>& tri_order) {
    std::vector<Vec2> V(mesh.vertices.size());
    for (size_t i = 0; i < perm.size(); ++i) V[perm[i]] = mesh.vertices[i];
    std::vector<std::array<int, 3>> T;
    T.reserve(tri_order.size());
    for (int t : tri_order) {
        const auto& v = mesh.triangles[t];
        T.push_back({perm[v[0]], perm[v[1]], perm[v[2]]});
    }
    return build_triangulation(std::move(V), std::move(T));
}

}  // namespace maxlow
