#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace maxlow {

using Vec2 = Eigen::Vector2d;

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Conforming 2D triangulation. Edges are numbered in lexicographic order of
// (lo, hi) vertex pairs; the tangent of edge e points from edges[e][0] to
// edges[e][1]. Local edge i of a triangle is the edge opposite local vertex i.
struct Triangulation {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::array<int, 2>> edges;
    std::vector<std::array<int, 3>> tri_edges;
    std::vector<std::array<int, 3>> tri_edge_sign;  // +1 if local ccw direction matches t_E
    std::vector<std::array<int, 2>> edge_tris;      // second entry -1 on the boundary
    std::vector<char> boundary_vertex;
    std::vector<char> boundary_edge;
    std::vector<std::vector<int>> vertex_tris;      // ascending

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }

    double area(int t) const;
    double diameter(int t) const;  // h_T
    double h_max() const;
    double total_area() const;
    Vec2 tangent(int e) const;     // unit t_E
    double edge_length(int e) const;
    int local_vertex(int t, int v) const;  // -1 if v not in t
    int find_edge(int a, int b) const;     // -1 if absent
};

// Builds all derived connectivity and checks orientation and manifoldness.
// Throws MeshError on invalid input.
Triangulation build_triangulation(std::vector<Vec2> vertices,
                                  std::vector<std::array<int, 3>> triangles);

// Structural problems found by the validator (empty if the mesh is valid).
// Checks Euler V - E + T = 1, orientation, edge sharing, vertex fans,
// and consistency of the derived tables.
std::vector<std::string> validate(const Triangulation& mesh);

enum class Refinement { red, longest_edge };

Triangulation red_refine(const Triangulation& mesh);
Triangulation longest_edge_refine(const Triangulation& mesh);
Triangulation refine(const Triangulation& mesh, Refinement kind);

Triangulation square_level0();
Triangulation lshape_level0();
Triangulation generate_square(int levels, Refinement kind = Refinement::red);
Triangulation generate_lshape(int levels, Refinement kind = Refinement::red);

enum class PatchKind { element, vertex, extended_edge };

struct Patch {
    PatchKind kind = PatchKind::element;
    int anchor = -1;
    std::vector<int> triangles;  // ascending global indices
    std::vector<int> vertices;   // local -> global, ascending
    std::vector<int> edges;      // local -> global, ascending
    double diameter = 0.0;
};

// omega_T: triangles sharing at least a vertex with T; omega_y: triangles
// containing y; omega_E^e: omega_{y1} union omega_{y2}.
Patch make_patch(const Triangulation& mesh, PatchKind kind, int anchor);

// The patch as a standalone mesh. Local vertex i is patch.vertices[i], and
// since the local order is increasing, edge orientations are inherited.
Triangulation submesh(const Triangulation& mesh, const Patch& patch);

// max_T card{K : T subset of closure(omega_K)}
int overlap_constant(const Triangulation& mesh);

Triangulation read_mesh(const std::string& path);
Triangulation parse_mesh(const std::string& text);
void write_mesh(const Triangulation& mesh, const std::string& path);
std::string format_mesh(const Triangulation& mesh);

// Coordinates mapped by (x, y) -> s * (x, y); used by scale-invariance checks.
Triangulation scaled(const Triangulation& mesh, double s);

// Same geometry with vertices renumbered by perm (new index of old vertex i is
// perm[i]) and triangles listed in the order given by tri_order.
Triangulation permuted(const Triangulation& mesh, const std::vector<int>& perm,
                       const std::vector<int>& tri_order);

}  // namespace maxlow
