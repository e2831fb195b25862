#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "maxlow/mesh.hpp"

using namespace maxlow;

namespace {

// T subset of closure(omega_K) iff T shares a vertex with K (conforming meshes)
int brute_force_overlap(const Triangulation& m) {
    int best = 0;
    for (int t = 0; t < m.num_triangles(); ++t) {
        int c = 0;
        for (int k = 0; k < m.num_triangles(); ++k) {
            bool share = false;
            for (int a : m.triangles[t])
                for (int b : m.triangles[k]) share = share || a == b;
            c += share;
        }
        best = std::max(best, c);
    }
    return best;
}

}  // namespace

TEST_CASE("square meshes have the expected entity counts") {
    for (int l = 0; l <= 4; ++l) {
        Triangulation m = generate_square(l);
        const int n = 1 << l;
        CHECK(m.num_vertices() == (n + 1) * (n + 1));
        CHECK(m.num_triangles() == 2 * n * n);
        CHECK(m.num_vertices() - m.num_edges() + m.num_triangles() == 1);
        CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(m.h_max() == doctest::Approx(std::sqrt(2.0) / n).epsilon(1e-14));
        CHECK(validate(m).empty());
    }
}

TEST_CASE("L-shape meshes under both refinements") {
    for (auto kind : {Refinement::red, Refinement::longest_edge}) {
        double h_prev = 1e9;
        for (int l = 0; l <= 3; ++l) {
            Triangulation m = generate_lshape(l, kind);
            CHECK(validate(m).empty());
            CHECK(m.total_area() == doctest::Approx(3.0).epsilon(1e-13));
            CHECK(m.num_vertices() - m.num_edges() + m.num_triangles() == 1);
            CHECK(m.h_max() < h_prev);
            h_prev = m.h_max();
        }
    }
    Triangulation m0 = generate_lshape(0);
    Triangulation m1 = generate_lshape(1);
    CHECK(m1.num_triangles() == 4 * m0.num_triangles());
    CHECK(m1.num_vertices() == m0.num_vertices() + m0.num_edges());
}

TEST_CASE("red refinement children are congruent and ordered by parent") {
    Triangulation m = generate_lshape(1);
    Triangulation r = red_refine(m);
    for (int t = 0; t < m.num_triangles(); ++t)
        for (int c = 0; c < 4; ++c) {
            CHECK(r.area(4 * t + c) == doctest::Approx(m.area(t) / 4).epsilon(1e-13));
            CHECK(r.diameter(4 * t + c) == doctest::Approx(m.diameter(t) / 2).epsilon(1e-13));
            Vec2 cen = Vec2::Zero();
            for (int v : r.triangles[4 * t + c]) cen += r.vertices[v] / 3.0;
            // child centroid lies inside the parent
            const auto& p = m.triangles[t];
            for (int k = 0; k < 3; ++k) {
                Vec2 a = m.vertices[p[k]], b = m.vertices[p[(k + 1) % 3]];
                double cross = (b - a).x() * (cen - a).y() - (b - a).y() * (cen - a).x();
                CHECK(cross > 0);
            }
        }
}

TEST_CASE("longest-edge refinement halves the area and stays conforming") {
    Triangulation m = generate_square(1, Refinement::longest_edge);
    Triangulation r = longest_edge_refine(m);
    CHECK(r.num_triangles() == 4 * m.num_triangles());
    CHECK(validate(r).empty());
    for (int t = 0; t < r.num_triangles(); ++t) CHECK(r.area(t) == doctest::Approx(m.area(t / 4) / 4).epsilon(1e-13));
}

TEST_CASE("edge tables are consistent") {
    Triangulation m = generate_lshape(2);
    for (int e = 0; e < m.num_edges(); ++e) {
        CHECK(m.edges[e][0] < m.edges[e][1]);
        CHECK(m.find_edge(m.edges[e][0], m.edges[e][1]) == e);
        CHECK(m.find_edge(m.edges[e][1], m.edges[e][0]) == e);
        CHECK((m.edge_tris[e][1] < 0) == static_cast<bool>(m.boundary_edge[e]));
        CHECK(m.tangent(e).norm() == doctest::Approx(1.0));
    }
    for (int t = 0; t < m.num_triangles(); ++t)
        for (int k = 0; k < 3; ++k) {
            int e = m.tri_edges[t][k];
            int a = m.triangles[t][(k + 1) % 3], b = m.triangles[t][(k + 2) % 3];
            CHECK(m.find_edge(a, b) == e);
            CHECK(m.tri_edge_sign[t][k] == (a < b ? 1 : -1));
        }
    int nb = 0;
    for (int e = 0; e < m.num_edges(); ++e) nb += m.boundary_edge[e];
    CHECK(nb == 8 * 4);  // perimeter 8, boundary edge length 1/4
}

TEST_CASE("validator and builder reject broken meshes") {
    std::vector<Vec2> v{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    CHECK_THROWS_WITH_AS(build_triangulation(v, {{0, 2, 1}}), doctest::Contains("clockwise"), MeshError);
    CHECK_THROWS_WITH_AS(build_triangulation(v, {{0, 1, 1}}), doctest::Contains("repeated"), MeshError);
    CHECK_THROWS_WITH_AS(build_triangulation(v, {{0, 1, 7}}), doctest::Contains("missing vertex"), MeshError);
    CHECK_THROWS_WITH_AS(build_triangulation(v, {{0, 1, 2}}), doctest::Contains("unused"), MeshError);
    CHECK_THROWS_WITH_AS(build_triangulation({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}), doctest::Contains("degenerate"),
                         MeshError);
    CHECK_THROWS_WITH_AS(build_triangulation(v, {{0, 1, 3}, {0, 3, 2}, {1, 3, 0}}), doctest::Contains("duplicated"),
                         MeshError);
    // two triangles touching at a single vertex
    std::vector<Vec2> bow{{0, 0}, {1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    CHECK_THROWS_WITH_AS(build_triangulation(bow, {{0, 1, 2}, {0, 3, 4}}), doctest::Contains("non-manifold"),
                         MeshError);
    CHECK_NOTHROW(build_triangulation(v, {{0, 1, 3}, {0, 3, 2}}));
}

TEST_CASE("patches and overlap constant") {
    Triangulation m = generate_square(3);
    CHECK(overlap_constant(m) == 13);
    CHECK(overlap_constant(m) == brute_force_overlap(m));
    for (int l = 1; l <= 2; ++l) {
        Triangulation s = generate_lshape(l, Refinement::longest_edge);
        CHECK(overlap_constant(s) == brute_force_overlap(s));
    }
    int max_omega = 0;
    for (int t = 0; t < m.num_triangles(); ++t) {
        Patch p = make_patch(m, PatchKind::element, t);
        max_omega = std::max(max_omega, static_cast<int>(p.triangles.size()));
        CHECK(std::is_sorted(p.vertices.begin(), p.vertices.end()));
        CHECK(std::binary_search(p.triangles.begin(), p.triangles.end(), t));
    }
    CHECK(max_omega == 13);
    for (int v = 0; v < m.num_vertices(); ++v) {
        Patch p = make_patch(m, PatchKind::vertex, v);
        CHECK(p.triangles == m.vertex_tris[v]);
    }
    for (int e = 0; e < m.num_edges(); ++e) {
        Patch p = make_patch(m, PatchKind::extended_edge, e);
        std::set<int> u(m.vertex_tris[m.edges[e][0]].begin(), m.vertex_tris[m.edges[e][0]].end());
        u.insert(m.vertex_tris[m.edges[e][1]].begin(), m.vertex_tris[m.edges[e][1]].end());
        CHECK(std::vector<int>(u.begin(), u.end()) == p.triangles);
    }
    CHECK_THROWS_AS(make_patch(m, PatchKind::element, -1), MeshError);
}

TEST_CASE("submesh keeps geometry and edge orientation") {
    Triangulation m = generate_lshape(2);
    for (int e = 0; e < m.num_edges(); e += 7) {
        Patch p = make_patch(m, PatchKind::extended_edge, e);
        Triangulation s = submesh(m, p);
        CHECK(validate(s).empty());
        double a = 0.0;
        for (int t : p.triangles) a += m.area(t);
        CHECK(s.total_area() == doctest::Approx(a).epsilon(1e-14));
        for (int le = 0; le < s.num_edges(); ++le) {
            int g = m.find_edge(p.vertices[s.edges[le][0]], p.vertices[s.edges[le][1]]);
            REQUIRE(g >= 0);
            CHECK((m.tangent(g) - s.tangent(le)).norm() < 1e-15);
        }
    }
}

TEST_CASE("scaling and renumbering preserve the mesh") {
    Triangulation m = generate_lshape(1);
    Triangulation s = scaled(m, 2.5);
    CHECK(s.total_area() == doctest::Approx(m.total_area() * 6.25));
    CHECK(overlap_constant(s) == overlap_constant(m));
    std::vector<int> perm(m.num_vertices());
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::vector<int> order(m.num_triangles());
    std::iota(order.begin(), order.end(), 0);
    std::rotate(order.begin(), order.begin() + 3, order.end());
    Triangulation p = permuted(m, perm, order);
    CHECK(validate(p).empty());
    CHECK(p.num_edges() == m.num_edges());
    CHECK(p.total_area() == doctest::Approx(m.total_area()));
    CHECK(p.h_max() == doctest::Approx(m.h_max()));
}
