#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"
#include "maxlow/constants.hpp"
#include "maxlow/solvers.hpp"

using namespace maxlow;

namespace {

// max v(y)^2 / ||grad v||^2 over mean-zero P1 v on omega_y, with the P1
// stiffness built from the cotangent formula.
double cotangent_c1(const Triangulation& m, int y) {
    std::vector<int> verts;
    for (int t : m.vertex_tris[y])
        for (int v : m.triangles[t]) verts.push_back(v);
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    auto idx = [&](int v) { return int(std::lower_bound(verts.begin(), verts.end(), v) - verts.begin()); };
    const int n = static_cast<int>(verts.size());
    Mat K = Mat::Zero(n, n);
    Vec w = Vec::Zero(n);
    for (int t : m.vertex_tris[y]) {
        const auto& tv = m.triangles[t];
        for (int k = 0; k < 3; ++k) {
            int a = tv[(k + 1) % 3], b = tv[(k + 2) % 3];
            Vec2 u = m.vertices[a] - m.vertices[tv[k]], v = m.vertices[b] - m.vertices[tv[k]];
            double cot = u.dot(v) / std::abs(u.x() * v.y() - u.y() * v.x());
            int i = idx(a), j = idx(b);
            K(i, j) -= 0.5 * cot;
            K(j, i) -= 0.5 * cot;
            K(i, i) += 0.5 * cot;
            K(j, j) += 0.5 * cot;
            w[idx(tv[k])] += m.area(t) / 3.0;
        }
    }
    Mat P = Eigen::FullPivLU<Mat>(Mat(w.transpose())).kernel();
    Vec e = Vec::Zero(n);
    e[idx(y)] = 1.0;
    Vec pe = P.transpose() * e;
    return pe.dot((P.transpose() * K * P).ldlt().solve(pe));
}

Triangulation right_triangle() { return build_triangulation({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}); }

}  // namespace

TEST_CASE("vertex constant on a single right triangle") {
    Triangulation m = right_triangle();
    // v = (1, -1/2, -1/2) is optimal: v(y)^2 / ||grad v||^2 = 4/9
    CHECK(c1_yT(m, 0, 0) == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
    // ||grad lambda_0||^2 = 1, so C_QT = sqrt(4/9)
    CHECK(c_QT(m, 0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK_THROWS_AS(c1_yT(generate_square(1), 0, 7), MeshError);
}

TEST_CASE("vertex constants agree with a cotangent-stiffness oracle") {
    for (const Triangulation& m : {generate_square(2), generate_lshape(1, Refinement::longest_edge)}) {
        for (int y = 0; y < m.num_vertices(); ++y) {
            double ref = cotangent_c1(m, y);
            CHECK(c1_yT(m, y, m.vertex_tris[y][0]) == doctest::Approx(ref).epsilon(1e-10));
        }
    }
    ConstantsReport r = compute_constants(generate_square(2));
    double best = 0.0;
    Triangulation m = generate_square(2);
    for (int y = 0; y < m.num_vertices(); ++y) best = std::max(best, cotangent_c1(m, y));
    CHECK(r.C1yT_max == doctest::Approx(best).epsilon(1e-10));
    CHECK(r.C1yT_table == doctest::Approx(std::sqrt(2.0 * best)).epsilon(1e-12));
}

TEST_CASE("patch Poincare bound is a lower bound for the unit square") {
    // On level 0 every element patch is the whole unit square, whose first
    // nonzero Neumann eigenvalue is pi^2.
    Triangulation m = generate_square(0);
    PoincarePatch p = poincare_patch(m, 0);
    CHECK(p.lambda_hat <= M_PI * M_PI);
    CHECK(p.lambda_hat >= 0.9 * M_PI * M_PI);
    CHECK(p.lambda_cr == doctest::Approx(M_PI * M_PI).epsilon(0.02));
    CHECK(p.diam == doctest::Approx(std::sqrt(2.0)));
    CHECK(p.bound == doctest::Approx(1.0 / std::sqrt(p.lambda_hat)));
    ConstantsOptions fine;
    fine.subrefinements = 4;
    PoincarePatch q = poincare_patch(m, 0, fine);
    CHECK(q.lambda_hat <= M_PI * M_PI);
    CHECK(q.lambda_hat > p.lambda_hat);
}

TEST_CASE("gradients lie in the kernel of the S1 functional") {
    Triangulation m = generate_lshape(1);
    for (int e = 0; e < m.num_edges(); ++e) {
        ZField z = z_E1(m, e);
        CHECK(z.div_residual < 1e-10);
        CHECK(z.orth_residual < 1e-10);
        Vec ell = c_S_functional(z);
        FeSpace s1 = make_space(z.patch_mesh, Family::S1), n0 = make_space(z.patch_mesh, Family::N0);
        SpMat Dg = discrete_gradient(s1, n0);
        Vec phi = seeded_vector(s1.ndof, 1000 + e);
        CHECK(std::abs(ell.dot(Dg * phi)) < 1e-10 * (1.0 + phi.norm()));
        // a field that is not a gradient sees the functional (own edge tangent)
        CHECK(ell.norm() > 1e-6);
    }
}

TEST_CASE("structured square constants are level independent") {
    ConstantsReport r2 = compute_constants(generate_square(2));
    ConstantsReport r3 = compute_constants(generate_square(3));
    CHECK(r2.C_OL == 13);
    CHECK(r3.C_OL == 13);
    CHECK(r2.C_QT == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    for (auto [a, b] : {std::pair{r2.tilde_c, r3.tilde_c}, {r2.C1yT_max, r3.C1yT_max}, {r2.C_S_max, r3.C_S_max},
                        {r2.c_M, r3.c_M}, {r2.C_M1, r3.C_M1}, {r2.C2_Curl_table, r3.C2_Curl_table}})
        CHECK(a == doctest::Approx(b).epsilon(1e-8));
    CHECK(r2.C1_Curl == doctest::Approx(std::sqrt(3.0)));
    CHECK(r2.C1_div_formula == doctest::Approx(r2.C_M1 + 3 * r2.C_QT + 3 * std::sqrt(r2.C_S_max)));
    CHECK(r2.C2_div == doctest::Approx(3 * std::sqrt(r2.C_S_max) * r2.c_M));
    CHECK(r2.C_M1 == doctest::Approx(c_M1(generate_square(2), r2.argmax_C_M1)));
    CHECK(r2.patch_classes < r2.patches);
}

TEST_CASE("constants are scale and numbering invariant") {
    Triangulation m = generate_lshape(1, Refinement::longest_edge);
    ConstantsReport a = compute_constants(m);
    ConstantsReport b = compute_constants(scaled(m, 3.7));
    std::vector<int> perm(m.num_vertices()), order(m.num_triangles());
    for (int i = 0; i < m.num_vertices(); ++i) perm[i] = m.num_vertices() - 1 - (i + 3) % m.num_vertices();
    for (int t = 0; t < m.num_triangles(); ++t) order[t] = m.num_triangles() - 1 - t;
    ConstantsReport c = compute_constants(permuted(m, perm, order));
    for (const ConstantsReport* o : {&b, &c}) {
        CHECK(o->tilde_c == doctest::Approx(a.tilde_c).epsilon(1e-8));
        CHECK(o->C1yT_max == doctest::Approx(a.C1yT_max).epsilon(1e-8));
        CHECK(o->C_QT == doctest::Approx(a.C_QT).epsilon(1e-8));
        CHECK(o->C_S_max == doctest::Approx(a.C_S_max).epsilon(1e-8));
        CHECK(o->c_M == doctest::Approx(a.c_M).epsilon(1e-8));
        CHECK(o->C_M1 == doctest::Approx(a.C_M1).epsilon(1e-8));
        CHECK(o->C_OL == a.C_OL);
    }
}

TEST_CASE("patch cache gives identical constants") {
    Triangulation m = generate_lshape(2);
    ConstantsOptions off;
    off.use_cache = false;
    ConstantsReport a = compute_constants(m), b = compute_constants(m, off);
    CHECK(a.tilde_c == doctest::Approx(b.tilde_c).epsilon(1e-12));
    CHECK(a.C1yT_max == doctest::Approx(b.C1yT_max).epsilon(1e-12));
    CHECK(a.C_S_max == doctest::Approx(b.C_S_max).epsilon(1e-12));
    CHECK(a.c_M == doctest::Approx(b.c_M).epsilon(1e-12));
    CHECK(a.C_M1 == doctest::Approx(b.C_M1).epsilon(1e-12));
    CHECK(a.patch_classes < b.patch_classes);
    ConstantsOptions par;
    par.threads = 3;
    ConstantsReport c = compute_constants(m, par);
    CHECK(c.C_S_max == a.C_S_max);
    CHECK(c.tilde_c == a.tilde_c);
    CHECK(c.C_M1 == a.C_M1);
}

TEST_CASE("congruent patches share a key") {
    Triangulation m = generate_square(3);
    // interior vertices away from the boundary all have congruent stars
    std::string k0;
    int interior = 0;
    for (int v = 0; v < m.num_vertices(); ++v) {
        Vec2 p = m.vertices[v];
        if (p.x() < 0.2 || p.x() > 0.8 || p.y() < 0.2 || p.y() > 0.8) continue;
        std::string k = canonical_patch_key(m, make_patch(m, PatchKind::vertex, v), {v});
        if (k0.empty()) k0 = k;
        CHECK(k == k0);
        ++interior;
    }
    CHECK(interior > 4);
    std::string corner = canonical_patch_key(m, make_patch(m, PatchKind::vertex, 0), {0});
    CHECK(corner != k0);
    Triangulation s = scaled(m, 0.25);
    CHECK(canonical_patch_key(s, make_patch(s, PatchKind::vertex, 40), {40}) ==
          canonical_patch_key(m, make_patch(m, PatchKind::vertex, 40), {40}));
}

TEST_CASE("quasi-interpolation stability holds with the computed constants") {
    Triangulation m = generate_square(2);
    ConstantsReport r = compute_constants(m);
    StabilityCheck s = pi_grad_stability_check(m, r.C1_Curl, r.C2_Curl, 50, 7);
    CHECK(s.samples == 50);
    CHECK(s.violations == 0);
    CHECK(s.worst_ratio <= 1.0);
}
