#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"
#include "maxlow/spaces.hpp"

using namespace maxlow;

namespace {

// closed form: integral of lambda_i lambda_j over T = area (1 + delta_ij) / 12
double ll(double area, int i, int j) { return area * (i == j ? 2.0 : 1.0) / 12.0; }

std::array<Vec2, 3> barycentric_gradients(const std::array<Vec2, 3>& p, double& area) {
    area = 0.5 * ((p[1] - p[0]).x() * (p[2] - p[0]).y() - (p[1] - p[0]).y() * (p[2] - p[0]).x());
    std::array<Vec2, 3> g;
    for (int k = 0; k < 3; ++k) {
        Vec2 e = p[(k + 2) % 3] - p[(k + 1) % 3];
        g[k] = Vec2(-e.y(), e.x()) / (2.0 * area);
    }
    return g;
}

Triangulation single(const std::array<Vec2, 3>& p) {
    return build_triangulation({p[0], p[1], p[2]}, {{0, 1, 2}});
}

}  // namespace

TEST_CASE("Whitney mass matches the closed form") {
    std::array<Vec2, 3> p{Vec2(0.1, -0.2), Vec2(1.3, 0.4), Vec2(0.2, 0.9)};
    Triangulation m = single(p);
    double area;
    auto g = barycentric_gradients(p, area);
    auto n = local_nedelec(m, 0);
    for (int r = 0; r < 3; ++r)
        for (int s = 0; s < 3; ++s) {
            auto [a, b] = n.ends[r];
            auto [c, d] = n.ends[s];
            double ref = ll(area, a, c) * g[b].dot(g[d]) - ll(area, a, d) * g[b].dot(g[c]) -
                         ll(area, b, c) * g[a].dot(g[d]) + ll(area, b, d) * g[a].dot(g[c]);
            CHECK(n.mass(r, s) == doctest::Approx(ref).epsilon(1e-13));
        }
    auto n6 = local_nedelec(m, 0, Quadrature::gauss6);
    CHECK((n.mass - n6.mass).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Whitney functions have unit tangential moments") {
    Triangulation m = generate_lshape(1);
    for (int t = 0; t < m.num_triangles(); ++t) {
        auto g = element_geometry(m, t);
        auto n = local_nedelec(m, t);
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 3; ++j) {
                int e = m.tri_edges[t][j];
                // psi_k . t_E is constant on E; evaluate at the midpoint of local edge j
                std::array<double, 3> lam{0.5, 0.5, 0.5};
                lam[j] = 0.0;
                double moment = eval_nedelec(g, n, k, lam).dot(m.tangent(e)) * m.edge_length(e);
                CHECK(moment == doctest::Approx(k == j ? 1.0 : 0.0).epsilon(1e-13));
            }
        double a = g.area;
        for (int k = 0; k < 3; ++k) {
            // rot of lambda_a grad lambda_b - lambda_b grad lambda_a is 2 grad_a x grad_b
            auto [la, lb] = n.ends[k];
            double cross = g.grad[la].x() * g.grad[lb].y() - g.grad[la].y() * g.grad[lb].x();
            CHECK(n.rot[k] == doctest::Approx(2.0 * cross));
            Vec2 integral = a / 3.0 * (g.grad[lb] - g.grad[la]);
            CHECK((n.integral[k] - integral).norm() < 1e-14);
        }
    }
}

TEST_CASE("RT0 functions have unit normal components") {
    Triangulation m = generate_square(2);
    for (int t = 0; t < m.num_triangles(); ++t) {
        auto g = element_geometry(m, t);
        auto r = local_rt0(m, t);
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 3; ++j) {
                std::array<double, 3> lam{0.5, 0.5, 0.5};
                lam[j] = 0.0;
                int e = m.tri_edges[t][j];
                double flux = eval_rt0(g, r, k, lam).dot(edge_normal(m, e));
                CHECK(flux == doctest::Approx(k == j ? 1.0 : 0.0).epsilon(1e-13));
            }
        auto r6 = local_rt0(m, t, Quadrature::gauss6);
        CHECK((r.mass - r6.mass).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("space dimensions") {
    Triangulation m = generate_square(2);
    int nbv = 0, nbe = 0;
    for (char b : m.boundary_vertex) nbv += b;
    for (char b : m.boundary_edge) nbe += b;
    CHECK(make_space(m, Family::S1).ndof == m.num_vertices());
    CHECK(make_space(m, Family::S1_zero).ndof == m.num_vertices() - nbv);
    CHECK(make_space(m, Family::N0).ndof == m.num_edges());
    CHECK(make_space(m, Family::N0_zero).ndof == m.num_edges() - nbe);
    CHECK(make_space(m, Family::RT0_zero).ndof == m.num_edges() - nbe);
    CHECK(make_space(m, Family::CR).ndof == m.num_edges());
    CHECK(make_space(m, Family::P0vec).ndof == 2 * m.num_triangles());
}

TEST_CASE("scalar matrices reproduce polynomial integrals") {
    Triangulation m = generate_lshape(2);
    FeSpace s1 = make_space(m, Family::S1), cr = make_space(m, Family::CR);
    SpMat M = assemble_mass(s1), K = assemble_stiffness_grad(s1);
    Vec one = Vec::Ones(s1.ndof), x(s1.ndof);
    for (int v = 0; v < m.num_vertices(); ++v) x[v] = m.vertices[v].x();
    CHECK(one.dot(M * one) == doctest::Approx(3.0));
    CHECK((K * one).norm() < 1e-12);
    CHECK(x.dot(K * x) == doctest::Approx(3.0));                      // |grad x|^2 over the domain
    CHECK(s1_integrals(s1).sum() == doctest::Approx(3.0));
    // CR: x interpolated at midpoints is exact
    Vec xc(cr.ndof), oc = Vec::Ones(cr.ndof);
    for (int e = 0; e < m.num_edges(); ++e) xc[e] = 0.5 * (m.vertices[m.edges[e][0]].x() + m.vertices[m.edges[e][1]].x());
    CHECK(xc.dot(assemble_stiffness_grad(cr) * xc) == doctest::Approx(3.0));
    CHECK(oc.dot(assemble_mass(cr) * oc) == doctest::Approx(3.0));
    SpMat Mcr = assemble_mass(cr);
    double offdiag = 0.0;
    for (int k = 0; k < Mcr.outerSize(); ++k)
        for (SpMat::InnerIterator it(Mcr, k); it; ++it)
            if (it.row() != it.col()) offdiag = std::max(offdiag, std::abs(it.value()));
    CHECK(offdiag < 1e-15);
}

TEST_CASE("discrete gradient is exact on the complex") {
    Triangulation m = generate_lshape(2);
    FeSpace s1 = make_space(m, Family::S1), n0 = make_space(m, Family::N0);
    SpMat Dg = discrete_gradient(s1, n0);
    Vec phi(s1.ndof);
    for (int v = 0; v < m.num_vertices(); ++v) phi[v] = std::sin(m.vertices[v].x()) + m.vertices[v].y();
    Vec u = Dg * phi;
    CHECK((assemble_rotrot(n0) * u).norm() < 1e-12);
    // gradient coupling equals the N0 mass applied to the discrete gradient
    SpMat F = assemble_grad_coupling(s1, n0);
    SpMat Mn = assemble_mass(n0);
    CHECK((Mat(F) - Mat(SpMat(Dg.transpose()) * Mn)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("curl coupling and normal jumps") {
    Triangulation m = generate_square(2);
    FeSpace s1 = make_space(m, Family::S1), p0 = make_space(m, Family::P0vec);
    SpMat G = assemble_curl_coupling(s1, p0);
    SpMat C = assemble_normal_jump(p0);
    Vec phi = Vec::Random(s1.ndof);
    // Curl of a continuous function has continuous normal components
    Vec M_inv_G = Vec(G * phi);
    for (int t = 0; t < m.num_triangles(); ++t) M_inv_G.segment(2 * t, 2) /= m.area(t);
    CHECK((SpMat(C.transpose()) * M_inv_G).norm() < 1e-12);
    // a constant field is normal-continuous, a field with a jump is not
    Vec c(p0.ndof);
    for (int t = 0; t < m.num_triangles(); ++t) c.segment(2 * t, 2) = Vec2(0.3, -1.1);
    CHECK((SpMat(C.transpose()) * c).norm() < 1e-13);
    c[0] += 1.0;
    CHECK((SpMat(C.transpose()) * c).norm() > 0.1);
}

TEST_CASE("Nedelec-RT0 coupling is integrated exactly") {
    std::array<Vec2, 3> p{Vec2(0, 0), Vec2(1, 0.2), Vec2(0.3, 0.8)};
    Triangulation m = single(p);
    FeSpace n0 = make_space(m, Family::N0), rt = make_space(m, Family::RT0);
    SpMat X = assemble_nedelec_rt0(n0, rt), X6 = assemble_nedelec_rt0(n0, rt, Quadrature::gauss6);
    CHECK((Mat(X) - Mat(X6)).cwiseAbs().maxCoeff() < 1e-14);
    SpMat Mrt = assemble_mass(rt);
    CHECK(Mat(Mrt).isApprox(Mat(Mrt).transpose()));
    Eigen::SelfAdjointEigenSolver<Mat> es{Mat(Mrt)};
    CHECK(es.eigenvalues().minCoeff() > 0);
}

TEST_CASE("basis norms") {
    Triangulation m = generate_square(1);
    for (int t = 0; t < m.num_triangles(); ++t) {
        auto g = element_geometry(m, t);
        for (int k = 0; k < 3; ++k) {
            int y = m.triangles[t][k];
            auto b = basis_norms(m, t, Entity::vertex, y);
            CHECK(b.hat_l2 * b.hat_l2 == doctest::Approx(g.area / 6.0));
            CHECK(b.hat_grad_l2 * b.hat_grad_l2 == doctest::Approx(g.area * g.grad[k].squaredNorm()));
            int e = m.tri_edges[t][k];
            auto be = basis_norms(m, t, Entity::edge, e);
            CHECK(be.nedelec_l2 * be.nedelec_l2 == doctest::Approx(local_nedelec(m, t).mass(k, k)));
            CHECK(nedelec_norm2(m, t, e) == doctest::Approx(local_nedelec(m, t).mass(k, k)));
        }
    }
    CHECK_THROWS_AS(basis_norms(m, 0, Entity::vertex, 99), MeshError);
}
