#include "maxlow/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "maxlow/log.hpp"

namespace maxlow {

KappaProblem::KappaProblem(const Triangulation& mesh, const KappaOptions& opts) : mesh_(mesh) {
    n0_ = make_space(mesh, Family::N0_zero);
    s1_ = make_space(mesh, Family::S1);
    s1z_ = make_space(mesh, Family::S1_zero);
    p0_ = make_space(mesh, Family::P0vec);
    if (n0_.ndof == 0) throw SolverError("mesh has no interior edges");

    D = assemble_rotrot(n0_);
    F = assemble_grad_coupling(s1z_, n0_);
    B = assemble_nedelec_load(n0_, p0_);
    A = assemble_mass(s1_);
    // (Curl sigma_h, phi_h) = -(f_h, phi_h) on ker C^T
    G = -assemble_curl_coupling(s1_, p0_);
    if (opts.flip_curl_sign) G = -G;
    C = assemble_normal_jump(p0_);
    Ct = C.transpose();
    M = assemble_mass(p0_);

    L = Factorization(s1z_.ndof > 0 ? saddle(D, F) : D);
    const int nv = s1_.ndof, np = p0_.ndof, nj = static_cast<int>(C.cols());
    K = Factorization(block_matrix({nv, np, nj}, {nv, np, nj},
                                   {{0, 0, &A}, {0, 1, &G, -1.0, true}, {1, 0, &G}, {1, 2, &C}, {2, 1, &C, 1.0, true}}));
}

KappaProblem::Solution KappaProblem::solve(const Vec& f) const {
    const int ne = n0_.ndof, nv0 = s1z_.ndof;
    const int nv = s1_.ndof, np = p0_.ndof, nj = static_cast<int>(C.cols());
    if (f.size() != np) throw std::invalid_argument("load has the wrong size");
    Solution s;
    Vec r1 = Vec::Zero(ne + nv0);
    r1.head(ne) = B * f;
    Vec w = L.solve(r1);
    s.u = w.head(ne);
    s.p = w.tail(nv0);
    Vec r2 = Vec::Zero(nv + np + nj);
    r2.segment(nv, np) = M * f;
    Vec z = K.solve(r2);
    s.sigma = z.head(nv);
    s.phi = z.segment(nv, np);
    s.jump = z.tail(nj);
    if (!s.u.allFinite() || !z.allFinite()) throw SolverError("saddle solve produced non-finite values");
    return s;
}

Vec KappaProblem::apply_Q(const Vec& f) const {
    Solution s = solve(f);
    return M * s.phi - SpMat(B.transpose()) * s.u;
}

Vec random_feasible_load(const Triangulation& mesh, std::uint64_t seed) {
    Vec phi = seeded_vector(mesh.num_vertices(), seed);
    Vec f = Vec::Zero(2 * mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        auto g = element_geometry(mesh, t);
        Vec2 c = Vec2::Zero();
        for (int k = 0; k < 3; ++k) c += phi[mesh.triangles[t][k]] * curl_of_grad(g.grad[k]);
        f[2 * t] = c.x();
        f[2 * t + 1] = c.y();
    }
    return f;
}

KappaResult kappa_h(const KappaProblem& problem, const PowerOptions& opts) {
    KappaResult r;
    PowerResult pr = largest_eig_power([&](const Vec& y) { return problem.apply_Q(y); }, problem.M, problem.Ct, opts);
    r.mu = std::max(pr.mu, 0.0);
    r.kappa = std::sqrt(r.mu) * (1.0 + opts.tol);
    r.f = pr.vector;
    r.residual = pr.residual;
    r.iterations = pr.iterations;
    r.converged = pr.converged;
    if (!pr.converged)
        log_warn("power method stopped after " + std::to_string(pr.iterations) + " iterations without converging");
    log_debug("kappa_h = " + std::to_string(r.kappa) + " after " + std::to_string(pr.iterations) + " iterations");
    return r;
}

KappaResult kappa_h(const Triangulation& mesh, const PowerOptions& opts) {
    KappaProblem problem(mesh);
    return kappa_h(problem, opts);
}

double error_functional(const KappaProblem& problem, const Vec& f) {
    if (f.size() != problem.M.rows()) throw std::invalid_argument("load has the wrong size");
    double scale = 0.0;
    for (int t = 0; t < problem.mesh().num_triangles(); ++t) scale = std::max(scale, problem.mesh().diameter(t));
    if ((problem.Ct * f).norm() > 1e-10 * std::max(1.0, f.norm()) * scale)
        throw std::invalid_argument("load is not in the kernel of the normal-jump constraint");
    if (f.isZero(0.0)) return 0.0;
    return f.dot(problem.apply_Q(f));
}

double error_direct(const KappaProblem& problem, const Vec& f) {
    const Triangulation& m = problem.mesh();
    KappaProblem::Solution s = problem.solve(f);
    const auto& rule = quadrature_rule(Quadrature::edge_midpoint);
    double e2 = 0.0;
    for (int t = 0; t < m.num_triangles(); ++t) {
        auto n = local_nedelec(m, t);
        double rot = 0.0;
        for (int k = 0; k < 3; ++k) {
            int d = problem.n0().dof_of[m.tri_edges[t][k]];
            if (d >= 0) rot += s.u[d] * n.rot[k];
        }
        for (const auto& qp : rule) {
            double sig = 0.0;
            for (int k = 0; k < 3; ++k) sig += s.sigma[problem.s1().dof_of[m.triangles[t][k]]] * qp.lambda[k];
            e2 += qp.weight * m.area(t) * (rot - sig) * (rot - sig);
        }
    }
    return e2;
}

double q_symmetry_defect(const KappaProblem& problem, int samples, std::uint64_t seed) {
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        Vec y = random_feasible_load(problem.mesh(), seed + 2u * i);
        Vec z = random_feasible_load(problem.mesh(), seed + 2u * i + 1u);
        double d = std::abs(y.dot(problem.apply_Q(z)) - z.dot(problem.apply_Q(y)));
        worst = std::max(worst, d / (y.norm() * z.norm()));
    }
    return worst;
}

SignAudit dual_sign_audit(const KappaProblem& problem, int samples, std::uint64_t seed) {
    const Triangulation& m = problem.mesh();
    SignAudit a;
    for (int i = 0; i < samples; ++i) {
        Vec f = random_feasible_load(m, seed + 3u * i);
        Vec phi = random_feasible_load(m, seed + 3u * i + 1u);
        KappaProblem::Solution s = problem.solve(f);
        double lhs = 0.0, rhs = 0.0;
        for (int t = 0; t < m.num_triangles(); ++t) {
            auto g = element_geometry(m, t);
            Vec2 cs = Vec2::Zero();
            for (int k = 0; k < 3; ++k) cs += s.sigma[problem.s1().dof_of[m.triangles[t][k]]] * curl_of_grad(g.grad[k]);
            Vec2 ph(phi[2 * t], phi[2 * t + 1]), ft(f[2 * t], f[2 * t + 1]);
            lhs += g.area * cs.dot(ph);
            rhs -= g.area * ft.dot(ph);
        }
        double nf = std::sqrt(f.dot(problem.M * f)), np = std::sqrt(phi.dot(problem.M * phi));
        a.defect = std::max(a.defect, std::abs(lhs - rhs) / (nf * np));
    }
    a.ok = a.defect <= 1e-9;
    return a;
}

HypercircleRecord hypercircle_check(const Triangulation& mesh, const Vec& f, int surrogate_levels) {
    if (surrogate_levels < 1) throw std::invalid_argument("surrogate must be at least one level finer");
    HypercircleRecord rec;
    rec.surrogate_levels = surrogate_levels;
    KappaProblem coarse(mesh);
    KappaProblem::Solution cs = coarse.solve(f);

    Triangulation fine = mesh;
    for (int l = 0; l < surrogate_levels; ++l) fine = red_refine(fine);
    const int nt = fine.num_triangles();
    std::vector<int> parent(nt);
    const int div = 1 << (2 * surrogate_levels);
    for (int t = 0; t < nt; ++t) parent[t] = t / div;
    Vec ff(2 * nt);
    for (int t = 0; t < nt; ++t) ff.segment(2 * t, 2) = f.segment(2 * parent[t], 2);
    KappaProblem fp(fine);
    KappaProblem::Solution fs = fp.solve(ff);

    auto rot_of = [](const KappaProblem& p, const Vec& u, int t) {
        const Triangulation& m = p.mesh();
        auto n = local_nedelec(m, t);
        double r = 0.0;
        for (int k = 0; k < 3; ++k) {
            int d = p.n0().dof_of[m.tri_edges[t][k]];
            if (d >= 0) r += u[d] * n.rot[k];
        }
        return r;
    };
    auto tau_at = [&](int tc, const Vec2& x) {
        auto g = element_geometry(mesh, tc);
        double v = 0.0;
        for (int k = 0; k < 3; ++k) {
            double lam = 1.0 / 3.0 + g.grad[k].dot(x - (g.p[0] + g.p[1] + g.p[2]) / 3.0);
            v += cs.sigma[coarse.s1().dof_of[mesh.triangles[tc][k]]] * lam;
        }
        return v;
    };
    const auto& rule = quadrature_rule(Quadrature::edge_midpoint);
    for (int t = 0; t < nt; ++t) {
        const int tc = parent[t];
        double rot_fine = rot_of(fp, fs.u, t);
        double rot_coarse = rot_of(coarse, cs.u, tc);
        auto g = element_geometry(fine, t);
        for (const auto& qp : rule) {
            Vec2 x = qp.lambda[0] * g.p[0] + qp.lambda[1] * g.p[1] + qp.lambda[2] * g.p[2];
            double tau = tau_at(tc, x);
            double w = qp.weight * g.area;
            rec.dual_term += w * (tau - rot_fine) * (tau - rot_fine);
            rec.total += w * (tau - rot_coarse) * (tau - rot_coarse);
        }
        rec.primal_term += g.area * (rot_fine - rot_coarse) * (rot_fine - rot_coarse);
    }
    rec.defect = std::abs(rec.dual_term + rec.primal_term - rec.total);
    rec.relative_defect = rec.total > 0 ? rec.defect / rec.total : 0.0;
    return rec;
}

InertiaCheck primal_inertia(const KappaProblem& problem, int dense_limit) {
    InertiaCheck c;
    c.observed = problem.L.inertia(dense_limit);
    c.expected_positive = problem.n0().ndof;
    c.expected_negative = problem.s1_zero().ndof;
    c.ok = c.observed.available && c.observed.positive == c.expected_positive &&
           c.observed.negative == c.expected_negative && c.observed.zero == 0;
    return c;
}

}  // namespace maxlow
