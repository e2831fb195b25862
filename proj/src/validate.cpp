#include "maxlow/validate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SparseQR>

#include "maxlow/constants.hpp"
#include "maxlow/galerkin.hpp"
#include "maxlow/solvers.hpp"
#include "maxlow/spaces.hpp"

namespace maxlow {

namespace {

PropertyResult make(const std::string& name, double value, double tol, std::string detail = {}) {
    PropertyResult r;
    r.name = name;
    r.value = value;
    r.tolerance = tol;
    r.pass = std::isfinite(value) && value <= tol;
    r.detail = std::move(detail);
    return r;
}

double max_abs(const SpMat& a) {
    double m = 0.0;
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

double relative_difference(const SpMat& a, const SpMat& b) {
    double s = std::max(max_abs(a), max_abs(b));
    return s > 0 ? max_abs(SpMat(a - b)) / s : 0.0;
}

double dense_rank_one(const Vec& ell, const Mat& B, const Mat& C) {
    Mat N = null_space(C);
    Mat b = N.transpose() * B * N;
    b = 0.5 * (b + b.transpose());
    Vec l = N.transpose() * ell;
    Mat a = l * l.transpose();
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(a, b, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

struct VertexPencil {
    Vec ell;
    Mat K, C;
};

VertexPencil vertex_pencil(const Triangulation& mesh, int y) {
    Patch p = make_patch(mesh, PatchKind::vertex, y);
    Triangulation sm = submesh(mesh, p);
    FeSpace s1 = make_space(sm, Family::S1);
    VertexPencil vp;
    vp.K = Mat(assemble_stiffness_grad(s1));
    vp.C = s1_integrals(s1).transpose();
    vp.ell = Vec::Zero(s1.ndof);
    vp.ell[std::lower_bound(p.vertices.begin(), p.vertices.end(), y) - p.vertices.begin()] = 1.0;
    return vp;
}

std::vector<int> class_representatives(const Triangulation& mesh, PatchKind kind, int count) {
    std::set<std::string> seen;
    std::vector<int> reps;
    for (int i = 0; i < count; ++i) {
        std::vector<int> anchors = kind == PatchKind::vertex ? std::vector<int>{i}
                                                             : std::vector<int>{mesh.edges[i][0], mesh.edges[i][1]};
        if (seen.insert(canonical_patch_key(mesh, make_patch(mesh, kind, i), anchors)).second) reps.push_back(i);
    }
    return reps;
}

bool same_report(const ConstantsReport& a, const ConstantsReport& b, double rtol, double& worst) {
    const double va[] = {a.tilde_c, a.tilde_c_hT, a.C1yT_max, a.C_QT, a.C_S_max, a.c_M, a.C_M1, a.C2_Curl_sharp,
                         a.C2_Curl_table, a.C1_div, a.C2_div, static_cast<double>(a.C_OL)};
    const double vb[] = {b.tilde_c, b.tilde_c_hT, b.C1yT_max, b.C_QT, b.C_S_max, b.c_M, b.C_M1, b.C2_Curl_sharp,
                         b.C2_Curl_table, b.C1_div, b.C2_div, static_cast<double>(b.C_OL)};
    worst = 0.0;
    for (size_t i = 0; i < std::size(va); ++i) {
        double s = std::max(std::abs(va[i]), std::abs(vb[i]));
        worst = std::max(worst, s > 0 ? std::abs(va[i] - vb[i]) / s : 0.0);
    }
    return worst <= rtol;
}

}  // namespace

std::vector<PropertyResult> run_property_suite(const Triangulation& mesh, const ValidateOptions& opts) {
    std::vector<PropertyResult> out;

    {
        auto problems = validate(mesh);
        out.push_back(make("mesh_validator", static_cast<double>(problems.size()), 0.0,
                           problems.empty() ? "" : problems.front()));
    }

    // discrete de Rham complex: rot grad = 0 and the kernels have the expected dimensions
    {
        FeSpace s1 = make_space(mesh, Family::S1), n0 = make_space(mesh, Family::N0);
        SpMat rr = assemble_rotrot(n0);
        SpMat dg = discrete_gradient(s1, n0);
        double scale = std::max(1.0, max_abs(rr));
        out.push_back(make("complex_rot_grad", max_abs(SpMat(rr * dg)) / scale, 1e-12));

        FeSpace p0 = make_space(mesh, Family::P0vec);
        SpMat ct = SpMat(assemble_normal_jump(p0).transpose());
        ct.makeCompressed();
        Eigen::SparseQR<SpMat, Eigen::COLAMDOrdering<int>> qr;
        qr.compute(ct);
        int ker = p0.ndof - static_cast<int>(qr.rank());
        out.push_back(make("complex_kernel_normal_jump", std::abs(ker - (mesh.num_vertices() - 1)), 0.0,
                           "dim ker = " + std::to_string(ker) + ", V - 1 = " + std::to_string(mesh.num_vertices() - 1)));

        FeSpace n0z = make_space(mesh, Family::N0_zero), s1z = make_space(mesh, Family::S1_zero);
        if (n0z.ndof <= 2000) {
            Eigen::SelfAdjointEigenSolver<Mat> es(Mat(assemble_rotrot(n0z)), Eigen::EigenvaluesOnly);
            const Vec& ev = es.eigenvalues();
            double tol = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
            int zeros = static_cast<int>((ev.array().abs() <= tol).count());
            out.push_back(make("complex_kernel_rot", std::abs(zeros - s1z.ndof), 0.0,
                               "dim ker rot = " + std::to_string(zeros) + ", dim S1_0 = " + std::to_string(s1z.ndof)));
        }
    }

    // quadrature-independence of the assembled matrices (all integrands are quadratic)
    {
        FeSpace n0 = make_space(mesh, Family::N0), rt = make_space(mesh, Family::RT0), s1 = make_space(mesh, Family::S1);
        double d = 0.0;
        d = std::max(d, relative_difference(assemble_mass(n0, Quadrature::edge_midpoint), assemble_mass(n0, Quadrature::gauss6)));
        d = std::max(d, relative_difference(assemble_mass(rt, Quadrature::edge_midpoint), assemble_mass(rt, Quadrature::gauss6)));
        d = std::max(d, relative_difference(assemble_mass(s1, Quadrature::edge_midpoint), assemble_mass(s1, Quadrature::gauss6)));
        d = std::max(d, relative_difference(assemble_grad_coupling(s1, n0, Quadrature::edge_midpoint),
                                            assemble_grad_coupling(s1, n0, Quadrature::gauss6)));
        d = std::max(d, relative_difference(assemble_nedelec_rt0(n0, rt, Quadrature::edge_midpoint),
                                            assemble_nedelec_rt0(n0, rt, Quadrature::gauss6)));
        d = std::max(d, relative_difference(assemble_rt0_curl_coupling(rt, s1, Quadrature::edge_midpoint),
                                            assemble_rt0_curl_coupling(rt, s1, Quadrature::gauss6)));
        out.push_back(make("quadrature_agreement", d, 1e-14));
    }

    // rank-one shortcut against the dense generalized eigensolver on every patch class
    {
        double worst = 0.0;
        auto vreps = class_representatives(mesh, PatchKind::vertex, mesh.num_vertices());
        for (int y : vreps) {
            VertexPencil vp = vertex_pencil(mesh, y);
            double r1 = rank_one_max_eig(vp.ell, vp.K, vp.C);
            double dn = dense_rank_one(vp.ell, vp.K, vp.C);
            worst = std::max(worst, std::abs(r1 - dn) / std::max(std::abs(dn), 1e-300));
        }
        auto ereps = class_representatives(mesh, PatchKind::extended_edge, mesh.num_edges());
        double commuting = 0.0;
        for (int e : ereps) {
            ZField z = z_E1(mesh, e);
            Vec ell = c_S_functional(z);
            FeSpace n0 = make_space(z.patch_mesh, Family::N0), s1 = make_space(z.patch_mesh, Family::S1);
            Mat B = Mat(assemble_mass(n0));
            double r1 = rank_one_max_eig(ell, B, Mat(0, n0.ndof));
            double dn = dense_rank_one(ell, B, Mat(0, n0.ndof));
            worst = std::max(worst, std::abs(r1 - dn) / std::max(std::abs(dn), 1e-300));
            Mat g = Mat(discrete_gradient(s1, n0));
            Vec lg = g.transpose() * ell;
            commuting = std::max(commuting, lg.cwiseAbs().maxCoeff() / (ell.norm() * std::max(1.0, g.norm())));
        }
        out.push_back(make("rank_one_vs_dense", worst, 1e-9,
                           std::to_string(vreps.size()) + " vertex and " + std::to_string(ereps.size()) +
                               " extended edge patch classes"));
        out.push_back(make("commuting_functional_kills_gradients", commuting, 1e-12));
    }

    // Galerkin / hypercircle machinery
    {
        KappaOptions ko;
        ko.flip_curl_sign = opts.flip_curl_sign;
        KappaProblem kp(mesh, ko);
        out.push_back(make("q_symmetry", q_symmetry_defect(kp, opts.random_samples, opts.seed), 1e-10));
        auto audit = dual_sign_audit(kp, opts.random_samples, opts.seed + 11u);
        out.push_back(make("dual_sign_audit", audit.defect, 1e-9));
        double rel = 0.0;
        for (int i = 0; i < opts.random_samples; ++i) {
            Vec f = random_feasible_load(mesh, opts.seed + 17u * i);
            double a = error_functional(kp, f), b = error_direct(kp, f);
            rel = std::max(rel, std::abs(a - b) / std::max(std::abs(b), 1e-300));
        }
        out.push_back(make("error_functional_vs_direct", rel, 1e-9));

        KappaResult kr = kappa_h(kp);
        double excess = 0.0;
        for (int i = 0; i < 100; ++i) {
            Vec f = random_feasible_load(mesh, opts.seed + 31u * i + 5u);
            double ratio = error_functional(kp, f) / f.dot(kp.M * f);
            excess = std::max(excess, ratio - kr.kappa * kr.kappa);
        }
        out.push_back(make("kappa_dominates_random_loads", excess, 0.0,
                           "kappa_h = " + std::to_string(kr.kappa)));

        auto in = primal_inertia(kp);
        if (in.observed.available) {
            std::ostringstream os;
            os << "(" << in.observed.positive << ", " << in.observed.negative << ", " << in.observed.zero
               << ") expected (" << in.expected_positive << ", " << in.expected_negative << ", 0)";
            out.push_back(make("primal_inertia", in.ok ? 0.0 : 1.0, 0.0, os.str()));
        }

        Vec f = random_feasible_load(mesh, opts.seed + 101u);
        double hc = 0.0;
        std::ostringstream os;
        for (int s = 1; s <= 2; ++s) {
            auto rec = hypercircle_check(mesh, f, s);
            hc = std::max(hc, rec.relative_defect);
            os << (s > 1 ? "; " : "") << "depth " << s << ": dual " << rec.dual_term << ", primal " << rec.primal_term;
        }
        out.push_back(make("hypercircle_identity", hc, 1e-10, os.str()));
    }

    // constants: stability certificate, cache and thread invariance
    {
        ConstantsOptions co;
        co.threads = 1;
        ConstantsReport r1 = compute_constants(mesh, co);
        auto st = pi_grad_stability_check(mesh, r1.C1_Curl, r1.C2_Curl_sharp, opts.stability_samples, opts.seed);
        out.push_back(make("pi_grad_stability", st.violations, 0.0,
                           std::to_string(st.samples) + " samples, worst ratio " + std::to_string(st.worst_ratio)));
        ConstantsOptions nc = co;
        nc.use_cache = false;
        double worst = 0.0;
        same_report(r1, compute_constants(mesh, nc), 1e-9, worst);
        out.push_back(make("dedup_cache_consistency", worst, 1e-9));
        ConstantsOptions mt = co;
        mt.threads = std::max(2, opts.threads);
        same_report(r1, compute_constants(mesh, mt), 0.0, worst);
        out.push_back(make("thread_count_invariance", worst, 0.0));
    }
    return out;
}

}  // namespace maxlow
