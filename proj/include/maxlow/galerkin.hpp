#pragma once

#include <cstdint>

#include "maxlow/mesh.hpp"
#include "maxlow/solvers.hpp"
#include "maxlow/spaces.hpp"

namespace maxlow {

struct KappaOptions {
    bool flip_curl_sign = false;  // fault injection: negates G in the dual system
};

// Primal L = [[D, F^T], [F, 0]] on N0_0 x S1_0 and dual
// K = [[A, -G^T, 0], [G, 0, C], [0, C^T, 0]] on S1 x P0vec x interior edges,
// with G = -(Curl lambda_v, e_dof).
// Holds a reference to the mesh, which must outlive the problem.
class KappaProblem {
public:
    explicit KappaProblem(const Triangulation& mesh, const KappaOptions& opts = {});
    KappaProblem(const KappaProblem&) = delete;
    KappaProblem& operator=(const KappaProblem&) = delete;

    struct Solution {
        Vec u;      // N0_0 coefficients of the primal solution
        Vec p;      // S1_0 multiplier
        Vec sigma;  // S1 coefficients of the dual field
        Vec phi;    // P0vec multiplier
        Vec jump;   // interior-edge multiplier
    };

    Solution solve(const Vec& f) const;
    // Q f = M z_2 - B^T w_1, so that f^T Q f = ||rot u_h - sigma_h||^2.
    Vec apply_Q(const Vec& f) const;

    const Triangulation& mesh() const { return mesh_; }
    const FeSpace& n0() const { return n0_; }
    const FeSpace& s1() const { return s1_; }
    const FeSpace& s1_zero() const { return s1z_; }
    const FeSpace& p0() const { return p0_; }

    SpMat D, F, B, A, G, C, M;
    SpMat Ct;  // C^T: the feasibility constraint rows on P0vec
    Factorization L, K;

private:
    const Triangulation& mesh_;
    FeSpace n0_, s1_, s1z_, p0_;
};

// Curl of a random S1 function: a P0vec field in ker C^T.
Vec random_feasible_load(const Triangulation& mesh, std::uint64_t seed);

struct KappaResult {
    double kappa = 0.0;  // sqrt(mu) inflated by the power method tolerance
    double mu = 0.0;
    Vec f;               // maximizing load, M-normalized
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

KappaResult kappa_h(const KappaProblem& problem, const PowerOptions& opts = {});
KappaResult kappa_h(const Triangulation& mesh, const PowerOptions& opts = {});

// f^T Q f; throws std::invalid_argument unless C^T f = 0.
double error_functional(const KappaProblem& problem, const Vec& f);
// ||rot u_h - sigma_h||^2 integrated elementwise from the recovered fields.
double error_direct(const KappaProblem& problem, const Vec& f);

// max |y^T Q z - z^T Q y| / (||y|| ||z||) over random feasible pairs.
double q_symmetry_defect(const KappaProblem& problem, int samples, std::uint64_t seed);

struct SignAudit {
    double defect = 0.0;  // max |(Curl sigma_h, phi) + (f, phi)| / (||f|| ||phi||)
    bool ok = false;
};

// Checks Curl sigma_h = -f_h weakly on ker C^T, evaluating Curl sigma_h
// geometrically from the nodal values.
SignAudit dual_sign_audit(const KappaProblem& problem, int samples, std::uint64_t seed);

struct HypercircleRecord {
    double dual_term = 0.0;    // ||tau_h - rot u~||^2
    double primal_term = 0.0;  // ||rot(u~ - v_h)||^2
    double total = 0.0;        // ||tau_h - rot v_h||^2
    double defect = 0.0;       // |dual + primal - total|
    double relative_defect = 0.0;
    int surrogate_levels = 0;
};

// u~ is the primal solution on the mesh red-refined surrogate_levels times.
HypercircleRecord hypercircle_check(const Triangulation& mesh, const Vec& f, int surrogate_levels);

struct InertiaCheck {
    Inertia observed;
    int expected_positive = 0, expected_negative = 0;
    bool ok = false;
};

// Inertia of L against (dim N0_0, dim S1_0, 0).
InertiaCheck primal_inertia(const KappaProblem& problem, int dense_limit = 4000);

}  // namespace maxlow
