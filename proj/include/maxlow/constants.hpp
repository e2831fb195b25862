#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maxlow/mesh.hpp"
#include "maxlow/spaces.hpp"

namespace maxlow {

// Perturbation constant of the Crouzeix-Raviart lower Neumann eigenvalue bound.
inline constexpr double kCrKappa2 = 0.0889;

enum class TildeCNormalization { diam, hT };
enum class C2CurlMode { table, sharp };

struct ConstantsOptions {
    double kappa2 = kCrKappa2;
    int subrefinements = 3;
    bool use_cache = true;
    int threads = 1;
    C2CurlMode c2curl = C2CurlMode::table;
    bool has_c1div_override = false;
    double c1div_override = 0.0;
};

struct ConstantsReport {
    // mesh summary
    int vertices = 0, edges = 0, triangles = 0;
    double h_max = 0.0;

    double tilde_c = 0.0;      // max patch Poincare bound / diam(omega_T)
    double tilde_c_hT = 0.0;   // max patch Poincare bound / h_T
    double C1yT_max = 0.0;     // largest eigenvalue of the point-value pencil
    double C1yT_table = 0.0;   // sqrt(2 * C1yT_max)
    double C_QT = 0.0;
    double C_S_max = 0.0;      // largest eigenvalue of the S^1 functional pencil
    double C_S_table = 0.0;    // sqrt(C_S_max)
    double c_M = 0.0;
    int c_M_skipped = 0;
    double C_M1 = 0.0;
    double C1_Curl = 0.0;
    double C2_Curl_sharp = 0.0;
    double C2_Curl_table = 0.0;
    double C2_Curl = 0.0;          // the one used downstream
    C2CurlMode c2curl_mode = C2CurlMode::table;
    double C1_div_formula = 0.0;
    double C1_div = 0.0;           // the one used downstream
    bool C1_div_overridden = false;
    double C2_div = 0.0;
    int C_OL = 0;
    int C_RD = 1;

    // where the maxima are attained
    int argmax_tilde_c = -1;   // triangle
    int argmax_C1 = -1;        // vertex
    int argmax_C_S = -1;       // edge
    int argmax_c_M = -1;       // edge
    int argmax_C_M1 = -1;      // triangle

    // per-entity detail
    std::vector<double> tilde_c_per_triangle;
    std::vector<double> C1_per_vertex;
    std::vector<double> C_S_val_per_edge;     // ell^T M^-1 ell, before the ||psi_E||^2 weight
    std::vector<double> z_norm2_per_edge;
    std::vector<double> c_M_mu_per_edge;      // mu_min, 0 where skipped
    std::vector<double> C_M1_per_triangle;

    int patches = 0;
    int patch_classes = 0;
    double eig_tol = 1e-9;
    double seconds = 0.0;
};

struct PoincarePatch {
    double lambda_cr = 0.0;     // first nonzero CR Neumann eigenvalue on the refined patch
    double lambda_hat = 0.0;    // guaranteed lower bound
    double H = 0.0;             // h_max of the refined patch
    double bound = 0.0;         // 1 / sqrt(lambda_hat)
    double diam = 0.0;
    double h_T = 0.0;
};

PoincarePatch poincare_patch(const Triangulation& mesh, int t, const ConstantsOptions& opts = {});

struct PoincareResult {
    double tilde_c = 0.0;
    double tilde_c_hT = 0.0;
    int argmax = -1;
    std::vector<double> per_triangle;     // diam-normalized
    std::vector<double> per_triangle_hT;
};

PoincareResult poincare_tilde_c(const Triangulation& mesh, const ConstantsOptions& opts = {});

// Only depends on y; T is checked to contain y.
double c1_yT(const Triangulation& mesh, int y, int t);
double c_QT(const Triangulation& mesh, int y, int t);

struct C2CurlResult {
    double sharp = 0.0;   // max_T sqrt(meas(T)/h_T^2 * sum_y C1(y,T))
    double table = 0.0;   // max_T sqrt(meas(T)/h_T^2 * 3 * C1yT_table^2)
};

C2CurlResult c2_curl(const Triangulation& mesh, const std::vector<double>& c1_per_vertex);

// RT0 field on omega_E^e with zero normal trace solving the div problem with
// data z0_start - z0_end and orthogonality to Curl S1_0 of the patch.
struct ZField {
    Triangulation patch_mesh;
    Patch patch;
    int start_local = -1, end_local = -1;
    Vec coeffs;                 // per local edge, zero on the patch boundary
    double norm2 = 0.0;         // ||z_E||^2 on omega_E^e
    double div_residual = 0.0;  // first block residual
    double orth_residual = 0.0; // max |(z, Curl w)| over multiplier basis
};

ZField z_E1(const Triangulation& mesh, int e);

double c_M1(const Triangulation& mesh, int t);

// Functional ell on N0 of omega_E^e (local edge numbering of z.patch_mesh).
Vec c_S_functional(const ZField& z);
double c_S_value(const ZField& z);   // ell^T M^-1 ell
double c_S(const Triangulation& mesh, int e, int t);

struct CMLocal {
    double value = 0.0;   // 1 / (h_T sqrt(mu_min))
    double mu_min = 0.0;
    bool skipped = false;
};

double c_M_mu(const Triangulation& mesh, int e, bool* skipped = nullptr);
CMLocal c_M_local(const Triangulation& mesh, int e, int t);

// Fills the combined values from the per-patch maxima already in the report.
void combine(ConstantsReport& report, const ConstantsOptions& opts);

ConstantsReport compute_constants(const Triangulation& mesh, const ConstantsOptions& opts = {});

// Canonical form of a patch up to rigid motion, reflection and scaling; anchor
// vertices are marked.
std::string canonical_patch_key(const Triangulation& mesh, const Patch& patch,
                                const std::vector<int>& anchor_vertices);

// pi^grad u = sum_y c_y(u) lambda_y on random continuous piecewise quadratics;
// counts violations of ||pi u||_T <= C1Curl ||u||_omega_T + h_T C2Curl ||grad u||_omega_T.
struct StabilityCheck {
    int samples = 0;
    int violations = 0;
    double worst_ratio = 0.0;   // max lhs / rhs
};

StabilityCheck pi_grad_stability_check(const Triangulation& mesh, double C1Curl, double C2Curl, int samples,
                                       std::uint64_t seed);

}  // namespace maxlow
