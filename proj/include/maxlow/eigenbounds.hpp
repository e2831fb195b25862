#pragma once

#include <optional>
#include <string>
#include <vector>

#include "maxlow/constants.hpp"
#include "maxlow/mesh.hpp"
#include "maxlow/solvers.hpp"

namespace maxlow {

struct EvpResult {
    Vec values;                  // ascending
    Mat vectors;                 // N0_0 coefficients, mass-normalized
    Vec residuals;
    Vec constraint_residuals;    // ||F u|| per mode
    int iterations = 0;
};

// k smallest eigenvalues of rot-rot vs mass on the discretely divergence-free
// subspace of N0 with zero tangential trace.
EvpResult maxwell_evp(const Triangulation& mesh, int k, const EigOptions& opts = {});

double c_hat(const ConstantsReport& report, TildeCNormalization norm = TildeCNormalization::diam);
double m_hat(double h_max, double kappa, const ConstantsReport& report,
             TildeCNormalization norm = TildeCNormalization::diam);
double lower_bound(double lambda_h, double m_hat);

// Componentwise maximum of two reports (per-entity detail is taken from a).
ConstantsReport envelope(const ConstantsReport& a, const ConstantsReport& b, const ConstantsOptions& opts);

enum class Domain { square, lshape, file };
enum class ConstantsSource {
    own,       // constants of the level's mesh
    envelope   // max of the level's mesh and the family's level-3 mesh
};

struct PipelineConfig {
    Domain domain = Domain::square;
    std::string mesh_path;       // Domain::file; level l = l red refinements
    int level_from = 1, level_to = 1;
    int k = 1;
    Refinement refinement = Refinement::red;
    ConstantsOptions constants;
    ConstantsSource constants_source = ConstantsSource::own;
    TildeCNormalization normalization = TildeCNormalization::diam;
    PowerOptions power;
    EigOptions eig;
    int threads = 1;
    bool want_constants = true;
    bool want_kappa = true;
    bool want_evp = true;
};

struct BoundsRow {
    int level = 0;
    int vertices = 0, edges = 0, triangles = 0;
    double h_max = 0.0;
    double h_over_sqrt2 = 0.0;
    double kappa = 0.0;
    double c_hat = 0.0;
    double m_hat = 0.0;
    std::vector<double> lambda;
    std::vector<double> lower;
    std::optional<ConstantsReport> constants;
    double seconds_constants = 0.0, seconds_kappa = 0.0, seconds_evp = 0.0;
    bool ok = true;
    bool solver_failure = false;   // false with !ok means a configuration/mesh error
    std::string status = "ok";
};

// Mesh of one level for the configured domain.
Triangulation level_mesh(const PipelineConfig& cfg, int level);

std::vector<BoundsRow> run_pipeline(const PipelineConfig& cfg);

// Square: pi^2 * {1, 2, 4, 5, 8, ...}; L-shape: first eigenvalue only.
std::vector<double> reference_eigenvalues(Domain domain);

}  // namespace maxlow
