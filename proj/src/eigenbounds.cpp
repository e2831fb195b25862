#include "maxlow/eigenbounds.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "maxlow/galerkin.hpp"
#include "maxlow/log.hpp"
#include "maxlow/parallel.hpp"
#include "maxlow/spaces.hpp"

namespace maxlow {

EvpResult maxwell_evp(const Triangulation& mesh, int k, const EigOptions& opts) {
    if (k < 1) throw std::invalid_argument("eigenvalue count must be at least 1");
    FeSpace n0 = make_space(mesh, Family::N0_zero);
    FeSpace s1 = make_space(mesh, Family::S1_zero);
    if (n0.ndof == 0) throw SolverError("mesh has no interior edges");
    SpMat A = assemble_rotrot(n0), B = assemble_mass(n0);
    SpMat F = s1.ndof > 0 ? assemble_grad_coupling(s1, n0) : SpMat(0, n0.ndof);
    EigResult er = smallest_eigs_constrained(A, B, F, k, opts);
    EvpResult r;
    r.values = er.values;
    r.vectors = er.vectors;
    r.residuals = er.residuals;
    r.iterations = er.iterations;
    r.constraint_residuals.resize(k);
    for (int i = 0; i < k; ++i) r.constraint_residuals[i] = F.rows() ? (F * r.vectors.col(i)).norm() : 0.0;
    return r;
}

double c_hat(const ConstantsReport& r, TildeCNormalization norm) {
    double tc = norm == TildeCNormalization::diam ? r.tilde_c : r.tilde_c_hT;
    return (1.0 + r.C1_Curl) * tc + r.C2_Curl;
}

double m_hat(double h_max, double kappa, const ConstantsReport& r, TildeCNormalization norm) {
    return (h_max * c_hat(r, norm) + kappa * r.C1_div) * std::sqrt(static_cast<double>(r.C_OL));
}

double lower_bound(double lambda_h, double m_hat) { return lambda_h / (1.0 + m_hat * m_hat * lambda_h); }

ConstantsReport envelope(const ConstantsReport& a, const ConstantsReport& b, const ConstantsOptions& opts) {
    ConstantsReport r = a;
    r.tilde_c = std::max(a.tilde_c, b.tilde_c);
    r.tilde_c_hT = std::max(a.tilde_c_hT, b.tilde_c_hT);
    r.C1yT_max = std::max(a.C1yT_max, b.C1yT_max);
    r.C_QT = std::max(a.C_QT, b.C_QT);
    r.C_S_max = std::max(a.C_S_max, b.C_S_max);
    r.c_M = std::max(a.c_M, b.c_M);
    r.C_M1 = std::max(a.C_M1, b.C_M1);
    r.C2_Curl_sharp = std::max(a.C2_Curl_sharp, b.C2_Curl_sharp);
    r.C2_Curl_table = std::max(a.C2_Curl_table, b.C2_Curl_table);
    r.C_OL = std::max(a.C_OL, b.C_OL);
    combine(r, opts);
    return r;
}

std::vector<double> reference_eigenvalues(Domain domain) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    if (domain == Domain::square) return {pi2, 2 * pi2, 4 * pi2, 5 * pi2, 8 * pi2};
    if (domain == Domain::lshape) return {1.4756218241};
    return {};
}

Triangulation level_mesh(const PipelineConfig& cfg, int level) {
    switch (cfg.domain) {
        case Domain::square: return generate_square(level, cfg.refinement);
        case Domain::lshape: return generate_lshape(level, cfg.refinement);
        case Domain::file: {
            Triangulation m = read_mesh(cfg.mesh_path);
            for (int l = 0; l < level; ++l) m = refine(m, cfg.refinement);
            return m;
        }
    }
    throw std::invalid_argument("unknown domain");
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<BoundsRow> run_pipeline(const PipelineConfig& cfg) {
    if (cfg.level_from < 0 || cfg.level_to < cfg.level_from) throw std::invalid_argument("invalid level range");
    if (cfg.k < 1) throw std::invalid_argument("eigenvalue count must be at least 1");
    const int nlev = cfg.level_to - cfg.level_from + 1;
    const int outer = std::max(1, std::min(cfg.threads, nlev));
    ConstantsOptions copts = cfg.constants;
    copts.threads = std::max(1, cfg.threads / outer);

    std::optional<ConstantsReport> reference;
    if (cfg.want_constants && cfg.constants_source == ConstantsSource::envelope) {
        Triangulation ref = level_mesh(cfg, 3);
        reference = compute_constants(ref, copts);
    }

    std::vector<BoundsRow> rows(nlev);
    parallel_for(nlev, outer, [&](int i) {
        BoundsRow& row = rows[i];
        row.level = cfg.level_from + i;
        std::string stage = "mesh";
        try {
            Triangulation mesh = level_mesh(cfg, row.level);
            row.vertices = mesh.num_vertices();
            row.edges = mesh.num_edges();
            row.triangles = mesh.num_triangles();
            row.h_max = mesh.h_max();
            row.h_over_sqrt2 = row.h_max / std::sqrt(2.0);
            if (cfg.want_constants) {
                stage = "constants";
                auto t0 = std::chrono::steady_clock::now();
                ConstantsReport rep = compute_constants(mesh, copts);
                if (reference) rep = envelope(rep, *reference, copts);
                row.c_hat = c_hat(rep, cfg.normalization);
                row.constants = std::move(rep);
                row.seconds_constants = seconds_since(t0);
            }
            if (cfg.want_kappa) {
                stage = "kappa";
                auto t0 = std::chrono::steady_clock::now();
                row.kappa = kappa_h(mesh, cfg.power).kappa;
                row.seconds_kappa = seconds_since(t0);
            }
            if (cfg.want_evp) {
                stage = "evp";
                auto t0 = std::chrono::steady_clock::now();
                EvpResult ev = maxwell_evp(mesh, cfg.k, cfg.eig);
                row.lambda.assign(ev.values.data(), ev.values.data() + ev.values.size());
                row.seconds_evp = seconds_since(t0);
            }
            if (cfg.want_constants && cfg.want_kappa) {
                row.m_hat = m_hat(row.h_max, row.kappa, *row.constants, cfg.normalization);
                for (double l : row.lambda) row.lower.push_back(lower_bound(l, row.m_hat));
            }
        } catch (const SolverError& e) {
            row.ok = false;
            row.solver_failure = true;
            row.status = "failed at " + stage + ": " + e.what();
        } catch (const std::exception& e) {
            row.ok = false;
            row.status = "failed at " + stage + ": " + e.what();
        }
        if (!row.ok)
            log_error("level " + std::to_string(row.level) + " " + row.status);
        else
            log_info("level " + std::to_string(row.level) + " done");
    });
    return rows;
}

}  // namespace maxlow
