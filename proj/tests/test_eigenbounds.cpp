#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "maxlow/eigenbounds.hpp"

using namespace maxlow;

namespace {

DenseEig dense_maxwell(const Triangulation& m) {
    FeSpace n0 = make_space(m, Family::N0_zero), s1z = make_space(m, Family::S1_zero);
    return dense_constrained_eigs(Mat(assemble_rotrot(n0)), Mat(assemble_mass(n0)),
                                  Mat(assemble_grad_coupling(s1z, n0)));
}

bool contains(const Vec& v, double x, double rtol) {
    for (int i = 0; i < v.size(); ++i)
        if (std::abs(v[i] - x) <= rtol * x) return true;
    return false;
}

ConstantsReport reference_inputs() {
    ConstantsReport r;
    r.tilde_c = 0.2461;
    r.C1_Curl = 1.7321;
    r.C2_Curl = 0.9129;
    r.C1_div = 9.7290;
    r.C_OL = 13;
    return r;
}

}  // namespace

TEST_CASE("Maxwell eigenvalues agree with the dense oracle") {
    for (const Triangulation& m : {generate_square(1), generate_square(2), generate_lshape(1)}) {
        DenseEig ref = dense_maxwell(m);
        EvpResult r = maxwell_evp(m, 6);
        REQUIRE(r.values.size() == 6);
        for (int i = 0; i < 6; ++i) {
            CHECK(r.values[i] == doctest::Approx(ref.values[i]).epsilon(1e-8));
            CHECK(r.constraint_residuals[i] <= 1e-10);
        }
    }
}

TEST_CASE("known discrete eigenvalues on coarse meshes") {
    EvpResult sq = maxwell_evp(generate_square(1), 7);
    for (double x : {9.6, 20.2871, 48.0, 57.6, 75.7128}) CHECK(contains(sq.values, x, 1e-5));
    EvpResult ls = maxwell_evp(generate_lshape(1, Refinement::longest_edge), 3);
    CHECK(ls.values[0] == doctest::Approx(1.31805).epsilon(1e-5));
    CHECK(ls.values[2] == doctest::Approx(9.16718).epsilon(1e-5));
}

TEST_CASE("eigenvalues do not depend on the numbering") {
    Triangulation m = generate_lshape(1);
    std::vector<int> perm(m.num_vertices()), order(m.num_triangles());
    for (int i = 0; i < m.num_vertices(); ++i) perm[i] = m.num_vertices() - 1 - i;
    for (int t = 0; t < m.num_triangles(); ++t) order[t] = (t + 5) % m.num_triangles();
    EvpResult a = maxwell_evp(m, 4), b = maxwell_evp(permuted(m, perm, order), 4);
    for (int i = 0; i < 4; ++i) CHECK(b.values[i] == doctest::Approx(a.values[i]).epsilon(1e-9));
}

TEST_CASE("bound arithmetic") {
    ConstantsReport r = reference_inputs();
    CHECK(c_hat(r) == doctest::Approx(2.7321 * 0.2461 + 0.9129).epsilon(1e-12));
    CHECK(c_hat(r) == doctest::Approx(1.5853).epsilon(1e-4));
    double mh = m_hat(std::sqrt(2.0) / 2.0, 0.1443, r);
    CHECK(mh == doctest::Approx(9.1034).epsilon(2e-4));
    CHECK(lower_bound(9.6, 9.1034) == doctest::Approx(0.0121).epsilon(5e-3));
    CHECK(lower_bound(9.8696, 0.0354) == doctest::Approx(9.7488).epsilon(1e-4));
    r.tilde_c_hT = 0.5;
    CHECK(c_hat(r, TildeCNormalization::hT) == doctest::Approx(2.7321 * 0.5 + 0.9129));
    // monotone in lambda, decreasing in M, below both lambda and 1/M^2
    for (double lam : {0.5, 9.6, 100.0})
        for (double m : {0.01, 1.0, 9.0}) {
            double lb = lower_bound(lam, m);
            CHECK(lb < lam);
            CHECK(lb < 1.0 / (m * m));
            CHECK(lower_bound(lam * 1.1, m) > lb);
            CHECK(lower_bound(lam, m * 1.1) < lb);
        }
    CHECK(lower_bound(7.0, 0.0) == 7.0);
}

TEST_CASE("envelope takes componentwise maxima") {
    ConstantsReport a = reference_inputs(), b = reference_inputs();
    a.C_S_max = 1.0;
    b.C_S_max = 2.0;
    a.C_OL = 7;
    b.tilde_c = 0.1;
    ConstantsReport e = envelope(a, b, {});
    CHECK(e.C_S_max == 2.0);
    CHECK(e.C_OL == 13);
    CHECK(e.tilde_c == 0.2461);
}

TEST_CASE("pipeline produces guaranteed lower bounds") {
    PipelineConfig cfg;
    cfg.level_from = 1;
    cfg.level_to = 2;
    cfg.k = 2;
    auto rows = run_pipeline(cfg);
    REQUIRE(rows.size() == 2);
    auto ref = reference_eigenvalues(Domain::square);
    for (const auto& row : rows) {
        CHECK(row.ok);
        REQUIRE(row.lower.size() == 2);
        for (int i = 0; i < 2; ++i) {
            CHECK(row.lower[i] <= ref[i]);
            CHECK(row.lower[i] == doctest::Approx(lower_bound(row.lambda[i], row.m_hat)));
        }
        CHECK(row.h_over_sqrt2 == doctest::Approx(row.h_max / std::sqrt(2.0)));
        CHECK(row.m_hat == doctest::Approx(m_hat(row.h_max, row.kappa, *row.constants)));
    }
    CHECK(rows[1].m_hat < rows[0].m_hat);
    cfg.threads = 2;
    auto again = run_pipeline(cfg);
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(again[i].kappa == rows[i].kappa);
        CHECK(again[i].lambda == rows[i].lambda);
        CHECK(again[i].lower == rows[i].lower);
    }
}

TEST_CASE("reference eigenvalues") {
    auto sq = reference_eigenvalues(Domain::square);
    REQUIRE(sq.size() >= 5);
    CHECK(sq[0] == doctest::Approx(M_PI * M_PI));
    CHECK(sq[4] == doctest::Approx(8 * M_PI * M_PI));
    CHECK(reference_eigenvalues(Domain::lshape).at(0) == doctest::Approx(1.4756218241));
}
