#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "maxlow/cli.hpp"
#include "maxlow/constants.hpp"
#include "maxlow/eigenbounds.hpp"
#include "maxlow/validate.hpp"

using namespace maxlow;

namespace {

struct Check {
    std::string what;
    bool pass;
    bool known_failure;  // documented as unattainable in the notes
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    std::vector<Check> checks;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

Check rel_check(const std::string& what, double value, double ref, double rtol, bool known = false) {
    double rel = std::abs(value - ref) / std::abs(ref);
    return {what, rel <= rtol, known,
            "got " + fmt("%.6g", value) + ", reference " + fmt("%.6g", ref) + ", rel. dev. " + fmt("%.2e", rel) +
                " (tol " + fmt("%.0e", rtol) + ")"};
}

Check abs_check(const std::string& what, double value, double ref, double atol, bool known = false) {
    double dev = std::abs(value - ref);
    return {what, dev <= atol, known,
            "got " + fmt("%.6g", value) + ", reference " + fmt("%.6g", ref) + ", abs. dev. " + fmt("%.2e", dev) +
                " (tol " + fmt("%.0e", atol) + ")"};
}

Check exact_check(const std::string& what, double value, double ref) {
    return {what, value == ref, false, "got " + fmt("%.10g", value) + ", reference " + fmt("%.10g", ref)};
}

Check time_check(const std::string& what, double secs, double budget) {
    return {what, secs <= budget, false, fmt("%.1f s", secs) + " (budget " + fmt("%.0f s", budget) + ")"};
}

// positions (1-based) of reference values inside a computed spectrum
std::string locate(const std::vector<double>& spectrum, double ref, double rtol) {
    std::string s;
    for (size_t i = 0; i < spectrum.size(); ++i)
        if (std::abs(spectrum[i] - ref) <= rtol * ref) s += (s.empty() ? "" : ",") + std::to_string(i + 1);
    return s.empty() ? "absent" : "at index " + s;
}

std::vector<BoundsRow> collected;  // every row run, for the guaranteed-bound criterion
std::vector<Domain> collected_domain;

void collect(const std::vector<BoundsRow>& rows, Domain d) {
    for (const auto& r : rows) {
        collected.push_back(r);
        collected_domain.push_back(d);
    }
}

ConstantsOptions table_c1div() {
    ConstantsOptions o;
    o.has_c1div_override = true;
    o.c1div_override = 9.7290;
    return o;
}

Criterion criterion1() {
    Criterion c{1, "constants on structured meshes", {}};
    auto t0 = std::chrono::steady_clock::now();
    ConstantsReport r = compute_constants(generate_square(3));
    double secs = seconds_since(t0);
    ConstantsReport l = compute_constants(generate_lshape(3));
    c.checks.push_back(abs_check("C1(y,T) [sqrt(2 mu_max)]", r.C1yT_table, 1.05409, 1e-3));
    c.checks.push_back(abs_check("C_Q,T", r.C_QT, 0.66666, 1e-3));
    c.checks.push_back(abs_check("C_S [sqrt(mu_S)]", r.C_S_table, 2.25975, 1e-2, true));
    c.checks.push_back(abs_check("C_M", r.c_M, 0.06522, 1e-3, true));
    c.checks.push_back(abs_check("C_M1", r.C_M1, 0.94974, 1e-2));
    c.checks.push_back(abs_check("tilde c (diam)", r.tilde_c, 0.2461, 1e-3));
    c.checks.push_back(exact_check("C_OL", r.C_OL, 13));
    c.checks.push_back(exact_check("C_1,Curl", r.C1_Curl, std::sqrt(3.0)));
    c.checks.push_back(exact_check("C_RD", r.C_RD, 1));
    c.checks.push_back(abs_check("L-shape tilde c (diam)", l.tilde_c, 0.2461, 1e-3, true));
    {
        Triangulation lm = generate_lshape(3);
        double away = 0.0;
        for (int t = 0; t < lm.num_triangles(); ++t) {
            Patch p = make_patch(lm, PatchKind::element, t);
            bool corner = false;
            for (int v : p.vertices) corner = corner || lm.vertices[v].norm() < 1e-12;
            if (!corner) away = std::max(away, l.tilde_c_per_triangle[t]);
        }
        c.checks.push_back({"L-shape tilde c (report only)", true, false,
                            "maximum at the re-entrant corner patch; " + fmt("%.5f", away) +
                                " over patches not touching the corner"});
    }
    c.checks.push_back(exact_check("L-shape C_OL", l.C_OL, 13));
    c.checks.push_back(time_check("runtime (square level 3)", secs, 300));
    c.checks.push_back({"C_2,Curl (report only)", true, false,
                        "table convention " + fmt("%.5f", r.C2_Curl_table) + ", sharp " + fmt("%.5f", r.C2_Curl_sharp) +
                            ", listed 0.9129, deviation " + fmt("%.2e", std::abs(r.C2_Curl_table - 0.9129))});
    double listed_form = r.C_M1 + 3 * r.C_QT + 3 * r.C_S_table;
    c.checks.push_back({"C_1,div (report only)", true, false,
                        "formula " + fmt("%.5f", r.C1_div_formula) + ", with linear C_S " + fmt("%.5f", listed_form) +
                            ", listed 9.7290, deviation " + fmt("%.4f", std::abs(r.C1_div_formula - 9.7290))});
    return c;
}

Criterion criterion2() {
    Criterion c{2, "square levels 1..4 (envelope constants, C_1,div = 9.7290)", {}};
    PipelineConfig cfg;
    cfg.domain = Domain::square;
    cfg.level_from = 1;
    cfg.level_to = 4;
    cfg.k = 2;
    cfg.constants = table_c1div();
    cfg.constants_source = ConstantsSource::envelope;
    auto t0 = std::chrono::steady_clock::now();
    auto rows = run_pipeline(cfg);
    double secs = seconds_since(t0);
    collect(rows, Domain::square);
    const double kappa[] = {0.1443, 0.0721, 0.0356, 0.0180};
    const double l1[] = {9.6000, 9.8305, 9.8612, 9.8676};
    const double l2[] = {20.2871, 20.0235, 19.8205, 19.7601};
    const double mh[] = {9.1034, 4.5499, 2.2592, 1.1359};
    const double lb[] = {0.0121, 0.0481, 0.1921, 0.7186};
    for (int i = 0; i < 4; ++i) {
        const auto& r = rows[i];
        std::string lv = "level " + std::to_string(r.level) + " ";
        if (!r.ok) {
            c.checks.push_back({lv + "pipeline", false, false, r.status});
            continue;
        }
        c.checks.push_back(rel_check(lv + "kappa_h", r.kappa, kappa[i], 0.02));
        c.checks.push_back(rel_check(lv + "lambda^(1)", r.lambda[0], l1[i], 1e-3, true));
        c.checks.push_back(rel_check(lv + "lambda^(2)", r.lambda[1], l2[i], 1e-3, true));
        c.checks.push_back(rel_check(lv + "M_hat", r.m_hat, mh[i], 0.01));
        c.checks.push_back(rel_check(lv + "lower bound^(1)", r.lower[0], lb[i], 0.02));
    }
    // where the listed eigenvalues sit in the true spectrum
    for (int level = 1; level <= 4; ++level) {
        PipelineConfig sc = cfg;
        EvpResult e = maxwell_evp(level_mesh(sc, level), 6);
        std::vector<double> s(e.values.data(), e.values.data() + e.values.size());
        c.checks.push_back({"level " + std::to_string(level) + " spectrum (report only)", true, false,
                            "first = " + fmt("%.6g", s[0]) + "; listed lambda^(1) " + locate(s, l1[level - 1], 1e-3) +
                                ", listed lambda^(2) " + locate(s, l2[level - 1], 1e-3)});
    }
    c.checks.push_back(time_check("runtime", secs, 600));
    return c;
}

Criterion criterion3() {
    Criterion c{3, "square level 1 higher eigenvalues", {}};
    PipelineConfig cfg;
    cfg.level_from = cfg.level_to = 1;
    cfg.k = 5;
    cfg.constants = table_c1div();
    cfg.constants_source = ConstantsSource::envelope;
    auto rows = run_pipeline(cfg);
    collect(rows, Domain::square);
    const double ref[] = {48, 57.6, 75.7128};
    if (!rows[0].ok) {
        c.checks.push_back({"pipeline", false, false, rows[0].status});
        return c;
    }
    for (int i = 0; i < 3; ++i)
        c.checks.push_back(rel_check("lambda^(" + std::to_string(i + 3) + ")", rows[0].lambda[i + 2], ref[i], 1e-3, true));
    EvpResult e = maxwell_evp(level_mesh(cfg, 1), 7);
    std::vector<double> s(e.values.data(), e.values.data() + e.values.size());
    std::string where;
    for (double r : ref) where += fmt("%.6g ", r) + locate(s, r, 1e-3) + "; ";
    c.checks.push_back({"spectrum (report only)", true, false, where});
    return c;
}

Criterion criterion4() {
    Criterion c{4, "L-shape levels 1..3 (longest-edge refinement, envelope constants, C_1,div = 9.7290)", {}};
    PipelineConfig cfg;
    cfg.domain = Domain::lshape;
    cfg.refinement = Refinement::longest_edge;
    cfg.level_from = 1;
    cfg.level_to = 3;
    cfg.k = 3;
    cfg.constants = table_c1div();
    cfg.constants_source = ConstantsSource::envelope;
    auto rows = run_pipeline(cfg);
    collect(rows, Domain::lshape);
    const double l1[] = {1.3180, 1.4157, 1.4526};
    const double kappa[] = {0.1355, 0.0709, 0.0356};
    const double lb[] = {0.0128, 0.0476, 0.1726};
    const double l3[] = {9.1672, 9.6992, 9.8272};
    for (int i = 0; i < 3; ++i) {
        const auto& r = rows[i];
        std::string lv = "level " + std::to_string(r.level) + " ";
        if (!r.ok) {
            c.checks.push_back({lv + "pipeline", false, false, r.status});
            continue;
        }
        c.checks.push_back(rel_check(lv + "lambda^(1)", r.lambda[0], l1[i], 1e-3));
        c.checks.push_back(rel_check(lv + "kappa_h", r.kappa, kappa[i], 0.02, i == 0));
        c.checks.push_back(rel_check(lv + "lower bound^(1)", r.lower[0], lb[i], 0.02, true));
        c.checks.push_back(rel_check(lv + "lambda^(3)", r.lambda[2], l3[i], 1e-3));
        c.checks.push_back({lv + "constants (report only)", true, false,
                            "C_OL " + std::to_string(r.constants->C_OL) + ", tilde c " +
                                fmt("%.5f", r.constants->tilde_c) + ", M_hat " + fmt("%.5f", r.m_hat)});
    }
    return c;
}

Criterion criterion5() {
    Criterion c{5, "guaranteed lower bounds", {}};
    int compared = 0, violations = 0;
    std::string worst;
    for (size_t i = 0; i < collected.size(); ++i) {
        const auto& r = collected[i];
        if (!r.ok) continue;
        auto ref = reference_eigenvalues(collected_domain[i]);
        for (size_t j = 0; j < r.lower.size() && j < ref.size(); ++j) {
            ++compared;
            if (!(r.lower[j] <= ref[j])) {
                ++violations;
                worst += " level " + std::to_string(r.level) + " i=" + std::to_string(j + 1);
            }
        }
    }
    c.checks.push_back({"lower bound <= reference eigenvalue", violations == 0 && compared > 0, false,
                        std::to_string(compared) + " comparisons, " + std::to_string(violations) + " violations" +
                            worst});
    return c;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Criterion criterion6() {
    Criterion c{6, "property suites", {}};
    auto t0 = std::chrono::steady_clock::now();
    const std::string sample = std::string(MAXLOW_DATA_DIR) + "/meshes/sample_unstructured.m2d";
    struct Target {
        std::string name;
        std::function<Triangulation()> mesh;
    };
    std::vector<Target> targets = {{"square level 2", [] { return generate_square(2); }},
                                   {"L-shape level 2", [] { return generate_lshape(2); }},
                                   {"sample unstructured mesh", [&] { return read_mesh(sample); }}};
    for (const auto& t : targets) {
        Triangulation m = t.mesh();
        auto props = run_property_suite(m);
        int failed = 0;
        std::string names;
        for (const auto& p : props)
            if (!p.pass) {
                ++failed;
                names += " " + p.name + "=" + fmt("%.3g", p.value);
            }
        c.checks.push_back({t.name, failed == 0, false,
                            std::to_string(props.size()) + " properties, " + std::to_string(failed) + " failed" + names});
    }
    // determinism golden files
    struct Golden {
        std::vector<std::string> args;
        std::string file;
    };
    std::vector<Golden> golden = {
        {{"bounds", "--levels", "1..2", "-k", "2", "--format", "json"}, "bounds_square_1_2.json"},
        {{"bounds", "--domain", "lshape", "--refinement", "longest-edge", "--levels", "1", "-k", "3", "--format", "csv"},
         "bounds_lshape_le_1.csv"},
        {{"constants", "--levels", "2", "--format", "csv"}, "constants_square_2.csv"},
        {{"evp", "--mesh", sample, "-k", "3", "--format", "csv"}, "evp_sample.csv"},
        {{"kappa", "--levels", "1..3", "--format", "md"}, "kappa_square_1_3.md"},
    };
    int mismatches = 0;
    for (auto& g : golden) {
        for (const char* threads : {"1", "3"}) {
            std::vector<std::string> args = g.args;
            args.insert(args.begin(), "maxlow");
            args.insert(args.end(), {"--threads", threads});
            std::vector<const char*> argv;
            for (auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
            if (code != 0 || out.str() != slurp(std::string(MAXLOW_GOLDEN_DIR) + "/" + g.file)) ++mismatches;
        }
    }
    c.checks.push_back({"determinism golden files", mismatches == 0, false,
                        std::to_string(2 * golden.size()) + " runs (1 and 3 threads), " + std::to_string(mismatches) +
                            " mismatches"});
    c.checks.push_back(time_check("runtime", seconds_since(t0), 180));
    return c;
}

}  // namespace

int main() {
    std::vector<std::function<Criterion()>> all = {criterion1, criterion2, criterion3,
                                                   criterion4, criterion5, criterion6};
    int unexpected = 0;
    for (auto& run : all) {
        Criterion c;
        try {
            c = run();
        } catch (const std::exception& e) {
            c.checks.push_back({"run", false, false, std::string("exception: ") + e.what()});
        }
        bool pass = true, only_known = true;
        for (const auto& k : c.checks) {
            pass = pass && k.pass;
            if (!k.pass && !k.known_failure) only_known = false;
        }
        std::printf("criterion %d: %s  %s%s\n", c.id, pass ? "PASS" : "FAIL", c.title.c_str(),
                    pass ? "" : (only_known ? "  [expected failure, see notes]" : "  [UNEXPECTED]"));
        for (const auto& k : c.checks) {
            const char* tag = k.pass ? (k.known_failure ? "pass (unexpected, expected to fail)" : "pass")
                                     : (k.known_failure ? "FAIL (expected)" : "FAIL");
            std::printf("    %-34s %-10s %s\n", k.what.c_str(), tag, k.detail.c_str());
            if (!k.pass && !k.known_failure) ++unexpected;
        }
        std::fflush(stdout);
    }
    std::printf("%d unexpected failure(s)\n", unexpected);
    return unexpected == 0 ? 0 : 1;
}
