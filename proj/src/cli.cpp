#include "maxlow/cli.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "maxlow/eigenbounds.hpp"
#include "maxlow/log.hpp"
#include "maxlow/validate.hpp"

namespace maxlow {

namespace {

using nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string verb;
    std::string domain;  // square unless given
    std::string mesh;
    std::string levels;
    int k = 1;
    std::string format = "csv";
    std::string normalization = "diam";
    std::string c1div = "formula";
    std::string refinement = "red";
    std::string constants_source = "own";
    std::string c2curl = "table";
    int threads = 1;
    std::string out;
    double eig_tol = 1e-9;
    double power_tol = 1e-8;
    int subrefinements = 3;
    bool no_cache = false;
    bool timings = false;
    int samples = 200;
    std::uint64_t seed = 0x5eed2024u;
    std::string inject_fault;
};

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

double jnum(double x) { return std::stod(num(x)); }

std::pair<int, int> parse_levels(const std::string& s) {
    auto to_int = [&](const std::string& t) {
        size_t pos = 0;
        int v = 0;
        try {
            v = std::stoi(t, &pos);
        } catch (const std::exception&) {
            throw ConfigError("invalid --levels value '" + s + "' (expected a or a..b)");
        }
        if (pos != t.size() || v < 0) throw ConfigError("invalid --levels value '" + s + "' (expected a or a..b)");
        return v;
    };
    auto dots = s.find("..");
    if (dots == std::string::npos) {
        int a = to_int(s);
        return {a, a};
    }
    int a = to_int(s.substr(0, dots)), b = to_int(s.substr(dots + 2));
    if (b < a) throw ConfigError("empty --levels range '" + s + "'");
    return {a, b};
}

PipelineConfig to_pipeline(const RunConfig& rc) {
    PipelineConfig pc;
    if (!rc.mesh.empty()) {
        pc.domain = Domain::file;
        pc.mesh_path = rc.mesh;
    } else {
        pc.domain = rc.domain == "lshape" ? Domain::lshape : Domain::square;
    }
    std::string lv = rc.levels;
    if (lv.empty()) lv = !rc.mesh.empty() ? "0" : (rc.verb == "validate" ? "2" : "1");
    auto [a, b] = parse_levels(lv);
    if (pc.domain != Domain::file && a < 1) throw ConfigError("levels start at 1 for built-in domains");
    pc.level_from = a;
    pc.level_to = b;
    if (rc.k < 1) throw ConfigError("-k must be at least 1");
    pc.k = rc.k;
    if (rc.threads < 1) throw ConfigError("--threads must be at least 1");
    pc.threads = rc.threads;
    pc.refinement = rc.refinement == "longest-edge" ? Refinement::longest_edge : Refinement::red;
    pc.normalization = rc.normalization == "hT" ? TildeCNormalization::hT : TildeCNormalization::diam;
    pc.constants_source = rc.constants_source == "envelope" ? ConstantsSource::envelope : ConstantsSource::own;
    pc.constants.c2curl = rc.c2curl == "sharp" ? C2CurlMode::sharp : C2CurlMode::table;
    pc.constants.use_cache = !rc.no_cache;
    if (rc.subrefinements < 0) throw ConfigError("--subrefinements must be non-negative");
    pc.constants.subrefinements = rc.subrefinements;
    if (!(rc.eig_tol > 0) || !(rc.power_tol > 0)) throw ConfigError("solver tolerances must be positive");
    pc.eig.tol = rc.eig_tol;
    pc.power.tol = rc.power_tol;
    pc.power.seed = rc.seed;
    pc.eig.seed = rc.seed;
    if (rc.c1div != "formula") {
        std::string v = rc.c1div;
        const std::string prefix = "table-override:";
        if (v.rfind(prefix, 0) == 0) v = v.substr(prefix.size());
        double x = 0.0;
        size_t pos = 0;
        try {
            x = std::stod(v, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != v.size() || !(x > 0) || !std::isfinite(x))
            throw ConfigError("--c1div expects 'formula' or a positive number, got '" + rc.c1div + "'");
        pc.constants.has_c1div_override = true;
        pc.constants.c1div_override = x;
    }
    if (!rc.inject_fault.empty() && rc.inject_fault != "curl-sign")
        throw ConfigError("unknown fault '" + rc.inject_fault + "'");
    if (pc.domain == Domain::file) {
        try {
            (void)read_mesh(pc.mesh_path);
        } catch (const MeshError& e) {
            throw ConfigError(e.what());
        }
    }
    return pc;
}

std::string domain_name(const PipelineConfig& pc) {
    switch (pc.domain) {
        case Domain::square: return "square";
        case Domain::lshape: return "lshape";
        case Domain::file: return "file";
    }
    return "?";
}

ordered_json config_json(const RunConfig& rc, const PipelineConfig& pc) {
    ordered_json j;
    j["domain"] = domain_name(pc);
    if (pc.domain == Domain::file) j["mesh"] = pc.mesh_path;
    j["levels"] = {pc.level_from, pc.level_to};
    j["k"] = pc.k;
    j["refinement"] = rc.refinement;
    j["tilde_c_normalization"] = rc.normalization;
    j["c1div"] = pc.constants.has_c1div_override ? ordered_json(jnum(pc.constants.c1div_override)) : ordered_json("formula");
    j["constants_source"] = rc.constants_source;
    j["c2curl"] = rc.c2curl;
    return j;
}

// ---- table helpers ----

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string csv(const Table& t) {
    auto esc = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string o = "\"";
        for (char c : s) o += c == '"' ? std::string("\"\"") : std::string(1, c);
        return o + "\"";
    };
    std::ostringstream os;
    for (size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << esc(t.header[i]);
    os << "\n";
    for (const auto& r : t.rows) {
        for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << esc(r[i]);
        os << "\n";
    }
    return os.str();
}

std::string markdown(const Table& t) {
    std::ostringstream os;
    os << "|";
    for (const auto& h : t.header) os << " " << h << " |";
    os << "\n|";
    for (size_t i = 0; i < t.header.size(); ++i) os << "---|";
    os << "\n";
    for (const auto& r : t.rows) {
        os << "|";
        for (const auto& c : r) os << " " << c << " |";
        os << "\n";
    }
    return os.str();
}

bool any_failed(const std::vector<BoundsRow>& rows) {
    for (const auto& r : rows)
        if (!r.ok) return true;
    return false;
}

int exit_for(const std::vector<BoundsRow>& rows) {
    for (const auto& r : rows)
        if (!r.ok) return exit_solver_failure;
    return exit_ok;
}

// ---- constants ----

struct NamedValue {
    const char* name;
    double value;
    bool integer = false;
};

std::vector<NamedValue> constant_values(const ConstantsReport& c) {
    return {{"tilde_c", c.tilde_c},
            {"tilde_c_hT", c.tilde_c_hT},
            {"C1yT", c.C1yT_max},
            {"C1yT_table", c.C1yT_table},
            {"C_QT", c.C_QT},
            {"C_S", c.C_S_max},
            {"C_S_table", c.C_S_table},
            {"c_M", c.c_M},
            {"C_M1", c.C_M1},
            {"C1_Curl", c.C1_Curl},
            {"C2_Curl_sharp", c.C2_Curl_sharp},
            {"C2_Curl_table", c.C2_Curl_table},
            {"C2_Curl", c.C2_Curl},
            {"C1_div_formula", c.C1_div_formula},
            {"C1_div", c.C1_div},
            {"C2_div", c.C2_div},
            {"C_OL", static_cast<double>(c.C_OL), true},
            {"C_RD", static_cast<double>(c.C_RD), true}};
}

std::string emit_constants(const RunConfig& rc, const PipelineConfig& pc, const std::vector<BoundsRow>& rows) {
    if (rc.format == "json") {
        ordered_json j;
        j["schema"] = "maxlow.constants";
        j["schema_version"] = kSchemaVersion;
        j["config"] = config_json(rc, pc);
        j["complete"] = !any_failed(rows);
        ordered_json arr = ordered_json::array();
        for (const auto& r : rows) {
            ordered_json o;
            o["level"] = r.level;
            o["vertices"] = r.vertices;
            o["edges"] = r.edges;
            o["triangles"] = r.triangles;
            o["h_max"] = jnum(r.h_max);
            o["status"] = r.status;
            if (r.constants) {
                const auto& c = *r.constants;
                for (const auto& nv : constant_values(c))
                    o[nv.name] = nv.integer ? ordered_json(static_cast<int>(nv.value)) : ordered_json(jnum(nv.value));
                o["C1_div_overridden"] = c.C1_div_overridden;
                o["c_M_skipped_edges"] = c.c_M_skipped;
                o["argmax"] = {{"tilde_c_triangle", c.argmax_tilde_c},
                               {"C1yT_vertex", c.argmax_C1},
                               {"C_S_edge", c.argmax_C_S},
                               {"c_M_edge", c.argmax_c_M},
                               {"C_M1_triangle", c.argmax_C_M1}};
                o["patches"] = c.patches;
                o["patch_classes"] = c.patch_classes;
                if (rc.timings) o["seconds"] = c.seconds;
            }
            arr.push_back(o);
        }
        j["rows"] = arr;
        return j.dump(2) + "\n";
    }
    if (rc.format == "md") {
        Table t;
        t.header.push_back("constant");
        for (const auto& r : rows) t.header.push_back("level " + std::to_string(r.level));
        std::vector<std::string> hrow{"h/√2"};
        for (const auto& r : rows) hrow.push_back(num(r.h_over_sqrt2));
        t.rows.push_back(hrow);
        for (size_t i = 0; i < constant_values(ConstantsReport{}).size(); ++i) {
            std::vector<std::string> line{constant_values(ConstantsReport{})[i].name};
            for (const auto& r : rows) line.push_back(r.constants ? num(constant_values(*r.constants)[i].value) : "");
            t.rows.push_back(line);
        }
        if (any_failed(rows)) {
            std::vector<std::string> st{"status"};
            for (const auto& r : rows) st.push_back(r.status);
            t.rows.push_back(st);
        }
        return markdown(t);
    }
    Table t;
    t.header = {"level", "vertices", "edges", "triangles", "h_max"};
    for (const auto& nv : constant_values(ConstantsReport{})) t.header.push_back(nv.name);
    t.header.push_back("patch_classes");
    if (rc.timings) t.header.push_back("seconds");
    t.header.push_back("status");
    for (const auto& r : rows) {
        std::vector<std::string> line{std::to_string(r.level), std::to_string(r.vertices), std::to_string(r.edges),
                                      std::to_string(r.triangles), num(r.h_max)};
        for (const auto& nv : constant_values(r.constants ? *r.constants : ConstantsReport{}))
            line.push_back(r.constants ? num(nv.value) : "");
        line.push_back(r.constants ? std::to_string(r.constants->patch_classes) : "");
        if (rc.timings) line.push_back(num(r.seconds_constants));
        line.push_back(r.status);
        t.rows.push_back(line);
    }
    return csv(t);
}

// ---- kappa / evp / bounds ----

std::string emit_rows(const RunConfig& rc, const PipelineConfig& pc, const std::vector<BoundsRow>& rows) {
    const bool with_kappa = pc.want_kappa, with_evp = pc.want_evp, with_bounds = pc.want_constants;
    if (rc.format == "json") {
        ordered_json j;
        j["schema"] = "maxlow." + rc.verb;
        j["schema_version"] = kSchemaVersion;
        j["config"] = config_json(rc, pc);
        j["complete"] = !any_failed(rows);
        ordered_json arr = ordered_json::array();
        for (const auto& r : rows) {
            ordered_json o;
            o["level"] = r.level;
            o["vertices"] = r.vertices;
            o["edges"] = r.edges;
            o["triangles"] = r.triangles;
            o["h_max"] = jnum(r.h_max);
            o["h_over_sqrt2"] = jnum(r.h_over_sqrt2);
            if (with_kappa) o["kappa"] = jnum(r.kappa);
            if (with_bounds && r.constants) {
                o["c_hat"] = jnum(r.c_hat);
                o["C1_div"] = jnum(r.constants->C1_div);
                o["C_OL"] = r.constants->C_OL;
                o["m_hat"] = jnum(r.m_hat);
            }
            if (with_evp) {
                ordered_json l = ordered_json::array();
                for (double x : r.lambda) l.push_back(jnum(x));
                o["lambda"] = l;
            }
            if (with_bounds) {
                ordered_json l = ordered_json::array();
                for (double x : r.lower) l.push_back(jnum(x));
                o["lower_bound"] = l;
            }
            if (rc.timings) {
                o["seconds"] = {{"constants", r.seconds_constants}, {"kappa", r.seconds_kappa}, {"evp", r.seconds_evp}};
            }
            o["status"] = r.status;
            arr.push_back(o);
        }
        j["rows"] = arr;
        return j.dump(2) + "\n";
    }
    const bool md = rc.format == "md";
    Table t;
    if (md) {
        t.header.push_back("h/√2");
        if (with_kappa) t.header.push_back("κ_h");
        if (with_bounds) t.header.push_back("M̂_h");
        for (int i = 1; i <= pc.k; ++i) {
            if (with_evp) t.header.push_back("λ_h^(" + std::to_string(i) + ")");
            if (with_bounds) t.header.push_back("lower bound^(" + std::to_string(i) + ")");
        }
        if (any_failed(rows)) t.header.push_back("status");
    } else {
        t.header = {"level", "h_max", "h_over_sqrt2"};
        if (with_kappa) t.header.push_back("kappa");
        if (with_bounds) {
            for (const char* h : {"c_hat", "C1_div", "C_OL", "m_hat"}) t.header.push_back(h);
        }
        for (int i = 1; i <= pc.k; ++i)
            if (with_evp) t.header.push_back("lambda_" + std::to_string(i));
        for (int i = 1; i <= pc.k; ++i)
            if (with_bounds) t.header.push_back("lower_bound_" + std::to_string(i));
        if (rc.timings)
            for (const char* h : {"seconds_constants", "seconds_kappa", "seconds_evp"}) t.header.push_back(h);
        t.header.push_back("status");
    }
    for (const auto& r : rows) {
        auto at = [](const std::vector<double>& v, int i) { return i < static_cast<int>(v.size()) ? num(v[i]) : ""; };
        std::vector<std::string> line;
        if (md) {
            line.push_back(num(r.h_over_sqrt2));
            if (with_kappa) line.push_back(r.ok ? num(r.kappa) : "");
            if (with_bounds) line.push_back(r.ok ? num(r.m_hat) : "");
            for (int i = 0; i < pc.k; ++i) {
                if (with_evp) line.push_back(at(r.lambda, i));
                if (with_bounds) line.push_back(at(r.lower, i));
            }
            if (any_failed(rows)) line.push_back(r.status);
        } else {
            line = {std::to_string(r.level), num(r.h_max), num(r.h_over_sqrt2)};
            if (with_kappa) line.push_back(r.ok ? num(r.kappa) : "");
            if (with_bounds) {
                bool c = r.ok && r.constants.has_value();
                line.push_back(c ? num(r.c_hat) : "");
                line.push_back(c ? num(r.constants->C1_div) : "");
                line.push_back(c ? std::to_string(r.constants->C_OL) : "");
                line.push_back(c ? num(r.m_hat) : "");
            }
            for (int i = 0; i < pc.k; ++i)
                if (with_evp) line.push_back(at(r.lambda, i));
            for (int i = 0; i < pc.k; ++i)
                if (with_bounds) line.push_back(at(r.lower, i));
            if (rc.timings)
                for (double s : {r.seconds_constants, r.seconds_kappa, r.seconds_evp}) line.push_back(num(s));
            line.push_back(r.status);
        }
        t.rows.push_back(line);
    }
    return md ? markdown(t) : csv(t);
}

// ---- validate ----

struct ValidateLevel {
    int level = 0;
    std::vector<PropertyResult> props;
    bool all_pass = true;
};

std::string emit_validate(const RunConfig& rc, const PipelineConfig& pc, const std::vector<ValidateLevel>& levels) {
    bool all = true;
    for (const auto& l : levels) all = all && l.all_pass;
    if (rc.format == "json") {
        ordered_json j;
        j["schema"] = "maxlow.validate";
        j["schema_version"] = kSchemaVersion;
        j["config"] = config_json(rc, pc);
        j["all_pass"] = all;
        ordered_json arr = ordered_json::array();
        for (const auto& l : levels) {
            ordered_json o;
            o["level"] = l.level;
            o["all_pass"] = l.all_pass;
            ordered_json ps = ordered_json::array();
            for (const auto& p : l.props)
                ps.push_back({{"name", p.name},
                              {"pass", p.pass},
                              {"value", jnum(p.value)},
                              {"tolerance", jnum(p.tolerance)},
                              {"detail", p.detail}});
            o["properties"] = ps;
            arr.push_back(o);
        }
        j["levels"] = arr;
        return j.dump(2) + "\n";
    }
    Table t;
    t.header = {"level", "property", "pass", "value", "tolerance", "detail"};
    for (const auto& l : levels)
        for (const auto& p : l.props)
            t.rows.push_back({std::to_string(l.level), p.name, p.pass ? "pass" : "FAIL", num(p.value), num(p.tolerance),
                              p.detail});
    return rc.format == "md" ? markdown(t) : csv(t);
}

void add_common(CLI::App* sub, RunConfig& rc) {
    sub->add_option("--domain", rc.domain, "Built-in domain")->check(CLI::IsMember({"square", "lshape"}));
    sub->add_option("--mesh", rc.mesh, "Mesh file in mesh2d v1 format (levels = refinements of it)");
    sub->add_option("--levels", rc.levels, "Level or range a..b");
    sub->add_option("-k", rc.k, "Number of eigenvalues");
    sub->add_option("--format", rc.format, "Output format")->check(CLI::IsMember({"csv", "json", "md"}));
    sub->add_option("--tilde-c-normalization", rc.normalization, "Normalization of the Poincare constant")
        ->check(CLI::IsMember({"diam", "hT"}));
    sub->add_option("--c1div", rc.c1div, "C_1,div: 'formula' or a positive value");
    sub->add_option("--refinement", rc.refinement, "Refinement rule")->check(CLI::IsMember({"red", "longest-edge"}));
    sub->add_option("--constants", rc.constants_source, "Constants of the level mesh or envelope with level 3")
        ->check(CLI::IsMember({"own", "envelope"}));
    sub->add_option("--c2curl", rc.c2curl, "C_2,Curl convention")->check(CLI::IsMember({"table", "sharp"}));
    sub->add_option("--threads", rc.threads, "Worker threads");
    sub->add_option("--out", rc.out, "Output file (default stdout)");
    sub->add_option("--eig-tol", rc.eig_tol, "Eigensolver tolerance");
    sub->add_option("--power-tol", rc.power_tol, "Power method tolerance");
    sub->add_option("--subrefinements", rc.subrefinements, "Refinements of element patches for the Poincare bound");
    sub->add_flag("--no-cache", rc.no_cache, "Disable the patch geometry cache");
    sub->add_flag("--timings", rc.timings, "Include wall-clock timings in the output");
    sub->add_option("--samples", rc.samples, "Random samples of the stability certificate (validate)");
    sub->add_option("--seed", rc.seed, "Random seed");
    sub->add_option("--inject-fault", rc.inject_fault, "Test hook")->group("");
}

int execute(RunConfig& rc, std::ostream& out, std::ostream& err) {
    PipelineConfig pc = to_pipeline(rc);
    if (rc.samples < 1) throw ConfigError("--samples must be at least 1");
    if (!rc.mesh.empty() && !rc.domain.empty())
        throw ConfigError("--mesh and --domain are mutually exclusive");
    std::string text;
    int code = exit_ok;
    if (rc.verb == "validate") {
        ValidateOptions vo;
        vo.stability_samples = rc.samples;
        vo.seed = rc.seed;
        vo.flip_curl_sign = rc.inject_fault == "curl-sign";
        vo.threads = rc.threads;
        std::vector<ValidateLevel> levels;
        for (int l = pc.level_from; l <= pc.level_to; ++l) {
            ValidateLevel vl;
            vl.level = l;
            Triangulation mesh = level_mesh(pc, l);
            try {
                vl.props = run_property_suite(mesh, vo);
            } catch (const SolverError& e) {
                err << "maxlow: solver failure while validating level " << l << ": " << e.what() << "\n";
                return exit_solver_failure;
            }
            for (const auto& p : vl.props) vl.all_pass = vl.all_pass && p.pass;
            if (!vl.all_pass) code = exit_validation_failed;
            levels.push_back(std::move(vl));
        }
        text = emit_validate(rc, pc, levels);
    } else {
        pc.want_constants = rc.verb == "constants" || rc.verb == "bounds";
        pc.want_kappa = rc.verb == "kappa" || rc.verb == "bounds";
        pc.want_evp = rc.verb == "evp" || rc.verb == "bounds";
        auto rows = run_pipeline(pc);
        for (const auto& r : rows)
            if (!r.ok) err << "maxlow: level " << r.level << " " << r.status << "\n";
        text = rc.verb == "constants" ? emit_constants(rc, pc, rows) : emit_rows(rc, pc, rows);
        code = exit_for(rows);
    }
    if (rc.out.empty()) {
        out << text;
    } else {
        std::ofstream f(rc.out, std::ios::binary);
        if (!f) throw ConfigError("cannot open output file " + rc.out);
        f << text;
        if (!f) throw ConfigError("cannot write output file " + rc.out);
    }
    return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig rc;
    CLI::App app{"Guaranteed lower bounds for 2D Maxwell eigenvalues with lowest-order edge elements", "maxlow"};
    app.require_subcommand(1);
    struct Verb {
        const char* name;
        const char* help;
    };
    const Verb verbs[] = {{"constants", "Local stability constants per level"},
                          {"kappa", "Hypercircle constant kappa_h per level"},
                          {"evp", "Discrete Maxwell eigenvalues per level"},
                          {"bounds", "Full pipeline: kappa_h, M_h and guaranteed lower bounds"},
                          {"validate", "Property suites on the level meshes"}};
    for (const auto& v : verbs) {
        CLI::App* sub = app.add_subcommand(v.name, v.help);
        add_common(sub, rc);
        sub->callback([&rc, name = std::string(v.name)] { rc.verb = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return exit_ok;
        }
        err << "maxlow: " << e.what() << "\n";
        return exit_config_error;
    }
    try {
        return execute(rc, out, err);
    } catch (const ConfigError& e) {
        err << "maxlow: " << e.what() << "\n";
        return exit_config_error;
    } catch (const MeshError& e) {
        err << "maxlow: " << e.what() << "\n";
        return exit_config_error;
    } catch (const std::invalid_argument& e) {
        err << "maxlow: " << e.what() << "\n";
        return exit_config_error;
    } catch (const SolverError& e) {
        err << "maxlow: solver failure: " << e.what() << "\n";
        return exit_solver_failure;
    } catch (const std::exception& e) {
        err << "maxlow: " << e.what() << "\n";
        return exit_solver_failure;
    }
}

}  // namespace maxlow
