#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "maxlow/cli.hpp"
#include "maxlow/constants.hpp"
#include "maxlow/eigenbounds.hpp"
#include "maxlow/galerkin.hpp"
#include "maxlow/validate.hpp"

namespace py = pybind11;
using namespace maxlow;

namespace {

Refinement parse_refinement(const std::string& s) {
    if (s == "red") return Refinement::red;
    if (s == "longest-edge" || s == "longest_edge") return Refinement::longest_edge;
    throw py::value_error("refinement must be 'red' or 'longest-edge'");
}

Eigen::MatrixXd vertex_array(const Triangulation& m) {
    Eigen::MatrixXd v(m.num_vertices(), 2);
    for (int i = 0; i < m.num_vertices(); ++i) v.row(i) = m.vertices[i].transpose();
    return v;
}

Eigen::MatrixXi triangle_array(const Triangulation& m) {
    Eigen::MatrixXi t(m.num_triangles(), 3);
    for (int i = 0; i < m.num_triangles(); ++i)
        for (int k = 0; k < 3; ++k) t(i, k) = m.triangles[i][k];
    return t;
}

Triangulation from_arrays(const Eigen::MatrixXd& v, const Eigen::MatrixXi& t) {
    if (v.cols() != 2 || t.cols() != 3) throw py::value_error("expected vertices (n, 2) and triangles (m, 3)");
    std::vector<Vec2> verts(v.rows());
    for (int i = 0; i < v.rows(); ++i) verts[i] = Vec2(v(i, 0), v(i, 1));
    std::vector<std::array<int, 3>> tris(t.rows());
    for (int i = 0; i < t.rows(); ++i) tris[i] = {t(i, 0), t(i, 1), t(i, 2)};
    return build_triangulation(std::move(verts), std::move(tris));
}

py::dict constants_dict(const ConstantsReport& c) {
    py::dict d;
    d["tilde_c"] = c.tilde_c;
    d["tilde_c_hT"] = c.tilde_c_hT;
    d["C1yT"] = c.C1yT_max;
    d["C1yT_table"] = c.C1yT_table;
    d["C_QT"] = c.C_QT;
    d["C_S"] = c.C_S_max;
    d["C_S_table"] = c.C_S_table;
    d["c_M"] = c.c_M;
    d["C_M1"] = c.C_M1;
    d["C1_Curl"] = c.C1_Curl;
    d["C2_Curl_sharp"] = c.C2_Curl_sharp;
    d["C2_Curl_table"] = c.C2_Curl_table;
    d["C2_Curl"] = c.C2_Curl;
    d["C1_div_formula"] = c.C1_div_formula;
    d["C1_div"] = c.C1_div;
    d["C2_div"] = c.C2_div;
    d["C_OL"] = c.C_OL;
    d["C_RD"] = c.C_RD;
    d["h_max"] = c.h_max;
    d["patches"] = c.patches;
    d["patch_classes"] = c.patch_classes;
    return d;
}

ConstantsOptions constants_options(py::object c1div, int threads) {
    ConstantsOptions o;
    o.threads = threads;
    if (!c1div.is_none()) {
        o.has_c1div_override = true;
        o.c1div_override = c1div.cast<double>();
        if (!(o.c1div_override > 0)) throw py::value_error("c1div must be positive");
    }
    return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Guaranteed lower bounds for 2D Maxwell eigenvalues with lowest-order Nedelec elements";

    py::register_exception<MeshError>(m, "MeshError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<Triangulation>(m, "Mesh")
        .def(py::init(&from_arrays), py::arg("vertices"), py::arg("triangles"))
        .def_property_readonly("vertices", &vertex_array)
        .def_property_readonly("triangles", &triangle_array)
        .def_property_readonly("num_vertices", &Triangulation::num_vertices)
        .def_property_readonly("num_edges", &Triangulation::num_edges)
        .def_property_readonly("num_triangles", &Triangulation::num_triangles)
        .def_property_readonly("h_max", &Triangulation::h_max)
        .def_property_readonly("area", &Triangulation::total_area)
        .def("refine", [](const Triangulation& t, const std::string& kind) { return refine(t, parse_refinement(kind)); },
             py::arg("kind") = "red")
        .def("validate", [](const Triangulation& t) { return validate(t); })
        .def("to_string", &format_mesh)
        .def("write", [](const Triangulation& t, const std::string& path) { write_mesh(t, path); })
        .def("__repr__", [](const Triangulation& t) {
            std::ostringstream s;
            s << "<maxlow.Mesh V=" << t.num_vertices() << " E=" << t.num_edges() << " T=" << t.num_triangles() << ">";
            return s.str();
        });

    m.def("square", [](int l, const std::string& r) { return generate_square(l, parse_refinement(r)); },
          py::arg("level") = 0, py::arg("refinement") = "red");
    m.def("lshape", [](int l, const std::string& r) { return generate_lshape(l, parse_refinement(r)); },
          py::arg("level") = 0, py::arg("refinement") = "red");
    m.def("read_mesh", &read_mesh, py::arg("path"));
    m.def("parse_mesh", &parse_mesh, py::arg("text"));

    m.def("constants",
          [](const Triangulation& mesh, py::object c1div, int threads) {
              auto opts = constants_options(c1div, threads);
              ConstantsReport r;
              {
                  py::gil_scoped_release release;
                  r = compute_constants(mesh, opts);
              }
              return constants_dict(r);
          },
          py::arg("mesh"), py::arg("c1div") = py::none(), py::arg("threads") = 1);

    m.def("kappa",
          [](const Triangulation& mesh) {
              KappaResult r;
              {
                  py::gil_scoped_release release;
                  r = kappa_h(mesh);
              }
              py::dict d;
              d["kappa"] = r.kappa;
              d["mu"] = r.mu;
              d["iterations"] = r.iterations;
              d["converged"] = r.converged;
              return d;
          },
          py::arg("mesh"));

    m.def("eigenvalues",
          [](const Triangulation& mesh, int k) {
              if (k < 1) throw py::value_error("k must be positive");
              py::gil_scoped_release release;
              return Eigen::VectorXd(maxwell_evp(mesh, k).values);
          },
          py::arg("mesh"), py::arg("k") = 1);

    m.def("lower_bound", &lower_bound, py::arg("lambda_h"), py::arg("m_hat"));

    m.def("bounds",
          [](const std::string& domain, int level_from, int level_to, int k, const std::string& refinement,
             py::object c1div, const std::string& constants_source, int threads) {
              PipelineConfig cfg;
              if (domain == "square") cfg.domain = Domain::square;
              else if (domain == "lshape") cfg.domain = Domain::lshape;
              else throw py::value_error("domain must be 'square' or 'lshape'");
              if (k < 1) throw py::value_error("k must be positive");
              if (level_from < 0 || level_to < level_from) throw py::value_error("invalid level range");
              cfg.level_from = level_from;
              cfg.level_to = level_to;
              cfg.k = k;
              cfg.refinement = parse_refinement(refinement);
              cfg.constants = constants_options(c1div, threads);
              if (constants_source == "own") cfg.constants_source = ConstantsSource::own;
              else if (constants_source == "envelope") cfg.constants_source = ConstantsSource::envelope;
              else throw py::value_error("constants_source must be 'own' or 'envelope'");
              cfg.threads = threads;
              std::vector<BoundsRow> rows;
              {
                  py::gil_scoped_release release;
                  rows = run_pipeline(cfg);
              }
              py::list out;
              for (const auto& r : rows) {
                  py::dict d;
                  d["level"] = r.level;
                  d["h_max"] = r.h_max;
                  d["kappa"] = r.kappa;
                  d["c_hat"] = r.c_hat;
                  d["m_hat"] = r.m_hat;
                  d["lambda"] = r.lambda;
                  d["lower_bound"] = r.lower;
                  d["ok"] = r.ok;
                  d["status"] = r.status;
                  if (r.constants) d["constants"] = constants_dict(*r.constants);
                  out.append(d);
              }
              return out;
          },
          py::arg("domain") = "square", py::arg("level_from") = 1, py::arg("level_to") = 1, py::arg("k") = 1,
          py::arg("refinement") = "red", py::arg("c1div") = py::none(), py::arg("constants_source") = "own",
          py::arg("threads") = 1);

    m.def("validate",
          [](const Triangulation& mesh, int samples) {
              ValidateOptions o;
              o.stability_samples = samples;
              std::vector<PropertyResult> props;
              {
                  py::gil_scoped_release release;
                  props = run_property_suite(mesh, o);
              }
              py::list out;
              for (const auto& p : props) {
                  py::dict d;
                  d["name"] = p.name;
                  d["pass"] = p.pass;
                  d["value"] = p.value;
                  d["tolerance"] = p.tolerance;
                  d["detail"] = p.detail;
                  out.append(d);
              }
              return out;
          },
          py::arg("mesh"), py::arg("samples") = 200);

    m.def("cli",
          [](std::vector<std::string> args) {
              args.insert(args.begin(), "maxlow");
              std::vector<const char*> argv;
              for (auto& a : args) argv.push_back(a.c_str());
              std::ostringstream out, err;
              int code;
              {
                  py::gil_scoped_release release;
                  code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
              }
              return py::make_tuple(code, out.str(), err.str());
          },
          py::arg("args"), "Runs the command line tool in-process; returns (exit_code, stdout, stderr).");
}
