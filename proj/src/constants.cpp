#include "maxlow/constants.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include <Eigen/Dense>

#include "maxlow/log.hpp"
#include "maxlow/parallel.hpp"
#include "maxlow/solvers.hpp"

namespace maxlow {

namespace {

int local_index(const std::vector<int>& sorted, int g) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), g);
    if (it == sorted.end() || *it != g) return -1;
    return static_cast<int>(it - sorted.begin());
}

SpMat row_matrix(const Vec& w) {
    SpMat c(1, w.size());
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < w.size(); ++i)
        if (w[i] != 0.0) trip.emplace_back(0, i, w[i]);
    c.setFromTriplets(trip.begin(), trip.end());
    return c;
}

double vertex_patch_measure(const Triangulation& m, int v) {
    double a = 0.0;
    for (int t : m.vertex_tris[v]) a += m.area(t);
    return a;
}

void require_vertex_of(const Triangulation& m, int y, int t) {
    if (t < 0 || t >= m.num_triangles() || y < 0 || y >= m.num_vertices() || m.local_vertex(t, y) < 0)
        throw MeshError("vertex " + std::to_string(y) + " is not a vertex of triangle " + std::to_string(t));
}

void require_edge_of(const Triangulation& m, int e, int t) {
    if (t < 0 || t >= m.num_triangles() || e < 0 || e >= m.num_edges() ||
        std::find(m.tri_edges[t].begin(), m.tri_edges[t].end(), e) == m.tri_edges[t].end())
        throw MeshError("edge " + std::to_string(e) + " is not an edge of triangle " + std::to_string(t));
}

// zero-mean S1 Neumann data on the triangles `tris` of mesh m
struct LocalNeumann {
    std::vector<int> verts;   // global (in m) vertex ids, ascending
    Mat K;
    Vec mean_w;
    Eigen::FullPivLU<Mat> lu;  // of [[K, w], [w^T, 0]]
};

LocalNeumann local_neumann(const Triangulation& m, const std::vector<int>& tris) {
    LocalNeumann ln;
    for (int t : tris)
        for (int v : m.triangles[t]) ln.verts.push_back(v);
    std::sort(ln.verts.begin(), ln.verts.end());
    ln.verts.erase(std::unique(ln.verts.begin(), ln.verts.end()), ln.verts.end());
    const int n = static_cast<int>(ln.verts.size());
    ln.K = Mat::Zero(n, n);
    ln.mean_w = Vec::Zero(n);
    for (int t : tris) {
        auto g = element_geometry(m, t);
        for (int p = 0; p < 3; ++p) {
            int i = local_index(ln.verts, m.triangles[t][p]);
            ln.mean_w[i] += g.area / 3.0;
            for (int q = 0; q < 3; ++q)
                ln.K(i, local_index(ln.verts, m.triangles[t][q])) += g.area * g.grad[p].dot(g.grad[q]);
        }
    }
    Mat S = Mat::Zero(n + 1, n + 1);
    S.topLeftCorner(n, n) = ln.K;
    S.block(0, n, n, 1) = ln.mean_w;
    S.block(n, 0, 1, n) = ln.mean_w.transpose();
    ln.lu.compute(S);
    return ln;
}

}  // namespace

PoincarePatch poincare_patch(const Triangulation& mesh, int t, const ConstantsOptions& opts) {
    Patch p = make_patch(mesh, PatchKind::element, t);
    Triangulation sm = submesh(mesh, p);
    for (int r = 0; r < opts.subrefinements; ++r) sm = red_refine(sm);
    FeSpace cr = make_space(sm, Family::CR);
    SpMat K = assemble_stiffness_grad(cr);
    SpMat M = assemble_mass(cr);
    SpMat C = row_matrix(M * Vec::Ones(cr.ndof));
    EigOptions eo;
    eo.tol = 1e-10;
    EigResult er = smallest_eigs_constrained(K, M, C, 1, eo);
    PoincarePatch out;
    out.lambda_cr = er.values[0];
    out.H = sm.h_max();
    out.lambda_hat = out.lambda_cr / (1.0 + opts.kappa2 * out.lambda_cr * out.H * out.H);
    out.bound = 1.0 / std::sqrt(out.lambda_hat);
    out.diam = p.diameter;
    out.h_T = mesh.diameter(t);
    return out;
}

PoincareResult poincare_tilde_c(const Triangulation& mesh, const ConstantsOptions& opts) {
    ConstantsReport r = compute_constants(mesh, opts);
    PoincareResult out;
    out.tilde_c = r.tilde_c;
    out.tilde_c_hT = r.tilde_c_hT;
    out.argmax = r.argmax_tilde_c;
    out.per_triangle = r.tilde_c_per_triangle;
    out.per_triangle_hT.resize(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        Patch p = make_patch(mesh, PatchKind::element, t);
        out.per_triangle_hT[t] = out.per_triangle[t] * p.diameter / mesh.diameter(t);
    }
    return out;
}

namespace {

double c1_vertex(const Triangulation& mesh, int y) {
    LocalNeumann ln = local_neumann(mesh, mesh.vertex_tris[y]);
    Vec ell = Vec::Zero(ln.K.rows());
    ell[local_index(ln.verts, y)] = 1.0;
    return rank_one_max_eig(ell, ln.K, Mat(ln.mean_w.transpose()));
}

}  // namespace

double c1_yT(const Triangulation& mesh, int y, int t) {
    require_vertex_of(mesh, y, t);
    return c1_vertex(mesh, y);
}

double c_QT(const Triangulation& mesh, int y, int t) {
    require_vertex_of(mesh, y, t);
    auto b = basis_norms(mesh, t, Entity::vertex, y);
    return std::sqrt(c1_vertex(mesh, y) * b.hat_grad_l2 * b.hat_grad_l2);
}

C2CurlResult c2_curl(const Triangulation& mesh, const std::vector<double>& c1) {
    C2CurlResult r;
    double c1max = c1.empty() ? 0.0 : *std::max_element(c1.begin(), c1.end());
    double table_c1 = 2.0 * c1max;  // square of sqrt(2 * C1yT_max)
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        double ratio = mesh.area(t) / (mesh.diameter(t) * mesh.diameter(t));
        double s = 0.0;
        for (int y : mesh.triangles[t]) s += c1[y];
        r.sharp = std::max(r.sharp, std::sqrt(ratio * s));
        r.table = std::max(r.table, std::sqrt(ratio * 3.0 * table_c1));
    }
    return r;
}

ZField z_E1(const Triangulation& mesh, int e) {
    if (e < 0 || e >= mesh.num_edges()) throw MeshError("invalid edge index " + std::to_string(e));
    ZField z;
    z.patch = make_patch(mesh, PatchKind::extended_edge, e);
    z.patch_mesh = submesh(mesh, z.patch);
    const Triangulation& sm = z.patch_mesh;
    const int gs = mesh.edges[e][0], ge = mesh.edges[e][1];
    z.start_local = local_index(z.patch.vertices, gs);
    z.end_local = local_index(z.patch.vertices, ge);
    const double meas_s = vertex_patch_measure(mesh, gs), meas_e = vertex_patch_measure(mesh, ge);

    FeSpace rt = make_space(sm, Family::RT0_zero);
    FeSpace s1z = make_space(sm, Family::S1_zero);
    SpMat D = assemble_divdiv(rt);
    SpMat Cp = assemble_rt0_curl_coupling(rt, s1z);
    Vec rhs = Vec::Zero(rt.ndof);
    for (int t = 0; t < sm.num_triangles(); ++t) {
        double delta = (sm.local_vertex(t, z.start_local) >= 0 ? 1.0 / meas_s : 0.0) -
                       (sm.local_vertex(t, z.end_local) >= 0 ? 1.0 / meas_e : 0.0);
        if (delta == 0.0) continue;
        auto r = local_rt0(sm, t);
        double area = sm.area(t);
        for (int k = 0; k < 3; ++k) {
            int d = rt.dof_of[sm.tri_edges[t][k]];
            if (d >= 0) rhs[d] += delta * 2.0 * r.coef[k] * area;
        }
    }
    SpMat CpT = Cp.transpose();
    Factorization fac(s1z.ndof > 0 ? saddle(D, CpT) : D);
    Vec full_rhs = Vec::Zero(rt.ndof + s1z.ndof);
    full_rhs.head(rt.ndof) = rhs;
    Vec sol = fac.solve(full_rhs);
    if (!sol.allFinite()) throw SolverError("z_E1 saddle system singular on edge " + std::to_string(e));
    Vec zr = sol.head(rt.ndof);
    Vec lam = sol.tail(s1z.ndof);
    z.div_residual = (D * zr + Cp * lam - rhs).norm();
    z.orth_residual = s1z.ndof > 0 ? (CpT * zr).cwiseAbs().maxCoeff() : 0.0;
    z.norm2 = zr.dot(assemble_mass(rt) * zr);
    z.coeffs = Vec::Zero(sm.num_edges());
    for (int d = 0; d < rt.ndof; ++d) z.coeffs[rt.entity_of[d]] = zr[d];
    return z;
}

double c_M1(const Triangulation& mesh, int t) {
    if (t < 0 || t >= mesh.num_triangles()) throw MeshError("invalid triangle index " + std::to_string(t));
    double s = 0.0;
    for (int e : mesh.tri_edges[t]) s += z_E1(mesh, e).norm2 * nedelec_norm2(mesh, t, e);
    return std::sqrt(3.0 * s);
}

Vec c_S_functional(const ZField& z) {
    const Triangulation& sm = z.patch_mesh;
    FeSpace n0 = make_space(sm, Family::N0);
    FeSpace rt = make_space(sm, Family::RT0);
    Vec ell = Vec::Zero(n0.ndof);
    ell[sm.find_edge(z.start_local, z.end_local)] = 1.0;
    ell -= assemble_nedelec_rt0(n0, rt) * z.coeffs;
    // subtract (Q_end u)(end) - (Q_start u)(start)
    const std::pair<int, double> ends[2] = {{z.start_local, -1.0}, {z.end_local, 1.0}};
    for (const auto& [y, sign] : ends) {
        const auto& tris = sm.vertex_tris[y];
        LocalNeumann ln = local_neumann(sm, tris);
        const int n = static_cast<int>(ln.verts.size());
        Mat Cu = Mat::Zero(n, n0.ndof);
        for (int t : tris) {
            auto g = element_geometry(sm, t);
            auto ned = local_nedelec(sm, t);
            for (int p = 0; p < 3; ++p) {
                int i = local_index(ln.verts, sm.triangles[t][p]);
                for (int k = 0; k < 3; ++k) Cu(i, sm.tri_edges[t][k]) += g.grad[p].dot(ned.integral[k]);
            }
        }
        Vec ey = Vec::Zero(n + 1);
        ey[local_index(ln.verts, y)] = 1.0;
        Vec w = ln.lu.solve(ey).head(n);
        ell -= sign * (Cu.transpose() * w);
    }
    return ell;
}

double c_S_value(const ZField& z) {
    Vec ell = c_S_functional(z);
    FeSpace n0 = make_space(z.patch_mesh, Family::N0);
    return rank_one_max_eig(ell, Mat(assemble_mass(n0)), Mat(0, n0.ndof));
}

double c_S(const Triangulation& mesh, int e, int t) {
    require_edge_of(mesh, e, t);
    return c_S_value(z_E1(mesh, e)) * nedelec_norm2(mesh, t, e);
}

double c_M_mu(const Triangulation& mesh, int e, bool* skipped) {
    if (e < 0 || e >= mesh.num_edges()) throw MeshError("invalid edge index " + std::to_string(e));
    Patch p = make_patch(mesh, PatchKind::extended_edge, e);
    Triangulation sm = submesh(mesh, p);
    FeSpace n0z = make_space(sm, Family::N0_zero);
    FeSpace s1z = make_space(sm, Family::S1_zero);
    if (skipped) *skipped = false;
    if (n0z.ndof == 0) {
        if (skipped) *skipped = true;
        return 0.0;
    }
    Mat A = Mat(assemble_rotrot(n0z)), B = Mat(assemble_mass(n0z));
    Mat F = s1z.ndof > 0 ? Mat(assemble_grad_coupling(s1z, n0z)) : Mat(0, n0z.ndof);
    DenseEig de = dense_constrained_eigs(A, B, F);
    if (de.values.size() == 0) {
        if (skipped) *skipped = true;
        return 0.0;
    }
    if (!(de.values[0] > 1e-12 * std::max(1.0, de.values[de.values.size() - 1])))
        throw SolverError("local Maxwell problem on edge " + std::to_string(e) + " has a kernel");
    return de.values[0];
}

CMLocal c_M_local(const Triangulation& mesh, int e, int t) {
    require_edge_of(mesh, e, t);
    CMLocal r;
    r.mu_min = c_M_mu(mesh, e, &r.skipped);
    if (!r.skipped) r.value = 1.0 / (mesh.diameter(t) * std::sqrt(r.mu_min));
    return r;
}

void combine(ConstantsReport& r, const ConstantsOptions& opts) {
    r.C1yT_table = std::sqrt(2.0 * r.C1yT_max);
    r.C_S_table = std::sqrt(r.C_S_max);
    r.C1_Curl = std::sqrt(3.0);
    r.C_RD = 1;
    r.c2curl_mode = opts.c2curl;
    r.C2_Curl = opts.c2curl == C2CurlMode::table ? r.C2_Curl_table : r.C2_Curl_sharp;
    r.C1_div_formula = r.C_M1 + 3.0 * r.C_QT + 3.0 * std::sqrt(r.C_S_max);
    r.C1_div_overridden = opts.has_c1div_override;
    r.C1_div = opts.has_c1div_override ? opts.c1div_override : r.C1_div_formula;
    r.C2_div = 3.0 * std::sqrt(r.C_S_max) * r.c_M;
}

std::string canonical_patch_key(const Triangulation& mesh, const Patch& p, const std::vector<int>& anchors) {
    const int n = static_cast<int>(p.vertices.size());
    std::vector<Vec2> pts(n);
    std::vector<char> is_anchor(n, 0);
    Vec2 o = Vec2::Zero();
    for (int a : anchors) o += mesh.vertices[a];
    o /= static_cast<double>(anchors.size());
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        pts[i] = mesh.vertices[p.vertices[i]] - o;
        s = std::max(s, pts[i].norm());
        if (std::find(anchors.begin(), anchors.end(), p.vertices[i]) != anchors.end()) is_anchor[i] = 1;
    }
    std::vector<std::array<int, 3>> tris;
    for (int t : p.triangles) {
        const auto& v = mesh.triangles[t];
        tris.push_back({local_index(p.vertices, v[0]), local_index(p.vertices, v[1]), local_index(p.vertices, v[2])});
    }
    const double grid = 1e8;
    std::string best;
    for (int c = 0; c < n; ++c) {
        if (pts[c].norm() < s * (1 - 1e-9)) continue;
        Vec2 d = pts[c] / pts[c].norm();
        for (int refl = 0; refl < 2; ++refl) {
            std::vector<std::array<long long, 3>> q(n);
            for (int i = 0; i < n; ++i) {
                double x = (d.x() * pts[i].x() + d.y() * pts[i].y()) / s;
                double y = (-d.y() * pts[i].x() + d.x() * pts[i].y()) / s;
                if (refl) y = -y;
                q[i] = {std::llround(x * grid), std::llround(y * grid), is_anchor[i]};
            }
            std::vector<int> order(n);
            for (int i = 0; i < n; ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](int a, int b) { return q[a] < q[b]; });
            std::vector<int> rank(n);
            for (int i = 0; i < n; ++i) rank[order[i]] = i;
            std::vector<std::array<int, 3>> tt;
            for (const auto& t : tris) {
                std::array<int, 3> u{rank[t[0]], rank[t[1]], rank[t[2]]};
                std::sort(u.begin(), u.end());
                tt.push_back(u);
            }
            std::sort(tt.begin(), tt.end());
            std::ostringstream os;
            for (int i : order) os << q[i][0] << ',' << q[i][1] << ',' << q[i][2] << ';';
            os << '|';
            for (const auto& t : tt) os << t[0] << ',' << t[1] << ',' << t[2] << ';';
            std::string key = os.str();
            if (best.empty() || key < best) best = std::move(key);
        }
    }
    return best;
}

namespace {

struct VertexValue {
    double c1 = 0.0;
};
struct ElementValue {
    double tc_diam = 0.0, tc_hT = 0.0;
};
struct EdgeValue {
    double val_S = 0.0, z2 = 0.0, mu_scaled = 0.0;
    bool skipped = false;
};

template <class Value, class Compute>
std::vector<Value> dedup_compute(int count, const std::function<std::string(int)>& key_of, bool use_cache,
                                 int threads, Compute&& compute, int& classes) {
    std::vector<int> rep_of(count);
    std::vector<int> reps;
    if (use_cache) {
        std::unordered_map<std::string, int> seen;
        for (int i = 0; i < count; ++i) {
            auto [it, inserted] = seen.emplace(key_of(i), static_cast<int>(reps.size()));
            if (inserted) reps.push_back(i);
            rep_of[i] = it->second;
        }
    } else {
        for (int i = 0; i < count; ++i) {
            rep_of[i] = i;
            reps.push_back(i);
        }
    }
    std::vector<Value> unique(reps.size());
    parallel_for(static_cast<int>(reps.size()), threads, [&](int j) { unique[j] = compute(reps[j]); });
    classes += static_cast<int>(reps.size());
    std::vector<Value> out(count);
    for (int i = 0; i < count; ++i) out[i] = unique[rep_of[i]];
    return out;
}

}  // namespace

ConstantsReport compute_constants(const Triangulation& mesh, const ConstantsOptions& opts) {
    auto t0 = std::chrono::steady_clock::now();
    ConstantsReport r;
    r.vertices = mesh.num_vertices();
    r.edges = mesh.num_edges();
    r.triangles = mesh.num_triangles();
    r.h_max = mesh.h_max();
    r.C_OL = overlap_constant(mesh);
    r.patches = mesh.num_vertices() + mesh.num_edges() + mesh.num_triangles();
    const int threads = std::max(1, opts.threads);

    auto vkey = [&](int v) {
        return canonical_patch_key(mesh, make_patch(mesh, PatchKind::vertex, v), {v});
    };
    auto tkey = [&](int t) {
        const auto& tv = mesh.triangles[t];
        return canonical_patch_key(mesh, make_patch(mesh, PatchKind::element, t), {tv[0], tv[1], tv[2]});
    };
    auto ekey = [&](int e) {
        return canonical_patch_key(mesh, make_patch(mesh, PatchKind::extended_edge, e),
                                   {mesh.edges[e][0], mesh.edges[e][1]});
    };

    int classes = 0;
    auto vv = dedup_compute<VertexValue>(mesh.num_vertices(), vkey, opts.use_cache, threads, [&](int v) {
        return VertexValue{c1_vertex(mesh, v)};
    }, classes);
    auto tv = dedup_compute<ElementValue>(mesh.num_triangles(), tkey, opts.use_cache, threads, [&](int t) {
        PoincarePatch pp;
        try {
            pp = poincare_patch(mesh, t, opts);
        } catch (const SolverError& e) {
            throw SolverError("Poincare patch of triangle " + std::to_string(t) + ": " + e.what());
        }
        return ElementValue{pp.bound / pp.diam, pp.bound / pp.h_T};
    }, classes);
    auto ev = dedup_compute<EdgeValue>(mesh.num_edges(), ekey, opts.use_cache, threads, [&](int e) {
        EdgeValue out;
        try {
            ZField z = z_E1(mesh, e);
            out.z2 = z.norm2;
            out.val_S = c_S_value(z);
            double mu = c_M_mu(mesh, e, &out.skipped);
            out.mu_scaled = mu * mesh.edge_length(e) * mesh.edge_length(e);
        } catch (const SolverError& err) {
            throw SolverError("extended edge patch of edge " + std::to_string(e) + ": " + err.what());
        }
        return out;
    }, classes);
    r.patch_classes = classes;

    r.C1_per_vertex.resize(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        r.C1_per_vertex[v] = vv[v].c1;
        if (vv[v].c1 > r.C1yT_max) {
            r.C1yT_max = vv[v].c1;
            r.argmax_C1 = v;
        }
    }
    r.tilde_c_per_triangle.resize(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        r.tilde_c_per_triangle[t] = tv[t].tc_diam;
        if (tv[t].tc_diam > r.tilde_c) {
            r.tilde_c = tv[t].tc_diam;
            r.argmax_tilde_c = t;
        }
        r.tilde_c_hT = std::max(r.tilde_c_hT, tv[t].tc_hT);
        for (int y : mesh.triangles[t]) {
            auto b = basis_norms(mesh, t, Entity::vertex, y);
            r.C_QT = std::max(r.C_QT, std::sqrt(vv[y].c1 * b.hat_grad_l2 * b.hat_grad_l2));
        }
    }
    auto c2 = c2_curl(mesh, r.C1_per_vertex);
    r.C2_Curl_sharp = c2.sharp;
    r.C2_Curl_table = c2.table;

    r.C_S_val_per_edge.resize(mesh.num_edges());
    r.z_norm2_per_edge.resize(mesh.num_edges());
    r.c_M_mu_per_edge.resize(mesh.num_edges());
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const double len = mesh.edge_length(e);
        r.C_S_val_per_edge[e] = ev[e].val_S;
        r.z_norm2_per_edge[e] = ev[e].z2;
        r.c_M_mu_per_edge[e] = ev[e].skipped ? 0.0 : ev[e].mu_scaled / (len * len);
        if (ev[e].skipped) ++r.c_M_skipped;
        for (int t : mesh.edge_tris[e]) {
            if (t < 0) continue;
            double cs = ev[e].val_S * nedelec_norm2(mesh, t, e);
            if (cs > r.C_S_max) {
                r.C_S_max = cs;
                r.argmax_C_S = e;
            }
            if (!ev[e].skipped) {
                double cm = 1.0 / (mesh.diameter(t) * std::sqrt(r.c_M_mu_per_edge[e]));
                if (cm > r.c_M) {
                    r.c_M = cm;
                    r.argmax_c_M = e;
                }
            }
        }
    }
    r.C_M1_per_triangle.resize(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        double s = 0.0;
        for (int e : mesh.tri_edges[t]) s += ev[e].z2 * nedelec_norm2(mesh, t, e);
        r.C_M1_per_triangle[t] = std::sqrt(3.0 * s);
        if (r.C_M1_per_triangle[t] > r.C_M1) {
            r.C_M1 = r.C_M1_per_triangle[t];
            r.argmax_C_M1 = t;
        }
    }
    combine(r, opts);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log_info("constants: " + std::to_string(r.patches) + " patches, " + std::to_string(r.patch_classes) +
             " geometry classes, " + std::to_string(r.seconds) + " s");
    return r;
}

StabilityCheck pi_grad_stability_check(const Triangulation& mesh, double C1Curl, double C2Curl, int samples,
                                       std::uint64_t seed) {
    const int nv = mesh.num_vertices(), nt = mesh.num_triangles();
    const auto& rule = quadrature_rule(Quadrature::gauss6);
    std::vector<ElementGeometry> geo(nt);
    for (int t = 0; t < nt; ++t) geo[t] = element_geometry(mesh, t);
    std::vector<LocalNeumann> patches;
    patches.reserve(nv);
    std::vector<double> meas(nv);
    for (int y = 0; y < nv; ++y) {
        patches.push_back(local_neumann(mesh, mesh.vertex_tris[y]));
        meas[y] = vertex_patch_measure(mesh, y);
    }
    std::vector<std::vector<int>> omega(nt);
    for (int t = 0; t < nt; ++t) omega[t] = make_patch(mesh, PatchKind::element, t).triangles;

    StabilityCheck out;
    out.samples = samples;
    for (int s = 0; s < samples; ++s) {
        Vec coef = seeded_vector(6 + nv, seed + 104729u * static_cast<std::uint64_t>(s));
        auto u_at = [&](int t, const std::array<double, 3>& l, Vec2& grad) {
            const auto& g = geo[t];
            Vec2 x = l[0] * g.p[0] + l[1] * g.p[1] + l[2] * g.p[2];
            double val = coef[0] + coef[1] * x.x() + coef[2] * x.y() + coef[3] * x.x() * x.x() +
                         coef[4] * x.x() * x.y() + coef[5] * x.y() * x.y();
            grad = Vec2(coef[1] + 2 * coef[3] * x.x() + coef[4] * x.y(), coef[2] + coef[4] * x.x() + 2 * coef[5] * x.y());
            for (int k = 0; k < 3; ++k) {
                double nodal = coef[6 + mesh.triangles[t][k]];
                val += nodal * l[k];
                grad += nodal * g.grad[k];
            }
            return val;
        };
        std::vector<double> int_u(nt, 0.0), u2(nt, 0.0), gu2(nt, 0.0);
        std::vector<std::array<double, 3>> grad_test(nt);  // integral of grad u . grad lambda_k
        for (int t = 0; t < nt; ++t) {
            grad_test[t] = {0, 0, 0};
            for (const auto& qp : rule) {
                Vec2 gu;
                double u = u_at(t, qp.lambda, gu);
                double w = qp.weight * geo[t].area;
                int_u[t] += w * u;
                u2[t] += w * u * u;
                gu2[t] += w * gu.squaredNorm();
                for (int k = 0; k < 3; ++k) grad_test[t][k] += w * gu.dot(geo[t].grad[k]);
            }
        }
        Vec c = Vec::Zero(nv);
        for (int y = 0; y < nv; ++y) {
            const auto& ln = patches[y];
            const int n = static_cast<int>(ln.verts.size());
            Vec rhs = Vec::Zero(n + 1);
            double mean = 0.0;
            for (int t : mesh.vertex_tris[y]) {
                mean += int_u[t];
                for (int k = 0; k < 3; ++k) rhs[local_index(ln.verts, mesh.triangles[t][k])] += grad_test[t][k];
            }
            Vec q = ln.lu.solve(rhs);
            c[y] = mean / meas[y] + q[local_index(ln.verts, y)];
        }
        for (int t = 0; t < nt; ++t) {
            double pi2 = 0.0;
            for (const auto& qp : rule) {
                double v = 0.0;
                for (int k = 0; k < 3; ++k) v += c[mesh.triangles[t][k]] * qp.lambda[k];
                pi2 += qp.weight * geo[t].area * v * v;
            }
            double a2 = 0.0, g2 = 0.0;
            for (int k : omega[t]) {
                a2 += u2[k];
                g2 += gu2[k];
            }
            double lhs = std::sqrt(pi2);
            double rhs = C1Curl * std::sqrt(a2) + geo[t].h * C2Curl * std::sqrt(g2);
            double ratio = rhs > 0 ? lhs / rhs : 0.0;
            out.worst_ratio = std::max(out.worst_ratio, ratio);
            if (lhs > rhs * (1 + 1e-12)) ++out.violations;
        }
    }
    return out;
}

}  // namespace maxlow
