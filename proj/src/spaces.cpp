#include "maxlow/spaces.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace maxlow {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SpMat from_triplets(int rows, int cols, const Triplets& trip) {
    SpMat m(rows, cols);
    m.setFromTriplets(trip.begin(), trip.end());
    m.makeCompressed();
    return m;
}

bool is_scalar_vertex(Family f) { return f == Family::S1 || f == Family::S1_zero; }
bool is_nedelec(Family f) { return f == Family::N0 || f == Family::N0_zero; }
bool is_rt(Family f) { return f == Family::RT0 || f == Family::RT0_zero; }

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

Vec2 point(const ElementGeometry& g, const std::array<double, 3>& l) {
    return l[0] * g.p[0] + l[1] * g.p[1] + l[2] * g.p[2];
}

}  // namespace

const char* family_name(Family f) {
    switch (f) {
        case Family::S1: return "S1";
        case Family::S1_zero: return "S1_zero";
        case Family::CR: return "CR";
        case Family::N0: return "N0";
        case Family::N0_zero: return "N0_zero";
        case Family::RT0: return "RT0";
        case Family::RT0_zero: return "RT0_zero";
        case Family::P0vec: return "P0vec";
    }
    return "?";
}

FeSpace make_space(const Triangulation& mesh, Family family) {
    FeSpace s;
    s.family = family;
    s.mesh = &mesh;
    if (family == Family::P0vec) {
        s.ndof = 2 * mesh.num_triangles();
        s.dof_of.resize(mesh.num_triangles());
        s.entity_of.resize(s.ndof);
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            s.dof_of[t] = 2 * t;
            s.entity_of[2 * t] = s.entity_of[2 * t + 1] = t;
        }
        return s;
    }
    const bool vertex_based = is_scalar_vertex(family);
    const bool drop_boundary = family == Family::S1_zero || family == Family::N0_zero || family == Family::RT0_zero;
    const int n = vertex_based ? mesh.num_vertices() : mesh.num_edges();
    const auto& boundary = vertex_based ? mesh.boundary_vertex : mesh.boundary_edge;
    s.dof_of.assign(n, -1);
    for (int i = 0; i < n; ++i)
        if (!(drop_boundary && boundary[i])) {
            s.dof_of[i] = s.ndof++;
            s.entity_of.push_back(i);
        }
    return s;
}

const std::vector<QuadPoint>& quadrature_rule(Quadrature q) {
    static const std::vector<QuadPoint> mid = {
        {{0.0, 0.5, 0.5}, 1.0 / 3}, {{0.5, 0.0, 0.5}, 1.0 / 3}, {{0.5, 0.5, 0.0}, 1.0 / 3}};
    static const std::vector<QuadPoint> g6 = [] {
        const double a = 0.445948490915965, wa = 0.223381589678011;
        const double b = 0.091576213509771, wb = 0.109951743655322;
        return std::vector<QuadPoint>{{{a, a, 1 - 2 * a}, wa}, {{a, 1 - 2 * a, a}, wa}, {{1 - 2 * a, a, a}, wa},
                                      {{b, b, 1 - 2 * b}, wb}, {{b, 1 - 2 * b, b}, wb}, {{1 - 2 * b, b, b}, wb}};
    }();
    return q == Quadrature::edge_midpoint ? mid : g6;
}

ElementGeometry element_geometry(const Triangulation& mesh, int t) {
    ElementGeometry g;
    for (int i = 0; i < 3; ++i) g.p[i] = mesh.vertices[mesh.triangles[t][i]];
    Eigen::Matrix2d B;
    B.col(0) = g.p[1] - g.p[0];
    B.col(1) = g.p[2] - g.p[0];
    g.area = 0.5 * B.determinant();
    Eigen::Matrix2d Binv = B.inverse();
    g.grad[1] = Binv.row(0).transpose();
    g.grad[2] = Binv.row(1).transpose();
    g.grad[0] = -g.grad[1] - g.grad[2];
    g.h = mesh.diameter(t);
    return g;
}

Vec2 eval_nedelec(const ElementGeometry& g, const LocalNedelec& n, int k, const std::array<double, 3>& l) {
    int a = n.ends[k][0], b = n.ends[k][1];
    return l[a] * g.grad[b] - l[b] * g.grad[a];
}

LocalNedelec local_nedelec(const Triangulation& mesh, int t, Quadrature q) {
    const auto g = element_geometry(mesh, t);
    const auto& v = mesh.triangles[t];
    LocalNedelec n;
    for (int k = 0; k < 3; ++k) {
        int i = (k + 1) % 3, j = (k + 2) % 3;
        n.ends[k] = v[i] < v[j] ? std::array<int, 2>{i, j} : std::array<int, 2>{j, i};
        const Vec2& ga = g.grad[n.ends[k][0]];
        const Vec2& gb = g.grad[n.ends[k][1]];
        n.rot[k] = 2.0 * (ga.x() * gb.y() - ga.y() * gb.x());
        n.integral[k] = g.area / 3.0 * (gb - ga);
    }
    n.mass.setZero();
    for (const auto& qp : quadrature_rule(q)) {
        std::array<Vec2, 3> val;
        for (int k = 0; k < 3; ++k) val[k] = eval_nedelec(g, n, k, qp.lambda);
        for (int p = 0; p < 3; ++p)
            for (int r = 0; r < 3; ++r) n.mass(p, r) += qp.weight * g.area * val[p].dot(val[r]);
    }
    return n;
}

Vec2 edge_normal(const Triangulation& mesh, int e) {
    Vec2 t = mesh.tangent(e);
    return Vec2(t.y(), -t.x());
}

Vec2 eval_rt0(const ElementGeometry& g, const LocalRT0& r, int k, const std::array<double, 3>& l) {
    return r.coef[k] * (point(g, l) - g.p[k]);
}

LocalRT0 local_rt0(const Triangulation& mesh, int t, Quadrature q) {
    const auto g = element_geometry(mesh, t);
    LocalRT0 r;
    for (int k = 0; k < 3; ++k) {
        int e = mesh.tri_edges[t][k];
        Vec2 mid = 0.5 * (g.p[(k + 1) % 3] + g.p[(k + 2) % 3]);
        double s = edge_normal(mesh, e).dot(mid - g.p[k]) > 0 ? 1.0 : -1.0;
        r.coef[k] = s * mesh.edge_length(e) / (2.0 * g.area);
    }
    r.mass.setZero();
    for (const auto& qp : quadrature_rule(q)) {
        std::array<Vec2, 3> val;
        for (int k = 0; k < 3; ++k) val[k] = eval_rt0(g, r, k, qp.lambda);
        for (int p = 0; p < 3; ++p)
            for (int s = 0; s < 3; ++s) r.mass(p, s) += qp.weight * g.area * val[p].dot(val[s]);
    }
    return r;
}

namespace {

// local dof -> global dof per triangle for vertex/edge families
std::array<int, 3> local_dofs(const FeSpace& s, int t) {
    const auto& m = *s.mesh;
    std::array<int, 3> d;
    for (int k = 0; k < 3; ++k)
        d[k] = is_scalar_vertex(s.family) ? s.dof_of[m.triangles[t][k]] : s.dof_of[m.tri_edges[t][k]];
    return d;
}

template <class F>
SpMat assemble_local(const FeSpace& rs, const FeSpace& cs, F&& local) {
    const auto& m = *rs.mesh;
    Triplets trip;
    trip.reserve(9 * m.num_triangles());
    for (int t = 0; t < m.num_triangles(); ++t) {
        auto rd = local_dofs(rs, t), cd = local_dofs(cs, t);
        Eigen::Matrix3d K = local(t);
        for (int p = 0; p < 3; ++p) {
            if (rd[p] < 0) continue;
            for (int q = 0; q < 3; ++q)
                if (cd[q] >= 0 && K(p, q) != 0.0) trip.emplace_back(rd[p], cd[q], K(p, q));
        }
    }
    return from_triplets(rs.ndof, cs.ndof, trip);
}

}  // namespace

SpMat assemble_mass(const FeSpace& s, Quadrature q) {
    const auto& m = *s.mesh;
    if (s.family == Family::P0vec) {
        Triplets trip;
        for (int t = 0; t < m.num_triangles(); ++t) {
            trip.emplace_back(2 * t, 2 * t, m.area(t));
            trip.emplace_back(2 * t + 1, 2 * t + 1, m.area(t));
        }
        return from_triplets(s.ndof, s.ndof, trip);
    }
    return assemble_local(s, s, [&](int t) -> Eigen::Matrix3d {
        if (is_nedelec(s.family)) return local_nedelec(m, t, q).mass;
        if (is_rt(s.family)) return local_rt0(m, t, q).mass;
        const double area = m.area(t);
        Eigen::Matrix3d K = Eigen::Matrix3d::Zero();
        for (const auto& qp : quadrature_rule(q))
            for (int p = 0; p < 3; ++p)
                for (int r = 0; r < 3; ++r) {
                    double up = s.family == Family::CR ? 1.0 - 2.0 * qp.lambda[p] : qp.lambda[p];
                    double ur = s.family == Family::CR ? 1.0 - 2.0 * qp.lambda[r] : qp.lambda[r];
                    K(p, r) += qp.weight * area * up * ur;
                }
        return K;
    });
}

SpMat assemble_stiffness_grad(const FeSpace& s) {
    require(is_scalar_vertex(s.family) || s.family == Family::CR, "stiffness needs a scalar family");
    const auto& m = *s.mesh;
    const double scale = s.family == Family::CR ? 4.0 : 1.0;
    return assemble_local(s, s, [&](int t) {
        auto g = element_geometry(m, t);
        Eigen::Matrix3d K;
        for (int p = 0; p < 3; ++p)
            for (int r = 0; r < 3; ++r) K(p, r) = scale * g.area * g.grad[p].dot(g.grad[r]);
        return K;
    });
}

SpMat assemble_rotrot(const FeSpace& s) {
    require(is_nedelec(s.family), "rot-rot needs an edge-element family");
    const auto& m = *s.mesh;
    return assemble_local(s, s, [&](int t) {
        auto n = local_nedelec(m, t);
        const double area = m.area(t);
        Eigen::Matrix3d K;
        for (int p = 0; p < 3; ++p)
            for (int r = 0; r < 3; ++r) K(p, r) = area * n.rot[p] * n.rot[r];
        return K;
    });
}

SpMat assemble_divdiv(const FeSpace& s) {
    require(is_rt(s.family), "div-div needs an RT0 family");
    const auto& m = *s.mesh;
    return assemble_local(s, s, [&](int t) {
        auto r = local_rt0(m, t);
        const double area = m.area(t);
        Eigen::Matrix3d K;
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q) K(p, q) = area * 4.0 * r.coef[p] * r.coef[q];
        return K;
    });
}

SpMat assemble_grad_coupling(const FeSpace& s1, const FeSpace& n0, Quadrature q) {
    require(is_scalar_vertex(s1.family) && is_nedelec(n0.family), "grad coupling needs S1 x N0");
    const auto& m = *s1.mesh;
    return assemble_local(s1, n0, [&](int t) {
        auto g = element_geometry(m, t);
        auto n = local_nedelec(m, t);
        Eigen::Matrix3d K = Eigen::Matrix3d::Zero();
        for (const auto& qp : quadrature_rule(q))
            for (int r = 0; r < 3; ++r) {
                Vec2 psi = eval_nedelec(g, n, r, qp.lambda);
                for (int p = 0; p < 3; ++p) K(p, r) += qp.weight * g.area * g.grad[p].dot(psi);
            }
        return K;
    });
}

SpMat assemble_curl_coupling(const FeSpace& s1, const FeSpace& p0) {
    require(is_scalar_vertex(s1.family) && p0.family == Family::P0vec, "curl coupling needs S1 x P0vec");
    const auto& m = *s1.mesh;
    Triplets trip;
    for (int t = 0; t < m.num_triangles(); ++t) {
        auto g = element_geometry(m, t);
        for (int p = 0; p < 3; ++p) {
            int d = s1.dof_of[m.triangles[t][p]];
            if (d < 0) continue;
            Vec2 c = g.area * curl_of_grad(g.grad[p]);
            trip.emplace_back(2 * t, d, c.x());
            trip.emplace_back(2 * t + 1, d, c.y());
        }
    }
    return from_triplets(p0.ndof, s1.ndof, trip);
}

SpMat assemble_normal_jump(const FeSpace& p0) {
    require(p0.family == Family::P0vec, "normal jump needs P0vec");
    const auto& m = *p0.mesh;
    Triplets trip;
    int col = 0;
    for (int e = 0; e < m.num_edges(); ++e) {
        if (m.boundary_edge[e]) continue;
        Vec2 n = m.edge_length(e) * edge_normal(m, e);
        int t0 = m.edge_tris[e][0], t1 = m.edge_tris[e][1];
        trip.emplace_back(2 * t0, col, n.x());
        trip.emplace_back(2 * t0 + 1, col, n.y());
        trip.emplace_back(2 * t1, col, -n.x());
        trip.emplace_back(2 * t1 + 1, col, -n.y());
        ++col;
    }
    return from_triplets(p0.ndof, col, trip);
}

SpMat assemble_nedelec_load(const FeSpace& n0, const FeSpace& p0) {
    require(is_nedelec(n0.family) && p0.family == Family::P0vec, "load needs N0 x P0vec");
    const auto& m = *n0.mesh;
    Triplets trip;
    for (int t = 0; t < m.num_triangles(); ++t) {
        auto n = local_nedelec(m, t);
        for (int k = 0; k < 3; ++k) {
            int d = n0.dof_of[m.tri_edges[t][k]];
            if (d < 0) continue;
            trip.emplace_back(d, 2 * t, n.integral[k].x());
            trip.emplace_back(d, 2 * t + 1, n.integral[k].y());
        }
    }
    return from_triplets(n0.ndof, p0.ndof, trip);
}

SpMat assemble_rt0_curl_coupling(const FeSpace& rt, const FeSpace& s1, Quadrature q) {
    require(is_rt(rt.family) && is_scalar_vertex(s1.family), "coupling needs RT0 x S1");
    const auto& m = *rt.mesh;
    return assemble_local(rt, s1, [&](int t) {
        auto g = element_geometry(m, t);
        auto r = local_rt0(m, t);
        Eigen::Matrix3d K = Eigen::Matrix3d::Zero();
        for (const auto& qp : quadrature_rule(q))
            for (int p = 0; p < 3; ++p) {
                Vec2 phi = eval_rt0(g, r, p, qp.lambda);
                for (int v = 0; v < 3; ++v) K(p, v) += qp.weight * g.area * phi.dot(curl_of_grad(g.grad[v]));
            }
        return K;
    });
}

SpMat assemble_nedelec_rt0(const FeSpace& n0, const FeSpace& rt, Quadrature q) {
    require(is_nedelec(n0.family) && is_rt(rt.family), "coupling needs N0 x RT0");
    const auto& m = *n0.mesh;
    return assemble_local(n0, rt, [&](int t) {
        auto g = element_geometry(m, t);
        auto n = local_nedelec(m, t);
        auto r = local_rt0(m, t);
        Eigen::Matrix3d K = Eigen::Matrix3d::Zero();
        for (const auto& qp : quadrature_rule(q))
            for (int p = 0; p < 3; ++p) {
                Vec2 psi = eval_nedelec(g, n, p, qp.lambda);
                for (int s = 0; s < 3; ++s) K(p, s) += qp.weight * g.area * psi.dot(eval_rt0(g, r, s, qp.lambda));
            }
        return K;
    });
}

SpMat discrete_gradient(const FeSpace& s1, const FeSpace& n0) {
    require(is_scalar_vertex(s1.family) && is_nedelec(n0.family), "gradient needs S1 -> N0");
    const auto& m = *s1.mesh;
    Triplets trip;
    for (int e = 0; e < m.num_edges(); ++e) {
        int d = n0.dof_of[e];
        if (d < 0) continue;
        int lo = s1.dof_of[m.edges[e][0]], hi = s1.dof_of[m.edges[e][1]];
        if (lo >= 0) trip.emplace_back(d, lo, -1.0);
        if (hi >= 0) trip.emplace_back(d, hi, 1.0);
    }
    return from_triplets(n0.ndof, s1.ndof, trip);
}

Vec s1_integrals(const FeSpace& s1) {
    require(is_scalar_vertex(s1.family), "integrals need S1");
    const auto& m = *s1.mesh;
    Vec w = Vec::Zero(s1.ndof);
    for (int t = 0; t < m.num_triangles(); ++t)
        for (int v : m.triangles[t])
            if (s1.dof_of[v] >= 0) w[s1.dof_of[v]] += m.area(t) / 3.0;
    return w;
}

double nedelec_norm2(const Triangulation& mesh, int t, int e) {
    for (int k = 0; k < 3; ++k)
        if (mesh.tri_edges[t][k] == e) return local_nedelec(mesh, t).mass(k, k);
    throw MeshError("edge " + std::to_string(e) + " is not part of triangle " + std::to_string(t));
}

BasisNorms basis_norms(const Triangulation& mesh, int t, Entity kind, int entity) {
    BasisNorms b;
    if (kind == Entity::edge) {
        b.nedelec_l2 = std::sqrt(nedelec_norm2(mesh, t, entity));
        return b;
    }
    int k = mesh.local_vertex(t, entity);
    if (k < 0) throw MeshError("vertex " + std::to_string(entity) + " is not part of triangle " + std::to_string(t));
    auto g = element_geometry(mesh, t);
    double l2 = 0.0;
    for (const auto& qp : quadrature_rule(Quadrature::edge_midpoint)) l2 += qp.weight * g.area * qp.lambda[k] * qp.lambda[k];
    b.hat_l2 = std::sqrt(l2);
    b.hat_grad_l2 = std::sqrt(g.area * g.grad[k].squaredNorm());
    return b;
}

}  // namespace maxlow
