#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "maxlow/mesh.hpp"

namespace maxlow {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Family { S1, S1_zero, CR, N0, N0_zero, RT0, RT0_zero, P0vec };

const char* family_name(Family f);

// Entities are vertices (S1), edges (CR, N0, RT0) or triangles (P0vec, two
// dofs per triangle: components x then y). The *_zero families drop the dofs
// on the boundary.
struct FeSpace {
    Family family = Family::S1;
    const Triangulation* mesh = nullptr;
    int ndof = 0;
    std::vector<int> dof_of;     // entity -> dof, -1 if removed
    std::vector<int> entity_of;  // dof -> entity (P0vec: dof -> triangle)
};

FeSpace make_space(const Triangulation& mesh, Family family);

enum class Quadrature {
    edge_midpoint,  // 3 points, degree 2
    gauss6          // 6 points, degree 4
};

struct QuadPoint {
    std::array<double, 3> lambda;
    double weight;  // fraction of the triangle area
};

const std::vector<QuadPoint>& quadrature_rule(Quadrature q);

struct ElementGeometry {
    double area = 0.0;
    double h = 0.0;
    std::array<Vec2, 3> p;
    std::array<Vec2, 3> grad;  // gradients of the barycentric coordinates
};

ElementGeometry element_geometry(const Triangulation& mesh, int t);

inline Vec2 curl_of_grad(const Vec2& g) { return Vec2(-g.y(), g.x()); }

// Whitney function of local edge k (opposite local vertex k), oriented by the
// global tangent convention.
struct LocalNedelec {
    std::array<std::array<int, 2>, 3> ends;  // local (a, b) with global a < b
    std::array<double, 3> rot;               // rot psi_k (constant)
    std::array<Vec2, 3> integral;            // integral of psi_k over T
    Eigen::Matrix3d mass;
};

LocalNedelec local_nedelec(const Triangulation& mesh, int t, Quadrature q = Quadrature::edge_midpoint);
Vec2 eval_nedelec(const ElementGeometry& g, const LocalNedelec& n, int k, const std::array<double, 3>& lambda);

// RT0 function of local edge k: coef * (x - p_k), normal sign fixed by the
// global normal n_E = (t_y, -t_x). div = 2 * coef.
struct LocalRT0 {
    std::array<double, 3> coef;
    Eigen::Matrix3d mass;
};

LocalRT0 local_rt0(const Triangulation& mesh, int t, Quadrature q = Quadrature::edge_midpoint);
Vec2 eval_rt0(const ElementGeometry& g, const LocalRT0& r, int k, const std::array<double, 3>& lambda);

// Global normal n_E = rotation of t_E by -90 degrees.
Vec2 edge_normal(const Triangulation& mesh, int e);

SpMat assemble_mass(const FeSpace& space, Quadrature q = Quadrature::edge_midpoint);
SpMat assemble_stiffness_grad(const FeSpace& space);
SpMat assemble_rotrot(const FeSpace& space);
SpMat assemble_divdiv(const FeSpace& space);
// F[v, E] = (grad lambda_v, psi_E)
SpMat assemble_grad_coupling(const FeSpace& s1, const FeSpace& n0, Quadrature q = Quadrature::edge_midpoint);
// G[phi dof, v] = integral of Curl lambda_v times the unit field of that dof
SpMat assemble_curl_coupling(const FeSpace& s1, const FeSpace& p0);
// one column per interior edge e: |E| (y_t0 - y_t1) . n_E, (t0, t1) = edge_tris[e]
SpMat assemble_normal_jump(const FeSpace& p0);
// B[E, phi dof] = (psi_E, unit field of that dof)
SpMat assemble_nedelec_load(const FeSpace& n0, const FeSpace& p0);
// (phi_F, Curl lambda_v) for RT0 x S1
SpMat assemble_rt0_curl_coupling(const FeSpace& rt, const FeSpace& s1, Quadrature q = Quadrature::edge_midpoint);
// (psi_E, phi_F) for N0 x RT0
SpMat assemble_nedelec_rt0(const FeSpace& n0, const FeSpace& rt, Quadrature q = Quadrature::edge_midpoint);
// S1 -> N0 discrete gradient (tangential moments of grad lambda_v)
SpMat discrete_gradient(const FeSpace& s1, const FeSpace& n0);
// integral of each S1 basis function
Vec s1_integrals(const FeSpace& s1);

struct BasisNorms {
    double nedelec_l2 = 0.0;    // ||psi_E||_{L2(T)}
    double hat_l2 = 0.0;        // ||lambda_y||_{L2(T)}
    double hat_grad_l2 = 0.0;   // ||grad lambda_y||_{L2(T)}
};

enum class Entity { vertex, edge };

// Vertex entities fill the hat norms, edge entities the Whitney norm.
// Throws MeshError if the entity is not part of T.
BasisNorms basis_norms(const Triangulation& mesh, int t, Entity kind, int entity);

double nedelec_norm2(const Triangulation& mesh, int t, int e);

}  // namespace maxlow
