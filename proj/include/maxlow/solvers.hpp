#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace maxlow {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Block {
    int row, col;  // block indices
    const SpMat* matrix;
    double scale = 1.0;
    bool transpose = false;
};

// Assembles a block matrix with the given block row/column sizes.
SpMat block_matrix(const std::vector<int>& row_sizes, const std::vector<int>& col_sizes,
                   const std::vector<Block>& blocks);

// [[A, C^T], [C, 0]] for constraint rows C (m x n).
SpMat saddle(const SpMat& A, const SpMat& C);

struct Inertia {
    int positive = 0, negative = 0, zero = 0;
    bool available = false;
};

// Sparse LU of a (possibly indefinite) square matrix. Immutable after
// construction; solve() may be called concurrently.
class Factorization {
public:
    Factorization() = default;
    explicit Factorization(const SpMat& A);

    Vec solve(const Vec& b) const;
    int rows() const { return static_cast<int>(a_.rows()); }
    const SpMat& matrix() const { return a_; }
    // ||Ax - b|| / (||A||_1 ||x|| + ||b||)
    double relative_residual(const Vec& b, const Vec& x) const;
    // Counted from a dense symmetric eigendecomposition when rows() <= dense_limit.
    Inertia inertia(int dense_limit = 4000) const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    SpMat a_;
};

struct EigOptions {
    double tol = 1e-9;
    double shift = 0.0;
    std::uint64_t seed = 0x5eed2024u;
    int max_deflation_rounds = 16;
};

struct EigResult {
    Vec values;        // ascending
    Mat vectors;       // B-orthonormal columns
    Vec residuals;     // ||Ax - mu Bx - C^T y|| / ||Bx||, multiplier y by least squares
    int iterations = 0;
};

// k eigenvalues of A x = mu B x on ker C closest to the shift from above
// (the k smallest for the default shift 0 when A is PSD). C holds constraint
// rows and may have zero rows. The saddle [[A - shift B, C^T], [C, 0]] must be
// nonsingular. Shift-invert Lanczos with full B-reorthogonalization and
// repeated B-orthogonal deflation so multiple eigenvalues are found.
EigResult smallest_eigs_constrained(const SpMat& A, const SpMat& B, const SpMat& C, int k,
                                    const EigOptions& opts = {});

using LinearOperator = std::function<Vec(const Vec&)>;

struct PowerOptions {
    double tol = 1e-8;          // relative accuracy target of the Rayleigh quotient
    double residual_tol = 1e-5; // relative M^-1 residual required as well
    int max_iterations = 10000;
    std::uint64_t seed = 0x5eed2024u;
};

struct PowerResult {
    double mu = 0.0;        // Rayleigh quotient of the returned vector
    Vec vector;             // M-normalized, C vector = 0
    double residual = 0.0;  // relative, projected
    int iterations = 0;
    bool converged = false;
};

// Largest mu of Q y = mu M y on ker C by power iteration in the M inner
// product, projecting each iterate with a prefactored [[M, C^T], [C, 0]] solve.
PowerResult largest_eig_power(const LinearOperator& Q, const SpMat& M, const SpMat& C,
                              const PowerOptions& opts = {});

// max (ell^T x)^2 / (x^T B x) over C x = 0, via one saddle solve.
double rank_one_max_eig(const Vec& ell, const Mat& B, const Mat& C);
double rank_one_max_eig(const Vec& ell, const SpMat& B, const SpMat& C);

// Orthonormal basis of ker C (columns).
Mat null_space(const Mat& C, double rtol = 1e-11);

struct DenseEig {
    Vec values;  // ascending
    Mat vectors;
};

// All eigenpairs of A x = mu B x restricted to ker C; B must be SPD there.
DenseEig dense_constrained_eigs(const Mat& A, const Mat& B, const Mat& C);

// Deterministic uniform numbers in [-1, 1] from a 64-bit seed.
Vec seeded_vector(int n, std::uint64_t seed);

}  // namespace maxlow
