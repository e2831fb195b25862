#include "maxlow/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "maxlow/log.hpp"

namespace maxlow {

SpMat block_matrix(const std::vector<int>& row_sizes, const std::vector<int>& col_sizes,
                   const std::vector<Block>& blocks) {
    std::vector<int> r0(row_sizes.size() + 1, 0), c0(col_sizes.size() + 1, 0);
    for (size_t i = 0; i < row_sizes.size(); ++i) r0[i + 1] = r0[i] + row_sizes[i];
    for (size_t j = 0; j < col_sizes.size(); ++j) c0[j + 1] = c0[j] + col_sizes[j];
    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& b : blocks) {
        const SpMat& m = *b.matrix;
        const int rows = b.transpose ? static_cast<int>(m.cols()) : static_cast<int>(m.rows());
        const int cols = b.transpose ? static_cast<int>(m.rows()) : static_cast<int>(m.cols());
        if (rows != row_sizes[b.row] || cols != col_sizes[b.col])
            throw std::invalid_argument("block size mismatch");
        for (int k = 0; k < m.outerSize(); ++k)
            for (SpMat::InnerIterator it(m, k); it; ++it) {
                int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
                if (b.transpose) std::swap(i, j);
                trip.emplace_back(r0[b.row] + i, c0[b.col] + j, b.scale * it.value());
            }
    }
    SpMat out(r0.back(), c0.back());
    out.setFromTriplets(trip.begin(), trip.end());
    out.makeCompressed();
    return out;
}

SpMat saddle(const SpMat& A, const SpMat& C) {
    const int n = static_cast<int>(A.rows()), m = static_cast<int>(C.rows());
    return block_matrix({n, m}, {n, m}, {{0, 0, &A}, {0, 1, &C, 1.0, true}, {1, 0, &C}});
}

struct Factorization::Impl {
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
};

Factorization::Factorization(const SpMat& A) : a_(A) {
    if (A.rows() != A.cols()) throw SolverError("factorization needs a square matrix");
    auto impl = std::make_shared<Impl>();
    if (A.rows() > 0) {
        impl->lu.analyzePattern(a_);
        impl->lu.factorize(a_);
        if (impl->lu.info() != Eigen::Success)
            throw SolverError("sparse LU failed: " + impl->lu.lastErrorMessage());
    }
    impl_ = std::move(impl);
}

Vec Factorization::solve(const Vec& b) const {
    if (!impl_) throw SolverError("factorization not initialized");
    if (a_.rows() == 0) return Vec(0);
    Vec x = impl_->lu.solve(b);
    // one step of iterative refinement
    Vec r = b - a_ * x;
    x += impl_->lu.solve(r);
    return x;
}

double Factorization::relative_residual(const Vec& b, const Vec& x) const {
    double norm1 = 0.0;
    for (int k = 0; k < a_.outerSize(); ++k) {
        double s = 0.0;
        for (SpMat::InnerIterator it(a_, k); it; ++it) s += std::abs(it.value());
        norm1 = std::max(norm1, s);
    }
    double denom = norm1 * x.norm() + b.norm();
    return denom > 0 ? (a_ * x - b).norm() / denom : 0.0;
}

Inertia Factorization::inertia(int dense_limit) const {
    Inertia in;
    if (a_.rows() > dense_limit) return in;
    Mat D = Mat(a_);
    Mat S = 0.5 * (D + D.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
    const Vec& ev = es.eigenvalues();
    double scale = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
    for (int i = 0; i < ev.size(); ++i) {
        if (std::abs(ev[i]) <= 1e-10 * scale)
            ++in.zero;
        else if (ev[i] > 0)
            ++in.positive;
        else
            ++in.negative;
    }
    in.available = true;
    return in;
}

Vec seeded_vector(int n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0;
    return v;
}

namespace {

// Least-squares removal of the range of C^T from r.
class RangeProjector {
public:
    explicit RangeProjector(const SpMat& C) : c_(C) {
        if (C.rows() > 0) {
            SpMat cct = C * SpMat(C.transpose());
            ldlt_.compute(cct);
            ok_ = ldlt_.info() == Eigen::Success;
        }
    }
    Vec remove(const Vec& r) const {
        if (c_.rows() == 0 || !ok_) return r;
        Vec y = ldlt_.solve(c_ * r);
        return r - SpMat(c_.transpose()) * y;
    }

private:
    const SpMat& c_;
    Eigen::SimplicialLDLT<SpMat> ldlt_;
    bool ok_ = false;
};

void b_orthogonalize(Vec& w, const Mat& Q, int cols, const SpMat& B) {
    for (int pass = 0; pass < 2; ++pass) {
        if (cols == 0) return;
        Vec bw = B * w;
        Vec h = Q.leftCols(cols).transpose() * bw;
        w -= Q.leftCols(cols) * h;
    }
}

struct LanczosRun {
    std::vector<double> mu;
    std::vector<Vec> x;
    int steps = 0;
    bool exhausted = false;
};

LanczosRun lanczos(const std::function<Vec(const Vec&)>& op, const SpMat& B, const Mat& locked,
                   int n_eff, int want, double tol, std::uint64_t seed, double shift) {
    const int n = static_cast<int>(B.rows());
    const int nl = static_cast<int>(locked.cols());
    const int cap = n_eff - nl;
    LanczosRun run;
    if (cap <= 0) {
        run.exhausted = true;
        return run;
    }
    int mcap = std::min(cap, std::max(2 * want + 40, 80));
    Mat Q(n, mcap + 1);
    std::vector<double> alpha, beta;

    Vec q = op(seeded_vector(n, seed));
    b_orthogonalize(q, locked, nl, B);
    double nq = std::sqrt(q.dot(B * q));
    if (!(nq > 0)) throw SolverError("Lanczos start vector vanished");
    Q.col(0) = q / nq;

    Eigen::SelfAdjointEigenSolver<Mat> tri;
    int m = 0;
    bool converged = false;
    while (true) {
        Vec w = op(Q.col(m));
        b_orthogonalize(w, locked, nl, B);
        double a = Q.col(m).dot(B * w);
        alpha.push_back(a);
        b_orthogonalize(w, Q, m + 1, B);
        double b = std::sqrt(std::max(0.0, w.dot(B * w)));
        ++m;
        const bool invariant = b <= 1e-13 * std::max(std::abs(a), 1.0) || m >= cap;
        if (m % 4 == 0 || invariant || m >= want + 4) {
            Mat T = Mat::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                T(i, i) = alpha[i];
                if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
            }
            tri.compute(T);
            const int got = std::min(want, m);
            converged = got == want || invariant;
            for (int i = 0; i < got && converged; ++i) {
                double theta = tri.eigenvalues()[m - 1 - i];
                double est = std::abs(b * tri.eigenvectors()(m - 1, m - 1 - i));
                if (invariant) est = 0.0;
                if (!(theta > 0) || est > tol * std::abs(theta)) converged = false;
            }
            if (converged || invariant) {
                run.exhausted = invariant && m >= cap;
                break;
            }
        }
        if (m >= mcap) {
            int grow = std::min(cap, 2 * mcap);
            Q.conservativeResize(n, grow + 1);
            mcap = grow;
        }
        beta.push_back(b);
        Q.col(m) = w / b;
    }
    run.steps = m;
    const int got = std::min(want, m);
    for (int i = 0; i < got; ++i) {
        double theta = tri.eigenvalues()[m - 1 - i];
        if (!(theta > 0)) continue;
        Vec x = Q.leftCols(m) * tri.eigenvectors().col(m - 1 - i);
        x /= std::sqrt(x.dot(B * x));
        run.mu.push_back(shift + 1.0 / theta);
        run.x.push_back(std::move(x));
    }
    return run;
}

}  // namespace

EigResult smallest_eigs_constrained(const SpMat& A, const SpMat& B, const SpMat& C, int k, const EigOptions& opts) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(C.rows());
    if (k < 1) throw SolverError("eigenvalue count must be at least 1");
    if (B.rows() != n || B.cols() != n || A.cols() != n || (m > 0 && C.cols() != n))
        throw SolverError("eigenproblem dimension mismatch");
    const int n_eff = n - m;
    if (k > n_eff)
        throw SolverError("requested " + std::to_string(k) + " eigenvalues but the constrained space has dimension " +
                          std::to_string(std::max(n_eff, 0)));

    SpMat shifted = opts.shift == 0.0 ? A : SpMat(A - opts.shift * B);
    Factorization fac(m > 0 ? saddle(shifted, C) : shifted);
    auto op = [&](const Vec& v) -> Vec {
        Vec rhs = Vec::Zero(n + m);
        rhs.head(n) = B * v;
        Vec x = fac.solve(rhs);
        return x.head(n);
    };

    std::vector<double> vals;
    std::vector<Vec> vecs;
    int iters = 0;
    for (int round = 0; round < opts.max_deflation_rounds; ++round) {
        Mat locked(n, static_cast<int>(vecs.size()));
        for (size_t i = 0; i < vecs.size(); ++i) locked.col(static_cast<int>(i)) = vecs[i];
        if (static_cast<int>(vecs.size()) >= n_eff) break;
        auto run = lanczos(op, B, locked, n_eff, std::min(k, n_eff - static_cast<int>(vecs.size())), opts.tol,
                           opts.seed + 7919u * round, opts.shift);
        iters += run.steps;
        double kth = std::numeric_limits<double>::infinity();
        if (static_cast<int>(vals.size()) >= k) {
            std::vector<double> s = vals;
            std::sort(s.begin(), s.end());
            kth = s[k - 1];
        }
        int added = 0;
        for (size_t i = 0; i < run.mu.size(); ++i) {
            if (static_cast<int>(vals.size()) < k || run.mu[i] <= kth * (1 + 1e-8)) {
                vals.push_back(run.mu[i]);
                vecs.push_back(run.x[i]);
                ++added;
            }
        }
        log_debug("lanczos round " + std::to_string(round) + ": " + std::to_string(run.steps) + " steps, " +
                  std::to_string(added) + " new pairs");
        if (added == 0 || run.exhausted) break;
    }
    if (static_cast<int>(vals.size()) < k) throw SolverError("Lanczos found fewer eigenpairs than requested");

    std::vector<int> order(vals.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });

    EigResult res;
    res.values.resize(k);
    res.vectors.resize(n, k);
    res.residuals.resize(k);
    res.iterations = iters;
    RangeProjector proj(C);
    for (int i = 0; i < k; ++i) {
        res.values[i] = vals[order[i]];
        res.vectors.col(i) = vecs[order[i]];
    }
    // final B-orthonormalization of the selected block
    for (int i = 0; i < k; ++i) {
        Vec x = res.vectors.col(i);
        b_orthogonalize(x, res.vectors, i, B);
        res.vectors.col(i) = x / std::sqrt(x.dot(B * x));
    }
    for (int i = 0; i < k; ++i) {
        Vec x = res.vectors.col(i);
        Vec bx = B * x;
        Vec r = proj.remove(A * x - res.values[i] * bx);
        res.residuals[i] = r.norm() / bx.norm();
    }
    return res;
}

PowerResult largest_eig_power(const LinearOperator& Q, const SpMat& M, const SpMat& C, const PowerOptions& opts) {
    const int n = static_cast<int>(M.rows());
    const int m = static_cast<int>(C.rows());
    Factorization fac(m > 0 ? saddle(M, C) : M);
    auto project = [&](const Vec& r) -> Vec {
        Vec rhs = Vec::Zero(n + m);
        rhs.head(n) = r;
        return fac.solve(rhs).head(n);
    };
    auto mnorm = [&](const Vec& v) { return std::sqrt(std::max(0.0, v.dot(M * v))); };

    PowerResult res;
    Vec y = project(M * seeded_vector(n, opts.seed));
    double ny = mnorm(y);
    if (!(ny > 0)) throw SolverError("power method start vector vanished");
    y /= ny;
    double prev = -1.0;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        Vec z = Q(y);
        double mu = y.dot(z);
        Vec x = project(z);
        double res_rel = mu > 0 ? mnorm(x - mu * y) / mu : 0.0;
        res.mu = mu;
        res.vector = y;
        res.residual = res_rel;
        res.iterations = it;
        if (!(mu > 0)) {
            res.converged = mu == 0.0 && x.norm() == 0.0;
            return res;
        }
        if (prev > 0 && std::abs(mu - prev) <= 1e-2 * opts.tol * mu && res_rel <= opts.residual_tol) {
            res.converged = true;
            return res;
        }
        prev = mu;
        double nx = mnorm(x);
        if (!(nx > 0)) {
            res.converged = true;
            return res;
        }
        y = x / nx;
    }
    return res;
}

double rank_one_max_eig(const Vec& ell, const Mat& B, const Mat& C) {
    const int n = static_cast<int>(B.rows());
    const int m = static_cast<int>(C.rows());
    if (ell.isZero(0.0)) return 0.0;
    Mat S = Mat::Zero(n + m, n + m);
    S.topLeftCorner(n, n) = B;
    if (m > 0) {
        S.topRightCorner(n, m) = C.transpose();
        S.bottomLeftCorner(m, n) = C;
    }
    Eigen::FullPivLU<Mat> lu(S);
    if (!lu.isInvertible()) throw SolverError("rank-one pencil: B is singular on the admissible subspace");
    Vec rhs = Vec::Zero(n + m);
    rhs.head(n) = ell;
    Vec w = lu.solve(rhs);
    return ell.dot(w.head(n));
}

double rank_one_max_eig(const Vec& ell, const SpMat& B, const SpMat& C) {
    if (ell.isZero(0.0)) return 0.0;
    const int n = static_cast<int>(B.rows());
    const int m = static_cast<int>(C.rows());
    Factorization fac(m > 0 ? saddle(B, C) : B);
    Vec rhs = Vec::Zero(n + m);
    rhs.head(n) = ell;
    Vec w = fac.solve(rhs);
    if (!w.allFinite()) throw SolverError("rank-one pencil: B is singular on the admissible subspace");
    return ell.dot(w.head(n));
}

Mat null_space(const Mat& C, double rtol) {
    const int n = static_cast<int>(C.cols());
    if (C.rows() == 0) return Mat::Identity(n, n);
    Eigen::JacobiSVD<Mat> svd(C, Eigen::ComputeFullV);
    const Vec& s = svd.singularValues();
    double smax = s.size() ? s[0] : 0.0;
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > rtol * smax) ++rank;
    return svd.matrixV().rightCols(n - rank);
}

DenseEig dense_constrained_eigs(const Mat& A, const Mat& B, const Mat& C) {
    Mat N = null_space(C);
    DenseEig out;
    if (N.cols() == 0) return out;
    Mat a = N.transpose() * A * N, b = N.transpose() * B * N;
    a = 0.5 * (a + a.transpose());
    b = 0.5 * (b + b.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(a, b);
    if (es.info() != Eigen::Success) throw SolverError("dense generalized eigensolver failed");
    out.values = es.eigenvalues();
    out.vectors = N * es.eigenvectors();
    return out;
}

}  // namespace maxlow
