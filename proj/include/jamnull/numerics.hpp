#pragma once

// Complex linear-algebra kernel. Dense storage and the core factorizations are
// delegated to Eigen; this header fixes the conventions the rest of the
// library depends on (descending singular values, deterministic phases,
// clamped PSD factors) and owns the seeded random source.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "jamnull/errors.hpp"

namespace jamnull {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Seeded random source. Equal seeds give bit-identical streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    double normal() { return normal_(engine_); }

    /// Unit-variance circularly-symmetric complex Gaussian, (a + jb)/sqrt(2).
    cplx complex_normal() {
        const double a = normal_(engine_);
        const double b = normal_(engine_);
        return {a * M_SQRT1_2, b * M_SQRT1_2};
    }

    /// Derives an independent child generator; used to give each subsystem its
    /// own stream so that adding draws in one place does not perturb another.
    Rng split(std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                          static_cast<std::uint32_t>(engine_())};
        std::uint64_t s = 0;
        std::array<std::uint32_t, 2> out{};
        seq.generate(out.begin(), out.end());
        s = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
        return Rng(s);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

struct SvdResult {
    ComplexMatrix U;
    RealVector S; // descending, nonnegative
    ComplexMatrix V;
};

namespace detail {

inline void require_finite(const ComplexMatrix& m, const char* what) {
    if (!m.allFinite()) throw NumericInputError(std::string(what) + ": non-finite input");
}

inline void require_nonempty(const ComplexMatrix& m, const char* what) {
    if (m.rows() < 1 || m.cols() < 1) throw ShapeError(std::string(what) + ": empty matrix");
}

/// Rotates column `c` of `u` so its first nonzero entry is real and
/// nonnegative; returns the applied unit phase.
inline cplx normalize_phase(ComplexMatrix& u, Eigen::Index c) {
    const double tol = 1e-14 * std::max(1.0, u.col(c).norm());
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
        const double mag = std::abs(u(r, c));
        if (mag > tol) {
            const cplx phase = std::conj(u(r, c)) / mag;
            u.col(c) *= phase;
            u(r, c) = mag; // exact real
            return phase;
        }
    }
    return {1.0, 0.0};
}

} // namespace detail

inline double relative_frobenius_error(const ComplexMatrix& a, const ComplexMatrix& b) {
    const double denom = std::max(b.norm(), 1e-300);
    return (a - b).norm() / denom;
}

inline bool is_hermitian(const ComplexMatrix& m, double rel_tol = 1e-12) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(m.norm(), 1e-300);
    return (m - m.adjoint()).norm() <= rel_tol * scale;
}

/// Full SVD, m = U diag(S) V^H with S descending. Each left singular vector
/// has its first nonzero entry real nonnegative; the paired right vector is
/// rotated by the same phase so the product is unchanged.
inline SvdResult svd(const ComplexMatrix& m) {
    detail::require_nonempty(m, "svd");
    detail::require_finite(m, "svd");
    Eigen::JacobiSVD<ComplexMatrix> solver(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SvdResult out{solver.matrixU(), solver.singularValues(), solver.matrixV()};
    const Eigen::Index k = out.S.size();
    for (Eigen::Index c = 0; c < out.U.cols(); ++c) {
        const cplx phase = detail::normalize_phase(out.U, c);
        if (c < k) out.V.col(c) *= phase;
    }
    return out;
}

struct HermitianEig {
    RealVector values;     // descending
    ComplexMatrix vectors; // columns, matching `values`
};

inline HermitianEig hermitian_eig(const ComplexMatrix& m) {
    detail::require_nonempty(m, "hermitian_eig");
    detail::require_finite(m, "hermitian_eig");
    if (!is_hermitian(m, 1e-10)) throw ShapeError("hermitian_eig: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
    const Eigen::Index n = m.rows();
    HermitianEig out{RealVector(n), ComplexMatrix(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i) = solver.eigenvalues()(n - 1 - i);
        out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    return out;
}

/// Returns L with L L^H = m. Positive-definite input goes through Cholesky;
/// singular input falls back to an eigendecomposition with small negative
/// eigenvalues clamped to zero.
inline ComplexMatrix psd_factor(const ComplexMatrix& m) {
    detail::require_nonempty(m, "psd_factor");
    detail::require_finite(m, "psd_factor");
    if (!is_hermitian(m, 1e-10)) throw ShapeError("psd_factor: matrix is not Hermitian");
    Eigen::LLT<ComplexMatrix> llt(m);
    if (llt.info() == Eigen::Success) {
        ComplexMatrix l = llt.matrixL();
        if (l.allFinite()) return l;
    }
    const HermitianEig eig = hermitian_eig(m);
    const double top = std::max(eig.values(0), 0.0);
    const Eigen::Index n = m.rows();
    ComplexMatrix l(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double lambda = eig.values(i);
        if (lambda < -1e-10 * std::max(top, 1e-300)) {
            throw NotPsdError("psd_factor: eigenvalue " + std::to_string(lambda) + " below tolerance");
        }
        lambda = std::max(lambda, 0.0);
        l.col(i) = eig.vectors.col(i) * std::sqrt(lambda);
    }
    return l;
}

inline constexpr double kDefaultRcond = 1e-10;

/// Moore-Penrose pseudo-inverse; singular values below rcond * s_max count as zero.
inline ComplexMatrix pinv(const ComplexMatrix& m, double rcond = kDefaultRcond) {
    detail::require_nonempty(m, "pinv");
    detail::require_finite(m, "pinv");
    const SvdResult d = svd(m);
    ComplexMatrix out = ComplexMatrix::Zero(m.cols(), m.rows());
    if (d.S.size() == 0 || d.S(0) == 0.0) return out;
    const double cutoff = rcond * d.S(0);
    for (Eigen::Index i = 0; i < d.S.size(); ++i) {
        if (d.S(i) <= cutoff) break;
        out += d.V.col(i) * (1.0 / d.S(i)) * d.U.col(i).adjoint();
    }
    return out;
}

/// Draws n columns mean + cov_factor * z with z standard circular complex Gaussian.
inline ComplexMatrix sample_complex_gaussian(Rng& rng, const ComplexVector& mean,
                                             const ComplexMatrix& cov_factor, std::size_t n) {
    if (cov_factor.rows() != cov_factor.cols())
        throw ShapeError("sample_complex_gaussian: covariance factor must be square");
    if (mean.size() != cov_factor.rows())
        throw ShapeError("sample_complex_gaussian: mean/factor dimension mismatch");
    if (n < 1) throw InputError("sample_complex_gaussian: n must be >= 1");
    const Eigen::Index d = cov_factor.rows();
    ComplexMatrix z(d, static_cast<Eigen::Index>(n));
    for (Eigen::Index c = 0; c < z.cols(); ++c)
        for (Eigen::Index r = 0; r < d; ++r) z(r, c) = rng.complex_normal();
    ComplexMatrix out = cov_factor * z;
    out.colwise() += mean;
    return out;
}

/// Matrix of i.i.d. CN(0, variance) entries.
inline ComplexMatrix complex_gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                             double variance = 1.0) {
    const double s = std::sqrt(variance);
    ComplexMatrix out(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = s * rng.complex_normal();
    return out;
}

/// rows x cols matrix with orthonormal columns (rows >= cols) drawn from the
/// Haar measure via QR of a Gaussian matrix.
inline ComplexMatrix random_orthonormal_columns(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    if (cols > rows) throw ShapeError("random_orthonormal_columns: cols > rows");
    const ComplexMatrix g = complex_gaussian_matrix(rng, rows, cols);
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(rows, cols);
    // Fix the phase ambiguity of QR so the distribution is exactly Haar.
    const ComplexMatrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
    for (Eigen::Index c = 0; c < cols; ++c) {
        const double mag = std::abs(r(c, c));
        if (mag > 0) q.col(c) *= r(c, c) / mag;
    }
    return q;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

} // namespace jamnull
