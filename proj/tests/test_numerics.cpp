#include <gtest/gtest.h>

#include <jamnull/numerics.hpp>

#include <limits>

#include "support.hpp"

using namespace jamnull;

namespace {

/// Largest eigenvalues by power iteration with deflation; an oracle that
/// shares no code with the library solvers.
std::vector<double> power_iteration_spectrum(ComplexMatrix m, int count) {
    std::vector<double> out;
    for (int k = 0; k < count; ++k) {
        ComplexVector v = ComplexVector::Ones(m.rows()) / std::sqrt(static_cast<double>(m.rows()));
        double lambda = 0.0;
        for (int it = 0; it < 20000; ++it) {
            ComplexVector w = m * v;
            const double next = std::real(v.dot(w));
            v = w / w.norm();
            if (std::abs(next - lambda) < 1e-15 * std::abs(next)) {
                lambda = next;
                break;
            }
            lambda = next;
        }
        out.push_back(lambda);
        m -= lambda * v * v.adjoint();
    }
    return out;
}

} // namespace

TEST(Svd, IdentityGivesUnitFactors) {
    const ComplexMatrix i3 = ComplexMatrix::Identity(3, 3);
    const SvdResult d = svd(i3);
    EXPECT_LT((d.S - RealVector::Ones(3)).norm(), 1e-15);
    EXPECT_LT((d.U - i3).norm(), 1e-12);
    EXPECT_LT((d.V - i3).norm(), 1e-12);
}

TEST(Svd, DiagonalSingularValues) {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = 2.0;
    m(1, 1) = 1.0;
    const SvdResult d = svd(m);
    EXPECT_DOUBLE_EQ(d.S(0), 2.0);
    EXPECT_DOUBLE_EQ(d.S(1), 1.0);
}

TEST(Svd, ReconstructsAndIsUnitaryUpTo32) {
    Rng rng(3);
    for (Eigen::Index r : {1, 2, 5, 8, 17, 32}) {
        for (Eigen::Index c : {1, 3, 8, 32}) {
            const ComplexMatrix m = complex_gaussian_matrix(rng, r, c);
            const SvdResult d = svd(m);
            ComplexMatrix s = ComplexMatrix::Zero(r, c);
            for (Eigen::Index i = 0; i < d.S.size(); ++i) s(i, i) = d.S(i);
            EXPECT_LT(relative_frobenius_error(d.U * s * d.V.adjoint(), m), 1e-10) << r << "x" << c;
            EXPECT_LT((d.U.adjoint() * d.U - ComplexMatrix::Identity(r, r)).norm(), 1e-10);
            EXPECT_LT((d.V.adjoint() * d.V - ComplexMatrix::Identity(c, c)).norm(), 1e-10);
            for (Eigen::Index i = 1; i < d.S.size(); ++i) EXPECT_GE(d.S(i - 1), d.S(i));
            EXPECT_GE(d.S.minCoeff(), 0.0);
        }
    }
}

TEST(Svd, PhaseConventionFirstEntryRealNonnegative) {
    Rng rng(4);
    const SvdResult d = svd(complex_gaussian_matrix(rng, 6, 6));
    for (Eigen::Index c = 0; c < d.U.cols(); ++c) {
        EXPECT_EQ(d.U(0, c).imag(), 0.0);
        EXPECT_GE(d.U(0, c).real(), 0.0);
    }
}

TEST(Svd, PsdSingularValuesMatchIndependentEigenOracles) {
    Rng rng(5);
    RealVector lambda(8);
    lambda << 9.0, 6.5, 4.7, 3.3, 2.1, 1.4, 0.9, 0.5;
    const ComplexMatrix m = test_support::psd_with_spectrum(rng, lambda);
    const SvdResult d = svd(m);
    EXPECT_LT((d.S - lambda).cwiseAbs().maxCoeff(), 1e-8);
    const auto power = power_iteration_spectrum(m, 8);
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(d.S(i), power[static_cast<std::size_t>(i)], 1e-8);
}

TEST(Svd, IdempotentUnderReconstruction) {
    Rng rng(6);
    const ComplexMatrix m = complex_gaussian_matrix(rng, 12, 9);
    const SvdResult d1 = svd(m);
    ComplexMatrix s = ComplexMatrix::Zero(12, 9);
    for (Eigen::Index i = 0; i < 9; ++i) s(i, i) = d1.S(i);
    const ComplexMatrix rebuilt = d1.U * s * d1.V.adjoint();
    const SvdResult d2 = svd(rebuilt);
    EXPECT_LT((d1.S - d2.S).norm(), 1e-10 * d1.S(0));
}

TEST(Svd, NonFiniteInputRejected) {
    ComplexMatrix m = ComplexMatrix::Identity(2, 2);
    m(1, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(svd(m), NumericInputError);
    m(1, 0) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(svd(m), NumericInputError);
}

TEST(PsdFactor, Identity) {
    const ComplexMatrix i = ComplexMatrix::Identity(4, 4);
    EXPECT_LT((psd_factor(i) - i).norm(), 1e-15);
}

TEST(PsdFactor, CorrelatedPairMultipliesBack) {
    ComplexMatrix m(2, 2);
    m << 1.0, 0.8, 0.8, 1.0;
    const ComplexMatrix l = psd_factor(m);
    EXPECT_LT(relative_frobenius_error(l * l.adjoint(), m), 1e-10);
}

TEST(PsdFactor, RankOneSucceeds) {
    ComplexMatrix m = ComplexMatrix::Ones(2, 2);
    const ComplexMatrix l = psd_factor(m);
    EXPECT_LT(relative_frobenius_error(l * l.adjoint(), m), 1e-10);
}

TEST(PsdFactor, RandomRankDeficient) {
    Rng rng(8);
    const ComplexMatrix g = complex_gaussian_matrix(rng, 6, 2);
    const ComplexMatrix m = g * g.adjoint();
    const ComplexMatrix l = psd_factor((m + m.adjoint()) * 0.5);
    EXPECT_LT(relative_frobenius_error(l * l.adjoint(), m), 1e-10);
}

TEST(PsdFactor, Errors) {
    ComplexMatrix nh(2, 2);
    nh << 1.0, 0.5, 0.1, 1.0;
    EXPECT_THROW(psd_factor(nh), ShapeError);
    ComplexMatrix neg(2, 2);
    neg << 1.0, 2.0, 2.0, 1.0; // eigenvalues 3 and -1
    EXPECT_THROW(psd_factor(neg), NotPsdError);
}

TEST(Pinv, DiagonalWithZero) {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = 2.0;
    ComplexMatrix expect = ComplexMatrix::Zero(2, 2);
    expect(0, 0) = 0.5;
    EXPECT_LT((pinv(m, 1e-12) - expect).norm(), 1e-15);
}

TEST(Pinv, InvertibleTwoByTwoMatchesClosedForm) {
    ComplexMatrix m(2, 2);
    m << cplx(1.0, 2.0), cplx(-0.5, 0.3), cplx(0.7, -1.1), cplx(2.0, 0.4);
    const cplx det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    ComplexMatrix inv(2, 2);
    inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    inv /= det;
    EXPECT_LT(relative_frobenius_error(pinv(m), inv), 1e-10);
}

TEST(Pinv, ZeroMatrix) {
    EXPECT_EQ(pinv(ComplexMatrix::Zero(3, 2)).norm(), 0.0);
}

TEST(Pinv, MoorePenroseIdentities) {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        ComplexMatrix a = complex_gaussian_matrix(rng, 8, 8);
        if (trial % 2) a = complex_gaussian_matrix(rng, 8, 3) * complex_gaussian_matrix(rng, 3, 8); // rank 3
        const ComplexMatrix p = pinv(a);
        const double s = a.norm();
        EXPECT_LT((a * p * a - a).norm() / s, 1e-8);
        EXPECT_LT((p * a * p - p).norm() / p.norm(), 1e-8);
        EXPECT_LT(((a * p).adjoint() - a * p).norm(), 1e-8);
        EXPECT_LT(((p * a).adjoint() - p * a).norm(), 1e-8);
    }
}

TEST(Gaussian, ZeroFactorReturnsMean) {
    Rng rng(10);
    ComplexVector mu(2);
    mu << cplx(1.0, -1.0), cplx(0.5, 2.0);
    const ComplexMatrix x = sample_complex_gaussian(rng, mu, ComplexMatrix::Zero(2, 2), 50);
    for (Eigen::Index c = 0; c < x.cols(); ++c) EXPECT_EQ((x.col(c) - mu).norm(), 0.0);
}

TEST(Gaussian, IdentityFactorUnitVariance) {
    Rng rng(11);
    const ComplexMatrix x = sample_complex_gaussian(rng, ComplexVector::Zero(3), ComplexMatrix::Identity(3, 3), 100000);
    for (Eigen::Index r = 0; r < 3; ++r) EXPECT_NEAR(x.row(r).squaredNorm() / 1e5, 1.0, 0.02);
}

TEST(Gaussian, CorrelationAndCovarianceFit) {
    Rng rng(12);
    ComplexMatrix sigma(2, 2);
    sigma << 1.0, 0.8, 0.8, 1.0;
    const ComplexMatrix x = sample_complex_gaussian(rng, ComplexVector::Zero(2), psd_factor(sigma), 100000);
    const ComplexMatrix emp = x * x.adjoint() / 1e5;
    EXPECT_LT(relative_frobenius_error(emp, sigma), 0.02);
    const double rho = std::real(emp(0, 1)) / std::sqrt(std::real(emp(0, 0)) * std::real(emp(1, 1)));
    EXPECT_NEAR(rho, 0.8, 0.02);
}

TEST(Gaussian, ShapeErrors) {
    Rng rng(13);
    EXPECT_THROW(sample_complex_gaussian(rng, ComplexVector::Zero(3), ComplexMatrix::Identity(2, 2), 4), ShapeError);
    EXPECT_THROW(sample_complex_gaussian(rng, ComplexVector::Zero(2), ComplexMatrix::Identity(2, 3), 4), ShapeError);
}

TEST(Rng, EqualSeedsBitIdentical) {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        const cplx x = a.complex_normal();
        const cplx y = b.complex_normal();
        EXPECT_EQ(x, y);
        EXPECT_EQ(a.uniform(), b.uniform());
    }
    Rng c(42), d(42);
    Rng cs = c.split(5), ds = d.split(5);
    EXPECT_EQ(cs.seed(), ds.seed());
    EXPECT_EQ(cs.normal(), ds.normal());
    Rng e(42);
    EXPECT_NE(e.split(6).seed(), cs.seed());
}

TEST(HaarColumns, Orthonormal) {
    Rng rng(14);
    const ComplexMatrix q = random_orthonormal_columns(rng, 8, 6);
    EXPECT_LT((q.adjoint() * q - ComplexMatrix::Identity(6, 6)).norm(), 1e-12);
}
