#include <gtest/gtest.h>

#include <jamnull/beamform.hpp>
#include <jamnull/jamming.hpp>

#include <algorithm>

using namespace jamnull;
using namespace jamnull::beamform;

namespace {

std::vector<cplx> random_qam(Rng& rng, std::size_t n) {
    std::vector<cplx> s(n);
    for (auto& x : s) x = qam16_symbol(rng.index(16));
    return s;
}

ComplexMatrix qam_block(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    ComplexMatrix x(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) x(r, c) = qam16_symbol(rng.index(16));
    return x;
}

jamming::JammerModel fixed_jammers(double rho, double var) {
    jamming::JammerModel m;
    m.variances = {var, var};
    m.schedule.kind = jamming::ScheduleKind::constant;
    m.schedule.rho_max = rho;
    return m;
}

} // namespace

TEST(SampleCovariance, SingleColumn) {
    ComplexMatrix y(2, 1);
    y << 1.0, 0.0;
    ComplexMatrix expect = ComplexMatrix::Zero(2, 2);
    expect(0, 0) = 1.0;
    EXPECT_EQ((sample_covariance(y, 1) - expect).norm(), 0.0);
}

TEST(SampleCovariance, WhiteNoiseApproachesIdentity) {
    Rng rng(1);
    const ComplexMatrix y = complex_gaussian_matrix(rng, 4, 100000);
    EXPECT_LT(relative_frobenius_error(sample_covariance(y, 100000), ComplexMatrix::Identity(4, 4)), 0.03);
}

TEST(SampleCovariance, HomogeneousAndHermitian) {
    Rng rng(2);
    const ComplexMatrix y = complex_gaussian_matrix(rng, 5, 30);
    const ComplexMatrix r = sample_covariance(y, 30);
    EXPECT_LT(relative_frobenius_error(sample_covariance(3.0 * y, 30), 9.0 * r), 1e-14);
    EXPECT_TRUE((r.array() == r.adjoint().array()).all());
}

TEST(SampleCovariance, Errors) {
    EXPECT_THROW(sample_covariance(ComplexMatrix::Zero(2, 0), 0), InputError);
    EXPECT_THROW(sample_covariance(ComplexMatrix::Zero(2, 3), 4), ShapeError);
}

TEST(Nullspace, SingleDirection) {
    ComplexMatrix z(2, 1);
    z << M_SQRT1_2, M_SQRT1_2;
    const auto est = estimate_nullspace(z * z.adjoint(), 1);
    ASSERT_EQ(est.G_hat.rows(), 1);
    EXPECT_NEAR(std::abs(est.G_hat(0, 0)), M_SQRT1_2, 1e-12);
    EXPECT_NEAR(std::abs(est.G_hat(0, 1)), M_SQRT1_2, 1e-12);
    EXPECT_LT(std::abs((est.G_hat * z)(0, 0)), 1e-12);
}

TEST(Nullspace, DegenerateIdentityStillOrthonormal) {
    const auto est = estimate_nullspace(ComplexMatrix::Identity(8, 8), 2);
    EXPECT_LT((est.G_hat * est.G_hat.adjoint() - ComplexMatrix::Identity(6, 6)).norm(), 1e-12);
}

TEST(Nullspace, RowsOrthonormalForIllConditionedInput) {
    Rng rng(3);
    const ComplexMatrix z = complex_gaussian_matrix(rng, 8, 2);
    ComplexMatrix r = 1e12 * z * z.adjoint() + 1e-12 * ComplexMatrix::Identity(8, 8);
    r = (r + r.adjoint()) * 0.5;
    const auto est = estimate_nullspace(r, 2);
    EXPECT_LT((est.G_hat * est.G_hat.adjoint() - ComplexMatrix::Identity(6, 6)).norm(), 1e-10);
    EXPECT_EQ(est.singular_values.size(), 8);
}

TEST(Nullspace, TooManyJammersIsConfigError) {
    EXPECT_THROW(estimate_nullspace(ComplexMatrix::Identity(4, 4), 4), ConfigError);
}

TEST(Nullspace, FixedCorrelationResidualBelowOnePercent) {
    // 40 estimation samples, each jammer 30 dB above a unit noise floor.
    Rng rng(4);
    const auto model = fixed_jammers(0.8, 1000.0);
    int good = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const ComplexMatrix z = complex_gaussian_matrix(rng, 8, 2);
        const ComplexMatrix y = z * jamming::sample_jamming_block(rng, model, 0, 40) + complex_gaussian_matrix(rng, 8, 40);
        const auto est = estimate_nullspace(sample_covariance(y, 40), 2, 40);
        if ((est.G_hat * z).squaredNorm() / z.squaredNorm() < 1e-2) ++good;
    }
    EXPECT_GE(good, 95);
}

TEST(Nullspace, NearUnitCorrelationWindowLeaksAtLeastTenDb) {
    Rng rng(5);
    auto residuals = [&](const jamming::JammerModel& m) {
        std::vector<double> out;
        for (int trial = 0; trial < 100; ++trial) {
            const ComplexMatrix z = complex_gaussian_matrix(rng, 8, 2);
            const ComplexMatrix y = z * jamming::sample_jamming_block(rng, m, 0, 40) + complex_gaussian_matrix(rng, 8, 40);
            const auto est = estimate_nullspace(sample_covariance(y, 40), 2, 40);
            out.push_back((est.G_hat * z).squaredNorm() / z.squaredNorm());
        }
        std::nth_element(out.begin(), out.begin() + 50, out.end());
        return out[50];
    };
    const double fixed = residuals(fixed_jammers(0.8, 1000.0));
    jamming::JammerModel adversarial;
    adversarial.variances = {1000.0, 1000.0}; // sawtooth starts at rho = 1, capped at 0.9999
    const double adv = residuals(adversarial);
    EXPECT_GE(linear_to_db(adv) - linear_to_db(fixed), 10.0);
}

TEST(Zf, UnitaryColumnsGiveAdjoint) {
    Rng rng(6);
    const ComplexMatrix q = random_orthonormal_columns(rng, 6, 3);
    EXPECT_LT((zf_equalizer(q) - q.adjoint()).norm(), 1e-12);
}

TEST(Zf, LeftInverse) {
    Rng rng(7);
    const ComplexMatrix h = complex_gaussian_matrix(rng, 5, 3);
    EXPECT_LT((zf_equalizer(h) * h - ComplexMatrix::Identity(3, 3)).norm(), 1e-8);
}

TEST(Zf, OnesColumn) {
    const ComplexMatrix a = zf_equalizer(ComplexMatrix::Ones(2, 1));
    EXPECT_NEAR(std::abs(a(0, 0) - 0.5), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(a(0, 1) - 0.5), 0.0, 1e-15);
}

TEST(Zf, RankDeficientThrows) {
    ComplexMatrix h = ComplexMatrix::Zero(4, 2);
    h.col(0).setOnes();
    h.col(1).setOnes();
    EXPECT_THROW(zf_equalizer(h), IllConditionedError);
    EXPECT_THROW(zf_equalizer(ComplexMatrix::Ones(2, 3)), IllConditionedError);
}

TEST(SinrEstimator, ExactMatchIsCapped) {
    const std::vector<cplx> s{{1.0, 1.0}, {-1.0, 3.0}};
    EXPECT_DOUBLE_EQ(estimate_sinr_db(s, s), kSinrCapDb);
}

TEST(SinrEstimator, WorkedExample) {
    const std::vector<cplx> ideal{{1.0, 1.0}};
    const std::vector<cplx> actual{{1.1, 0.9}};
    EXPECT_NEAR(estimate_sinr_db(ideal, actual), 20.0, 1e-9);
}

TEST(SinrEstimator, Errors) {
    const std::vector<cplx> a{{1.0, 0.0}};
    const std::vector<cplx> b{{1.0, 0.0}, {0.0, 1.0}};
    EXPECT_THROW(estimate_sinr_db(std::vector<cplx>{}, std::vector<cplx>{}), InputError);
    EXPECT_THROW(estimate_sinr_db(a, b), ShapeError);
}

TEST(SinrEstimator, AwgnWithinHalfDb) {
    Rng rng(8);
    for (double snr_db : {5.0, 10.0, 15.0, 20.0}) {
        const auto ideal = random_qam(rng, 10000);
        std::vector<cplx> actual(ideal);
        const double sd = std::sqrt(db_to_linear(-snr_db));
        for (auto& x : actual) x += sd * rng.complex_normal();
        EXPECT_NEAR(estimate_sinr_db(ideal, actual), snr_db, 0.5) << snr_db;
    }
}

TEST(SinrEstimator, DecisionDirectedAtHighSnr) {
    Rng rng(9);
    const auto ideal = random_qam(rng, 10000);
    std::vector<cplx> actual(ideal);
    const double sd = std::sqrt(db_to_linear(-25.0));
    for (auto& x : actual) x += sd * rng.complex_normal();
    EXPECT_NEAR(estimate_sinr_db_decision(actual), 25.0, 0.5);
}

TEST(Qam16, UnitEnergyAndSlicing) {
    double e = 0.0;
    for (const cplx p : qam16_alphabet()) {
        e += std::norm(p);
        EXPECT_EQ(slice_qam16(p + cplx(0.05, -0.05)), p);
    }
    EXPECT_NEAR(e / 16.0, 1.0, 1e-15);
}

namespace {

LinkBudget paper_like_budget() {
    LinkBudget b;
    b.p_t_linear = 25.0;
    b.noise_var = 4e-15;
    b.eta_bs_ue = 6e7;
    b.eta_jammer_ue = {6.25e8, 6.25e8};
    b.jammer_vars = {1.0, 1.0};
    return b;
}

} // namespace

TEST(Bounds, ZeroJammingCollapsesLowerToUpper) {
    LinkBudget b = paper_like_budget();
    b.jammer_vars = {0.0, 0.0};
    const auto s = spectral_bounds(b);
    EXPECT_EQ(s.c_lb, s.c_ub);
}

TEST(Bounds, NoJammersLowerEqualsNoBeamforming) {
    LinkBudget b = paper_like_budget();
    b.n_jammers = 0;
    const auto s = spectral_bounds(b);
    EXPECT_EQ(s.c_lb, s.c_wbf);
}

TEST(Bounds, PaperSettingMatchesDirectFormula) {
    const LinkBudget b = paper_like_budget();
    const auto s = spectral_bounds(b);
    const double jam = 2.0 / 6.25e8;
    EXPECT_DOUBLE_EQ(s.c_ub, std::log2(1.0 + 25.0 * 3.0 / (6e7 * 4e-15)));
    EXPECT_DOUBLE_EQ(s.c_lb, std::log2(1.0 + 25.0 * 3.0 / (6e7 * (4e-15 + jam))));
    EXPECT_DOUBLE_EQ(s.c_wbf, std::log2(1.0 + 25.0 * 5.0 / (6e7 * (4e-15 + jam))));
}

TEST(Bounds, JammerPowerMonotonicity) {
    LinkBudget b = paper_like_budget();
    auto prev = spectral_bounds(b);
    for (int i = 0; i < 5; ++i) {
        b.jammer_vars[0] *= 3.0;
        const auto s = spectral_bounds(b);
        EXPECT_LT(s.c_lb, prev.c_lb);
        EXPECT_LT(s.c_wbf, prev.c_wbf);
        EXPECT_EQ(s.c_ub, prev.c_ub);
        prev = s;
    }
}

TEST(Bounds, TooFewAntennasRejected) {
    LinkBudget b = paper_like_budget();
    b.n_rx = 4;
    EXPECT_THROW(spectral_bounds(b), InputError);
}

TEST(Wishart, InverseGramMeans) {
    // E[(H~^H H~)^{-1}] = eta I / (N' - M) for an N' x M Gaussian H~ of
    // entry variance 1/eta; N' is 8 without and 6 after beamforming.
    Rng rng(10);
    const double eta = 4.0;
    const double sd = std::sqrt(1.0 / eta);
    ComplexMatrix sum_wbf = ComplexMatrix::Zero(3, 3);
    ComplexMatrix sum_bf = ComplexMatrix::Zero(3, 3);
    const int draws = 10000;
    for (int d = 0; d < draws; ++d) {
        const ComplexMatrix h = sd * complex_gaussian_matrix(rng, 8, 3);
        sum_wbf += (h.adjoint() * h).inverse();
        const ComplexMatrix z = complex_gaussian_matrix(rng, 8, 2);
        const ComplexMatrix ht = estimate_nullspace(z * z.adjoint(), 2).G_hat * h;
        sum_bf += (ht.adjoint() * ht).inverse();
    }
    for (int m = 0; m < 3; ++m) {
        EXPECT_NEAR(sum_wbf(m, m).real() / draws, eta / 5.0, 0.05 * eta / 5.0);
        EXPECT_NEAR(sum_bf(m, m).real() / draws, eta / 3.0, 0.05 * eta / 3.0);
    }
}

TEST(Equalize, PerfectNullingWithoutNoise) {
    Rng rng(11);
    const ComplexMatrix h = complex_gaussian_matrix(rng, 8, 12);
    const ComplexMatrix p = random_orthonormal_columns(rng, 12, 3);
    const ComplexMatrix z = complex_gaussian_matrix(rng, 8, 2);
    const ComplexMatrix f = estimate_nullspace(z * z.adjoint(), 2).G_hat;
    const ComplexMatrix x = qam_block(rng, 3, 100);
    DataPhase d;
    d.jamming = z * complex_gaussian_matrix(rng, 2, 100, 1e4);
    d.tx_amplitude = 2.0;
    d.received = d.tx_amplitude * h * p * x + d.jamming;
    const auto eq = apply_beamforming_and_equalize(d, f, f * h * p, x);
    EXPECT_LT(eq.residual_jamming_power, 1e-16 * d.jamming.colwise().squaredNorm().mean());
    for (double s : eq.sinr_db) EXPECT_EQ(s, kSinrCapDb);
    EXPECT_TRUE((eq.decisions.array() == x.array()).all());
}

TEST(Equalize, ShapeErrors) {
    DataPhase d;
    d.received = ComplexMatrix::Zero(8, 4);
    const ComplexMatrix f = ComplexMatrix::Identity(6, 7);
    EXPECT_THROW(apply_beamforming_and_equalize(d, f, ComplexMatrix::Zero(6, 3), ComplexMatrix::Zero(3, 4)),
                 ShapeError);
}

namespace {

/// Monte-Carlo post-ZF error variance, pooled over all frames and streams,
/// for a Gaussian MIMO link; returns P_T / pooled variance.
double pooled_sinr(Rng& rng, bool random_beamformer, double jam_var, int frames) {
    const double eta = 1.0, noise = 0.01, p_t = 1.0;
    double err = 0.0;
    std::size_t count = 0;
    const auto model = fixed_jammers(0.0, jam_var);
    for (int fr = 0; fr < frames; ++fr) {
        const ComplexMatrix h = complex_gaussian_matrix(rng, 8, 12, 1.0 / eta);
        const ComplexMatrix p = random_orthonormal_columns(rng, 12, 3);
        const ComplexMatrix z = complex_gaussian_matrix(rng, 8, 2);
        const ComplexMatrix f = random_beamformer ? ComplexMatrix(random_orthonormal_columns(rng, 8, 6).adjoint())
                                                  : estimate_nullspace(z * z.adjoint(), 2).G_hat;
        const ComplexMatrix x = qam_block(rng, 3, 50);
        DataPhase d;
        d.jamming = jam_var > 0.0 ? ComplexMatrix(z * jamming::sample_jamming_block(rng, model, 0, 50))
                                  : ComplexMatrix::Zero(8, 50);
        d.received = std::sqrt(p_t) * h * p * x + d.jamming + complex_gaussian_matrix(rng, 8, 50, noise);
        d.tx_amplitude = std::sqrt(p_t);
        const auto eq = apply_beamforming_and_equalize(d, f, f * h * p, x);
        err += (eq.equalized - x).squaredNorm();
        count += static_cast<std::size_t>(x.size());
    }
    return p_t / (p_t * err / static_cast<double>(count));
}

} // namespace

TEST(Equalize, PerfectBeamformerReachesUpperBoundSinr) {
    Rng rng(12);
    const double delta_ub = 1.0 * 3.0 / (1.0 * 0.01);
    EXPECT_NEAR(pooled_sinr(rng, false, 0.0, 2000) / delta_ub, 1.0, 0.05);
}

TEST(Equalize, RandomBeamformerSitsAtLowerBoundSinr) {
    Rng rng(13);
    const double jam = 2.0 * 0.5; // two jammers, unit path loss
    const double delta_lb = 1.0 * 3.0 / (1.0 * (0.01 + jam));
    EXPECT_NEAR(pooled_sinr(rng, true, 0.5, 2000) / delta_lb, 1.0, 0.10);
}

TEST(PostEqualization, MatchesEmpiricalErrorVariance) {
    Rng rng(14);
    const ComplexMatrix h = complex_gaussian_matrix(rng, 6, 3);
    const ComplexMatrix f = ComplexMatrix::Identity(6, 6);
    const ComplexMatrix a = zf_equalizer(h);
    const double noise = 0.1;
    const RealVector delta = post_equalization_sinr(a, f, noise * ComplexMatrix::Identity(6, 6), 1.0);
    const ComplexMatrix e = a * complex_gaussian_matrix(rng, 6, 200000, noise);
    for (Eigen::Index m = 0; m < 3; ++m)
        EXPECT_NEAR(1.0 / delta(m), e.row(m).squaredNorm() / 200000.0, 0.02 / delta(m));
}
