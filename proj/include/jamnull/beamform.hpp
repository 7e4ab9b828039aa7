#pragma once

// Receiver-side processing at one UE: sample covariance, SVD nullspace
// estimation, zero-forcing equalization, constellation-based SINR estimation,
// and the closed-form spectral-efficiency bounds for a beamformed link.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "jamnull/numerics.hpp"

namespace jamnull::beamform {

inline constexpr double kSinrCapDb = 80.0;

inline double cap_sinr_db(double db) { return std::min(db, kSinrCapDb); }
inline double cap_sinr_linear(double lin) { return std::min(lin, db_to_linear(kSinrCapDb)); }

/// R = (1/n) Y Y^H.
inline ComplexMatrix sample_covariance(const ComplexMatrix& y, std::size_t n) {
    if (n == 0) throw InputError("sample_covariance: n must be >= 1");
    if (static_cast<std::size_t>(y.cols()) != n)
        throw ShapeError("sample_covariance: Y must have n columns");
    ComplexMatrix r = (y * y.adjoint()) / static_cast<double>(n);
    // Exact Hermitian symmetry for downstream checks.
    return (r + r.adjoint()) * 0.5;
}

struct NullspaceEstimate {
    ComplexMatrix G_hat;      // (N_k - N_J) x N_k, orthonormal rows
    RealVector singular_values; // all N_k, descending
    std::size_t n_samples_used = 0;
};

/// G_hat = U_w^H, the left singular vectors belonging to the N_k - N_J
/// weakest singular values of R.
inline NullspaceEstimate estimate_nullspace(const ComplexMatrix& r, std::size_t n_jammers,
                                            std::size_t n_samples_used = 0) {
    if (r.rows() != r.cols()) throw ShapeError("estimate_nullspace: R must be square");
    const auto n = static_cast<std::size_t>(r.rows());
    if (n_jammers >= n)
        throw ConfigError("estimate_nullspace: n_jammers must be smaller than the antenna count");
    const SvdResult d = svd(r);
    const auto nj = static_cast<Eigen::Index>(n_jammers);
    const Eigen::Index keep = r.rows() - nj;
    return {d.U.rightCols(keep).adjoint(), d.S, n_samples_used};
}

/// A = (H^H H)^{-1} H^H, evaluated through the SVD of H.
inline ComplexMatrix zf_equalizer(const ComplexMatrix& h_tilde, double max_condition = 1e8) {
    if (h_tilde.rows() < h_tilde.cols())
        throw IllConditionedError("zf_equalizer: fewer rows than streams");
    if (!h_tilde.allFinite()) throw NumericInputError("zf_equalizer: non-finite channel");
    Eigen::JacobiSVD<ComplexMatrix> solver(h_tilde, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& s = solver.singularValues();
    const double smin = s(s.size() - 1);
    if (!(smin > 0.0) || s(0) / smin >= max_condition)
        throw IllConditionedError("zf_equalizer: equivalent channel is rank deficient");
    return solver.matrixV() * s.cwiseInverse().asDiagonal() * solver.matrixU().adjoint();
}

/// Unit-average-energy 16-QAM alphabet.
inline const std::array<cplx, 16>& qam16_alphabet() {
    static const std::array<cplx, 16> points = [] {
        std::array<cplx, 16> p{};
        const double levels[4] = {-3.0, -1.0, 1.0, 3.0};
        const double norm = 1.0 / std::sqrt(10.0);
        std::size_t k = 0;
        for (double i : levels)
            for (double q : levels) p[k++] = cplx(i * norm, q * norm);
        return p;
    }();
    return points;
}

inline cplx qam16_symbol(std::size_t index) { return qam16_alphabet()[index % 16]; }

/// Nearest 16-QAM point (per-axis slicing).
inline cplx slice_qam16(cplx x) {
    const double norm = std::sqrt(10.0);
    auto axis = [&](double v) {
        const double s = v * norm;
        double level = s < -2.0 ? -3.0 : (s < 0.0 ? -1.0 : (s < 2.0 ? 1.0 : 3.0));
        return level / norm;
    };
    return {axis(x.real()), axis(x.imag())};
}

/// 10 log10( sum(I^2 + Q^2) / sum(dI^2 + dQ^2) ), capped at +80 dB.
inline double estimate_sinr_db(std::span<const cplx> ideal, std::span<const cplx> actual) {
    if (ideal.empty() || actual.empty()) throw InputError("estimate_sinr_db: empty input");
    if (ideal.size() != actual.size()) throw ShapeError("estimate_sinr_db: length mismatch");
    double signal = 0.0;
    double error = 0.0;
    for (std::size_t i = 0; i < ideal.size(); ++i) {
        signal += std::norm(ideal[i]);
        const double di = actual[i].real() - ideal[i].real();
        const double dq = actual[i].imag() - ideal[i].imag();
        error += di * di + dq * dq;
    }
    if (!(error > 0.0)) return kSinrCapDb;
    return cap_sinr_db(10.0 * std::log10(signal / error));
}

/// Decision-directed variant: every actual point is referenced to its
/// nearest ideal 16-QAM point.
inline double estimate_sinr_db_decision(std::span<const cplx> actual) {
    std::vector<cplx> ideal(actual.size());
    std::transform(actual.begin(), actual.end(), ideal.begin(), slice_qam16);
    return estimate_sinr_db(ideal, actual);
}

struct LinkBudget {
    double p_t_linear = 1.0;
    double noise_var = 1.0;
    double eta_bs_ue = 1.0;
    std::vector<double> eta_jammer_ue;
    std::vector<double> jammer_vars;
    std::size_t n_rx = 8;
    std::size_t n_jammers = 2;
    std::size_t n_streams = 3;

    /// Total jamming power per receive antenna, sum_j sigma_j^2 / eta_{k,j}.
    double received_jamming() const {
        if (eta_jammer_ue.size() != jammer_vars.size())
            throw ShapeError("LinkBudget: jammer path-loss and variance lists differ in length");
        double total = 0.0;
        for (std::size_t j = 0; j < jammer_vars.size(); ++j) total += jammer_vars[j] / eta_jammer_ue[j];
        return total;
    }

    void validate() const {
        if (!(p_t_linear > 0.0) || !(noise_var > 0.0) || !(eta_bs_ue > 0.0))
            throw InputError("LinkBudget: powers and path loss must be positive");
        if (n_rx < n_jammers + n_streams)
            throw InputError("LinkBudget: need n_rx >= n_jammers + n_streams");
        for (double e : eta_jammer_ue)
            if (!(e > 0.0)) throw InputError("LinkBudget: jammer path loss must be positive");
    }
};

struct SpectralBounds {
    double c_lb = 0.0;  // random beamformer, jamming untouched
    double c_ub = 0.0;  // perfect nullification
    double c_wbf = 0.0; // no beamforming
};

/// Closed-form per-stream spectral efficiencies (bits/s/Hz) for ZF reception.
inline SpectralBounds spectral_bounds(const LinkBudget& b) {
    b.validate();
    const double jam = b.received_jamming();
    const double dof_bf = static_cast<double>(b.n_rx - b.n_jammers - b.n_streams);
    const double dof_wbf = static_cast<double>(b.n_rx - b.n_streams);
    SpectralBounds out;
    out.c_lb = std::log2(1.0 + b.p_t_linear * dof_bf / (b.eta_bs_ue * (b.noise_var + jam)));
    out.c_ub = std::log2(1.0 + b.p_t_linear * dof_bf / (b.eta_bs_ue * b.noise_var));
    out.c_wbf = std::log2(1.0 + b.p_t_linear * dof_wbf / (b.eta_bs_ue * (b.noise_var + jam)));
    return out;
}

/// Exact post-equalization SINR per stream given the interference-plus-noise
/// covariance seen at the antennas: P_T / [A F C F^H A^H]_mm.
inline RealVector post_equalization_sinr(const ComplexMatrix& a_zf, const ComplexMatrix& f_hat,
                                         const ComplexMatrix& interference_cov, double p_t) {
    const ComplexMatrix af = a_zf * f_hat;
    const ComplexMatrix err = af * interference_cov * af.adjoint();
    RealVector out(err.rows());
    for (Eigen::Index m = 0; m < err.rows(); ++m) out(m) = cap_sinr_linear(p_t / err(m, m).real());
    return out;
}

/// Signals of one data phase at one UE. `received` is the full antenna
/// signal; `jamming` is its jamming component, kept for the residual
/// diagnostic. Columns are symbol periods.
struct DataPhase {
    ComplexMatrix received;
    ComplexMatrix jamming;
    double tx_amplitude = 1.0; // sqrt(P_T)
};

struct EqualizedFrame {
    std::vector<double> sinr_db;           // decision-directed estimate per stream
    std::vector<double> sinr_db_reference; // referenced to the transmitted symbols
    ComplexMatrix equalized;               // M x n, normalized to the unit constellation
    ComplexMatrix decisions;               // sliced symbols
    double residual_jamming_power = 0.0;   // mean ||F Z x_J||^2 per symbol
};

/// y_zf = A F y / sqrt(P_T); per-stream SINR estimated from the constellation.
inline EqualizedFrame apply_beamforming_and_equalize(const DataPhase& frame, const ComplexMatrix& f_hat,
                                                     const ComplexMatrix& h_tilde,
                                                     const ComplexMatrix& transmitted) {
    if (f_hat.cols() != frame.received.rows())
        throw ShapeError("apply_beamforming_and_equalize: F_hat/antenna mismatch");
    if (h_tilde.rows() != f_hat.rows()) throw ShapeError("apply_beamforming_and_equalize: H_tilde rows");
    if (transmitted.rows() != h_tilde.cols() || transmitted.cols() != frame.received.cols())
        throw ShapeError("apply_beamforming_and_equalize: transmitted symbol block has wrong shape");
    const ComplexMatrix a = zf_equalizer(h_tilde);
    EqualizedFrame out;
    out.equalized = (a * (f_hat * frame.received)) / frame.tx_amplitude;
    out.decisions = out.equalized.unaryExpr([](cplx x) { return slice_qam16(x); });
    const Eigen::Index m = out.equalized.rows();
    const Eigen::Index n = out.equalized.cols();
    std::vector<cplx> ideal(static_cast<std::size_t>(n));
    std::vector<cplx> sent(static_cast<std::size_t>(n));
    std::vector<cplx> actual(static_cast<std::size_t>(n));
    for (Eigen::Index s = 0; s < m; ++s) {
        for (Eigen::Index i = 0; i < n; ++i) {
            actual[static_cast<std::size_t>(i)] = out.equalized(s, i);
            ideal[static_cast<std::size_t>(i)] = out.decisions(s, i);
            sent[static_cast<std::size_t>(i)] = transmitted(s, i);
        }
        out.sinr_db.push_back(estimate_sinr_db(ideal, actual));
        out.sinr_db_reference.push_back(estimate_sinr_db(sent, actual));
    }
    if (frame.jamming.size() > 0) {
        out.residual_jamming_power = (f_hat * frame.jamming).colwise().squaredNorm().mean();
    }
    return out;
}

} // namespace jamnull::beamform
