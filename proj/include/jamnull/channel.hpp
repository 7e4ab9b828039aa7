#pragma once

// BS->UE and jammer->UE channels: ULA steering vectors, multipath Rayleigh
// fading whose per-path gains follow a sum-of-sinusoids Doppler process, and
// COST 231 Hata large-scale path loss.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "jamnull/numerics.hpp"

namespace jamnull::channel {

struct ArrayGeometry {
    std::size_t n_antennas = 1;
    double spacing_over_lambda = 0.5;

    void validate() const {
        if (n_antennas < 1) throw InputError("ArrayGeometry: n_antennas must be >= 1");
        if (!(spacing_over_lambda > 0.0)) throw InputError("ArrayGeometry: spacing must be > 0");
    }
};

struct LinkGeometry {
    double tx_height_m = 50.0;
    double rx_height_m = 2.0;
    double distance_m = 100.0;
    double carrier_freq_mhz = 447.0;
};

enum class HataEnvironment { suburban, metropolitan };

/// Element i is exp(-j 2 pi (d/lambda) i sin(angle)).
inline ComplexVector steering_vector(double angle, const ArrayGeometry& geom) {
    geom.validate();
    const auto n = static_cast<Eigen::Index>(geom.n_antennas);
    ComplexVector a(n);
    const double step = -2.0 * M_PI * geom.spacing_over_lambda * std::sin(angle);
    a(0) = cplx(1.0, 0.0);
    for (Eigen::Index i = 1; i < n; ++i) a(i) = std::polar(1.0, step * static_cast<double>(i));
    return a;
}

/// True when the link lies inside the frequency range the model is quoted for.
inline bool cost231_in_range(const LinkGeometry& link) {
    return link.carrier_freq_mhz >= 150.0 && link.carrier_freq_mhz <= 2000.0;
}

/// COST 231 Hata path loss in dB. The suburban class uses the medium-city
/// mobile-antenna correction with C_m = 0 dB; metropolitan adds C_m = 3 dB.
inline double cost231_pathloss_db(const LinkGeometry& link,
                                  HataEnvironment env = HataEnvironment::suburban) {
    if (!(link.distance_m > 0.0)) throw InputError("cost231_pathloss_db: distance must be positive");
    if (!(link.tx_height_m > 0.0) || !(link.rx_height_m > 0.0) || !(link.carrier_freq_mhz > 0.0))
        throw InputError("cost231_pathloss_db: heights and frequency must be positive");
    const double log_f = std::log10(link.carrier_freq_mhz);
    const double log_hb = std::log10(link.tx_height_m);
    const double a_hm = (1.1 * log_f - 0.7) * link.rx_height_m - (1.56 * log_f - 0.8);
    const double c_m = env == HataEnvironment::metropolitan ? 3.0 : 0.0;
    const double d_km = link.distance_m / 1000.0;
    return 46.3 + 33.9 * log_f - 13.82 * log_hb - a_hm + (44.9 - 6.55 * log_hb) * std::log10(d_km) + c_m;
}

struct FadingParams {
    std::size_t n_paths = 8;
    double doppler_hz = 8.28;
    double sample_rate_hz = 400e3;
    double path_loss_linear = 1.0; // eta
    std::size_t n_sinusoids = 16;
};

/// One propagation path. The complex gain is a sum-of-sinusoids process in the
/// sample clock; angles stay fixed.
struct PathState {
    double aoa = 0.0;
    double aod = 0.0;
    double theta = 0.0;              // arrival-angle offset of the sinusoids
    double phi_c = 0.0;              // shared Doppler phase, in-phase branch
    double phi_s = 0.0;              // shared Doppler phase, quadrature branch
    std::vector<double> psi;         // per-sinusoid amplitude phases
};

struct FadingState {
    FadingParams params;
    std::vector<PathState> paths;
    std::int64_t clock = 0; // samples elapsed since the state was drawn

    std::size_t n_paths() const { return paths.size(); }
};

inline FadingState draw_fading(Rng& rng, const FadingParams& params) {
    if (params.n_paths < 1) throw InputError("draw_fading: n_paths must be >= 1");
    if (params.n_sinusoids < 1) throw InputError("draw_fading: n_sinusoids must be >= 1");
    if (!(params.path_loss_linear > 0.0)) throw InputError("draw_fading: path loss must be > 0");
    FadingState st{params, {}, 0};
    st.paths.reserve(params.n_paths);
    for (std::size_t p = 0; p < params.n_paths; ++p) {
        PathState path;
        path.aoa = rng.uniform(0.0, 2.0 * M_PI);
        path.aod = rng.uniform(0.0, 2.0 * M_PI);
        path.theta = rng.uniform(-M_PI, M_PI);
        path.phi_c = rng.uniform(-M_PI, M_PI);
        path.phi_s = rng.uniform(-M_PI, M_PI);
        path.psi.resize(params.n_sinusoids);
        for (auto& v : path.psi) v = rng.uniform(-M_PI, M_PI);
        st.paths.push_back(std::move(path));
    }
    return st;
}

/// Unit-variance sum-of-sinusoids gain of one path at the state's clock.
inline cplx unit_path_gain(const FadingState& st, std::size_t p) {
    const PathState& path = st.paths[p];
    const auto m = static_cast<double>(path.psi.size());
    const double wd_t = 2.0 * M_PI * st.params.doppler_hz *
                        (static_cast<double>(st.clock) / st.params.sample_rate_hz);
    double re = 0.0;
    double im = 0.0;
    for (std::size_t n = 0; n < path.psi.size(); ++n) {
        const double alpha = (2.0 * M_PI * static_cast<double>(n + 1) - M_PI + path.theta) / (4.0 * m);
        const double arg = wd_t * std::cos(alpha);
        re += std::cos(path.psi[n]) * std::cos(arg + path.phi_c);
        im += std::sin(path.psi[n]) * std::cos(arg + path.phi_s);
    }
    const double scale = std::sqrt(2.0 / m);
    return {scale * re, scale * im};
}

/// Per-path complex gains alpha_p, variance 1/N^p each.
inline std::vector<cplx> path_gains(const FadingState& st) {
    std::vector<cplx> g(st.paths.size());
    const double s = 1.0 / std::sqrt(static_cast<double>(st.paths.size()));
    for (std::size_t p = 0; p < st.paths.size(); ++p) g[p] = s * unit_path_gain(st, p);
    return g;
}

/// H = (1/sqrt(eta)) sum_p alpha_p a(aoa_p) a(aod_p)^T, or the column form
/// sum_p alpha_p a(aoa_p) when the transmitter has a single antenna.
inline ComplexMatrix sample_channel(const FadingState& st, const ArrayGeometry& rx,
                                    const std::optional<ArrayGeometry>& tx = std::nullopt) {
    rx.validate();
    const auto gains = path_gains(st);
    const auto n_rx = static_cast<Eigen::Index>(rx.n_antennas);
    const Eigen::Index n_tx = tx ? static_cast<Eigen::Index>(tx->n_antennas) : 1;
    ComplexMatrix h = ComplexMatrix::Zero(n_rx, n_tx);
    for (std::size_t p = 0; p < st.paths.size(); ++p) {
        const ComplexVector ar = steering_vector(st.paths[p].aoa, rx);
        if (tx) {
            const ComplexVector at = steering_vector(st.paths[p].aod, *tx);
            h.noalias() += gains[p] * ar * at.transpose();
        } else {
            h.col(0) += gains[p] * ar;
        }
    }
    return h / std::sqrt(st.params.path_loss_linear);
}

/// Draws a fresh fading realization and returns its channel matrix.
inline ComplexMatrix sample_channel(Rng& rng, const FadingParams& params, const ArrayGeometry& rx,
                                    const std::optional<ArrayGeometry>& tx = std::nullopt) {
    return sample_channel(draw_fading(rng, params), rx, tx);
}

/// Advances the Doppler clock by n_samples. Angles and sinusoid phases are
/// fixed, so evolving by a then b equals evolving by a + b.
inline FadingState evolve_fading(FadingState st, std::int64_t n_samples) {
    if (n_samples < 0) throw InputError("evolve_fading: n_samples must be >= 0");
    st.clock += n_samples;
    return st;
}

} // namespace jamnull::channel
