#pragma once

// Frame-level environment. One frame is a nullspace-estimation phase
// (jamming plus noise only), a preamble, and a data phase of precoded
// 16-QAM symbols; optional monitoring samples follow the data phase.
// The environment owns every random stream, so equal seeds and equal action
// sequences reproduce identical frames.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "jamnull/beamform.hpp"
#include "jamnull/channel.hpp"
#include "jamnull/jamming.hpp"
#include "jamnull/numerics.hpp"

namespace jamnull::env {

/// Candidate (N^e, N^d) pairs. Action indices are 1-based with N^e varying
/// fastest.
struct ActionSpace {
    std::vector<std::size_t> ne_candidates{10, 20, 30, 40};
    std::vector<std::size_t> nd_candidates{200, 250, 300, 350};

    std::size_t size() const { return ne_candidates.size() * nd_candidates.size(); }

    std::size_t max_nd() const { return *std::max_element(nd_candidates.begin(), nd_candidates.end()); }

    void validate() const {
        if (ne_candidates.empty() || nd_candidates.empty())
            throw InputError("ActionSpace: candidate sets must be nonempty");
        for (auto v : ne_candidates)
            if (v < 1) throw InputError("ActionSpace: N^e candidates must be >= 1");
        for (auto v : nd_candidates)
            if (v < 1) throw InputError("ActionSpace: N^d candidates must be >= 1");
    }

    std::pair<std::size_t, std::size_t> decode(std::size_t a) const {
        if (a < 1 || a > size()) throw InputError("decode_action: index " + std::to_string(a) + " out of range");
        const std::size_t i = a - 1;
        return {ne_candidates[i % ne_candidates.size()], nd_candidates[i / ne_candidates.size()]};
    }

    /// Inverse of decode; throws if the pair is not in the table.
    std::size_t encode(std::size_t ne, std::size_t nd) const {
        for (std::size_t a = 1; a <= size(); ++a)
            if (decode(a) == std::pair{ne, nd}) return a;
        throw InputError("ActionSpace: pair not in candidate table");
    }
};

inline std::pair<std::size_t, std::size_t> decode_action(const ActionSpace& space, std::size_t a) {
    return space.decode(a);
}

/// Data-phase fraction of a frame.
inline double duty_fraction(std::size_t ne, std::size_t np, std::size_t nd, std::size_t n_monitor = 0) {
    return static_cast<double>(nd) / static_cast<double>(ne + np + nd + n_monitor);
}

struct Observation {
    std::vector<double> avg_sinr_db;         // one per UE, from the estimates
    std::vector<double> avg_singular_values; // N_J largest, averaged over UEs

    std::size_t size() const { return avg_sinr_db.size() + avg_singular_values.size(); }
};

/// Last H (observation, action) pairs flattened oldest to newest. Entries
/// are already scaled for the network; unused slots stay zero.
struct ApproxState {
    std::size_t history = 1;
    std::size_t entry_size = 1;
    std::vector<double> data;

    ApproxState() = default;
    ApproxState(std::size_t h, std::size_t entry) : history(h), entry_size(entry), data(h * entry, 0.0) {
        if (h < 1) throw InputError("ApproxState: history must be >= 1");
    }

    std::size_t flat_size() const { return data.size(); }
    const double* step(std::size_t t) const { return data.data() + t * entry_size; }

    bool operator==(const ApproxState&) const = default;
};

/// Evicts the oldest pair and appends (features, action code) at the end.
inline ApproxState push_history(ApproxState s, const std::vector<double>& features, double action_code) {
    if (features.size() + 1 != s.entry_size)
        throw ShapeError("push_history: entry must hold the observation plus one action slot");
    std::rotate(s.data.begin(), s.data.begin() + static_cast<std::ptrdiff_t>(s.entry_size), s.data.end());
    auto tail = s.data.end() - static_cast<std::ptrdiff_t>(s.entry_size);
    std::copy(features.begin(), features.end(), tail);
    *(s.data.end() - 1) = action_code;
    return s;
}

/// Scales observations to O(1): SINR in units of 40 dB and singular values
/// by the largest value seen so far.
struct ObservationScaler {
    double sinr_unit_db = 40.0;
    double singular_max = 0.0;

    std::vector<double> operator()(const Observation& o) {
        for (double v : o.avg_singular_values) singular_max = std::max(singular_max, v);
        std::vector<double> out;
        out.reserve(o.size());
        for (double v : o.avg_sinr_db) out.push_back(v / sinr_unit_db);
        for (double v : o.avg_singular_values) out.push_back(singular_max > 0.0 ? v / singular_max : 0.0);
        return out;
    }
};

enum class BeamformerMode {
    estimated, // nullspace of the estimation-phase sample covariance
    oracle,    // nullspace of the true data-phase covariance
    random,    // Haar-random orthonormal rows
    none,      // identity, no jamming suppression
};

enum class FadingMode {
    continuous,  // Doppler evolution between frames
    independent, // fresh draw every frame
};

struct EnvConfig {
    std::size_t n_tx = 12;
    std::size_t n_rx = 8;
    std::size_t n_users = 4;
    std::size_t n_streams = 3;
    double spacing_over_lambda = 0.5;

    double p_t_linear = 1.0;  // W
    double noise_var = 1e-12; // W
    double eta_bs_ue = 1.0;
    std::vector<double> eta_jammer_ue{1.0, 1.0};

    jamming::JammerModel jammers;
    channel::FadingParams fading;
    FadingMode fading_mode = FadingMode::continuous;

    ActionSpace actions;
    std::size_t n_preamble = 20;
    std::size_t samples_per_symbol = 2;
    double delta_min_db = 11.8;
    std::size_t history = 6;

    std::uint64_t seed = 1;

    void validate() const {
        if (n_tx < 1 || n_rx < 1 || n_users < 1 || n_streams < 1)
            throw ConfigError("EnvConfig: antenna, user and stream counts must be >= 1");
        if (n_streams > n_tx) throw ConfigError("EnvConfig: more streams than transmit antennas");
        if (jammers.n_jammers >= n_rx) throw ConfigError("EnvConfig: n_jammers must be smaller than n_rx");
        if (n_rx < jammers.n_jammers + n_streams)
            throw ConfigError("EnvConfig: n_rx must be at least n_jammers + n_streams");
        if (eta_jammer_ue.size() != jammers.n_jammers)
            throw ConfigError("EnvConfig: one jammer path loss per jammer is required");
        if (!(p_t_linear > 0.0) || !(noise_var > 0.0) || !(eta_bs_ue > 0.0))
            throw ConfigError("EnvConfig: powers and path losses must be positive");
        if (samples_per_symbol < 1) throw ConfigError("EnvConfig: samples_per_symbol must be >= 1");
        if (history < 1) throw ConfigError("EnvConfig: history must be >= 1");
        jammers.validate();
        actions.validate();
        for (auto nd : actions.nd_candidates)
            if (nd < samples_per_symbol) throw ConfigError("EnvConfig: data phase shorter than one symbol");
    }

    /// Divisor that maps the frame reward into [0, 1].
    double reward_scale() const {
        return static_cast<double>(n_users * n_streams * actions.max_nd()) *
               std::log2(1.0 + db_to_linear(beamform::kSinrCapDb));
    }

    beamform::LinkBudget link_budget() const {
        beamform::LinkBudget b;
        b.p_t_linear = p_t_linear;
        b.noise_var = noise_var;
        b.eta_bs_ue = eta_bs_ue;
        b.eta_jammer_ue = eta_jammer_ue;
        b.jammer_vars = jammers.variances;
        b.n_rx = n_rx;
        b.n_jammers = jammers.n_jammers;
        b.n_streams = n_streams;
        return b;
    }
};

struct StepOptions {
    BeamformerMode beamformer = BeamformerMode::estimated;
    std::size_t n_monitor = 0; // residual-monitoring samples after the data phase
};

/// Floor applied to SINRs so that forced outages stay finite in logs.
inline constexpr double kSinrFloorDb = -100.0;

struct FrameResult {
    std::size_t index = 0;
    std::size_t action = 0;
    std::size_t n_e = 0;
    std::size_t n_p = 0;
    std::size_t n_d = 0;
    std::size_t n_monitor = 0;
    std::int64_t start_sample = 0;
    double mu = 0.0;
    std::vector<double> sinr_db;        // true, user-major K x M
    std::vector<double> sinr_est_db;    // constellation estimates, same layout
    std::vector<double> spectral_eff;   // log2(1 + true SINR), same layout
    std::vector<std::vector<double>> singular_values; // per UE, descending
    std::vector<double> residual_jamming;  // per UE, mean ||F Z x_J||^2
    std::vector<double> monitor_excess_db; // per UE, monitored power over noise floor
    double rho_e = 0.0; // mean sampled correlation, estimation window
    double rho_d = 0.0; // mean sampled correlation, data window
    bool outage = false;
    bool ill_conditioned = false;
    double reward = 0.0;
    double reward_scaled = 0.0;
};

struct Metrics {
    double c_av_eff = 0.0;
    double p_av_ot = 0.0;
};

/// Mean of mu * log2(1 + delta) and the fraction of stream-frames in outage.
inline Metrics metrics(const std::vector<FrameResult>& frames, double delta_min_db) {
    if (frames.empty()) throw InputError("metrics: no frames");
    double se = 0.0;
    double out = 0.0;
    std::size_t count = 0;
    for (const auto& f : frames) {
        for (std::size_t i = 0; i < f.sinr_db.size(); ++i) {
            se += f.mu * f.spectral_eff[i];
            out += f.sinr_db[i] < delta_min_db ? 1.0 : 0.0;
            ++count;
        }
    }
    if (count == 0) throw InputError("metrics: frames carry no streams");
    return {se / static_cast<double>(count), out / static_cast<double>(count)};
}

/// Frame reward: sum over streams of N^d log2(1 + delta) unless any stream
/// is below delta_min.
inline double frame_reward(const std::vector<double>& sinr_db, std::size_t nd, double delta_min_db) {
    double total = 0.0;
    for (double s : sinr_db) {
        if (s < delta_min_db) return 0.0;
        total += static_cast<double>(nd) * std::log2(1.0 + db_to_linear(s));
    }
    return total;
}

class Environment {
public:
    explicit Environment(EnvConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        Rng root(cfg_.seed);
        rng_fading_ = root.split(1);
        rng_jam_ = root.split(2);
        rng_noise_ = root.split(3);
        rng_symbols_ = root.split(4);
        rng_beam_ = root.split(5);
        Rng rng_precoder = root.split(6);
        precoders_.reserve(cfg_.n_users);
        for (std::size_t k = 0; k < cfg_.n_users; ++k)
            precoders_.push_back(random_orthonormal_columns(rng_precoder, static_cast<Eigen::Index>(cfg_.n_tx),
                                                            static_cast<Eigen::Index>(cfg_.n_streams)));
        draw_channels();
        scale_ = cfg_.reward_scale();
    }

    const EnvConfig& config() const { return cfg_; }
    const ActionSpace& actions() const { return cfg_.actions; }
    std::int64_t clock() const { return clock_; }
    std::size_t frames_done() const { return frames_; }
    std::size_t observation_size() const { return cfg_.n_users + cfg_.jammers.n_jammers; }
    std::size_t entry_size() const { return observation_size() + 1; }

    /// Zero observation before the first frame, otherwise the previous frame's.
    Observation observe() const {
        if (last_obs_) return *last_obs_;
        return {std::vector<double>(cfg_.n_users, 0.0), std::vector<double>(cfg_.jammers.n_jammers, 0.0)};
    }

    /// Channels at the current clock, for policies with privileged access.
    const std::vector<ComplexMatrix>& bs_channels() const { return h_; }
    const std::vector<ComplexMatrix>& jammer_channels() const { return z_; }
    const std::vector<ComplexMatrix>& precoders() const { return precoders_; }

    /// Reverses the jamming schedule from the given sample on.
    void set_switch_sample(std::optional<std::int64_t> sample) { cfg_.jammers.schedule.switch_sample = sample; }

    /// Moves the schedule clock without simulating, e.g. to align a window.
    void advance_clock(std::int64_t n_samples) {
        if (n_samples < 0) throw InputError("advance_clock: n_samples must be >= 0");
        advance(n_samples);
    }

    FrameResult step(std::size_t action, const StepOptions& opt = {}) {
        const auto [ne, nd] = cfg_.actions.decode(action);
        const std::size_t np = cfg_.n_preamble;
        const std::size_t nm = opt.n_monitor;
        const std::size_t frame_len = ne + np + nd + nm;
        const std::size_t n = cfg_.n_rx;
        const std::size_t nj = cfg_.jammers.n_jammers;
        const auto nrow = static_cast<Eigen::Index>(n);
        const auto nsym = static_cast<Eigen::Index>(nd / cfg_.samples_per_symbol);
        const std::int64_t data_start = clock_ + static_cast<std::int64_t>(ne + np);

        FrameResult fr;
        fr.index = frames_;
        fr.action = action;
        fr.n_e = ne;
        fr.n_p = np;
        fr.n_d = nd;
        fr.n_monitor = nm;
        fr.start_sample = clock_;
        fr.mu = duty_fraction(ne, np, nd, nm);
        fr.rho_e = mean_rho(clock_, ne);
        fr.rho_d = mean_rho(data_start, nd);

        // Jammers transmit one common signal; every UE sees it through its own Z.
        const ComplexMatrix xj =
            jamming::sample_jamming_block(rng_jam_, cfg_.jammers, clock_, frame_len);
        const ComplexMatrix sigma_d = jamming::average_sigma_j(cfg_.jammers, data_start, nd);
        const double amp = std::sqrt(cfg_.p_t_linear);

        std::vector<double> lambda_sum(nj, 0.0);
        for (std::size_t k = 0; k < cfg_.n_users; ++k) {
            const ComplexMatrix& h = h_[k];
            const ComplexMatrix& z = z_[k];

            // Estimation phase.
            const ComplexMatrix ye = z * xj.leftCols(static_cast<Eigen::Index>(ne)) +
                                     complex_gaussian_matrix(rng_noise_, nrow, static_cast<Eigen::Index>(ne),
                                                             cfg_.noise_var);
            const beamform::NullspaceEstimate est =
                beamform::estimate_nullspace(beamform::sample_covariance(ye, ne), nj, ne);
            std::vector<double> sv(est.singular_values.data(),
                                   est.singular_values.data() + est.singular_values.size());
            for (std::size_t l = 0; l < nj; ++l) lambda_sum[l] += sv[l];
            fr.singular_values.push_back(std::move(sv));

            const ComplexMatrix cov_d =
                z * sigma_d * z.adjoint() + cfg_.noise_var * ComplexMatrix::Identity(nrow, nrow);
            const ComplexMatrix f_hat = beamformer(opt.beamformer, est, cov_d);

            // Data phase: jamming for each symbol is taken at its first sample.
            ComplexMatrix symbols(static_cast<Eigen::Index>(cfg_.n_streams), nsym);
            for (Eigen::Index c = 0; c < nsym; ++c)
                for (Eigen::Index r = 0; r < symbols.rows(); ++r)
                    symbols(r, c) = beamform::qam16_symbol(rng_symbols_.index(16));
            ComplexMatrix jam(nrow, nsym);
            for (Eigen::Index c = 0; c < nsym; ++c)
                jam.col(c) = z * xj.col(static_cast<Eigen::Index>(ne + np) +
                                        c * static_cast<Eigen::Index>(cfg_.samples_per_symbol));
            beamform::DataPhase data;
            data.jamming = jam;
            data.received = amp * (h * precoders_[k] * symbols) + jam +
                            complex_gaussian_matrix(rng_noise_, nrow, nsym, cfg_.noise_var);
            data.tx_amplitude = amp;
            const ComplexMatrix h_tilde = f_hat * h * precoders_[k];

            std::vector<double> est_db(cfg_.n_streams, kSinrFloorDb);
            std::vector<double> true_db(cfg_.n_streams, kSinrFloorDb);
            try {
                const beamform::EqualizedFrame eq =
                    beamform::apply_beamforming_and_equalize(data, f_hat, h_tilde, symbols);
                const ComplexMatrix a = beamform::zf_equalizer(h_tilde);
                const RealVector delta = beamform::post_equalization_sinr(a, f_hat, cov_d, cfg_.p_t_linear);
                for (std::size_t m = 0; m < cfg_.n_streams; ++m) {
                    est_db[m] = std::max(eq.sinr_db[m], kSinrFloorDb);
                    true_db[m] = std::clamp(linear_to_db(delta(static_cast<Eigen::Index>(m))), kSinrFloorDb,
                                            beamform::kSinrCapDb);
                }
                fr.residual_jamming.push_back(eq.residual_jamming_power);
            } catch (const IllConditionedError&) {
                fr.ill_conditioned = true;
                fr.residual_jamming.push_back((f_hat * jam).colwise().squaredNorm().mean());
            }
            for (std::size_t m = 0; m < cfg_.n_streams; ++m) {
                fr.sinr_db.push_back(true_db[m]);
                fr.sinr_est_db.push_back(est_db[m]);
                fr.spectral_eff.push_back(std::log2(1.0 + db_to_linear(true_db[m])));
            }

            // Monitoring: BS silent, measure what leaks through F_hat.
            if (nm > 0) {
                const ComplexMatrix ym =
                    z * xj.rightCols(static_cast<Eigen::Index>(nm)) +
                    complex_gaussian_matrix(rng_noise_, nrow, static_cast<Eigen::Index>(nm), cfg_.noise_var);
                const double measured = (f_hat * ym).colwise().squaredNorm().mean();
                const double floor = static_cast<double>(f_hat.rows()) * cfg_.noise_var;
                fr.monitor_excess_db.push_back(linear_to_db(measured / floor));
            }
        }

        fr.reward = fr.ill_conditioned ? 0.0 : frame_reward(fr.sinr_db, nd, cfg_.delta_min_db);
        fr.outage = !(fr.reward > 0.0);
        fr.reward_scaled = fr.reward / scale_;

        Observation obs;
        for (std::size_t k = 0; k < cfg_.n_users; ++k) {
            double s = 0.0;
            for (std::size_t m = 0; m < cfg_.n_streams; ++m) s += fr.sinr_est_db[k * cfg_.n_streams + m];
            obs.avg_sinr_db.push_back(s / static_cast<double>(cfg_.n_streams));
        }
        for (std::size_t l = 0; l < nj; ++l)
            obs.avg_singular_values.push_back(lambda_sum[l] / static_cast<double>(cfg_.n_users));
        last_obs_ = std::move(obs);

        advance(static_cast<std::int64_t>(frame_len));
        ++frames_;
        return fr;
    }

private:
    void draw_channels() {
        bs_fading_.clear();
        jam_fading_.clear();
        for (std::size_t k = 0; k < cfg_.n_users; ++k) {
            channel::FadingParams p = cfg_.fading;
            p.path_loss_linear = cfg_.eta_bs_ue;
            bs_fading_.push_back(channel::draw_fading(rng_fading_, p));
            for (std::size_t j = 0; j < cfg_.jammers.n_jammers; ++j) {
                channel::FadingParams q = cfg_.fading;
                q.path_loss_linear = cfg_.eta_jammer_ue[j];
                jam_fading_.push_back(channel::draw_fading(rng_fading_, q));
            }
        }
        refresh_channels();
    }

    void refresh_channels() {
        channel::ArrayGeometry rx{cfg_.n_rx, cfg_.spacing_over_lambda};
        channel::ArrayGeometry tx{cfg_.n_tx, cfg_.spacing_over_lambda};
        const std::size_t nj = cfg_.jammers.n_jammers;
        h_.assign(cfg_.n_users, ComplexMatrix());
        z_.assign(cfg_.n_users, ComplexMatrix());
        for (std::size_t k = 0; k < cfg_.n_users; ++k) {
            h_[k] = channel::sample_channel(bs_fading_[k], rx, tx);
            ComplexMatrix z(static_cast<Eigen::Index>(cfg_.n_rx), static_cast<Eigen::Index>(nj));
            for (std::size_t j = 0; j < nj; ++j)
                z.col(static_cast<Eigen::Index>(j)) = channel::sample_channel(jam_fading_[k * nj + j], rx);
            z_[k] = std::move(z);
        }
    }

    void advance(std::int64_t n_samples) {
        clock_ += n_samples;
        if (cfg_.fading_mode == FadingMode::independent) {
            draw_channels();
            return;
        }
        for (auto& f : bs_fading_) f = channel::evolve_fading(std::move(f), n_samples);
        for (auto& f : jam_fading_) f = channel::evolve_fading(std::move(f), n_samples);
        refresh_channels();
    }

    double mean_rho(std::int64_t start, std::size_t n) const {
        if (n == 0) return 0.0;
        double s = 0.0;
        for (std::size_t c = 0; c < n; ++c) s += jamming::sampled_rho(cfg_.jammers, start + static_cast<std::int64_t>(c));
        return s / static_cast<double>(n);
    }

    ComplexMatrix beamformer(BeamformerMode mode, const beamform::NullspaceEstimate& est,
                             const ComplexMatrix& cov_d) {
        const auto n = static_cast<Eigen::Index>(cfg_.n_rx);
        const auto keep = n - static_cast<Eigen::Index>(cfg_.jammers.n_jammers);
        switch (mode) {
        case BeamformerMode::estimated: return est.G_hat;
        case BeamformerMode::oracle: return beamform::estimate_nullspace(cov_d, cfg_.jammers.n_jammers).G_hat;
        case BeamformerMode::random: return random_orthonormal_columns(rng_beam_, n, keep).adjoint();
        case BeamformerMode::none: return ComplexMatrix::Identity(n, n);
        }
        return est.G_hat;
    }

    EnvConfig cfg_;
    Rng rng_fading_;
    Rng rng_jam_;
    Rng rng_noise_;
    Rng rng_symbols_;
    Rng rng_beam_;
    std::vector<ComplexMatrix> precoders_;
    std::vector<channel::FadingState> bs_fading_;
    std::vector<channel::FadingState> jam_fading_; // user-major, N_J per user
    std::vector<ComplexMatrix> h_;
    std::vector<ComplexMatrix> z_;
    std::optional<Observation> last_obs_;
    std::int64_t clock_ = 0;
    std::size_t frames_ = 0;
    double scale_ = 1.0;
};

} // namespace jamnull::env
