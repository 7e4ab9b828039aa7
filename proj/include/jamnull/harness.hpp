#pragma once

// Experiment orchestration: JSON configuration with unit-carrying
// quantities, seeded training and evaluation drivers, the strategy-switch
// experiment, jamming-power sweeps, and CSV output.

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <deque>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "jamnull/agent.hpp"
#include "jamnull/beamform.hpp"
#include "jamnull/channel.hpp"
#include "jamnull/env.hpp"
#include "jamnull/jamming.hpp"
#include "jamnull/policies.hpp"

namespace jamnull::harness {

using json = nlohmann::json;

inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kReferenceTemperatureK = 290.0;

inline double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) / 1000.0; }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w * 1000.0); }

/// Thermal noise power kTB in watts.
inline double thermal_noise_w(double bandwidth_hz) { return kBoltzmann * kReferenceTemperatureK * bandwidth_hz; }

namespace detail {

inline std::pair<double, std::string> split_quantity(const json& v, const std::string& path) {
    if (!v.is_string())
        throw ConfigError(path + ": expected a quantity string with units, e.g. \"30 dBm\"");
    static const std::regex re(R"(^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]+)\s*$)");
    std::smatch m;
    const std::string s = v.get<std::string>();
    if (!std::regex_match(s, m, re)) throw ConfigError(path + ": cannot parse quantity '" + s + "'");
    return {std::stod(m[1].str()), m[2].str()};
}

} // namespace detail

/// "44 dBm", "14 dBW", "25 W" or "500 mW" to watts. Bare numbers are
/// rejected so that a value can never be converted twice.
inline double parse_power_w(const json& v, const std::string& path) {
    const auto [x, unit] = detail::split_quantity(v, path);
    if (unit == "dBm") return dbm_to_watts(x);
    if (unit == "dBW") return std::pow(10.0, x / 10.0);
    if (unit == "W") return x;
    if (unit == "mW") return x / 1000.0;
    throw ConfigError(path + ": unknown power unit '" + unit + "'");
}

/// "11.8 dB" to the dB value.
inline double parse_db(const json& v, const std::string& path) {
    const auto [x, unit] = detail::split_quantity(v, path);
    if (unit != "dB") throw ConfigError(path + ": expected a dB quantity, got unit '" + unit + "'");
    return x;
}

/// Strict object reader: every key must be consumed, otherwise finish()
/// reports the first unknown key with its full path.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    Section sub(const std::string& key) {
        seen_.insert(key);
        static const json empty = json::object();
        return Section(j_.contains(key) ? j_.at(key) : empty, key_path(key));
    }

    template <class T>
    void read(const std::string& key, T& out) {
        if (!has(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(key_path(key) + ": wrong type");
        }
    }

    void read_count(const std::string& key, std::size_t& out, std::size_t minimum = 0) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError(key_path(key) + ": expected an integer");
        const auto x = v.get<long long>();
        if (x < static_cast<long long>(minimum))
            throw ConfigError(key_path(key) + ": must be >= " + std::to_string(minimum));
        out = static_cast<std::size_t>(x);
    }

    void read_positive(const std::string& key, double& out) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(key_path(key) + ": expected a number");
        out = v.get<double>();
        if (!(out > 0.0) || !std::isfinite(out)) throw ConfigError(key_path(key) + ": must be positive");
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            (void)v;
            if (!seen_.count(k)) throw ConfigError(key_path(k) + ": unknown key");
        }
    }

private:
    std::string where() const { return path_.empty() ? "<root>" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

/// Every experiment parameter. Power quantities are held in watts; they are
/// converted from their unit strings once, when the file is loaded.
struct ExperimentConfig {
    // System sizes.
    std::size_t n_tx = 12;
    std::size_t n_rx = 8;
    std::size_t n_users = 4;
    std::size_t n_streams = 3;
    std::size_t n_jammers = 2;
    double antenna_spacing = 0.5;

    // Radio.
    double carrier_mhz = 447.0;
    double tx_power_w = dbm_to_watts(44.0);
    double bandwidth_hz = 200e3;
    double sample_rate_hz = 400e3;
    double doppler_hz = 8.28;
    std::size_t n_paths = 8;
    std::size_t n_sinusoids = 16;
    double noise_figure_db = 7.0;
    std::optional<double> noise_power_w_override;
    channel::HataEnvironment hata = channel::HataEnvironment::suburban;

    // Geometry.
    double bs_height_m = 50.0;
    double jammer_height_m = 2.0;
    double ue_height_m = 2.0;
    double bs_distance_m = 100.0;
    double jammer_distance_m = 100.0;

    // Jamming.
    std::vector<double> jammer_power_w{dbm_to_watts(30.0), dbm_to_watts(30.0)};
    jamming::CorrelationSchedule schedule;
    double rho_cap = 0.9999;

    // Protocol.
    env::ActionSpace actions;
    std::size_t n_preamble = 20;
    std::size_t samples_per_symbol = 2;
    double delta_min_db = 11.8;
    env::FadingMode fading_mode = env::FadingMode::continuous;

    // Network and training.
    std::size_t history = 6;
    std::optional<std::size_t> n_cells; // defaults to the history length
    std::size_t n_ol = 128;
    std::size_t n_value = 16;
    std::size_t n_adv = 16;
    agent::TrainerConfig trainer;

    // Heuristic baseline.
    double heuristic_tau_db = 3.0;
    std::size_t heuristic_monitor = 20;

    // Run control.
    std::uint64_t seed = 1;
    std::size_t iterations = 20000;
    std::size_t frames = 5000;
    std::size_t checkpoint_every = 1000;
    std::size_t rolling_window = 500;
    std::string policy = "learned";
    std::string checkpoint;
    std::optional<std::size_t> switch_iteration;
    std::vector<double> sweep_powers_w;
    std::size_t threads = 0;
    std::string out_dir = "out";

    ExperimentConfig() {
        for (double dbm : {10.0, 15.0, 20.0, 25.0, 30.0, 35.0}) sweep_powers_w.push_back(dbm_to_watts(dbm));
    }

    double noise_power_w() const {
        if (noise_power_w_override) return *noise_power_w_override;
        return thermal_noise_w(bandwidth_hz) * std::pow(10.0, noise_figure_db / 10.0);
    }

    double eta_bs() const {
        return db_to_linear(channel::cost231_pathloss_db({bs_height_m, ue_height_m, bs_distance_m, carrier_mhz}, hata));
    }

    double eta_jammer() const {
        return db_to_linear(
            channel::cost231_pathloss_db({jammer_height_m, ue_height_m, jammer_distance_m, carrier_mhz}, hata));
    }

    agent::NetSizes net_sizes() const {
        return {n_users + n_jammers + 1, n_cells.value_or(history), n_ol, n_value, n_adv, actions.size()};
    }

    /// Hash of everything a checkpoint depends on.
    std::string network_hash() const {
        const auto s = net_sizes();
        std::ostringstream os;
        os << "sizes:" << s.n_inputs << ',' << s.n_cells << ',' << s.n_ol << ',' << s.n_value << ',' << s.n_adv << ','
           << s.n_actions << ";history:" << history << ";users:" << n_users << ";jammers:" << n_jammers << ";ne:";
        for (auto v : actions.ne_candidates) os << v << ',';
        os << ";nd:";
        for (auto v : actions.nd_candidates) os << v << ',';
        return agent::fnv1a_hex(os.str());
    }

    env::EnvConfig env_config(std::uint64_t env_seed) const {
        env::EnvConfig e;
        e.n_tx = n_tx;
        e.n_rx = n_rx;
        e.n_users = n_users;
        e.n_streams = n_streams;
        e.spacing_over_lambda = antenna_spacing;
        e.p_t_linear = tx_power_w;
        e.noise_var = noise_power_w();
        e.eta_bs_ue = eta_bs();
        e.eta_jammer_ue.assign(n_jammers, eta_jammer());
        e.jammers.n_jammers = n_jammers;
        e.jammers.variances = jammer_power_w;
        e.jammers.schedule = schedule;
        e.jammers.rho_cap = rho_cap;
        e.fading.n_paths = n_paths;
        e.fading.doppler_hz = doppler_hz;
        e.fading.sample_rate_hz = sample_rate_hz;
        e.fading.n_sinusoids = n_sinusoids;
        e.fading_mode = fading_mode;
        e.actions = actions;
        e.n_preamble = n_preamble;
        e.samples_per_symbol = samples_per_symbol;
        e.delta_min_db = delta_min_db;
        e.history = history;
        e.seed = env_seed;
        return e;
    }

    /// Same configuration with every jammer at the given power.
    ExperimentConfig with_jammer_power(double watts) const {
        ExperimentConfig c = *this;
        c.jammer_power_w.assign(n_jammers, watts);
        return c;
    }

    void validate() const {
        if (n_jammers != jammer_power_w.size())
            throw ConfigError("jamming.power: expected one power per jammer (" + std::to_string(n_jammers) + ")");
        if (!(sample_rate_hz > 0.0) || !(bandwidth_hz > 0.0)) throw ConfigError("radio: rates must be positive");
        if (rolling_window < 1) throw ConfigError("run.rolling_window must be >= 1");
        if (checkpoint_every < 1) throw ConfigError("run.checkpoint_every must be >= 1");
        if (!channel::cost231_in_range({bs_height_m, ue_height_m, bs_distance_m, carrier_mhz}))
            throw ConfigError("radio.carrier_mhz: outside the 150-2000 MHz range of the path-loss model");
        env_config(0).validate();
        net_sizes().validate();
        trainer.validate();
    }
};

/// Derives an independent seed for one named stream of a run.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) { return Rng(seed).split(stream).seed(); }

inline constexpr std::uint64_t kTrainEnvStream = 100;
inline constexpr std::uint64_t kEvalEnvStream = 101;
inline constexpr std::uint64_t kTrainerStream = 102;

inline ExperimentConfig config_from_json(const json& root) {
    ExperimentConfig c;
    Section top(root, "");

    {
        Section s = top.sub("system");
        s.read_count("n_tx", c.n_tx, 1);
        s.read_count("n_rx", c.n_rx, 1);
        s.read_count("n_users", c.n_users, 1);
        s.read_count("n_streams", c.n_streams, 1);
        s.read_count("n_jammers", c.n_jammers, 0);
        s.read_positive("antenna_spacing", c.antenna_spacing);
        s.finish();
    }
    {
        Section s = top.sub("radio");
        s.read_positive("carrier_mhz", c.carrier_mhz);
        if (s.has("tx_power")) c.tx_power_w = parse_power_w(s.raw("tx_power"), s.key_path("tx_power"));
        s.read_positive("bandwidth_hz", c.bandwidth_hz);
        s.read_positive("sample_rate_hz", c.sample_rate_hz);
        if (s.has("doppler_hz")) {
            s.read("doppler_hz", c.doppler_hz);
            if (!(c.doppler_hz >= 0.0)) throw ConfigError("radio.doppler_hz: must be >= 0");
        }
        s.read_count("n_paths", c.n_paths, 1);
        s.read_count("n_sinusoids", c.n_sinusoids, 1);
        if (s.has("noise_figure")) c.noise_figure_db = parse_db(s.raw("noise_figure"), s.key_path("noise_figure"));
        if (s.has("noise_power"))
            c.noise_power_w_override = parse_power_w(s.raw("noise_power"), s.key_path("noise_power"));
        if (s.has("environment")) {
            std::string e;
            s.read("environment", e);
            if (e == "suburban") c.hata = channel::HataEnvironment::suburban;
            else if (e == "metropolitan") c.hata = channel::HataEnvironment::metropolitan;
            else throw ConfigError("radio.environment: expected 'suburban' or 'metropolitan'");
        }
        s.finish();
    }
    {
        Section s = top.sub("geometry");
        s.read_positive("bs_height_m", c.bs_height_m);
        s.read_positive("jammer_height_m", c.jammer_height_m);
        s.read_positive("ue_height_m", c.ue_height_m);
        s.read_positive("bs_distance_m", c.bs_distance_m);
        s.read_positive("jammer_distance_m", c.jammer_distance_m);
        if (c.bs_distance_m < 1.0 || c.jammer_distance_m < 1.0) throw ConfigError("geometry: distances must be >= 1 m");
        s.finish();
    }
    c.jammer_power_w.assign(c.n_jammers, dbm_to_watts(30.0));
    {
        Section s = top.sub("jamming");
        if (s.has("power")) {
            const json& p = s.raw("power");
            const std::string path = s.key_path("power");
            if (p.is_array()) {
                c.jammer_power_w.clear();
                for (std::size_t i = 0; i < p.size(); ++i)
                    c.jammer_power_w.push_back(parse_power_w(p[i], path + "[" + std::to_string(i) + "]"));
            } else {
                c.jammer_power_w.assign(c.n_jammers, parse_power_w(p, path));
            }
        }
        if (s.has("rho_cap")) s.read("rho_cap", c.rho_cap);
        Section sch = s.sub("schedule");
        if (sch.has("kind")) {
            std::string k;
            sch.read("kind", k);
            try {
                c.schedule.kind = jamming::schedule_kind_from_string(k);
            } catch (const InputError& e) {
                throw ConfigError(sch.key_path("kind") + ": " + e.what());
            }
        }
        if (sch.has("period_samples")) {
            std::size_t p = 0;
            sch.read_count("period_samples", p, 1);
            c.schedule.period_samples = static_cast<std::int64_t>(p);
        }
        sch.read("rho_max", c.schedule.rho_max);
        sch.read("rho_min", c.schedule.rho_min);
        if (sch.has("switch_sample")) {
            std::size_t p = 0;
            sch.read_count("switch_sample", p, 0);
            c.schedule.switch_sample = static_cast<std::int64_t>(p);
        }
        sch.read("table", c.schedule.table);
        sch.finish();
        s.finish();
        try {
            c.schedule.validate();
        } catch (const ScheduleError& e) {
            throw ConfigError(std::string("jamming.schedule: ") + e.what());
        }
    }
    {
        Section s = top.sub("protocol");
        s.read("ne_candidates", c.actions.ne_candidates);
        s.read("nd_candidates", c.actions.nd_candidates);
        s.read_count("n_preamble", c.n_preamble, 0);
        s.read_count("samples_per_symbol", c.samples_per_symbol, 1);
        if (s.has("delta_min")) c.delta_min_db = parse_db(s.raw("delta_min"), s.key_path("delta_min"));
        if (s.has("fading_mode")) {
            std::string m;
            s.read("fading_mode", m);
            if (m == "continuous") c.fading_mode = env::FadingMode::continuous;
            else if (m == "independent") c.fading_mode = env::FadingMode::independent;
            else throw ConfigError("protocol.fading_mode: expected 'continuous' or 'independent'");
        }
        s.finish();
    }
    {
        Section s = top.sub("agent");
        s.read_count("history", c.history, 1);
        if (s.has("n_cells")) {
            std::size_t n = 0;
            s.read_count("n_cells", n, 1);
            c.n_cells = n;
        }
        s.read_count("n_ol", c.n_ol, 1);
        s.read_count("n_value", c.n_value, 1);
        s.read_count("n_adv", c.n_adv, 1);
        s.finish();
    }
    {
        Section s = top.sub("trainer");
        s.read("epsilon_start", c.trainer.epsilon_start);
        s.read("epsilon_min", c.trainer.epsilon_min);
        s.read("epsilon_decay", c.trainer.epsilon_decay);
        s.read("learning_rate", c.trainer.learning_rate);
        s.read("grad_clip", c.trainer.grad_clip);
        s.read("gamma", c.trainer.gamma);
        s.read_count("minibatch", c.trainer.minibatch, 1);
        s.read_count("memory", c.trainer.memory, 1);
        s.read_count("target_sync", c.trainer.target_sync, 1);
        s.finish();
    }
    {
        Section s = top.sub("heuristic");
        if (s.has("tau")) c.heuristic_tau_db = parse_db(s.raw("tau"), s.key_path("tau"));
        s.read_count("n_monitor", c.heuristic_monitor, 0);
        s.finish();
    }
    {
        Section s = top.sub("run");
        s.read("seed", c.seed);
        s.read_count("iterations", c.iterations, 0);
        s.read_count("frames", c.frames, 0);
        s.read_count("checkpoint_every", c.checkpoint_every, 1);
        s.read_count("rolling_window", c.rolling_window, 1);
        s.read("policy", c.policy);
        s.read("checkpoint", c.checkpoint);
        if (s.has("switch_iteration")) {
            std::size_t it = 0;
            s.read_count("switch_iteration", it, 0);
            c.switch_iteration = it;
        }
        if (s.has("sweep_powers")) {
            const json& p = s.raw("sweep_powers");
            if (!p.is_array()) throw ConfigError("run.sweep_powers: expected an array of power quantities");
            c.sweep_powers_w.clear();
            for (std::size_t i = 0; i < p.size(); ++i)
                c.sweep_powers_w.push_back(parse_power_w(p[i], "run.sweep_powers[" + std::to_string(i) + "]"));
        }
        s.read_count("threads", c.threads, 0);
        s.read("out_dir", c.out_dir);
        s.finish();
    }
    top.finish();
    try {
        c.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return c;
}

/// Reads a JSON config file. An empty (or whitespace-only) file gives the
/// defaults.
inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return config_from_json(json::object());
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j);
}

struct TrainingRow {
    std::size_t iteration = 0;
    std::size_t action = 0;
    double epsilon = 0.0;
    double loss = 0.0;
    double reward = 0.0;
    double c_eff = 0.0;
    double outage_fraction = 0.0;
    double rolling_c_eff = 0.0;
    double rolling_outage = 0.0;
};

struct RunRecord {
    std::string label;
    std::vector<env::FrameResult> frames;
    std::vector<TrainingRow> training;
    std::optional<env::Metrics> aggregate;
    std::optional<agent::QNetworkParams> params;
    std::optional<std::size_t> convergence_iterations;   // first phase
    std::optional<std::size_t> reconvergence_iterations; // after the switch
};

/// Per-frame mean of mu * log2(1 + delta) over streams.
inline double frame_c_eff(const env::FrameResult& f) {
    double s = 0.0;
    for (double se : f.spectral_eff) s += se;
    return f.mu * s / static_cast<double>(f.spectral_eff.size());
}

inline double frame_outage_fraction(const env::FrameResult& f, double delta_min_db) {
    double n = 0.0;
    for (double d : f.sinr_db) n += d < delta_min_db ? 1.0 : 0.0;
    return n / static_cast<double>(f.sinr_db.size());
}

/// Mean over a sliding window of fixed width.
class Rolling {
public:
    explicit Rolling(std::size_t width) : width_(width) {}
    double push(double x) {
        buf_.push_back(x);
        sum_ += x;
        if (buf_.size() > width_) {
            sum_ -= buf_.front();
            buf_.pop_front();
        }
        return sum_ / static_cast<double>(buf_.size());
    }
    void reset() {
        buf_.clear();
        sum_ = 0.0;
    }

private:
    std::size_t width_;
    std::deque<double> buf_;
    double sum_ = 0.0;
};

/// First index (relative to `begin`) from which the rolling metric stays
/// within `tolerance` of its plateau, taken as the mean over the last tenth
/// of [begin, end).
inline std::optional<std::size_t> convergence_point(const std::vector<TrainingRow>& rows, std::size_t begin,
                                                    std::size_t end, double tolerance = 0.05) {
    if (end <= begin) return std::nullopt;
    const std::size_t tail = std::max<std::size_t>(1, (end - begin) / 10);
    double plateau = 0.0;
    for (std::size_t i = end - tail; i < end; ++i) plateau += rows[i].rolling_c_eff;
    plateau /= static_cast<double>(tail);
    const double band = tolerance * std::abs(plateau);
    std::size_t first = end;
    for (std::size_t i = end; i-- > begin;) {
        if (std::abs(rows[i].rolling_c_eff - plateau) > band) break;
        first = i;
    }
    if (first == end) return std::nullopt;
    return first - begin;
}

inline std::string checkpoint_path(const std::string& dir, std::size_t iteration) {
    std::ostringstream os;
    os << "checkpoint_" << std::setw(7) << std::setfill('0') << iteration << ".txt";
    return (std::filesystem::path(dir) / os.str()).string();
}

struct TrainingOptions {
    std::string checkpoint_dir; // empty disables checkpoint files
    std::optional<std::size_t> switch_iteration;
    std::optional<std::size_t> iterations; // overrides the config
};

/// Runs the DQN loop. With a switch iteration the jamming schedule reverses
/// at the environment's clock when that iteration begins, and the rolling
/// window restarts so the two phases are measured separately.
inline RunRecord run_training(const ExperimentConfig& cfg, const TrainingOptions& opt = {}) {
    const std::size_t iters = opt.iterations.value_or(cfg.iterations);
    const auto sw = opt.switch_iteration ? opt.switch_iteration : cfg.switch_iteration;
    env::Environment environment(cfg.env_config(derive_seed(cfg.seed, kTrainEnvStream)));
    agent::TrainerConfig tc = cfg.trainer;
    tc.seed = derive_seed(cfg.seed, kTrainerStream);
    agent::Trainer trainer(cfg.net_sizes(), tc, cfg.history);
    const std::string hash = cfg.network_hash();

    auto save = [&](std::size_t it) {
        if (opt.checkpoint_dir.empty()) return;
        std::filesystem::create_directories(opt.checkpoint_dir);
        agent::save_checkpoint(checkpoint_path(opt.checkpoint_dir, it), trainer.params(), hash);
        agent::save_checkpoint((std::filesystem::path(opt.checkpoint_dir) / "checkpoint.txt").string(),
                               trainer.params(), hash);
    };
    save(0);

    RunRecord rec;
    rec.label = "learned";
    rec.training.reserve(iters);
    Rolling roll_c(cfg.rolling_window);
    Rolling roll_o(cfg.rolling_window);
    for (std::size_t it = 0; it < iters; ++it) {
        if (sw && it == *sw) {
            environment.set_switch_sample(environment.clock());
            roll_c.reset();
            roll_o.reset();
        }
        const agent::StepDiagnostics d = trainer.train_step(environment);
        TrainingRow row;
        row.iteration = d.iteration;
        row.action = d.action;
        row.epsilon = d.epsilon;
        row.loss = d.loss;
        row.reward = d.frame.reward;
        row.c_eff = frame_c_eff(d.frame);
        row.outage_fraction = frame_outage_fraction(d.frame, cfg.delta_min_db);
        row.rolling_c_eff = roll_c.push(row.c_eff);
        row.rolling_outage = roll_o.push(row.outage_fraction);
        rec.training.push_back(row);
        if (d.iteration % cfg.checkpoint_every == 0) save(d.iteration);
    }
    if (sw && *sw < iters) {
        rec.convergence_iterations = convergence_point(rec.training, 0, *sw);
        rec.reconvergence_iterations = convergence_point(rec.training, *sw, iters);
    } else {
        rec.convergence_iterations = convergence_point(rec.training, 0, iters);
    }
    rec.params = trainer.params();
    return rec;
}

/// Training with the jammer strategy reversed at the configured iteration.
inline RunRecord run_strategy_switch(const ExperimentConfig& cfg, const TrainingOptions& opt = {}) {
    TrainingOptions o = opt;
    if (!o.switch_iteration) o.switch_iteration = cfg.switch_iteration;
    RunRecord rec = run_training(cfg, o);
    rec.label = "switch";
    return rec;
}

/// Seeded rollout of one policy on the evaluation stream.
inline RunRecord rollout(const ExperimentConfig& cfg, policies::Policy& policy, std::size_t n_frames) {
    if (n_frames == 0) throw InputError("run_evaluation: frame count must be >= 1");
    env::Environment environment(cfg.env_config(derive_seed(cfg.seed, kEvalEnvStream)));
    RunRecord rec;
    rec.label = policy.name();
    rec.frames.reserve(n_frames);
    for (std::size_t n = 0; n < n_frames; ++n) {
        const std::size_t a = policy.act(environment);
        env::FrameResult fr = environment.step(a, policy.options());
        policy.observe(environment, fr);
        rec.frames.push_back(std::move(fr));
    }
    rec.aggregate = env::metrics(rec.frames, cfg.delta_min_db);
    return rec;
}

/// Builds the named policy. "fixed-<a>" selects one action; "learned"
/// reads cfg.checkpoint unless parameters are supplied.
inline std::unique_ptr<policies::Policy> make_policy(const ExperimentConfig& cfg, const std::string& name,
                                                     const agent::QNetworkParams* params = nullptr) {
    const env::EnvConfig ec = cfg.env_config(0);
    if (name == "upper-bound") return std::make_unique<policies::UpperBoundPolicy>(ec);
    if (name == "heuristic")
        return std::make_unique<policies::HeuristicPolicy>(ec, cfg.heuristic_tau_db, cfg.heuristic_monitor);
    if (name.rfind("fixed-", 0) == 0) {
        std::size_t a = 0;
        try {
            a = std::stoul(name.substr(6));
        } catch (const std::exception&) {
            throw ConfigError("policy '" + name + "': expected fixed-<action index>");
        }
        if (a < 1 || a > ec.actions.size()) throw ConfigError("policy '" + name + "': action out of range");
        return std::make_unique<policies::FixedPolicy>(ec, a);
    }
    if (name == "learned") {
        if (params) return std::make_unique<policies::LearnedPolicy>(*params, cfg.history);
        if (cfg.checkpoint.empty()) throw ConfigError("run.checkpoint: required for the learned policy");
        agent::QNetworkParams p = agent::load_checkpoint(cfg.checkpoint, cfg.network_hash());
        if (!(p.sizes() == cfg.net_sizes())) throw CheckpointError("checkpoint network sizes differ from the config");
        return std::make_unique<policies::LearnedPolicy>(std::move(p), cfg.history);
    }
    throw ConfigError("unknown policy '" + name + "'");
}

/// Evaluates one policy. "fixed" expands to every action plus a final
/// "fixed-avg" record holding the mean of their aggregates.
inline std::vector<RunRecord> run_evaluation(const ExperimentConfig& cfg, const std::string& policy,
                                             std::optional<std::size_t> n_frames = std::nullopt,
                                             const agent::QNetworkParams* params = nullptr) {
    const std::size_t frames = n_frames.value_or(cfg.frames);
    if (frames == 0) throw InputError("run_evaluation: frame count must be >= 1");
    std::vector<RunRecord> out;
    if (policy == "fixed") {
        env::Metrics avg;
        for (std::size_t a = 1; a <= cfg.actions.size(); ++a) {
            auto p = make_policy(cfg, "fixed-" + std::to_string(a));
            out.push_back(rollout(cfg, *p, frames));
            avg.c_av_eff += out.back().aggregate->c_av_eff;
            avg.p_av_ot += out.back().aggregate->p_av_ot;
        }
        const double n = static_cast<double>(cfg.actions.size());
        RunRecord mean;
        mean.label = "fixed-avg";
        mean.aggregate = env::Metrics{avg.c_av_eff / n, avg.p_av_ot / n};
        out.push_back(std::move(mean));
        return out;
    }
    auto p = make_policy(cfg, policy, params);
    out.push_back(rollout(cfg, *p, frames));
    return out;
}

// ---- CSV ------------------------------------------------------------------

inline std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(9) << x;
    return os.str();
}

inline const char* kFrameHeader =
    "frame,action,n_e,n_d,n_monitor,start_sample,mu,rho_e,rho_d,outage,outage_fraction,reward,"
    "mean_sinr_db,min_sinr_db,mean_sinr_est_db,c_eff,mean_residual_jamming";

inline const char* kTrainingHeader =
    "iteration,action,epsilon,loss,reward,c_eff,outage_fraction,rolling_c_eff,rolling_outage";

inline std::ofstream open_csv(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    return out;
}

inline void write_frames(std::ostream& out, const RunRecord& rec, double delta_min_db) {
    out << kFrameHeader << '\n';
    for (const auto& f : rec.frames) {
        double mean_s = 0.0, min_s = std::numeric_limits<double>::infinity(), mean_e = 0.0, res = 0.0;
        for (double s : f.sinr_db) {
            mean_s += s;
            min_s = std::min(min_s, s);
        }
        for (double s : f.sinr_est_db) mean_e += s;
        for (double r : f.residual_jamming) res += r;
        mean_s /= static_cast<double>(f.sinr_db.size());
        mean_e /= static_cast<double>(f.sinr_est_db.size());
        res /= static_cast<double>(std::max<std::size_t>(1, f.residual_jamming.size()));
        out << f.index << ',' << f.action << ',' << f.n_e << ',' << f.n_d << ',' << f.n_monitor << ','
            << f.start_sample << ',' << fmt(f.mu) << ',' << fmt(f.rho_e) << ',' << fmt(f.rho_d) << ','
            << (f.outage ? 1 : 0) << ',' << fmt(frame_outage_fraction(f, delta_min_db)) << ',' << fmt(f.reward) << ','
            << fmt(mean_s) << ',' << fmt(min_s) << ',' << fmt(mean_e) << ',' << fmt(frame_c_eff(f)) << ','
            << fmt(res) << '\n';
    }
}

inline void write_training(std::ostream& out, const RunRecord& rec) {
    out << kTrainingHeader << '\n';
    for (const auto& r : rec.training)
        out << r.iteration << ',' << r.action << ',' << fmt(r.epsilon) << ',' << fmt(r.loss) << ',' << fmt(r.reward)
            << ',' << fmt(r.c_eff) << ',' << fmt(r.outage_fraction) << ',' << fmt(r.rolling_c_eff) << ','
            << fmt(r.rolling_outage) << '\n';
}

/// Writes the per-frame rows, or the per-iteration rows for a training
/// record. An empty record gives a header-only frame file.
inline void emit_csv(const RunRecord& rec, const std::string& path, double delta_min_db) {
    std::ofstream out = open_csv(path);
    if (!rec.training.empty()) write_training(out, rec);
    else write_frames(out, rec, delta_min_db);
    if (!out) throw Error("write failed: " + path);
}

// ---- Sweep ----------------------------------------------------------------

struct SweepRow {
    double jamming_w = 0.0;
    std::string policy;
    env::Metrics metrics;
};

struct SweepOptions {
    std::vector<std::string> policies{"upper-bound", "learned", "heuristic", "fixed"};
    std::optional<std::size_t> frames;
    std::optional<std::size_t> iterations; // training budget per power point
    std::size_t threads = 0;               // 0: hardware concurrency
};

/// Jamming-power grid x policies. Each point owns its environments and
/// agent; rows are ordered by (power index, policy index) regardless of
/// completion order. The learned policy is trained at every power point.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const SweepOptions& opt = {}) {
    struct Task {
        std::size_t power_index;
        std::size_t policy_index;
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < cfg.sweep_powers_w.size(); ++i)
        for (std::size_t j = 0; j < opt.policies.size(); ++j) tasks.push_back({i, j});

    std::vector<std::vector<SweepRow>> results(tasks.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(tasks.size());
    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) return;
            try {
                const Task task = tasks[t];
                const ExperimentConfig pc = cfg.with_jammer_power(cfg.sweep_powers_w[task.power_index]);
                const std::string& name = opt.policies[task.policy_index];
                std::optional<agent::QNetworkParams> trained;
                if (name == "learned") {
                    TrainingOptions to;
                    to.iterations = opt.iterations;
                    trained = run_training(pc, to).params;
                }
                const auto recs = run_evaluation(pc, name, opt.frames, trained ? &*trained : nullptr);
                const RunRecord& r = recs.back();
                results[t].push_back({pc.sweep_powers_w[task.power_index], name == "fixed" ? "fixed-avg" : name,
                                      *r.aggregate});
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };
    std::size_t n_threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min(n_threads, std::max<std::size_t>(1, tasks.size()));
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<SweepRow> rows;
    for (auto& r : results)
        for (auto& row : r) rows.push_back(std::move(row));
    return rows;
}

inline void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "jamming_dbm,policy,c_av_eff,p_av_ot\n";
    for (const auto& r : rows)
        out << fmt(watts_to_dbm(r.jamming_w)) << ',' << r.policy << ',' << fmt(r.metrics.c_av_eff) << ','
            << fmt(r.metrics.p_av_ot) << '\n';
}

} // namespace jamnull::harness
