#pragma once

// LSTM dueling Q-network with hand-written backpropagation through time,
// replay memory, epsilon-greedy selection and the DQN training loop.
//
// Network: an LSTM with peephole connections reads the H history entries as a
// sequence; its last hidden state is linearly projected to N_ol units, which
// feed a value stream (N_ol -> N_v -> 1) and an advantage stream
// (N_ol -> N_a -> |A|) through tanh hidden layers. Q = V + G - mean(G).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "jamnull/env.hpp"
#include "jamnull/numerics.hpp"

namespace jamnull::agent {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using MapMat = Eigen::Map<Mat>;
using MapVec = Eigen::Map<Vec>;
using CMapMat = Eigen::Map<const Mat>;
using CMapVec = Eigen::Map<const Vec>;

struct NetSizes {
    std::size_t n_inputs = 7;   // K + N_J + 1
    std::size_t n_cells = 6;    // LSTM cells
    std::size_t n_ol = 128;     // projected LSTM output
    std::size_t n_value = 16;   // value-stream hidden units
    std::size_t n_adv = 16;     // advantage-stream hidden units
    std::size_t n_actions = 16;

    bool operator==(const NetSizes&) const = default;

    void validate() const {
        if (n_inputs < 1 || n_cells < 1 || n_ol < 1 || n_value < 1 || n_adv < 1 || n_actions < 1)
            throw ConfigError("NetSizes: every layer size must be >= 1");
    }
};

struct ParamCount {
    std::size_t formula = 0; // weights only, the usual bias-free accounting
    std::size_t total = 0;   // weights plus biases as implemented
};

inline ParamCount param_count(const NetSizes& s) {
    const std::size_t lstm = 4 * s.n_inputs * s.n_cells + 4 * s.n_cells * s.n_cells + s.n_cells * s.n_ol + 3 * s.n_cells;
    const std::size_t heads = s.n_ol * s.n_value + s.n_value + s.n_ol * s.n_adv + s.n_adv * s.n_actions;
    const std::size_t biases = 4 * s.n_cells + s.n_ol + s.n_value + 1 + s.n_adv + s.n_actions;
    return {lstm + heads, lstm + heads + biases};
}

/// All weights in one flat vector; the accessors are views into it.
class QNetworkParams {
public:
    QNetworkParams() = default;
    explicit QNetworkParams(const NetSizes& s) : sizes_(s) {
        s.validate();
        layout();
        flat_ = Vec::Zero(static_cast<Eigen::Index>(total_));
    }

    const NetSizes& sizes() const { return sizes_; }
    std::size_t size() const { return total_; }

    Vec& flat() { return flat_; }
    const Vec& flat() const { return flat_; }

    /// Replaces every parameter; the length must match.
    void set_flat(const Vec& v) {
        if (static_cast<std::size_t>(v.size()) != total_) throw ShapeError("QNetworkParams: flat size mismatch");
        flat_ = v;
    }

    /// Uniform in +-1/sqrt(fan_in) per layer.
    void init_uniform(Rng& rng) {
        const auto& s = sizes_;
        auto fill = [&](std::size_t off, std::size_t n, double fan_in) {
            const double b = 1.0 / std::sqrt(fan_in);
            for (std::size_t i = 0; i < n; ++i) flat_(static_cast<Eigen::Index>(off + i)) = rng.uniform(-b, b);
        };
        const double lstm_fan = static_cast<double>(s.n_inputs + s.n_cells);
        fill(o_wx_, 4 * s.n_cells * s.n_inputs, lstm_fan);
        fill(o_wh_, 4 * s.n_cells * s.n_cells, lstm_fan);
        fill(o_b_, 4 * s.n_cells, lstm_fan);
        fill(o_peep_, 3 * s.n_cells, static_cast<double>(s.n_cells));
        fill(o_wp_, s.n_ol * s.n_cells, static_cast<double>(s.n_cells));
        fill(o_bp_, s.n_ol, static_cast<double>(s.n_cells));
        fill(o_wv1_, s.n_value * s.n_ol, static_cast<double>(s.n_ol));
        fill(o_bv1_, s.n_value, static_cast<double>(s.n_ol));
        fill(o_wv2_, s.n_value, static_cast<double>(s.n_value));
        fill(o_bv2_, 1, static_cast<double>(s.n_value));
        fill(o_wa1_, s.n_adv * s.n_ol, static_cast<double>(s.n_ol));
        fill(o_ba1_, s.n_adv, static_cast<double>(s.n_ol));
        fill(o_wa2_, s.n_actions * s.n_adv, static_cast<double>(s.n_adv));
        fill(o_ba2_, s.n_actions, static_cast<double>(s.n_adv));
    }

    // Gate rows are ordered input, forget, cell, output.
    CMapMat wx() const { return cmat(o_wx_, 4 * sizes_.n_cells, sizes_.n_inputs); }
    CMapMat wh() const { return cmat(o_wh_, 4 * sizes_.n_cells, sizes_.n_cells); }
    CMapVec b() const { return cvec(o_b_, 4 * sizes_.n_cells); }
    CMapVec peep() const { return cvec(o_peep_, 3 * sizes_.n_cells); } // input, forget, output
    CMapMat wp() const { return cmat(o_wp_, sizes_.n_ol, sizes_.n_cells); }
    CMapVec bp() const { return cvec(o_bp_, sizes_.n_ol); }
    CMapMat wv1() const { return cmat(o_wv1_, sizes_.n_value, sizes_.n_ol); }
    CMapVec bv1() const { return cvec(o_bv1_, sizes_.n_value); }
    CMapVec wv2() const { return cvec(o_wv2_, sizes_.n_value); }
    double bv2() const { return flat_(static_cast<Eigen::Index>(o_bv2_)); }
    CMapMat wa1() const { return cmat(o_wa1_, sizes_.n_adv, sizes_.n_ol); }
    CMapVec ba1() const { return cvec(o_ba1_, sizes_.n_adv); }
    CMapMat wa2() const { return cmat(o_wa2_, sizes_.n_actions, sizes_.n_adv); }
    CMapVec ba2() const { return cvec(o_ba2_, sizes_.n_actions); }

    /// Same offsets applied to a gradient vector of equal length.
    struct GradView {
        MapMat wx, wh;
        MapVec b, peep;
        MapMat wp;
        MapVec bp;
        MapMat wv1;
        MapVec bv1, wv2;
        double& bv2;
        MapMat wa1;
        MapVec ba1;
        MapMat wa2;
        MapVec ba2;
    };

    GradView view(Vec& g) const {
        const auto& s = sizes_;
        auto m = [&](std::size_t off, std::size_t r, std::size_t c) {
            return MapMat(g.data() + off, static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        };
        auto v = [&](std::size_t off, std::size_t n) { return MapVec(g.data() + off, static_cast<Eigen::Index>(n)); };
        return {m(o_wx_, 4 * s.n_cells, s.n_inputs), m(o_wh_, 4 * s.n_cells, s.n_cells), v(o_b_, 4 * s.n_cells),
                v(o_peep_, 3 * s.n_cells), m(o_wp_, s.n_ol, s.n_cells), v(o_bp_, s.n_ol),
                m(o_wv1_, s.n_value, s.n_ol), v(o_bv1_, s.n_value), v(o_wv2_, s.n_value),
                g(static_cast<Eigen::Index>(o_bv2_)), m(o_wa1_, s.n_adv, s.n_ol), v(o_ba1_, s.n_adv),
                m(o_wa2_, s.n_actions, s.n_adv), v(o_ba2_, s.n_actions)};
    }

    /// Named parameter groups as [begin, end) offsets, for per-layer checks.
    std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> groups() const {
        return {{"lstm_input", {o_wx_, o_wh_}},   {"lstm_recurrent", {o_wh_, o_b_}},
                {"lstm_bias", {o_b_, o_peep_}},   {"lstm_peephole", {o_peep_, o_wp_}},
                {"projection", {o_wp_, o_wv1_}},  {"value_stream", {o_wv1_, o_wa1_}},
                {"advantage_hidden", {o_wa1_, o_wa2_}}, {"advantage_out", {o_wa2_, total_}}};
    }

private:
    void layout() {
        const auto& s = sizes_;
        std::size_t off = 0;
        auto take = [&](std::size_t& slot, std::size_t n) {
            slot = off;
            off += n;
        };
        take(o_wx_, 4 * s.n_cells * s.n_inputs);
        take(o_wh_, 4 * s.n_cells * s.n_cells);
        take(o_b_, 4 * s.n_cells);
        take(o_peep_, 3 * s.n_cells);
        take(o_wp_, s.n_ol * s.n_cells);
        take(o_bp_, s.n_ol);
        take(o_wv1_, s.n_value * s.n_ol);
        take(o_bv1_, s.n_value);
        take(o_wv2_, s.n_value);
        take(o_bv2_, 1);
        take(o_wa1_, s.n_adv * s.n_ol);
        take(o_ba1_, s.n_adv);
        take(o_wa2_, s.n_actions * s.n_adv);
        take(o_ba2_, s.n_actions);
        total_ = off;
    }

    CMapMat cmat(std::size_t off, std::size_t r, std::size_t c) const {
        return CMapMat(flat_.data() + off, static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
    CMapVec cvec(std::size_t off, std::size_t n) const {
        return CMapVec(flat_.data() + off, static_cast<Eigen::Index>(n));
    }

    NetSizes sizes_;
    Vec flat_;
    std::size_t total_ = 0;
    std::size_t o_wx_ = 0, o_wh_ = 0, o_b_ = 0, o_peep_ = 0, o_wp_ = 0, o_bp_ = 0, o_wv1_ = 0, o_bv1_ = 0,
                o_wv2_ = 0, o_bv2_ = 0, o_wa1_ = 0, o_ba1_ = 0, o_wa2_ = 0, o_ba2_ = 0;
};

/// Q_a = v + adv_a - mean(adv).
inline Vec dueling_combine(double v, const Vec& adv) {
    if (adv.size() == 0) throw InputError("dueling_combine: empty advantage vector");
    return (adv.array() - adv.mean() + v).matrix();
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Activations kept for the backward pass.
struct ForwardCache {
    std::vector<Vec> x, i, f, g, o, c, h; // per time step; c and h hold H+1 entries (index 0 is the zero state)
    Vec y, hv, ha, adv, q;
    double v = 0.0;
};

struct ForwardResult {
    Vec q;
    double v = 0.0;
    Vec adv;
};

inline ForwardResult forward(const QNetworkParams& p, const env::ApproxState& s, ForwardCache* cache = nullptr) {
    const NetSizes& z = p.sizes();
    if (s.entry_size != z.n_inputs) throw ShapeError("forward: history entry size differs from the network input");
    if (s.flat_size() != s.history * z.n_inputs) throw ShapeError("forward: flattened state has the wrong length");
    const auto nc = static_cast<Eigen::Index>(z.n_cells);
    ForwardCache local;
    ForwardCache& cc = cache ? *cache : local;
    cc = ForwardCache{};
    const auto wx = p.wx();
    const auto wh = p.wh();
    const auto bias = p.b();
    const auto peep = p.peep();
    Vec h = Vec::Zero(nc);
    Vec c = Vec::Zero(nc);
    cc.c.push_back(c);
    cc.h.push_back(h);
    for (std::size_t t = 0; t < s.history; ++t) {
        const Vec x = CMapVec(s.step(t), static_cast<Eigen::Index>(z.n_inputs));
        const Vec a = wx * x + wh * h + bias;
        Vec gi(nc), gf(nc), gg(nc), go(nc), cn(nc);
        for (Eigen::Index u = 0; u < nc; ++u) {
            gi(u) = sigmoid(a(u) + peep(u) * c(u));
            gf(u) = sigmoid(a(nc + u) + peep(nc + u) * c(u));
            gg(u) = std::tanh(a(2 * nc + u));
            cn(u) = gf(u) * c(u) + gi(u) * gg(u);
            go(u) = sigmoid(a(3 * nc + u) + peep(2 * nc + u) * cn(u));
        }
        c = cn;
        h = go.array() * c.array().tanh();
        cc.x.push_back(x);
        cc.i.push_back(gi);
        cc.f.push_back(gf);
        cc.g.push_back(gg);
        cc.o.push_back(go);
        cc.c.push_back(c);
        cc.h.push_back(h);
    }
    cc.y = p.wp() * h + p.bp();
    cc.hv = (p.wv1() * cc.y + p.bv1()).array().tanh();
    cc.ha = (p.wa1() * cc.y + p.ba1()).array().tanh();
    cc.v = p.wv2().dot(cc.hv) + p.bv2();
    cc.adv = p.wa2() * cc.ha + p.ba2();
    cc.q = dueling_combine(cc.v, cc.adv);
    return {cc.q, cc.v, cc.adv};
}

/// Accumulates into `grad` the gradient of 0.5 (y - Q_a)^2 where
/// td_error = y - Q_a and `action` is 1-based. Requires the cache of the
/// matching forward pass.
inline void backward(const QNetworkParams& p, const ForwardCache& cc, std::size_t action, double td_error,
                     Vec& grad) {
    const NetSizes& z = p.sizes();
    if (static_cast<std::size_t>(grad.size()) != p.size()) throw ShapeError("backward: gradient size mismatch");
    if (action < 1 || action > z.n_actions) throw InputError("backward: action out of range");
    if (td_error == 0.0) return;
    auto gv = p.view(grad);
    const auto na = static_cast<Eigen::Index>(z.n_actions);
    const auto nc = static_cast<Eigen::Index>(z.n_cells);
    const double dq = -td_error;

    // Dueling head: dQ_a/dV = 1, dQ_a/dG_b = [a == b] - 1/|A|.
    Vec dadv = Vec::Constant(na, -dq / static_cast<double>(na));
    dadv(static_cast<Eigen::Index>(action - 1)) += dq;
    const double dv = dq;

    gv.bv2 += dv;
    gv.wv2 += dv * cc.hv;
    const Vec dhv_pre = (dv * p.wv2()).array() * (1.0 - cc.hv.array().square());
    gv.wv1 += dhv_pre * cc.y.transpose();
    gv.bv1 += dhv_pre;

    gv.ba2 += dadv;
    gv.wa2 += dadv * cc.ha.transpose();
    const Vec dha_pre = (p.wa2().transpose() * dadv).array() * (1.0 - cc.ha.array().square());
    gv.wa1 += dha_pre * cc.y.transpose();
    gv.ba1 += dha_pre;

    const Vec dy = p.wv1().transpose() * dhv_pre + p.wa1().transpose() * dha_pre;
    const std::size_t steps = cc.x.size();
    gv.wp += dy * cc.h[steps].transpose();
    gv.bp += dy;

    const auto wh = p.wh();
    const auto peep = p.peep();
    Vec dh = p.wp().transpose() * dy;
    Vec dc = Vec::Zero(nc);
    Vec da(4 * nc);
    for (std::size_t t = steps; t-- > 0;) {
        const Vec& c_prev = cc.c[t];
        const Vec& c_now = cc.c[t + 1];
        const Vec& gi = cc.i[t];
        const Vec& gf = cc.f[t];
        const Vec& gg = cc.g[t];
        const Vec& go = cc.o[t];
        Vec dc_prev(nc);
        for (Eigen::Index u = 0; u < nc; ++u) {
            const double tc = std::tanh(c_now(u));
            const double dao = dh(u) * tc * go(u) * (1.0 - go(u));
            double dcu = dc(u) + dh(u) * go(u) * (1.0 - tc * tc) + dao * peep(2 * nc + u);
            const double dai = dcu * gg(u) * gi(u) * (1.0 - gi(u));
            const double daf = dcu * c_prev(u) * gf(u) * (1.0 - gf(u));
            const double dag = dcu * gi(u) * (1.0 - gg(u) * gg(u));
            da(u) = dai;
            da(nc + u) = daf;
            da(2 * nc + u) = dag;
            da(3 * nc + u) = dao;
            gv.peep(u) += dai * c_prev(u);
            gv.peep(nc + u) += daf * c_prev(u);
            gv.peep(2 * nc + u) += dao * c_now(u);
            dc_prev(u) = dcu * gf(u) + dai * peep(u) + daf * peep(nc + u);
        }
        gv.wx += da * cc.x[t].transpose();
        gv.wh += da * cc.h[t].transpose();
        gv.b += da;
        dh = wh.transpose() * da;
        dc = dc_prev;
    }
}

/// Greedy index (1-based), lowest index on ties.
inline std::size_t argmax_action(const Vec& q) {
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < q.size(); ++a)
        if (q(a) > q(best)) best = a;
    return static_cast<std::size_t>(best) + 1;
}

inline std::size_t select_action(const QNetworkParams& p, const env::ApproxState& s, double epsilon, Rng& rng) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InputError("select_action: epsilon must lie in [0, 1]");
    if (rng.uniform() < epsilon) return rng.index(p.sizes().n_actions) + 1;
    return argmax_action(forward(p, s).q);
}

struct Transition {
    env::ApproxState state;
    std::size_t action = 1;
    double reward = 0.0;
    env::ApproxState next_state;
};

/// Fixed-capacity FIFO memory.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 10000) : capacity_(capacity) {
        if (capacity < 1) throw ConfigError("ReplayBuffer: capacity must be >= 1");
        items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
    }

    void push(Transition t) {
        if (items_.size() < capacity_) {
            items_.push_back(std::move(t));
        } else {
            items_[head_] = std::move(t);
            head_ = (head_ + 1) % capacity_;
        }
    }

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }

    /// i = 0 is the oldest stored transition.
    const Transition& at(std::size_t i) const { return items_[(head_ + i) % items_.size()]; }

    /// Uniform draws with replacement.
    std::vector<const Transition*> sample(Rng& rng, std::size_t n) const {
        std::vector<const Transition*> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(&items_[rng.index(items_.size())]);
        return out;
    }

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<Transition> items_;
};

struct TrainerConfig {
    double epsilon_start = 1.0;
    double epsilon_min = 0.1;
    double epsilon_decay = 0.99;
    double learning_rate = 0.01;
    double grad_clip = 1.0;
    double gamma = 0.9;
    std::size_t minibatch = 32;
    std::size_t memory = 10000;
    std::size_t target_sync = 1000;
    std::uint64_t seed = 7;

    void validate() const {
        if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("trainer.gamma must lie in (0, 1)");
        if (!(epsilon_min >= 0.0 && epsilon_start <= 1.0 && epsilon_min <= epsilon_start))
            throw ConfigError("trainer epsilon range must satisfy 0 <= min <= start <= 1");
        if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0)) throw ConfigError("trainer.epsilon_decay must lie in (0, 1]");
        if (!(learning_rate > 0.0)) throw ConfigError("trainer.learning_rate must be positive");
        if (minibatch < 1 || memory < 1 || target_sync < 1)
            throw ConfigError("trainer minibatch, memory and target_sync must be >= 1");
    }
};

struct StepDiagnostics {
    std::size_t iteration = 0; // 1-based count after this step
    std::size_t action = 0;
    double epsilon = 0.0;      // value used to pick the action
    double loss = 0.0;         // mean 0.5 td^2 over the minibatch, 0 during warm-up
    double grad_norm = 0.0;    // before clipping
    bool updated = false;
    bool synced = false;
    env::FrameResult frame;
};

class Trainer {
public:
    Trainer(const NetSizes& sizes, TrainerConfig cfg, std::size_t history)
        : cfg_(cfg), params_(sizes), replay_(cfg.memory), rng_(cfg.seed), history_(history) {
        cfg_.validate();
        Rng init = rng_.split(11);
        params_.init_uniform(init);
        target_ = params_;
        epsilon_ = cfg_.epsilon_start;
        state_ = env::ApproxState(history, sizes.n_inputs);
    }

    const QNetworkParams& params() const { return params_; }
    QNetworkParams& params() { return params_; }
    const QNetworkParams& target() const { return target_; }
    const ReplayBuffer& replay() const { return replay_; }
    double epsilon() const { return epsilon_; }
    std::size_t iteration() const { return iteration_; }
    const env::ApproxState& state() const { return state_; }
    const TrainerConfig& config() const { return cfg_; }

    /// One iteration: act, store, learn from a minibatch, decay epsilon,
    /// sync the target network every target_sync iterations.
    StepDiagnostics train_step(env::Environment& environment, const env::StepOptions& opt = {}) {
        StepDiagnostics d;
        d.epsilon = epsilon_;
        d.action = select_action(params_, state_, epsilon_, rng_);
        d.frame = environment.step(d.action, opt);
        const std::vector<double> feats = scaler_(environment.observe());
        env::ApproxState next = env::push_history(state_, feats, action_code(d.action));
        replay_.push({state_, d.action, d.frame.reward_scaled, next});
        state_ = std::move(next);

        if (replay_.size() >= cfg_.minibatch) {
            const auto batch = replay_.sample(rng_, cfg_.minibatch);
            const auto [loss, norm] = learn(batch);
            d.loss = loss;
            d.grad_norm = norm;
            d.updated = true;
        }
        epsilon_ = std::max(cfg_.epsilon_min, epsilon_ * cfg_.epsilon_decay);
        ++iteration_;
        if (iteration_ % cfg_.target_sync == 0) {
            target_ = params_;
            d.synced = true;
        }
        d.iteration = iteration_;
        return d;
    }

    /// One SGD step on the given transitions; returns (loss, gradient norm).
    std::pair<double, double> learn(const std::vector<const Transition*>& batch) {
        Vec grad = Vec::Zero(static_cast<Eigen::Index>(params_.size()));
        ForwardCache cache;
        double loss = 0.0;
        for (const Transition* t : batch) {
            const double y = t->reward + cfg_.gamma * forward(target_, t->next_state).q.maxCoeff();
            const Vec q = forward(params_, t->state, &cache).q;
            const double td = y - q(static_cast<Eigen::Index>(t->action - 1));
            loss += 0.5 * td * td;
            backward(params_, cache, t->action, td, grad);
        }
        const double inv = 1.0 / static_cast<double>(batch.size());
        grad *= inv;
        const double norm = grad.norm();
        if (norm > cfg_.grad_clip) grad *= cfg_.grad_clip / norm;
        params_.flat() -= cfg_.learning_rate * grad;
        return {loss * inv, norm};
    }

    /// Greedy action for the trainer's current history.
    std::size_t greedy_action() const { return argmax_action(forward(params_, state_).q); }

    double action_code(std::size_t a) const {
        return static_cast<double>(a) / static_cast<double>(params_.sizes().n_actions);
    }

private:
    TrainerConfig cfg_;
    QNetworkParams params_;
    QNetworkParams target_;
    ReplayBuffer replay_;
    Rng rng_;
    std::size_t history_;
    env::ApproxState state_;
    env::ObservationScaler scaler_;
    double epsilon_ = 1.0;
    std::size_t iteration_ = 0;
};

/// 64-bit FNV-1a, rendered as 16 hex digits.
inline std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

inline constexpr const char* kCheckpointMagic = "jamnull-qnet";
inline constexpr int kCheckpointVersion = 1;

/// Text checkpoint: header, sizes, config hash, then one hexfloat per line
/// so that the round trip is bit-exact.
inline void save_checkpoint(const std::string& path, const QNetworkParams& p, const std::string& config_hash) {
    std::ofstream out(path);
    if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path);
    const auto& s = p.sizes();
    out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n'
        << "sizes " << s.n_inputs << ' ' << s.n_cells << ' ' << s.n_ol << ' ' << s.n_value << ' ' << s.n_adv << ' '
        << s.n_actions << '\n'
        << "config " << config_hash << '\n'
        << "count " << p.size() << '\n'
        << std::hexfloat;
    for (Eigen::Index i = 0; i < p.flat().size(); ++i) out << p.flat()(i) << '\n';
    if (!out) throw CheckpointError("write failed: " + path);
}

/// Loads a checkpoint; a non-empty expected hash must match the stored one.
inline QNetworkParams load_checkpoint(const std::string& path, const std::string& expected_hash = "") {
    std::ifstream in(path);
    if (!in) throw CheckpointError("cannot open checkpoint: " + path);
    std::string magic, tag, hash;
    int version = 0;
    NetSizes s;
    std::size_t count = 0;
    in >> magic >> version;
    if (magic != kCheckpointMagic || version != kCheckpointVersion)
        throw CheckpointError("not a version-" + std::to_string(kCheckpointVersion) + " checkpoint: " + path);
    in >> tag >> s.n_inputs >> s.n_cells >> s.n_ol >> s.n_value >> s.n_adv >> s.n_actions;
    if (tag != "sizes") throw CheckpointError("malformed sizes line: " + path);
    in >> tag >> hash;
    if (tag != "config") throw CheckpointError("malformed config line: " + path);
    if (!expected_hash.empty() && hash != expected_hash)
        throw CheckpointError("checkpoint config hash " + hash + " does not match " + expected_hash);
    in >> tag >> count;
    QNetworkParams p(s);
    if (tag != "count" || count != p.size()) throw CheckpointError("parameter count mismatch: " + path);
    std::string token;
    for (std::size_t i = 0; i < count; ++i) {
        if (!(in >> token)) throw CheckpointError("truncated checkpoint: " + path);
        p.flat()(static_cast<Eigen::Index>(i)) = std::strtod(token.c_str(), nullptr);
    }
    return p;
}

} // namespace jamnull::agent
