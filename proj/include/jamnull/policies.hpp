#pragma once

// Action policies behind one interface. Each policy picks the next action,
// chooses how the environment forms its beamformer, and sees every frame
// result so that stateful policies can update.

#include <memory>
#include <string>

#include "jamnull/agent.hpp"
#include "jamnull/env.hpp"

namespace jamnull::policies {

class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    virtual std::size_t act(const env::Environment& e) = 0;
    virtual env::StepOptions options() const { return {}; }
    virtual void observe(const env::Environment&, const env::FrameResult&) {}
};

/// Action with the largest data fraction in the table.
inline std::size_t max_duty_action(const env::EnvConfig& cfg, std::size_t n_monitor = 0) {
    std::size_t best = 1;
    double best_mu = -1.0;
    for (std::size_t a = 1; a <= cfg.actions.size(); ++a) {
        const auto [ne, nd] = cfg.actions.decode(a);
        const double mu = env::duty_fraction(ne, cfg.n_preamble, nd, n_monitor);
        if (mu > best_mu) {
            best_mu = mu;
            best = a;
        }
    }
    return best;
}

/// Perfect nullification: the beamformer comes from the true data-phase
/// covariance, so the estimation window length is irrelevant and the
/// shortest-overhead action is taken.
class UpperBoundPolicy : public Policy {
public:
    explicit UpperBoundPolicy(const env::EnvConfig& cfg) : action_(max_duty_action(cfg)) {}
    std::string name() const override { return "upper-bound"; }
    std::size_t act(const env::Environment&) override { return action_; }
    env::StepOptions options() const override { return {env::BeamformerMode::oracle, 0}; }

private:
    std::size_t action_;
};

class FixedPolicy : public Policy {
public:
    FixedPolicy(const env::EnvConfig& cfg, std::size_t action) : action_(action) {
        cfg.actions.decode(action); // range check
    }
    std::string name() const override { return "fixed-" + std::to_string(action_); }
    std::size_t act(const env::Environment&) override { return action_; }
    std::size_t action() const { return action_; }

private:
    std::size_t action_;
};

/// Residual monitoring: runs a default action, listens for n_monitor
/// samples after each data phase, and re-estimates with the longest
/// estimation window in the next frame whenever the monitored power exceeds
/// the noise floor by more than tau_db at any UE.
class HeuristicPolicy : public Policy {
public:
    HeuristicPolicy(const env::EnvConfig& cfg, double tau_db = 3.0, std::size_t n_monitor = 20)
        : tau_db_(tau_db), n_monitor_(n_monitor) {
        if (!std::isfinite(tau_db)) throw ConfigError("heuristic.tau_db must be finite");
        const auto& ne = cfg.actions.ne_candidates;
        const auto& nd = cfg.actions.nd_candidates;
        const std::size_t ne_default = ne[(ne.size() - 1) / 2];
        nd_ = nd[nd.size() / 2];
        default_action_ = cfg.actions.encode(ne_default, nd_);
        reestimate_action_ = cfg.actions.encode(*std::max_element(ne.begin(), ne.end()), nd_);
    }

    std::string name() const override { return "heuristic"; }
    std::size_t act(const env::Environment&) override { return pending_ ? reestimate_action_ : default_action_; }
    env::StepOptions options() const override { return {env::BeamformerMode::estimated, n_monitor_}; }

    void observe(const env::Environment&, const env::FrameResult& fr) override {
        if (pending_) ++reestimations_;
        pending_ = false;
        for (double excess : fr.monitor_excess_db)
            if (excess > tau_db_) pending_ = true;
    }

    std::size_t default_action() const { return default_action_; }
    std::size_t reestimations() const { return reestimations_; }

private:
    double tau_db_;
    std::size_t n_monitor_;
    std::size_t nd_ = 0;
    std::size_t default_action_ = 1;
    std::size_t reestimate_action_ = 1;
    bool pending_ = false;
    std::size_t reestimations_ = 0;
};

/// Greedy play of a trained network, keeping its own observation history.
class LearnedPolicy : public Policy {
public:
    LearnedPolicy(agent::QNetworkParams params, std::size_t history)
        : params_(std::move(params)), state_(history, params_.sizes().n_inputs) {}

    std::string name() const override { return "learned"; }

    std::size_t act(const env::Environment&) override {
        last_ = agent::argmax_action(agent::forward(params_, state_).q);
        return last_;
    }

    void observe(const env::Environment& e, const env::FrameResult&) override {
        const double code = static_cast<double>(last_) / static_cast<double>(params_.sizes().n_actions);
        state_ = env::push_history(state_, scaler_(e.observe()), code);
    }

private:
    agent::QNetworkParams params_;
    env::ApproxState state_;
    env::ObservationScaler scaler_;
    std::size_t last_ = 1;
};

} // namespace jamnull::policies
