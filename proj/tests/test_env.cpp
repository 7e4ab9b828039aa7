#include <gtest/gtest.h>

#include <jamnull/harness.hpp>

using namespace jamnull;
using namespace jamnull::env;

namespace {

EnvConfig default_env(std::uint64_t seed) { return harness::ExperimentConfig{}.env_config(seed); }

} // namespace

TEST(Actions, DecodeTable) {
    const ActionSpace s;
    EXPECT_EQ(s.decode(1), (std::pair<std::size_t, std::size_t>{10, 200}));
    EXPECT_EQ(s.decode(2), (std::pair<std::size_t, std::size_t>{20, 200}));
    EXPECT_EQ(s.decode(5), (std::pair<std::size_t, std::size_t>{10, 250}));
    EXPECT_EQ(s.decode(16), (std::pair<std::size_t, std::size_t>{40, 350}));
    EXPECT_THROW(s.decode(0), InputError);
    EXPECT_THROW(s.decode(17), InputError);
    for (std::size_t a = 1; a <= 16; ++a) {
        const auto [ne, nd] = decode_action(s, a);
        EXPECT_EQ(s.encode(ne, nd), a);
    }
}

TEST(Actions, DutyFractionMonotone) {
    const ActionSpace s;
    for (std::size_t i = 0; i + 1 < s.ne_candidates.size(); ++i)
        EXPECT_GT(duty_fraction(s.ne_candidates[i], 20, 300), duty_fraction(s.ne_candidates[i + 1], 20, 300));
    for (std::size_t i = 0; i + 1 < s.nd_candidates.size(); ++i)
        EXPECT_LT(duty_fraction(20, 20, s.nd_candidates[i]), duty_fraction(20, 20, s.nd_candidates[i + 1]));
    EXPECT_DOUBLE_EQ(duty_fraction(10, 20, 350), 350.0 / 380.0);
}

TEST(Reward, SingleStreamExample) {
    EXPECT_NEAR(frame_reward({15.0}, 200, 11.8), 200.0 * std::log2(1.0 + db_to_linear(15.0)), 1e-12);
    EXPECT_NEAR(frame_reward({15.0}, 200, 11.8), 1005.5615346701039, 1e-9); // computed independently
    EXPECT_EQ(frame_reward({15.0, 11.0}, 200, 11.8), 0.0);
}

TEST(Reward, CleanChannelHitsCap) {
    EnvConfig cfg = default_env(3);
    cfg.jammers.variances = {0.0, 0.0};
    cfg.noise_var = 1e-30;
    Environment e(cfg);
    const FrameResult fr = e.step(7);
    const auto nd = cfg.actions.decode(7).second;
    const double expect = 12.0 * static_cast<double>(nd) * std::log2(1.0 + 1e8);
    EXPECT_NEAR(fr.reward, expect, 1e-9 * expect);
    EXPECT_FALSE(fr.outage);
    EXPECT_NEAR(fr.reward_scaled, expect / cfg.reward_scale(), 1e-12);
    EXPECT_LE(fr.reward_scaled, 1.0);
}

TEST(Reward, DrowningNoiseMeansOutage) {
    EnvConfig cfg = default_env(4);
    cfg.noise_var = 1.0;
    Environment e(cfg);
    const FrameResult fr = e.step(1);
    EXPECT_EQ(fr.reward, 0.0);
    EXPECT_TRUE(fr.outage);
    for (double s : fr.sinr_db) EXPECT_LT(s, cfg.delta_min_db);
}

TEST(Reward, PositiveExactlyWhenNoOutage) {
    EnvConfig cfg = default_env(5);
    cfg.noise_var = db_to_linear(-75.0 - 30.0); // close to the threshold
    Environment e(cfg);
    int outages = 0;
    for (std::size_t n = 0; n < 40; ++n) {
        const FrameResult fr = e.step(n % 16 + 1);
        EXPECT_EQ(fr.reward > 0.0, !fr.outage);
        bool any_below = false;
        for (double s : fr.sinr_db) any_below |= s < cfg.delta_min_db;
        EXPECT_EQ(fr.outage, any_below);
        outages += fr.outage;
    }
    RecordProperty("outages", outages);
}

TEST(Metrics, Examples) {
    FrameResult f;
    f.mu = 0.8;
    f.sinr_db = {15.0};
    f.spectral_eff = {std::log2(1.0 + db_to_linear(15.0))};
    const Metrics m = metrics({f}, 11.8);
    EXPECT_NEAR(m.c_av_eff, 4.022246138680416, 1e-12);
    EXPECT_EQ(m.p_av_ot, 0.0);
    f.sinr_db = {5.0};
    EXPECT_EQ(metrics({f, f}, 11.8).p_av_ot, 1.0);
    EXPECT_THROW(metrics({}, 11.8), InputError);
}

TEST(History, PushEvictsOldest) {
    ApproxState s(1, 3);
    s = push_history(s, {0.1, 0.2}, 0.5);
    EXPECT_EQ(s.data, (std::vector<double>{0.1, 0.2, 0.5}));
    ApproxState t(2, 2);
    t = push_history(t, {1.0}, 0.1);
    t = push_history(t, {2.0}, 0.2);
    t = push_history(t, {3.0}, 0.3);
    EXPECT_EQ(t.data, (std::vector<double>{2.0, 0.2, 3.0, 0.3}));
    EXPECT_THROW(push_history(t, {1.0, 2.0}, 0.1), ShapeError);
}

TEST(History, FlatSizeForPaperSetting) {
    const ApproxState s(6, 4 + 2 + 1);
    EXPECT_EQ(s.flat_size(), 42u);
}

TEST(Environment, ZeroObservationBeforeFirstFrame) {
    Environment e(default_env(6));
    const Observation o = e.observe();
    EXPECT_EQ(o.size(), 6u);
    for (double v : o.avg_sinr_db) EXPECT_EQ(v, 0.0);
    for (double v : o.avg_singular_values) EXPECT_EQ(v, 0.0);
}

TEST(Environment, ObservationIsFunctionOfPreviousFrame) {
    Environment e(default_env(7));
    for (std::size_t a : {1u, 9u, 16u}) {
        const FrameResult fr = e.step(a);
        const Observation o = e.observe();
        for (std::size_t k = 0; k < 4; ++k) {
            double s = 0.0;
            for (std::size_t m = 0; m < 3; ++m) s += fr.sinr_est_db[k * 3 + m];
            EXPECT_DOUBLE_EQ(o.avg_sinr_db[k], s / 3.0);
        }
        for (std::size_t l = 0; l < 2; ++l) {
            double s = 0.0;
            for (std::size_t k = 0; k < 4; ++k) s += fr.singular_values[k][l];
            EXPECT_DOUBLE_EQ(o.avg_singular_values[l], s / 4.0);
        }
        EXPECT_EQ(e.observe().avg_sinr_db, o.avg_sinr_db); // observing twice changes nothing
    }
}

TEST(Environment, FrameBookkeeping) {
    Environment e(default_env(8));
    const FrameResult a = e.step(3);
    EXPECT_EQ(a.n_e, 30u);
    EXPECT_EQ(a.n_d, 200u);
    EXPECT_EQ(a.start_sample, 0);
    EXPECT_EQ(e.clock(), 250);
    const FrameResult b = e.step(1, {BeamformerMode::estimated, 20});
    EXPECT_EQ(b.start_sample, 250);
    EXPECT_EQ(b.monitor_excess_db.size(), 4u);
    EXPECT_DOUBLE_EQ(b.mu, 200.0 / 250.0);
    EXPECT_EQ(b.sinr_db.size(), 12u);
    EXPECT_EQ(e.frames_done(), 2u);
}

TEST(Environment, DeterministicPerSeed) {
    Environment a(default_env(9)), b(default_env(9)), c(default_env(10));
    bool any_diff = false;
    for (std::size_t n = 0; n < 6; ++n) {
        const auto fa = a.step(n * 3 % 16 + 1);
        const auto fb = b.step(n * 3 % 16 + 1);
        const auto fc = c.step(n * 3 % 16 + 1);
        EXPECT_EQ(fa.sinr_db, fb.sinr_db);
        EXPECT_EQ(fa.sinr_est_db, fb.sinr_est_db);
        EXPECT_EQ(fa.reward, fb.reward);
        any_diff |= fa.sinr_est_db != fc.sinr_est_db;
    }
    EXPECT_TRUE(any_diff);
}

TEST(Environment, OracleBeamformerRemovesJamming) {
    Environment e(default_env(11));
    for (int n = 0; n < 20; ++n) {
        const FrameResult fr = e.step(13, {BeamformerMode::oracle, 0});
        for (double r : fr.residual_jamming) EXPECT_LT(r, 6.0 * e.config().noise_var);
    }
}

TEST(Environment, InvalidConfigRejected) {
    EnvConfig cfg = default_env(1);
    cfg.n_rx = 4; // cannot host 2 jammers and 3 streams
    EXPECT_THROW(Environment{cfg}, ConfigError);
    cfg = default_env(1);
    cfg.eta_jammer_ue = {1.0};
    EXPECT_THROW(Environment{cfg}, ConfigError);
}
