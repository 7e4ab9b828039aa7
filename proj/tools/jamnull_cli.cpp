// Command-line front end: bounds, simulate, train, evaluate, sweep, switch.
// Exit codes: 0 success, 2 configuration error, 3 numeric failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "jamnull/harness.hpp"

namespace fs = std::filesystem;
using namespace jamnull;

namespace {

struct CommonArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string policy;
    std::optional<std::size_t> frames;
    std::optional<std::size_t> iterations;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config, "JSON experiment config (defaults when omitted)");
    cmd->add_option("--seed", a.seed, "Override run.seed");
    cmd->add_option("--out", a.out, "Output directory or file");
    cmd->add_option("--policy", a.policy, "upper-bound | fixed | fixed-<a> | heuristic | learned | all");
    cmd->add_option("--frames", a.frames, "Evaluation frames");
    cmd->add_option("--iterations", a.iterations, "Training iterations");
}

harness::ExperimentConfig resolve(const CommonArgs& a) {
    harness::ExperimentConfig cfg = a.config.empty() ? harness::config_from_json(harness::json::object())
                                                     : harness::load_config(a.config);
    if (a.seed) cfg.seed = *a.seed;
    if (!a.policy.empty()) cfg.policy = a.policy;
    if (a.frames) cfg.frames = *a.frames;
    if (a.iterations) cfg.iterations = *a.iterations;
    if (!a.out.empty()) cfg.out_dir = a.out;
    return cfg;
}

std::string out_file(const harness::ExperimentConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
}

void print_metrics(const harness::RunRecord& r) {
    std::cout << r.label << ": C_av_eff=" << harness::fmt(r.aggregate->c_av_eff)
              << " bits/s/Hz, p_av_ot=" << harness::fmt(r.aggregate->p_av_ot) << '\n';
}

int cmd_bounds(const CommonArgs& a) {
    const auto cfg = resolve(a);
    const auto e = cfg.env_config(0);
    const auto b = beamform::spectral_bounds(e.link_budget());
    std::cout << "path loss BS-UE: " << harness::fmt(linear_to_db(e.eta_bs_ue)) << " dB\n"
              << "path loss jammer-UE: " << harness::fmt(linear_to_db(e.eta_jammer_ue.front())) << " dB\n"
              << "noise power: " << harness::fmt(harness::watts_to_dbm(e.noise_var)) << " dBm\n"
              << "C_lb=" << harness::fmt(b.c_lb) << " C_ub=" << harness::fmt(b.c_ub)
              << " C_wbf=" << harness::fmt(b.c_wbf) << " bits/s/Hz\n";
    return 0;
}

int cmd_simulate(const CommonArgs& a) {
    const auto cfg = resolve(a);
    const std::string policy = cfg.policy == "fixed" ? "fixed-1" : cfg.policy;
    const auto recs = harness::run_evaluation(cfg, policy);
    harness::emit_csv(recs.front(), out_file(cfg, "frames_" + recs.front().label + ".csv"), cfg.delta_min_db);
    print_metrics(recs.front());
    return 0;
}

int cmd_train(const CommonArgs& a) {
    const auto cfg = resolve(a);
    harness::TrainingOptions opt;
    opt.checkpoint_dir = cfg.out_dir;
    const auto rec = harness::run_training(cfg, opt);
    harness::emit_csv(rec, out_file(cfg, "training.csv"), cfg.delta_min_db);
    std::cout << "trained " << rec.training.size() << " iterations; checkpoint "
              << out_file(cfg, "checkpoint.txt") << '\n';
    if (rec.convergence_iterations) std::cout << "convergence after " << *rec.convergence_iterations << " iterations\n";
    return 0;
}

int cmd_evaluate(const CommonArgs& a) {
    auto cfg = resolve(a);
    const std::string trained = out_file(cfg, "checkpoint.txt");
    if (cfg.checkpoint.empty() && fs::exists(trained)) cfg.checkpoint = trained;
    std::vector<std::string> names{cfg.policy};
    if (cfg.policy == "all") names = {"upper-bound", "learned", "heuristic", "fixed"};
    std::ofstream summary = harness::open_csv(out_file(cfg, "evaluation.csv"));
    summary << "policy,c_av_eff,p_av_ot\n";
    for (const auto& n : names) {
        for (const auto& r : harness::run_evaluation(cfg, n)) {
            if (!r.frames.empty())
                harness::emit_csv(r, out_file(cfg, "frames_" + r.label + ".csv"), cfg.delta_min_db);
            summary << r.label << ',' << harness::fmt(r.aggregate->c_av_eff) << ','
                    << harness::fmt(r.aggregate->p_av_ot) << '\n';
            print_metrics(r);
        }
    }
    return 0;
}

int cmd_sweep(const CommonArgs& a) {
    const auto cfg = resolve(a);
    harness::SweepOptions opt;
    if (!a.policy.empty() && a.policy != "all") opt.policies = {a.policy};
    opt.frames = cfg.frames;
    opt.iterations = cfg.iterations;
    opt.threads = cfg.threads;
    const auto rows = harness::run_sweep(cfg, opt);
    std::ofstream out = harness::open_csv(out_file(cfg, "sweep.csv"));
    harness::write_sweep(out, rows);
    harness::write_sweep(std::cout, rows);
    return 0;
}

int cmd_switch(const CommonArgs& a) {
    auto cfg = resolve(a);
    if (!cfg.switch_iteration) cfg.switch_iteration = cfg.iterations / 2;
    const auto rec = harness::run_strategy_switch(cfg);
    harness::emit_csv(rec, out_file(cfg, "switch.csv"), cfg.delta_min_db);
    auto show = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string("none"); };
    std::cout << "switch at iteration " << *cfg.switch_iteration << "; convergence "
              << show(rec.convergence_iterations) << ", reconvergence " << show(rec.reconvergence_iterations) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MU-MIMO jamming-nullification simulator and dueling DQN agent"};
    app.require_subcommand(1);
    CommonArgs args;
    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const CommonArgs&);
    };
    const Sub subs[] = {
        {"bounds", "Print the closed-form spectral-efficiency bounds", cmd_bounds},
        {"simulate", "Roll out one policy and write per-frame CSV", cmd_simulate},
        {"train", "Train the agent, writing checkpoints and training CSV", cmd_train},
        {"evaluate", "Evaluate one policy or all of them", cmd_evaluate},
        {"sweep", "Jamming-power grid times policies", cmd_sweep},
        {"switch", "Strategy-switch training experiment", cmd_switch},
    };
    int (*chosen)(const CommonArgs&) = nullptr;
    for (const auto& s : subs) {
        CLI::App* cmd = app.add_subcommand(s.name, s.help);
        add_common(cmd, args);
        cmd->callback([&chosen, run = s.run] { chosen = run; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        return chosen(args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const CheckpointError& e) {
        std::cerr << "checkpoint error: " << e.what() << '\n';
        return 2;
    } catch (const NumericInputError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const IllConditionedError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const NotPsdError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const ScheduleError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
