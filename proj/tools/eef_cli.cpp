#include "eef/errors.hpp"
#include "eef/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            seeds.push_back(std::stoull(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw eef::UsageError("--seeds: '" + item + "' is not a non-negative integer");
        }
    }
    if (seeds.empty()) throw eef::UsageError("--seeds: empty list");
    return seeds;
}

struct Common {
    std::string config;
    std::string out;
    std::string seeds;
    std::size_t jobs = 0;
    bool jobs_set = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "JSON experiment config (defaults when omitted)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output directory (default: out)");
    sub->add_option("--seeds", c.seeds, "comma-separated seeds, e.g. 1,2,3");
    sub->add_option("--jobs", c.jobs, "parallel runs (0 = all cores)");
}

eef::ExperimentConfig resolve(const Common& c, CLI::App* sub) {
    eef::ExperimentConfig cfg = c.config.empty() ? eef::ExperimentConfig{} : eef::load_config(c.config);
    if (!c.out.empty()) cfg.out_dir = c.out;
    if (!c.seeds.empty()) cfg.seeds = parse_seeds(c.seeds);
    if (sub->count("--jobs")) cfg.jobs = c.jobs;
    return cfg;
}

int finish(const eef::CommandResult& result) {
    for (const auto& f : result.files) std::cout << f.string() << "\n";
    if (result.summary.contains("table")) std::cout << result.summary["table"].get<std::string>();
    for (const auto& failure : result.failures) std::cerr << "eef: run failed: " << failure << "\n";
    return result.ok() ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extreme-event forecasting experiments for a parametrically driven oscillator"};
    app.require_subcommand(1);

    Common sim, run, ps, ab;
    std::string axis;
    std::string report_dir = "out/run";

    auto* s_sim = app.add_subcommand("simulate", "integrate every regime, write trajectories and peak statistics");
    add_common(s_sim, sim);
    auto* s_run = app.add_subcommand("run", "train and forecast every model x regime x seed");
    add_common(s_run, run);
    auto* s_ps = app.add_subcommand("param-switch", "parameter-conditioned LSTM across regimes");
    add_common(s_ps, ps);
    auto* s_ab = app.add_subcommand("ablate", "hyperparameter sweep along one axis");
    add_common(s_ab, ab);
    s_ab->add_option("--axis", axis, "sweep axis")
        ->required()
        ->check(CLI::IsMember(eef::ablation_axes()));
    auto* s_rep = app.add_subcommand("report", "aggregate reports of a run directory");
    s_rep->add_option("run_dir", report_dir, "directory holding reports/ (default: out/run)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*s_sim) return finish(eef::cmd_simulate(resolve(sim, s_sim)));
        if (*s_run) return finish(eef::cmd_run(resolve(run, s_run)));
        if (*s_ps) return finish(eef::cmd_param_switch(resolve(ps, s_ps)));
        if (*s_ab) return finish(eef::cmd_ablate(resolve(ab, s_ab), axis));
        if (*s_rep) return finish(eef::cmd_report(report_dir));
    } catch (const eef::UsageError& e) {
        std::cerr << "eef: " << e.what() << "\n";
        return 2;
    } catch (const eef::IntegrationError& e) {
        std::cerr << "eef: integration failed: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "eef: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
