#include "eef/experiment.hpp"

#include "eef/errors.hpp"
#include "eef/io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

namespace eef {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

ExperimentConfig::ExperimentConfig() {
    for (auto kind : {ModelKind::mlp, ModelKind::cnn, ModelKind::lstm}) {
        ModelSpec spec;
        spec.kind = kind;
        models[kind] = spec;
    }
}

ModelSpec ExperimentConfig::model_spec(ModelKind kind) const {
    ModelSpec spec = models.at(kind);
    spec.window_len = window_len;
    return spec;
}

namespace {

const char* observable_name(Observable o) {
    return o == Observable::position ? "position" : "velocity";
}

Observable parse_observable(const std::string& name) {
    if (name == "position" || name == "x") return Observable::position;
    if (name == "velocity" || name == "v") return Observable::velocity;
    throw UsageError("unknown peak observable '" + name + "'");
}

json hashed_part(const ExperimentConfig& cfg) {
    json j = to_json(cfg);
    j.erase("seeds");
    j.erase("jobs");
    j.erase("out_dir");
    return j;
}

} // namespace

std::string ExperimentConfig::hash() const { return hex64(fnv1a64(hashed_part(*this).dump())); }

json to_json(const ExperimentConfig& c) {
    json models = json::object();
    for (const auto& [kind, spec] : c.models) {
        json s = to_json(spec);
        s.erase("window_len");
        models[to_string(kind)] = s;
    }
    json pairs = json::array();
    for (const auto& [a, b] : c.param_switch_pairs) pairs.push_back({a, b});
    return {
        {"system",
         {{"lambda", c.system.lambda},
          {"omega0_sq", c.system.omega0_sq},
          {"Omega0_sq", c.system.Omega0_sq},
          {"omega_p", c.system.omega_p},
          {"alpha_damp", c.system.alpha_damp}}},
        {"epsilons", c.epsilons},
        {"extreme_epsilons", c.extreme_epsilons},
        {"integrator",
         {{"dt", c.integrator.dt},
          {"sample_interval", c.integrator.sample_interval},
          {"transient", c.integrator.transient},
          {"x0", c.integrator.x0},
          {"v0", c.integrator.v0},
          {"peak_observable", observable_name(c.integrator.peak_observable)}}},
        {"split", {{"n_train", c.n_train}, {"n_test", c.n_test}}},
        {"scaler", {{"lo", c.scale_lo}, {"hi", c.scale_hi}}},
        {"window_len", c.window_len},
        {"models", models},
        {"train",
         {{"epochs", c.train.epochs},
          {"batch_size", c.train.batch_size},
          {"shuffle", c.train.shuffle},
          {"lr", c.train.adam.lr},
          {"beta1", c.train.adam.beta1},
          {"beta2", c.train.adam.beta2},
          {"eps_stab", c.train.adam.eps_stab}}},
        {"forecast", {{"feedback", to_string(c.feedback)}, {"event_window", c.event_window}}},
        {"param_switch", {{"pairs", pairs}, {"parameter_scaling", "raw"}}},
        {"ablate",
         {{"epsilons", c.ablate.epsilons},
          {"mlp_neurons", c.ablate.mlp_neurons},
          {"cnn_filters", c.ablate.cnn_filters},
          {"cnn_window", c.ablate.cnn_window},
          {"cnn_kernel", c.ablate.cnn_kernel},
          {"lstm_units_1layer", c.ablate.lstm_units_1layer},
          {"lstm_units_2layer", c.ablate.lstm_units_2layer},
          {"lstm_first_layer", c.ablate.lstm_first_layer},
          {"data_sizes", c.ablate.data_sizes},
          {"horizons", c.ablate.horizons}}},
        {"seeds", c.seeds},
        {"jobs", c.jobs},
        {"out_dir", c.out_dir.string()},
    };
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    auto section = [&j](const char* name) { return j.contains(name) ? j.at(name) : json::object(); };
    try {
        const json sys = section("system");
        c.system.lambda = sys.value("lambda", c.system.lambda);
        c.system.omega0_sq = sys.value("omega0_sq", c.system.omega0_sq);
        c.system.Omega0_sq = sys.value("Omega0_sq", c.system.Omega0_sq);
        c.system.omega_p = sys.value("omega_p", c.system.omega_p);
        c.system.alpha_damp = sys.value("alpha_damp", c.system.alpha_damp);
        c.epsilons = j.value("epsilons", c.epsilons);
        c.extreme_epsilons = j.value("extreme_epsilons", c.extreme_epsilons);

        const json integ = section("integrator");
        c.integrator.dt = integ.value("dt", c.integrator.dt);
        c.integrator.sample_interval = integ.value("sample_interval", c.integrator.sample_interval);
        c.integrator.transient = integ.value("transient", c.integrator.transient);
        c.integrator.x0 = integ.value("x0", c.integrator.x0);
        c.integrator.v0 = integ.value("v0", c.integrator.v0);
        if (integ.contains("peak_observable")) {
            c.integrator.peak_observable = parse_observable(integ["peak_observable"].get<std::string>());
        }

        const json sp = section("split");
        c.n_train = sp.value("n_train", c.n_train);
        c.n_test = sp.value("n_test", c.n_test);
        const json sc = section("scaler");
        c.scale_lo = sc.value("lo", c.scale_lo);
        c.scale_hi = sc.value("hi", c.scale_hi);
        c.window_len = j.value("window_len", c.window_len);

        const json models = section("models");
        for (auto& [kind, spec] : c.models) {
            const auto name = to_string(kind);
            if (models.contains(name)) {
                spec = model_spec_from_json(models[name], spec);
                spec.kind = kind;
            }
        }

        const json tr = section("train");
        c.train.epochs = tr.value("epochs", c.train.epochs);
        c.train.batch_size = tr.value("batch_size", c.train.batch_size);
        c.train.shuffle = tr.value("shuffle", c.train.shuffle);
        c.train.adam.lr = tr.value("lr", c.train.adam.lr);
        c.train.adam.beta1 = tr.value("beta1", c.train.adam.beta1);
        c.train.adam.beta2 = tr.value("beta2", c.train.adam.beta2);
        c.train.adam.eps_stab = tr.value("eps_stab", c.train.adam.eps_stab);

        const json fc = section("forecast");
        if (fc.contains("feedback")) c.feedback = parse_feedback(fc["feedback"].get<std::string>());
        c.event_window = fc.value("event_window", c.event_window);

        const json ps = section("param_switch");
        if (ps.contains("pairs")) {
            c.param_switch_pairs.clear();
            for (const auto& p : ps["pairs"]) {
                c.param_switch_pairs.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
            }
        }

        const json ab = section("ablate");
        auto& a = c.ablate;
        a.epsilons = ab.value("epsilons", a.epsilons);
        a.mlp_neurons = ab.value("mlp_neurons", a.mlp_neurons);
        a.cnn_filters = ab.value("cnn_filters", a.cnn_filters);
        a.cnn_window = ab.value("cnn_window", a.cnn_window);
        a.cnn_kernel = ab.value("cnn_kernel", a.cnn_kernel);
        a.lstm_units_1layer = ab.value("lstm_units_1layer", a.lstm_units_1layer);
        a.lstm_units_2layer = ab.value("lstm_units_2layer", a.lstm_units_2layer);
        a.lstm_first_layer = ab.value("lstm_first_layer", a.lstm_first_layer);
        a.data_sizes = ab.value("data_sizes", a.data_sizes);
        a.horizons = ab.value("horizons", a.horizons);

        c.seeds = j.value("seeds", c.seeds);
        c.jobs = j.value("jobs", c.jobs);
        if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    } catch (const json::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    if (c.seeds.empty()) throw UsageError("config: at least one seed is required");
    if (c.epsilons.empty()) throw UsageError("config: at least one epsilon is required");
    c.train.validate();
    return c;
}

ExperimentConfig load_config(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw UsageError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Simulation and single runs
// ---------------------------------------------------------------------------

std::string epsilon_tag(double epsilon) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", epsilon);
    return buf;
}

double median(std::vector<double> values) {
    if (values.empty()) throw DomainError("median: empty input");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

RegimeData simulate_regime(const ExperimentConfig& cfg, double epsilon) {
    SystemParams params = cfg.system;
    params.epsilon = epsilon;
    const auto& in = cfg.integrator;
    const std::size_t n_samples = cfg.n_train + cfg.n_test;
    const double t_end = in.transient + static_cast<double>(n_samples) * in.sample_interval;

    RegimeData r;
    r.epsilon = epsilon;
    r.trajectory = integrate(params, {in.x0, in.v0, 0.0}, t_end, in.dt, in.sample_interval,
                             in.transient);
    r.series = r.trajectory.positions();
    r.split = split(r.series, cfg.n_train, cfg.n_test);
    r.scaler = fit_scaler(r.split.train, cfg.scale_lo, cfg.scale_hi);

    auto peaks = detect_peaks(r.trajectory, in.peak_observable);
    const double train_end = r.trajectory.samples[cfg.n_train - 1].t;
    std::vector<Peak> train_peaks;
    for (const auto& p : peaks) {
        if (p.t <= train_end) train_peaks.push_back(p);
    }
    r.full_stats = peak_statistics(std::move(peaks));
    r.train_stats = peak_statistics(std::move(train_peaks));
    r.extreme_count = classify_extremes(r.full_stats.peaks, r.full_stats.threshold).count;
    r.test_t0 = r.trajectory.samples[cfg.n_train].t;

    r.trajectory.fine_x.clear();
    r.trajectory.fine_x.shrink_to_fit();
    r.trajectory.fine_v.clear();
    r.trajectory.fine_v.shrink_to_fit();
    return r;
}

RunResult train_and_forecast(const ExperimentConfig& cfg, const ModelSpec& spec_in,
                             const RegimeData& train_regime, const RegimeData& test_regime,
                             std::uint64_t seed, std::size_t n_train_override,
                             bool parameter_conditioned) {
    ModelSpec spec = spec_in;
    spec.num_features = parameter_conditioned ? 2 : 1;

    std::span<const double> train_series = train_regime.split.train;
    if (n_train_override > 0) {
        if (n_train_override > train_series.size()) {
            throw DomainError("training size " + std::to_string(n_train_override) +
                              " exceeds the " + std::to_string(train_series.size()) +
                              "-sample training split");
        }
        train_series = train_series.last(n_train_override);
    }
    const MinMaxScaler scaler = fit_scaler(train_series, cfg.scale_lo, cfg.scale_hi);
    SupervisedDataset ds = frame_supervised(scaler.transform(train_series), spec.window_len,
                                            spec.horizon);
    if (parameter_conditioned) ds = augment_with_parameter(ds, train_regime.epsilon);

    RunResult result;
    result.model = spec.kind;
    result.epsilon = test_regime.epsilon;
    result.seed = seed;
    result.spec = spec;

    Network net = make_model(spec, seed);
    TrainConfig tc = cfg.train;
    tc.seed = seed;
    result.loss_history = train(net, ds, tc);

    ForecastSetup setup;
    setup.history = scaler.transform(test_regime.split.train);
    setup.actual = test_regime.split.test;
    setup.scaler = scaler;
    setup.window_len = spec.window_len;
    setup.num_features = spec.num_features;
    if (parameter_conditioned) setup.parameter = test_regime.epsilon;
    setup.t_start = test_regime.test_t0;
    setup.sample_interval = cfg.integrator.sample_interval;
    setup.event_threshold = test_regime.train_stats.threshold;

    const auto model = as_window_model(net);
    result.report = spec.horizon == 1
                        ? walk_forward(model, setup, cfg.n_test, cfg.feedback)
                        : multi_step_forecast(model, setup, spec.horizon, cfg.n_test);
    result.report.seed = seed;
    result.threshold = test_regime.train_stats.threshold;
    result.events = event_outcomes(result.report, result.threshold, cfg.event_window);
    return result;
}

// ---------------------------------------------------------------------------
// Command plumbing
// ---------------------------------------------------------------------------

namespace {

std::size_t worker_count(const ExperimentConfig& cfg, std::size_t n_jobs) {
    std::size_t w = cfg.jobs ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(w, n_jobs));
}

/// Runs fn(i) for i in [0, n) on a small pool. Exceptions are captured per index.
std::vector<std::optional<std::string>> parallel_for(std::size_t n, std::size_t workers,
                                                     const std::function<void(std::size_t)>& fn) {
    std::vector<std::optional<std::string>> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    if (workers <= 1) {
        work();
        return errors;
    }
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    pool.clear();
    return errors;
}

/// Simulates every distinct epsilon once.
std::map<double, RegimeData> simulate_all(const ExperimentConfig& cfg,
                                          const std::vector<double>& epsilons) {
    std::vector<double> unique(epsilons);
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    std::vector<std::optional<RegimeData>> data(unique.size());
    auto errors = parallel_for(unique.size(), worker_count(cfg, unique.size()),
                               [&](std::size_t i) { data[i] = simulate_regime(cfg, unique[i]); });
    std::map<double, RegimeData> out;
    for (std::size_t i = 0; i < unique.size(); ++i) {
        if (errors[i]) {
            throw std::runtime_error("regime eps=" + epsilon_tag(unique[i]) + ": " + *errors[i]);
        }
        out.emplace(unique[i], std::move(*data[i]));
    }
    return out;
}

class OutputWriter {
public:
    OutputWriter(fs::path dir, CommandResult& result) : dir_(std::move(dir)), result_(result) {}

    const fs::path& dir() const { return dir_; }

    void write(const fs::path& relative, std::string_view contents) {
        write_file_atomic(dir_ / relative, contents);
        result_.files.push_back(dir_ / relative);
        names_.push_back(relative.generic_string());
    }

    void write_json(const fs::path& relative, const json& j) { write(relative, j.dump(2) + "\n"); }

    void write_manifest(const ExperimentConfig& cfg, const std::string& command) {
        json manifest{{"command", command},
                      {"config_hash", cfg.hash()},
                      {"seeds", cfg.seeds},
                      {"config", hashed_part(cfg)},
                      {"files", names_},
                      {"failures", result_.failures}};
        write_file_atomic(dir_ / "manifest.json", manifest.dump(2) + "\n");
        result_.files.push_back(dir_ / "manifest.json");
    }

private:
    fs::path dir_;
    CommandResult& result_;
    std::vector<std::string> names_;
};

std::string text_csv(const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

std::string seed_list(const std::vector<std::uint64_t>& seeds) {
    std::string s;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(seeds[i]);
    }
    return s;
}

std::string scatter_csv(const ForecastReport& r) {
    CsvTable table{{"actual", "predicted"}, {}};
    for (std::size_t i = 0; i < r.predicted.size(); ++i) table.rows.push_back({r.actual[i], r.predicted[i]});
    return to_csv(table);
}

json run_json(const ExperimentConfig& cfg, const std::string& command, const RunResult& r) {
    json j = report_json(r.report);
    j["config_hash"] = cfg.hash();
    j["command"] = command;
    j["model"] = to_string(r.model);
    j["epsilon"] = r.epsilon;
    j["model_spec"] = to_json(r.spec);
    j["parameter_count"] = make_model(r.spec, 0).parameter_count();
    j["threshold"] = r.threshold;
    j["event_outcomes"] = {{"hits", r.events.hits},
                           {"misses", r.events.misses},
                           {"false_alarms", r.events.false_alarms},
                           {"window", cfg.event_window}};
    j["train"] = {{"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"final_loss", r.loss_history.empty() ? 0.0 : r.loss_history.back()},
                  {"loss_history", r.loss_history}};
    return j;
}

/// Index (into `rmses`) of the run whose RMSE is the (lower) median.
std::size_t median_index(const std::vector<double>& rmses) {
    std::vector<std::size_t> idx(rmses.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return rmses[a] < rmses[b]; });
    return idx[(idx.size() - 1) / 2];
}

std::string timing_line(const std::string& label, double seconds) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), " %.2fs\n", seconds);
    return label + buf;
}

} // namespace

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

CommandResult cmd_simulate(const ExperimentConfig& cfg) {
    CommandResult result;
    OutputWriter out(cfg.out_dir / "simulate", result);
    json regimes = json::array();
    std::vector<double> eps = cfg.epsilons;
    std::vector<std::optional<RegimeData>> data(eps.size());
    auto errors = parallel_for(eps.size(), worker_count(cfg, eps.size()),
                               [&](std::size_t i) { data[i] = simulate_regime(cfg, eps[i]); });
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (errors[i]) {
            result.failures.push_back("simulate eps=" + epsilon_tag(eps[i]) + ": " + *errors[i]);
            continue;
        }
        const RegimeData& r = *data[i];
        out.write("trajectory_eps" + epsilon_tag(r.epsilon) + ".csv", trajectory_csv(r.trajectory));
        const auto train_events = classify_extremes(
            std::span(r.full_stats.peaks).first(r.train_stats.peaks.size()), r.full_stats.threshold);
        regimes.push_back({{"epsilon", r.epsilon},
                           {"mean_peak", r.full_stats.mean_peak},
                           {"std_peak", r.full_stats.std_peak},
                           {"threshold", r.full_stats.threshold},
                           {"peak_count", r.full_stats.peaks.size()},
                           {"extreme_count", r.extreme_count},
                           {"extreme_count_train", train_events.count},
                           {"extreme_count_test", r.extreme_count - train_events.count},
                           {"train_threshold", r.train_stats.threshold},
                           {"samples", r.series.size()}});
    }
    result.summary = {{"config_hash", cfg.hash()},
                      {"peak_observable", observable_name(cfg.integrator.peak_observable)},
                      {"regimes", regimes}};
    out.write_json("summary.json", result.summary);
    out.write_manifest(cfg, "simulate");
    return result;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

CommandResult cmd_run(const ExperimentConfig& cfg) {
    CommandResult result;
    OutputWriter out(cfg.out_dir / "run", result);
    const auto regimes = simulate_all(cfg, cfg.epsilons);

    struct Job {
        ModelKind model;
        double epsilon;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (auto kind : {ModelKind::mlp, ModelKind::cnn, ModelKind::lstm}) {
        for (double e : cfg.epsilons) {
            for (auto s : cfg.seeds) jobs.push_back({kind, e, s});
        }
    }
    std::vector<std::optional<RunResult>> results(jobs.size());
    auto errors = parallel_for(jobs.size(), worker_count(cfg, jobs.size()), [&](std::size_t i) {
        const auto& job = jobs[i];
        const auto& regime = regimes.at(job.epsilon);
        results[i] = train_and_forecast(cfg, cfg.model_spec(job.model), regime, regime, job.seed);
    });

    std::string timings;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& job = jobs[i];
        const std::string stem =
            to_string(job.model) + "_eps" + epsilon_tag(job.epsilon) + "_seed" + std::to_string(job.seed);
        if (errors[i]) {
            result.failures.push_back(stem + ": " + *errors[i]);
            continue;
        }
        out.write_json("reports/" + stem + ".json", run_json(cfg, "run", *results[i]));
        out.write("reports/" + stem + ".csv", report_csv(results[i]->report));
        timings += timing_line(stem, results[i]->report.wall_time_s);
    }

    std::vector<std::vector<std::string>> bar_rows;
    json matrix = json::array();
    for (auto kind : {ModelKind::mlp, ModelKind::cnn, ModelKind::lstm}) {
        for (double e : cfg.epsilons) {
            std::vector<double> rmses;
            std::vector<std::uint64_t> seeds;
            std::vector<const RunResult*> runs;
            for (std::size_t i = 0; i < jobs.size(); ++i) {
                if (jobs[i].model == kind && jobs[i].epsilon == e && results[i]) {
                    rmses.push_back(results[i]->report.rmse);
                    seeds.push_back(jobs[i].seed);
                    runs.push_back(&*results[i]);
                }
            }
            if (rmses.empty()) continue;
            const double med = median(rmses);
            bar_rows.push_back({to_string(kind), epsilon_tag(e), format_double(med),
                                std::to_string(rmses.size()), seed_list(seeds)});
            matrix.push_back({{"model", to_string(kind)}, {"epsilon", e}, {"median_rmse", med},
                              {"seeds", seeds}});
            const auto* rep = runs[median_index(rmses)];
            out.write("scatter_" + to_string(kind) + "_eps" + epsilon_tag(e) + ".csv",
                      scatter_csv(rep->report));
        }
    }
    out.write("rmse_bars.csv",
              text_csv({"model", "epsilon", "median_rmse", "n_seeds", "seeds"}, bar_rows));
    result.summary = {{"config_hash", cfg.hash()}, {"rmse", matrix}, {"failures", result.failures}};
    out.write_manifest(cfg, "run");
    // Wall times vary between runs, so they stay out of the CSV/JSON outputs.
    write_file_atomic(out.dir() / "timings.txt", timings);
    return result;
}

// ---------------------------------------------------------------------------
// param-switch
// ---------------------------------------------------------------------------

CommandResult cmd_param_switch(const ExperimentConfig& cfg) {
    CommandResult result;
    OutputWriter out(cfg.out_dir / "param_switch", result);
    if (cfg.param_switch_pairs.empty()) throw UsageError("param-switch: no (train, test) pairs configured");
    std::vector<double> eps;
    for (const auto& [a, b] : cfg.param_switch_pairs) {
        eps.push_back(a);
        eps.push_back(b);
    }
    const auto regimes = simulate_all(cfg, eps);

    struct Job {
        double train_eps;
        double test_eps;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& [a, b] : cfg.param_switch_pairs) {
        for (auto s : cfg.seeds) jobs.push_back({a, b, s});
    }
    std::vector<std::optional<RunResult>> results(jobs.size());
    auto errors = parallel_for(jobs.size(), worker_count(cfg, jobs.size()), [&](std::size_t i) {
        const auto& job = jobs[i];
        results[i] = train_and_forecast(cfg, cfg.model_spec(ModelKind::lstm),
                                        regimes.at(job.train_eps), regimes.at(job.test_eps),
                                        job.seed, 0, true);
    });

    std::vector<std::vector<std::string>> rows;
    json pairs = json::array();
    for (const auto& [a, b] : cfg.param_switch_pairs) {
        const std::string tag = "eps" + epsilon_tag(a) + "_to_eps" + epsilon_tag(b);
        std::vector<double> rmses, rs;
        std::vector<std::uint64_t> seeds;
        std::vector<const RunResult*> runs;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (jobs[i].train_eps != a || jobs[i].test_eps != b) continue;
            const std::string stem = "lstm_param_" + tag + "_seed" + std::to_string(jobs[i].seed);
            if (errors[i]) {
                result.failures.push_back(stem + ": " + *errors[i]);
                continue;
            }
            const auto& r = *results[i];
            json j = run_json(cfg, "param-switch", r);
            j["train_epsilon"] = a;
            j["test_epsilon"] = b;
            j["parameter_feature"] = "raw";
            j["pearson_r"] = pearson(r.report.actual, r.report.predicted);
            out.write_json("reports/" + stem + ".json", j);
            out.write("reports/" + stem + ".csv", report_csv(r.report));
            rmses.push_back(r.report.rmse);
            rs.push_back(j["pearson_r"].get<double>());
            seeds.push_back(jobs[i].seed);
            runs.push_back(&r);
        }
        if (rmses.empty()) continue;
        const auto* rep = runs[median_index(rmses)];
        out.write("timeseries_" + tag + ".csv", report_csv(rep->report));
        out.write("scatter_" + tag + ".csv", scatter_csv(rep->report));
        rows.push_back({epsilon_tag(a), epsilon_tag(b), format_double(median(rmses)),
                        format_double(median(rs)), std::to_string(rmses.size()), seed_list(seeds)});
        pairs.push_back({{"train_epsilon", a},
                         {"test_epsilon", b},
                         {"median_rmse", median(rmses)},
                         {"median_pearson_r", median(rs)},
                         {"seeds", seeds}});
    }
    out.write("summary.csv", text_csv({"train_epsilon", "test_epsilon", "median_rmse",
                                       "median_pearson_r", "n_seeds", "seeds"},
                                      rows));
    result.summary = {{"config_hash", cfg.hash()}, {"pairs", pairs}, {"failures", result.failures}};
    out.write_manifest(cfg, "param-switch");
    return result;
}

// ---------------------------------------------------------------------------
// ablate
// ---------------------------------------------------------------------------

const std::vector<std::string>& ablation_axes() {
    static const std::vector<std::string> axes{"mlp_neurons",       "cnn_filters",
                                               "lstm_units_1layer", "lstm_units_2layer",
                                               "data_size",         "multi_step"};
    return axes;
}

CommandResult cmd_ablate(const ExperimentConfig& cfg, const std::string& axis) {
    const auto& axes = ablation_axes();
    if (std::find(axes.begin(), axes.end(), axis) == axes.end()) {
        std::string known;
        for (const auto& a : axes) known += (known.empty() ? "" : ", ") + a;
        throw UsageError("unknown ablation axis '" + axis + "' (expected one of: " + known + ")");
    }

    struct Point {
        std::size_t value;
        ModelSpec spec;
        std::size_t n_train = 0;
    };
    std::vector<Point> points;
    const auto& a = cfg.ablate;
    if (axis == "mlp_neurons") {
        for (auto v : a.mlp_neurons) {
            ModelSpec s = cfg.model_spec(ModelKind::mlp);
            s.mlp_hidden = {s.mlp_hidden.empty() ? 8 : s.mlp_hidden.front(), v};
            points.push_back({v, s});
        }
    } else if (axis == "cnn_filters") {
        for (auto v : a.cnn_filters) {
            ModelSpec s = cfg.model_spec(ModelKind::cnn);
            s.window_len = a.cnn_window;
            s.cnn_kernel = a.cnn_kernel;
            s.cnn_filters = v;
            points.push_back({v, s});
        }
    } else if (axis == "lstm_units_1layer") {
        for (auto v : a.lstm_units_1layer) {
            ModelSpec s = cfg.model_spec(ModelKind::lstm);
            s.lstm_units = {v};
            points.push_back({v, s});
        }
    } else if (axis == "lstm_units_2layer") {
        for (auto v : a.lstm_units_2layer) {
            ModelSpec s = cfg.model_spec(ModelKind::lstm);
            s.lstm_units = {a.lstm_first_layer, v};
            points.push_back({v, s});
        }
    } else if (axis == "data_size") {
        for (auto v : a.data_sizes) {
            for (auto kind : {ModelKind::mlp, ModelKind::cnn, ModelKind::lstm}) {
                points.push_back({v, cfg.model_spec(kind), v});
            }
        }
    } else {
        for (auto v : a.horizons) {
            for (auto kind : {ModelKind::mlp, ModelKind::cnn, ModelKind::lstm}) {
                ModelSpec s = cfg.model_spec(kind);
                s.horizon = v;
                points.push_back({v, s});
            }
        }
    }
    for (const auto& p : points) p.spec.validate();

    CommandResult result;
    OutputWriter out(cfg.out_dir / "ablate", result);
    const auto regimes = simulate_all(cfg, a.epsilons);

    struct Job {
        std::size_t point;
        double epsilon;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (std::size_t p = 0; p < points.size(); ++p) {
        for (double e : a.epsilons) {
            for (auto s : cfg.seeds) jobs.push_back({p, e, s});
        }
    }
    std::vector<std::optional<RunResult>> results(jobs.size());
    auto errors = parallel_for(jobs.size(), worker_count(cfg, jobs.size()), [&](std::size_t i) {
        const auto& job = jobs[i];
        const auto& point = points[job.point];
        const auto& regime = regimes.at(job.epsilon);
        results[i] = train_and_forecast(cfg, point.spec, regime, regime, job.seed, point.n_train);
    });

    std::vector<std::vector<std::string>> rows, run_rows;
    json sweep = json::array();
    for (std::size_t p = 0; p < points.size(); ++p) {
        for (double e : a.epsilons) {
            std::vector<double> rmses;
            std::vector<std::uint64_t> seeds;
            for (std::size_t i = 0; i < jobs.size(); ++i) {
                if (jobs[i].point != p || jobs[i].epsilon != e) continue;
                const std::string label = axis + "=" + std::to_string(points[p].value) + " " +
                                          to_string(points[p].spec.kind) + " eps=" +
                                          epsilon_tag(e) + " seed=" + std::to_string(jobs[i].seed);
                if (errors[i]) {
                    result.failures.push_back(label + ": " + *errors[i]);
                    continue;
                }
                rmses.push_back(results[i]->report.rmse);
                seeds.push_back(jobs[i].seed);
                run_rows.push_back({std::to_string(points[p].value), to_string(points[p].spec.kind),
                                    epsilon_tag(e), std::to_string(jobs[i].seed),
                                    format_double(results[i]->report.rmse)});
            }
            if (rmses.empty()) continue;
            const double med = median(rmses);
            rows.push_back({std::to_string(points[p].value), to_string(points[p].spec.kind),
                            epsilon_tag(e), format_double(med), std::to_string(rmses.size()),
                            seed_list(seeds)});
            sweep.push_back({{"axis_value", points[p].value},
                             {"model", to_string(points[p].spec.kind)},
                             {"epsilon", e},
                             {"median_rmse", med},
                             {"seeds", seeds}});
        }
    }
    out.write(axis + ".csv", text_csv({"axis_value", "model", "epsilon", "median_rmse", "n_seeds",
                                       "seeds"},
                                      rows));
    out.write(axis + "_runs.csv",
              text_csv({"axis_value", "model", "epsilon", "seed", "rmse"}, run_rows));
    result.summary = {{"config_hash", cfg.hash()}, {"axis", axis}, {"sweep", sweep},
                      {"failures", result.failures}};
    out.write_manifest(cfg, "ablate " + axis);
    return result;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

namespace {

// Soft plausibility bands for default-architecture MLP/CNN runs: a factor of
// two around RMSE ≈ 4.1–4.6 (extreme regimes) and ≈ 0.35 (non-extreme).
constexpr double kExtremeBandLo = 4.1 / 2.0;
constexpr double kExtremeBandHi = 4.6 * 2.0;
constexpr double kCalmBandLo = 0.35 / 2.0;
constexpr double kCalmBandHi = 0.35 * 2.0;

} // namespace

CommandResult cmd_report(const fs::path& run_dir) {
    const fs::path reports = run_dir / "reports";
    if (!fs::is_directory(reports)) throw UsageError("report: no reports/ directory in " + run_dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(reports)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    if (files.empty()) throw UsageError("report: " + reports.string() + " contains no reports");
    std::sort(files.begin(), files.end());

    std::vector<std::uint64_t> expected_seeds;
    std::vector<double> extreme_eps{0.081, 0.112};
    if (fs::exists(run_dir / "manifest.json")) {
        const json manifest = json::parse(read_file(run_dir / "manifest.json"));
        expected_seeds = manifest.value("seeds", expected_seeds);
        if (manifest.contains("config")) {
            extreme_eps = manifest["config"].value("extreme_epsilons", extreme_eps);
        }
    }

    struct Cell {
        std::map<std::uint64_t, double> rmse;
        EventOutcome events;
    };
    std::map<std::string, std::map<double, Cell>> cells;
    std::set<std::string> hashes;
    for (const auto& f : files) {
        const json j = json::parse(read_file(f));
        const auto model = j.at("model").get<std::string>();
        const double eps = j.at("epsilon").get<double>();
        Cell& cell = cells[model][eps];
        cell.rmse[j.at("seed").get<std::uint64_t>()] = j.at("rmse").get<double>();
        if (j.contains("event_outcomes")) {
            cell.events.hits += j["event_outcomes"].value("hits", std::size_t{0});
            cell.events.misses += j["event_outcomes"].value("misses", std::size_t{0});
            cell.events.false_alarms += j["event_outcomes"].value("false_alarms", std::size_t{0});
        }
        hashes.insert(j.value("config_hash", std::string("unknown")));
    }

    json matrix = json::array();
    std::map<double, std::map<std::string, double>> medians;
    std::vector<std::string> notes;
    for (const auto& [model, by_eps] : cells) {
        for (const auto& [eps, cell] : by_eps) {
            std::vector<double> values;
            json per_seed = json::object();
            for (const auto& [seed, r] : cell.rmse) {
                values.push_back(r);
                per_seed[std::to_string(seed)] = r;
            }
            std::vector<std::uint64_t> missing;
            for (auto s : expected_seeds) {
                if (!cell.rmse.count(s)) missing.push_back(s);
            }
            const double med = median(values);
            medians[eps][model] = med;
            matrix.push_back({{"model", model},
                              {"epsilon", eps},
                              {"median_rmse", med},
                              {"rmse_by_seed", per_seed},
                              {"missing_seeds", missing},
                              {"hits", cell.events.hits},
                              {"misses", cell.events.misses},
                              {"false_alarms", cell.events.false_alarms}});
            if (model == "mlp" || model == "cnn") {
                const bool extreme =
                    std::find(extreme_eps.begin(), extreme_eps.end(), eps) != extreme_eps.end();
                const double lo = extreme ? kExtremeBandLo : kCalmBandLo;
                const double hi = extreme ? kExtremeBandHi : kCalmBandHi;
                if (med < lo || med > hi) {
                    char buf[160];
                    std::snprintf(buf, sizeof(buf),
                                  ": median RMSE %.4g outside plausibility band [%.4g, %.4g]", med,
                                  lo, hi);
                    notes.push_back(model + " eps=" + epsilon_tag(eps) + buf);
                }
            }
        }
    }

    json ordering = json::array();
    for (const auto& [eps, by_model] : medians) {
        if (!by_model.count("mlp") || !by_model.count("cnn") || !by_model.count("lstm")) continue;
        const double m = by_model.at("mlp"), c = by_model.at("cnn"), l = by_model.at("lstm");
        std::vector<std::string> violations;
        if (l > c) violations.push_back("lstm > cnn");
        if (c > m) violations.push_back("cnn > mlp");
        if (l > m) violations.push_back("lstm > mlp");
        ordering.push_back({{"epsilon", eps},
                            {"expected", "lstm <= cnn <= mlp"},
                            {"holds", violations.empty()},
                            {"violations", violations}});
    }

    CommandResult result;
    result.summary = {{"config_hashes", std::vector<std::string>(hashes.begin(), hashes.end())},
                      {"rmse_matrix", matrix},
                      {"ordering", ordering},
                      {"magnitude_notes", notes}};

    std::string table = "model  epsilon   median_rmse  seeds  hits  misses  false_alarms\n";
    for (const auto& row : matrix) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-6s %-9s %-12.6g %-6zu %-5zu %-7zu %zu\n",
                      row["model"].get<std::string>().c_str(),
                      epsilon_tag(row["epsilon"].get<double>()).c_str(),
                      row["median_rmse"].get<double>(), row["rmse_by_seed"].size(),
                      row["hits"].get<std::size_t>(), row["misses"].get<std::size_t>(),
                      row["false_alarms"].get<std::size_t>());
        table += buf;
        if (!row["missing_seeds"].empty()) table += "       missing seeds: " + row["missing_seeds"].dump() + "\n";
    }
    for (const auto& o : ordering) {
        if (!o["holds"].get<bool>()) {
            table += "ORDERING eps=" + epsilon_tag(o["epsilon"].get<double>()) +
                     ": expected lstm <= cnn <= mlp, violated (" + o["violations"].dump() + ")\n";
        }
    }
    for (const auto& n : notes) table += "NOTE " + n + "\n";
    result.summary["table"] = table;

    write_file_atomic(run_dir / "summary.json", result.summary.dump(2) + "\n");
    write_file_atomic(run_dir / "summary.txt", table);
    result.files = {run_dir / "summary.json", run_dir / "summary.txt"};
    return result;
}

} // namespace eef
