#pragma once

#include "eef/dataset.hpp"
#include "eef/dynamics.hpp"
#include "eef/forecast.hpp"
#include "eef/models.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace eef {

struct IntegratorSettings {
    double dt = 0.01;
    double sample_interval = 1.0;
    double transient = 1000.0;
    double x0 = 0.1;
    double v0 = 0.1;
    Observable peak_observable = Observable::position;
};

struct AblationSettings {
    std::vector<double> epsilons{0.05, 0.081};
    std::vector<std::size_t> mlp_neurons{1, 2, 4, 8, 16, 32, 64};
    std::vector<std::size_t> cnn_filters{8, 16, 32, 64, 128};
    std::size_t cnn_window = 5;
    std::size_t cnn_kernel = 2;
    std::vector<std::size_t> lstm_units_1layer{8, 16, 32, 64};
    std::vector<std::size_t> lstm_units_2layer{8, 16, 32, 64};
    std::size_t lstm_first_layer = 32;
    std::vector<std::size_t> data_sizes{2000, 4000, 6000, 8000, 10000, 12000, 14000, 16000, 18000};
    std::vector<std::size_t> horizons{2, 3, 4, 5};
};

/// Everything that determines an experiment's numeric outputs. Loaded from a
/// JSON file; every key is optional and defaults to the baseline setup.
struct ExperimentConfig {
    SystemParams system;  ///< epsilon is ignored; regimes come from `epsilons`
    std::vector<double> epsilons{0.05, 0.061, 0.081, 0.112};
    std::vector<double> extreme_epsilons{0.081, 0.112};
    IntegratorSettings integrator;
    std::size_t n_train = 18000;
    std::size_t n_test = 2000;
    double scale_lo = -1.0;
    double scale_hi = 1.0;
    std::size_t window_len = 1;
    std::map<ModelKind, ModelSpec> models;
    TrainConfig train;
    Feedback feedback = Feedback::predicted;
    double event_window = 5.0;
    std::vector<std::pair<double, double>> param_switch_pairs{{0.05, 0.061}, {0.081, 0.112}};
    AblationSettings ablate;
    std::vector<std::uint64_t> seeds{1, 2, 3};
    std::size_t jobs = 0;  ///< 0 = hardware concurrency
    std::filesystem::path out_dir = "out";

    ExperimentConfig();

    /// Model spec for `kind` with the experiment's window applied.
    ModelSpec model_spec(ModelKind kind) const;

    /// Stable hash over everything except seeds, output directory and job count.
    std::string hash() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// The simulated series of one regime, split and normalized.
struct RegimeData {
    double epsilon = 0.0;
    Trajectory trajectory;  ///< integrator-resolution series dropped
    std::vector<double> series;
    SeriesSplit split;
    MinMaxScaler scaler;          ///< fitted on the training split
    PeakStatistics full_stats;    ///< peaks over the whole sampled window
    PeakStatistics train_stats;   ///< peaks up to the end of the training split
    std::size_t extreme_count = 0;
    double test_t0 = 0.0;
};

RegimeData simulate_regime(const ExperimentConfig& cfg, double epsilon);

/// One trained model evaluated on one regime.
struct RunResult {
    ModelKind model = ModelKind::mlp;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    ForecastReport report;
    EventOutcome events;
    double threshold = 0.0;
    std::vector<double> loss_history;
    ModelSpec spec;
};

/// Trains `spec` on `train_regime` and forecasts the test split of `test_regime`
/// (the same regime for ordinary runs). `parameter` conditions the model on the
/// drive strength when set.
RunResult train_and_forecast(const ExperimentConfig& cfg, const ModelSpec& spec,
                             const RegimeData& train_regime, const RegimeData& test_regime,
                             std::uint64_t seed, std::size_t n_train_override = 0,
                             bool parameter_conditioned = false);

/// Result of a command: files written and any isolated run failures.
struct CommandResult {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> failures;
    nlohmann::json summary;

    bool ok() const { return failures.empty(); }
};

CommandResult cmd_simulate(const ExperimentConfig& cfg);
CommandResult cmd_run(const ExperimentConfig& cfg);
CommandResult cmd_param_switch(const ExperimentConfig& cfg);
CommandResult cmd_ablate(const ExperimentConfig& cfg, const std::string& axis);
CommandResult cmd_report(const std::filesystem::path& run_dir);

const std::vector<std::string>& ablation_axes();

/// Median; the mean of the two middle values for even counts.
double median(std::vector<double> values);

std::string epsilon_tag(double epsilon);

} // namespace eef
