#pragma once

#include "eef/adam.hpp"
#include "eef/dataset.hpp"
#include "eef/dynamics.hpp"
#include "eef/network.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eef {

struct TrainConfig {
    std::size_t epochs = 250;
    std::size_t batch_size = 64;
    bool shuffle = true;
    std::uint64_t seed = 1;
    AdamConfig adam;

    void validate() const;
};

/// Mini-batch Adam on the batch MSE. Returns the mean training loss of each epoch.
/// Throws NumericError (with epoch and batch) if a loss goes non-finite.
std::vector<double> train(Network& network, const SupervisedDataset& dataset,
                          const TrainConfig& cfg);

enum class Feedback { predicted, actual };

std::string to_string(Feedback mode);
Feedback parse_feedback(const std::string& name);

/// Anything that maps one flattened input window to `horizon` normalized outputs.
using WindowModel = std::function<std::vector<double>(std::span<const double>)>;

WindowModel as_window_model(const Network& network);

/// Everything a rolling forecast needs besides the model.
struct ForecastSetup {
    std::vector<double> history;  ///< normalized values preceding the forecast; last window_len are used
    std::vector<double> actual;   ///< ground truth for the forecast window, original units
    MinMaxScaler scaler;
    std::size_t window_len = 1;
    std::size_t num_features = 1;
    std::optional<double> parameter;  ///< constant second feature when num_features == 2
    double t_start = 0.0;             ///< time of the first forecast step
    double sample_interval = 1.0;
    std::optional<double> event_threshold;  ///< when set, extreme events are detected on both series
};

struct ForecastReport {
    std::vector<double> times;
    std::vector<double> predicted;  ///< original units
    std::vector<double> actual;     ///< original units
    double rmse = 0.0;
    std::vector<Peak> predicted_events;
    std::vector<Peak> actual_events;
    Feedback feedback = Feedback::predicted;
    std::size_t horizon = 1;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
};

/// One-step-ahead rolling forecast. With Feedback::predicted each normalized
/// prediction is appended to the input window; with Feedback::actual the true
/// value is appended instead.
ForecastReport walk_forward(const WindowModel& model, const ForecastSetup& setup,
                            std::size_t n_steps, Feedback feedback);

/// Block forecast: each call yields `horizon` values, all of which are fed
/// back before the next call. The last block is truncated to n_steps.
ForecastReport multi_step_forecast(const WindowModel& model, const ForecastSetup& setup,
                                   std::size_t horizon, std::size_t n_steps);

double rmse(std::span<const double> predicted, std::span<const double> actual);

struct EventOutcome {
    std::size_t hits = 0;
    std::size_t misses = 0;
    std::size_t false_alarms = 0;
};

/// Extreme events on the predicted and actual series, matched one-to-one in time
/// order: an actual event is hit by the earliest unmatched predicted event no
/// more than `window` time units away.
EventOutcome event_outcomes(const ForecastReport& report, double threshold, double window = 5.0);

/// Metadata + metrics (no series, no wall time).
nlohmann::json report_json(const ForecastReport& report);

/// CSV `t,actual,predicted`.
std::string report_csv(const ForecastReport& report);

/// Pearson correlation coefficient.
double pearson(std::span<const double> a, std::span<const double> b);

} // namespace eef
