#include "eef/forecast.hpp"

#include "eef/errors.hpp"
#include "eef/io.hpp"
#include "eef/models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>

namespace eef {

void TrainConfig::validate() const {
    if (epochs < 1) throw DomainError("train: epochs must be >= 1");
    if (batch_size < 1) throw DomainError("train: batch_size must be >= 1");
}

std::vector<double> train(Network& network, const SupervisedDataset& ds, const TrainConfig& cfg) {
    cfg.validate();
    if (ds.num_pairs == 0) throw DomainError("train: empty dataset");
    if (ds.input_stride() != shape_product(network.input_shape()) ||
        ds.horizon != network.output_size()) {
        throw StructuralError("train: dataset layout does not match the network");
    }

    auto params = network.parameters();
    AdamState adam = make_adam_state(params, cfg.adam);
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(ds.num_pairs);
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<std::size_t> batch_shape{0};
    batch_shape.insert(batch_shape.end(), network.input_shape().begin(),
                       network.input_shape().end());

    std::vector<double> history;
    history.reserve(cfg.epochs);
    const std::size_t stride = ds.input_stride();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < ds.num_pairs; start += cfg.batch_size, ++batch_index) {
            const std::size_t n = std::min(cfg.batch_size, ds.num_pairs - start);
            std::vector<double> xs(n * stride), ys(n * ds.horizon);
            for (std::size_t k = 0; k < n; ++k) {
                const std::size_t pair = order[start + k];
                std::copy_n(ds.inputs.data() + pair * stride, stride, xs.data() + k * stride);
                std::copy_n(ds.targets.data() + pair * ds.horizon, ds.horizon,
                            ys.data() + k * ds.horizon);
            }
            batch_shape[0] = n;
            const double loss = backward(network, NdArray(batch_shape, std::move(xs)),
                                         NdArray({n, ds.horizon}, std::move(ys)));
            if (!std::isfinite(loss)) {
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(batch_index));
            }
            adam_update(params, adam);
            loss_sum += loss * static_cast<double>(n);
        }
        history.push_back(loss_sum / static_cast<double>(ds.num_pairs));
    }
    return history;
}

std::string to_string(Feedback mode) {
    return mode == Feedback::predicted ? "predicted" : "actual";
}

Feedback parse_feedback(const std::string& name) {
    if (name == "predicted") return Feedback::predicted;
    if (name == "actual") return Feedback::actual;
    throw UsageError("unknown feedback mode '" + name + "'");
}

WindowModel as_window_model(const Network& network) {
    return [&network](std::span<const double> window) { return predict(network, window); };
}

namespace {

/// Rolling window of normalized observable values, expanded with the
/// optional parameter feature when handed to a model.
class RollingInput {
public:
    explicit RollingInput(const ForecastSetup& s) : setup_(s) {
        if (s.window_len == 0) throw DomainError("forecast: window_len must be >= 1");
        if (s.history.size() < s.window_len) {
            throw DomainError("forecast: history of " + std::to_string(s.history.size()) +
                              " values shorter than window " + std::to_string(s.window_len));
        }
        if (s.num_features == 2 && !s.parameter) {
            throw DomainError("forecast: two-feature model needs a parameter value");
        }
        if (s.num_features != 1 && s.num_features != 2) {
            throw DomainError("forecast: num_features must be 1 or 2");
        }
        values_.assign(s.history.end() - static_cast<std::ptrdiff_t>(s.window_len),
                       s.history.end());
    }

    std::vector<double> window() const {
        if (setup_.num_features == 1) return {values_.begin(), values_.end()};
        std::vector<double> out;
        out.reserve(values_.size() * 2);
        for (double v : values_) {
            out.push_back(v);
            out.push_back(*setup_.parameter);
        }
        return out;
    }

    void push(double normalized) {
        values_.pop_front();
        values_.push_back(normalized);
    }

private:
    const ForecastSetup& setup_;
    std::deque<double> values_;
};

void finish_report(ForecastReport& report, const ForecastSetup& setup) {
    const std::size_t n = report.predicted.size();
    report.actual.assign(setup.actual.begin(), setup.actual.begin() + static_cast<std::ptrdiff_t>(n));
    report.times.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        report.times[i] = setup.t_start + static_cast<double>(i) * setup.sample_interval;
    }
    report.rmse = rmse(report.predicted, report.actual);
    if (setup.event_threshold && n >= 3) {
        const auto pred_peaks = detect_peaks(report.predicted, setup.t_start, setup.sample_interval);
        const auto act_peaks = detect_peaks(report.actual, setup.t_start, setup.sample_interval);
        report.predicted_events = classify_extremes(pred_peaks, *setup.event_threshold).events;
        report.actual_events = classify_extremes(act_peaks, *setup.event_threshold).events;
    }
}

void check_steps(const ForecastSetup& setup, std::size_t n_steps) {
    if (n_steps == 0) throw DomainError("forecast: n_steps must be >= 1");
    if (setup.actual.size() < n_steps) {
        throw DomainError("forecast: " + std::to_string(n_steps) + " steps requested but only " +
                          std::to_string(setup.actual.size()) + " actual values supplied");
    }
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

ForecastReport walk_forward(const WindowModel& model, const ForecastSetup& setup,
                            std::size_t n_steps, Feedback feedback) {
    const auto start = std::chrono::steady_clock::now();
    check_steps(setup, n_steps);
    RollingInput input(setup);
    ForecastReport report;
    report.feedback = feedback;
    report.horizon = 1;
    report.predicted.reserve(n_steps);
    for (std::size_t step = 0; step < n_steps; ++step) {
        const auto out = model(input.window());
        if (out.empty() || !std::isfinite(out[0])) {
            throw NumericError("walk_forward: non-finite prediction at step " + std::to_string(step));
        }
        report.predicted.push_back(setup.scaler.inverse_transform(out[0]));
        input.push(feedback == Feedback::predicted ? out[0]
                                                   : setup.scaler.transform(setup.actual[step]));
    }
    finish_report(report, setup);
    report.wall_time_s = elapsed_since(start);
    return report;
}

ForecastReport multi_step_forecast(const WindowModel& model, const ForecastSetup& setup,
                                   std::size_t horizon, std::size_t n_steps) {
    const auto start = std::chrono::steady_clock::now();
    if (horizon == 0) throw DomainError("multi_step_forecast: horizon must be >= 1");
    check_steps(setup, n_steps);
    RollingInput input(setup);
    ForecastReport report;
    report.feedback = Feedback::predicted;
    report.horizon = horizon;
    report.predicted.reserve(n_steps);
    while (report.predicted.size() < n_steps) {
        const auto block = model(input.window());
        if (block.size() != horizon) {
            throw StructuralError("multi_step_forecast: model returned " +
                                  std::to_string(block.size()) + " values, expected " +
                                  std::to_string(horizon));
        }
        for (double y : block) {
            if (!std::isfinite(y)) {
                throw NumericError("multi_step_forecast: non-finite prediction at step " +
                                   std::to_string(report.predicted.size()));
            }
            if (report.predicted.size() < n_steps) {
                report.predicted.push_back(setup.scaler.inverse_transform(y));
            }
            input.push(y);
        }
    }
    finish_report(report, setup);
    report.wall_time_s = elapsed_since(start);
    return report;
}

double rmse(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size()) {
        throw DomainError("rmse: length mismatch " + std::to_string(predicted.size()) + " vs " +
                          std::to_string(actual.size()));
    }
    if (predicted.empty()) throw DomainError("rmse: empty series");
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted[i] - actual[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(predicted.size()));
}

EventOutcome event_outcomes(const ForecastReport& report, double threshold, double window) {
    EventOutcome out;
    if (report.predicted.size() < 3) return out;
    const double t0 = report.times.empty() ? 0.0 : report.times.front();
    const double dt = report.times.size() > 1 ? report.times[1] - report.times[0] : 1.0;
    const auto predicted =
        classify_extremes(detect_peaks(report.predicted, t0, dt), threshold).events;
    const auto actual = classify_extremes(detect_peaks(report.actual, t0, dt), threshold).events;
    std::vector<bool> used(predicted.size(), false);
    // Small tolerance so a shift of exactly `window` on a float time grid still matches.
    const double reach = window + 1e-9 * std::max(1.0, std::abs(window));
    for (const auto& a : actual) {
        bool hit = false;
        for (std::size_t j = 0; j < predicted.size(); ++j) {
            if (!used[j] && std::abs(predicted[j].t - a.t) <= reach) {
                used[j] = true;
                hit = true;
                break;
            }
        }
        if (hit) {
            ++out.hits;
        } else {
            ++out.misses;
        }
    }
    out.false_alarms = static_cast<std::size_t>(std::count(used.begin(), used.end(), false));
    return out;
}

nlohmann::json report_json(const ForecastReport& r) {
    auto events = [](const std::vector<Peak>& peaks) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : peaks) arr.push_back({{"t", p.t}, {"x", p.x}});
        return arr;
    };
    return {{"rmse", r.rmse},
            {"n_steps", r.predicted.size()},
            {"feedback_mode", to_string(r.feedback)},
            {"horizon", r.horizon},
            {"seed", r.seed},
            {"predicted_events", events(r.predicted_events)},
            {"actual_events", events(r.actual_events)}};
}

std::string report_csv(const ForecastReport& r) {
    CsvTable table{{"t", "actual", "predicted"}, {}};
    table.rows.reserve(r.predicted.size());
    for (std::size_t i = 0; i < r.predicted.size(); ++i) {
        table.rows.push_back({r.times[i], r.actual[i], r.predicted[i]});
    }
    return to_csv(table);
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw DomainError("pearson: need equal lengths >= 2");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

} // namespace eef
