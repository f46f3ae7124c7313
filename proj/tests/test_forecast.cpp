#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eef/errors.hpp"
#include "eef/forecast.hpp"
#include "eef/models.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace eef;

namespace {

ForecastSetup setup_for(std::vector<double> history, std::vector<double> actual, MinMaxScaler sc,
                        std::size_t window = 1) {
    ForecastSetup s;
    s.history = std::move(history);
    s.actual = std::move(actual);
    s.scaler = sc;
    s.window_len = window;
    return s;
}

SupervisedDataset sine_dataset(std::size_t n, std::size_t window, std::size_t horizon) {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = std::sin(0.1 * static_cast<double>(i));
    return frame_supervised(s, window, horizon);
}

} // namespace

TEST_CASE("rmse examples") {
    const std::vector<double> a{3, 4}, z{0, 0};
    CHECK(rmse(a, a) == 0.0);
    CHECK(rmse(z, a) == doctest::Approx(3.53553).epsilon(1e-5));
    CHECK(rmse(z, a) == std::sqrt(12.5));
    CHECK_THROWS_AS(rmse(a, std::vector<double>{1}), DomainError);
}

TEST_CASE("rmse squared equals mse") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 5.0);
    for (int k = 0; k < 100; ++k) {
        std::vector<double> p(1 + k), q(1 + k);
        for (auto& v : p) v = g(rng);
        for (auto& v : q) v = g(rng);
        const double r = rmse(p, q);
        const double mse = mse_loss(NdArray({p.size()}, p), NdArray({q.size()}, q));
        CHECK(r * r == doctest::Approx(mse).epsilon(1e-12));
    }
}

TEST_CASE("training loop bookkeeping") {
    const auto ds = sine_dataset(200, 1, 1);
    auto net = make_model(ModelSpec{}, 1);
    TrainConfig cfg;
    cfg.epochs = 7;
    const auto hist = train(net, ds, cfg);
    CHECK(hist.size() == 7);
    for (double l : hist) CHECK(std::isfinite(l));

    cfg.epochs = 0;
    CHECK_THROWS_AS(train(net, ds, cfg), DomainError);
    cfg.epochs = 1;
    cfg.batch_size = 0;
    CHECK_THROWS_AS(train(net, ds, cfg), DomainError);

    cfg.batch_size = 64;
    const auto wide = sine_dataset(200, 2, 1);
    CHECK_THROWS_AS(train(net, wide, cfg), StructuralError);
}

TEST_CASE("training is deterministic per seed") {
    const auto ds = sine_dataset(300, 1, 1);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 3;
    for (auto kind : {ModelKind::mlp, ModelKind::cnn, ModelKind::lstm}) {
        ModelSpec spec;
        spec.kind = kind;
        auto a = make_model(spec, 3), b = make_model(spec, 3);
        CHECK(train(a, ds, cfg) == train(b, ds, cfg));
        CHECK(a.checkpoint() == b.checkpoint());
    }
}

TEST_CASE("identity stub gives a constant forecast") {
    const auto sc = fit_scaler(std::vector<double>{0, 10});
    const WindowModel identity = [](std::span<const double> w) { return std::vector<double>{w.back()}; };
    const auto s = setup_for({-1.0, 0.2}, std::vector<double>(10, 3.0), sc);
    const auto r = walk_forward(identity, s, 10, Feedback::predicted);
    for (double p : r.predicted) CHECK(p == doctest::Approx(6.0));
    CHECK(r.rmse == doctest::Approx(3.0));

    const WindowModel block = [](std::span<const double> w) { return std::vector<double>(3, w.back()); };
    const auto m = multi_step_forecast(block, s, 3, 10);
    CHECK(m.predicted.size() == 10);
    for (double p : m.predicted) CHECK(p == doctest::Approx(6.0));
}

TEST_CASE("ramp stub matches its closed form") {
    const auto sc = fit_scaler(std::vector<double>{-4, 6});  // x = 5u + 1
    const double c = 0.01;
    const WindowModel ramp = [c](std::span<const double> w) { return std::vector<double>{w.back() + c}; };
    std::vector<double> actual(50);
    for (std::size_t i = 0; i < actual.size(); ++i) actual[i] = std::cos(0.3 * static_cast<double>(i));
    const double u0 = -0.2;
    const auto r = walk_forward(ramp, setup_for({0.5, u0}, actual, sc), actual.size(), Feedback::predicted);

    double sum = 0.0;
    for (std::size_t k = 0; k < actual.size(); ++k) {
        const double pred = 5.0 * (u0 + c * static_cast<double>(k + 1)) + 1.0;
        CHECK(r.predicted[k] == doctest::Approx(pred).epsilon(1e-12));
        sum += (pred - actual[k]) * (pred - actual[k]);
    }
    CHECK(r.rmse == doctest::Approx(std::sqrt(sum / 50.0)).epsilon(1e-12));
}

TEST_CASE("teacher forcing feeds the true values back") {
    const auto sc = fit_scaler(std::vector<double>{0, 10});
    const WindowModel identity = [](std::span<const double> w) { return std::vector<double>{w.back()}; };
    const std::vector<double> actual{1, 2, 3, 4};
    const auto r = walk_forward(identity, setup_for({0.0}, actual, sc), 4, Feedback::actual);
    CHECK(r.predicted[0] == doctest::Approx(5.0));
    CHECK(r.predicted[1] == doctest::Approx(1.0));
    CHECK(r.predicted[3] == doctest::Approx(3.0));
    CHECK(r.feedback == Feedback::actual);
}

TEST_CASE("horizon-one block forecast equals walk-forward bit for bit") {
    const auto ds = sine_dataset(400, 1, 1);
    auto net = make_model(ModelSpec{}, 2);
    TrainConfig cfg;
    cfg.epochs = 3;
    train(net, ds, cfg);
    std::vector<double> hist(ds.inputs.begin(), ds.inputs.end());
    std::vector<double> actual(100);
    for (std::size_t i = 0; i < actual.size(); ++i) actual[i] = std::sin(0.1 * double(400 + i));
    const auto s = setup_for(hist, actual, fit_scaler(std::vector<double>{-1, 1}));
    const auto model = as_window_model(net);
    const auto a = walk_forward(model, s, 100, Feedback::predicted);
    const auto b = multi_step_forecast(model, s, 1, 100);
    CHECK(a.predicted == b.predicted);
    CHECK(a.rmse == b.rmse);
    CHECK(report_csv(a) == report_csv(b));
}

TEST_CASE("multi-step feeds the whole block back and truncates the last block") {
    const auto sc = fit_scaler(std::vector<double>{0, 1}, 0.0, 1.0);
    std::vector<std::vector<double>> seen;
    const WindowModel counter = [&seen](std::span<const double> w) {
        seen.emplace_back(w.begin(), w.end());
        return std::vector<double>{w.back() + 1, w.back() + 2};
    };
    const auto r = multi_step_forecast(counter, setup_for({0.0, 0.0}, std::vector<double>(5, 0.0), sc, 2), 2, 5);
    CHECK(r.predicted == std::vector<double>{1, 2, 3, 4, 5});
    REQUIRE(seen.size() == 3);
    CHECK(seen[1] == std::vector<double>{1, 2});
    CHECK(seen[2] == std::vector<double>{3, 4});
}

TEST_CASE("forecast errors") {
    const auto sc = fit_scaler(std::vector<double>{0, 1});
    const WindowModel nan = [](std::span<const double>) {
        return std::vector<double>{std::numeric_limits<double>::quiet_NaN()};
    };
    CHECK_THROWS_AS(walk_forward(nan, setup_for({0.0}, {1.0, 2.0}, sc), 2, Feedback::predicted), NumericError);
    const WindowModel id = [](std::span<const double> w) { return std::vector<double>{w.back()}; };
    CHECK_THROWS_AS(walk_forward(id, setup_for({0.0}, {1.0}, sc), 2, Feedback::predicted), DomainError);
    CHECK_THROWS_AS(walk_forward(id, setup_for({0.0}, {1.0}, sc, 3), 1, Feedback::predicted), DomainError);
    CHECK_THROWS_AS(multi_step_forecast(id, setup_for({0.0}, {1.0, 1.0, 1.0}, sc), 2, 3), StructuralError);
    CHECK_THROWS_AS(parse_feedback("oracle"), UsageError);
}

TEST_CASE("parameter feature is appended to every step") {
    const auto sc = fit_scaler(std::vector<double>{0, 1}, 0.0, 1.0);
    std::vector<double> last;
    const WindowModel spy = [&last](std::span<const double> w) {
        last.assign(w.begin(), w.end());
        return std::vector<double>{0.5};
    };
    auto s = setup_for({0.1, 0.2, 0.3}, {0.0, 0.0}, sc, 2);
    s.num_features = 2;
    s.parameter = 0.112;
    walk_forward(spy, s, 2, Feedback::predicted);
    CHECK(last == std::vector<double>{0.3, 0.112, 0.5, 0.112});
    s.parameter.reset();
    CHECK_THROWS_AS(walk_forward(spy, s, 1, Feedback::predicted), DomainError);
}

TEST_CASE("event matching") {
    ForecastReport r;
    r.actual.assign(60, 0.0);
    for (std::size_t i = 0; i < 60; ++i) r.times.push_back(100.0 + double(i));
    r.actual[10] = 9.0;
    r.actual[40] = 9.0;
    const double w = 5.0;

    r.predicted = r.actual;
    auto o = event_outcomes(r, 5.0, w);
    CHECK(o.hits == 2);
    CHECK(o.misses == 0);
    CHECK(o.false_alarms == 0);

    r.predicted.assign(60, 0.0);
    o = event_outcomes(r, 5.0, w);
    CHECK(o.hits == 0);
    CHECK(o.misses == 2);

    r.predicted.assign(60, 0.0);
    r.predicted[15] = 9.0;
    r.predicted[35] = 9.0;
    o = event_outcomes(r, 5.0, w);
    CHECK(o.hits == 2);
    CHECK(o.false_alarms == 0);

    r.predicted.assign(60, 0.0);
    r.predicted[16] = 9.0;
    r.predicted[34] = 9.0;
    o = event_outcomes(r, 5.0, w);
    CHECK(o.hits == 0);
    CHECK(o.misses == 2);
    CHECK(o.false_alarms == 2);

    // One prediction can only match one actual event.
    r.actual.assign(60, 0.0);
    r.actual[20] = 9.0;
    r.actual[23] = 9.0;
    r.predicted.assign(60, 0.0);
    r.predicted[21] = 9.0;
    o = event_outcomes(r, 5.0, w);
    CHECK(o.hits == 1);
    CHECK(o.misses == 1);
}

TEST_CASE("report json and csv") {
    const auto sc = fit_scaler(std::vector<double>{0, 10});
    const WindowModel identity = [](std::span<const double> w) { return std::vector<double>{w.back()}; };
    auto s = setup_for({0.0}, {1, 9, 2, 8, 3}, sc);
    s.t_start = 50.0;
    s.event_threshold = 7.0;
    auto r = walk_forward(identity, s, 5, Feedback::actual);
    r.seed = 4;
    const auto j = report_json(r);
    CHECK(j["seed"] == 4);
    CHECK(j["feedback_mode"] == "actual");
    CHECK(j["actual_events"].size() == 2);
    CHECK_FALSE(j.contains("wall_time_s"));
    CHECK(r.times.back() == 54.0);

    double sum = 0.0;
    for (std::size_t i = 0; i < 5; ++i) sum += (r.predicted[i] - r.actual[i]) * (r.predicted[i] - r.actual[i]);
    CHECK(std::abs(j["rmse"].get<double>() - std::sqrt(sum / 5)) <= 1e-12);
    CHECK(report_csv(r).rfind("t,actual,predicted\n50,1,", 0) == 0);
}

TEST_CASE("pearson") {
    const std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8}, c{4, 3, 2, 1}, flat{1, 1, 1, 1};
    CHECK(pearson(a, b) == doctest::Approx(1.0));
    CHECK(pearson(a, c) == doctest::Approx(-1.0));
    CHECK(pearson(a, flat) == 0.0);
}
