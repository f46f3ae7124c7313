#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eef/dataset.hpp"
#include "eef/errors.hpp"

#include <cmath>
#include <numeric>
#include <random>

using namespace eef;

namespace {

std::vector<double> iota_series(std::size_t n, double start = 1.0) {
    std::vector<double> s(n);
    std::iota(s.begin(), s.end(), start);
    return s;
}

} // namespace

TEST_CASE("split") {
    const auto s = iota_series(20000, 0.0);
    const auto sp = split(s, 18000, 2000);
    CHECK(sp.train.size() == 18000);
    CHECK(sp.test.size() == 2000);
    CHECK(sp.test.front() == 18000.0);

    const auto ten = iota_series(10);
    const auto small = split(ten, 8, 2);
    CHECK(small.train == std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
    CHECK(small.test == std::vector<double>{9, 10});

    try {
        split(ten, 9, 2);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("11") != std::string::npos);
        CHECK(msg.find("10") != std::string::npos);
    }
}

TEST_CASE("scaler fit and transform") {
    const std::vector<double> s{0, 5, 10};
    const auto sc = fit_scaler(s);
    CHECK(sc.lo == -1.0);
    CHECK(sc.hi == 1.0);
    CHECK(sc.transform(s) == std::vector<double>{-1, 0, 1});
    CHECK(sc.transform(7.5) == doctest::Approx(0.5));
    CHECK(sc.transform(12.0) == doctest::Approx(1.4));
    CHECK(sc.inverse_transform(0.5) == doctest::Approx(7.5));

    const std::vector<double> flat{2, 2, 2};
    CHECK_THROWS_AS(fit_scaler(flat), DomainError);
    CHECK_THROWS_AS(fit_scaler(s, 1.0, 1.0), DomainError);

    const auto unit = fit_scaler(s, 0.0, 1.0);
    CHECK(unit.transform(5.0) == doctest::Approx(0.5));
}

TEST_CASE("scaler round trip") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    std::vector<double> fit(100);
    for (auto& v : fit) v = u(rng);
    const auto sc = fit_scaler(fit);
    for (int k = 0; k < 1000; ++k) {
        const double x = 2.0 * u(rng);
        CHECK(std::abs(sc.inverse_transform(sc.transform(x)) - x) <= 1e-12 * std::max(1.0, std::abs(x)));
    }
}

TEST_CASE("framing examples") {
    const auto s = iota_series(5);
    auto ds = frame_supervised(s, 1, 1);
    CHECK(ds.num_pairs == 4);
    CHECK(ds.inputs == std::vector<double>{1, 2, 3, 4});
    CHECK(ds.targets == std::vector<double>{2, 3, 4, 5});

    ds = frame_supervised(iota_series(6), 5, 1);
    CHECK(ds.num_pairs == 1);
    CHECK(ds.inputs == std::vector<double>{1, 2, 3, 4, 5});
    CHECK(ds.targets == std::vector<double>{6});

    ds = frame_supervised(s, 1, 3);
    CHECK(ds.num_pairs == 2);
    CHECK(ds.inputs == std::vector<double>{1, 2});
    CHECK(ds.targets == std::vector<double>{2, 3, 4, 3, 4, 5});

    CHECK_THROWS_AS(frame_supervised(s, 5, 1), DomainError);
    CHECK_THROWS_AS(frame_supervised(s, 0, 1), DomainError);
    CHECK_THROWS_AS(frame_supervised(s, 1, 0), DomainError);
}

TEST_CASE("pair count and unframe identity over random shapes") {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<std::size_t> len(2, 60), wh(1, 8);
    std::normal_distribution<double> g;
    for (int k = 0; k < 300; ++k) {
        const std::size_t n = len(rng), w = wh(rng), h = wh(rng);
        std::vector<double> s(n);
        for (auto& v : s) v = g(rng);
        if (n < w + h) {
            CHECK_THROWS_AS(frame_supervised(s, w, h), DomainError);
            continue;
        }
        const auto ds = frame_supervised(s, w, h);
        CHECK(ds.num_pairs == n - w - h + 1);
        for (std::size_t i = 0; i < ds.num_pairs; ++i) {
            CHECK(ds.input(i)[0] == s[i]);
            CHECK(ds.target(i)[0] == s[i + w]);
        }
        CHECK(unframe(ds) == s);
    }
}

TEST_CASE("parameter augmentation") {
    auto ds = frame_supervised(std::vector<double>{0.1, 0.2}, 1, 1);
    auto aug = augment_with_parameter(ds, 0.05);
    CHECK(aug.num_features == 2);
    CHECK(aug.input_stride() == 2);
    CHECK(aug.inputs == std::vector<double>{0.1, 0.05});
    CHECK(aug.targets == std::vector<double>{0.2});
    CHECK_THROWS_AS(augment_with_parameter(aug, 0.05), DomainError);
    CHECK_THROWS_AS(unframe(aug), DomainError);

    ds = frame_supervised(std::vector<double>{1, 2, 3, 4}, 3, 1);
    aug = augment_with_parameter(ds, 0.7);
    CHECK(aug.inputs == std::vector<double>{1, 0.7, 2, 0.7, 3, 0.7});
}

TEST_CASE("concatenate") {
    const auto a = augment_with_parameter(frame_supervised(iota_series(4), 1, 1), 0.05);
    const auto b = augment_with_parameter(frame_supervised(iota_series(3, 10.0), 1, 1), 0.061);
    const std::vector<SupervisedDataset> parts{a, b};
    const auto c = concatenate(parts);
    CHECK(c.num_pairs == 5);
    CHECK(c.inputs.back() == 0.061);
    CHECK(c.targets.back() == 12.0);

    const std::vector<SupervisedDataset> mixed{a, frame_supervised(iota_series(4), 1, 1)};
    CHECK_THROWS_AS(concatenate(mixed), DomainError);
}

TEST_CASE("dataset csv round trip") {
    std::vector<double> s{0.1, -0.25, 1.0 / 3.0, 2.0, 1e-17, -7.5};
    const auto ds = augment_with_parameter(frame_supervised(s, 2, 2), 0.081);
    const auto text = dataset_csv(ds);
    CHECK(text.rfind("in_0,in_1,in_2,in_3,out_0,out_1\n", 0) == 0);
    const auto back = parse_dataset_csv(text, 2, 2);
    CHECK(back.inputs == ds.inputs);
    CHECK(back.targets == ds.targets);
    CHECK(back.horizon == 2);
    CHECK_THROWS_AS(parse_dataset_csv(text, 3, 2), DomainError);
}

TEST_CASE("scaling uses only training data") {
    std::vector<double> series = iota_series(100, 0.0);
    const auto sp = split(series, 80, 20);
    const auto sc = fit_scaler(sp.train);
    CHECK(sc.x_max == 79.0);

    // Changing the test values leaves the fitted scaler and the training inputs untouched.
    for (std::size_t i = 80; i < 100; ++i) series[i] = 1e6;
    const auto sp2 = split(series, 80, 20);
    const auto sc2 = fit_scaler(sp2.train);
    CHECK(sc2.x_min == sc.x_min);
    CHECK(sc2.x_max == sc.x_max);
    CHECK(frame_supervised(sc2.transform(sp2.train), 1, 1).inputs ==
          frame_supervised(sc.transform(sp.train), 1, 1).inputs);
}
