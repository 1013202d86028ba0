// SPDX-License-Identifier: Apache-2.0
#include <set>

#include "doctest.h"
#include "pnmkit/features.hpp"
#include "pnmkit/rng.hpp"
#include "support/oracles.hpp"

using namespace pnmkit;

namespace {

DeviceSeries make_series(const std::vector<double>& values, std::int64_t step = 4 * 3600) {
    DeviceSeries s;
    s.device_id = "d";
    s.metric = "snr";
    Timestamp t = 1546732800;
    for (double v : values) {
        s.points.push_back({t, v});
        t += step;
    }
    return s;
}

DeviceSeries random_series(Rng& rng, int n, bool jitter = true) {
    DeviceSeries s;
    s.device_id = "d";
    s.metric = "snr";
    Timestamp t = 1546732800;
    for (int i = 0; i < n; ++i) {
        s.points.push_back({t, rng.normal(35, 10)});
        t += 4 * 3600;
        if (jitter)
            t += static_cast<Timestamp>(rng.below(3600)) - 1800;
    }
    return s;
}

} // namespace

TEST_CASE("avg: hand cases") {
    DeviceSeries s = make_series({2, 4, 6});
    auto out = rolling_avg(s, 7); // all three inside a 7-day window
    CHECK(out[2] == doctest::Approx(4.0).epsilon(1e-12));

    DeviceSeries c = make_series(std::vector<double>(20, 3.25));
    for (double v : rolling_avg(c, 2))
        CHECK(v == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("wma: weights rise toward the newest sample") {
    DeviceSeries s = make_series({1, 2, 3});
    auto out = rolling_wma(s, 7);
    CHECK(out[2] == doctest::Approx(14.0 / 6).epsilon(1e-12)); // (3*3+2*2+1*1)/6
    CHECK(out[0] == doctest::Approx(1.0));

    DeviceSeries c = make_series(std::vector<double>(15, -2.5));
    for (double v : rolling_wma(c, 3))
        CHECK(v == doctest::Approx(-2.5).epsilon(1e-12));
}

TEST_CASE("wma_diff: hand cases") {
    DeviceSeries s = make_series({1, 2, 3});
    auto out = rolling_wma_diff(s, 7);
    CHECK(out[2] == doctest::Approx(3 - 14.0 / 6).epsilon(1e-12));
    CHECK(out[0] == doctest::Approx(0.0));
    DeviceSeries c = make_series(std::vector<double>(10, 9.75));
    for (double v : rolling_wma_diff(c, 1))
        CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("variance: hand cases") {
    DeviceSeries s = make_series({1, 3});
    auto out = rolling_var(s, 7);
    CHECK(out[1] == doctest::Approx(1.0).epsilon(1e-12)); // mean 2, population var
    DeviceSeries c = make_series(std::vector<double>(10, 4.5));
    for (double v : rolling_var(c, 3))
        CHECK(v == 0.0);
}

TEST_CASE("ewma: recurrence and closed form") {
    DeviceSeries s = make_series({2, 4});
    auto out = rolling_ewma(s, 0.5);
    CHECK(out[0] == 2.0);
    CHECK(out[1] == 3.0);

    Rng rng(101);
    DeviceSeries r = random_series(rng, 100);
    auto got = rolling_ewma(r, 0.3);
    auto want = oracle::ewma_closed_form(r, 0.3);
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(std::abs(got[i] - want[i]) < 1e-9);
}

TEST_CASE("windowed models match brute force on gapped series") {
    Rng rng(103);
    for (int trial = 0; trial < 20; ++trial) {
        DeviceSeries s = random_series(rng, 200);
        // punch a few long gaps so windows shrink
        for (std::size_t i = 30; i < s.points.size(); i += 50) {
            for (std::size_t k = i; k < s.points.size(); ++k)
                s.points[k].ts += 3 * 86400;
        }
        for (int win : {1, 2, 7}) {
            auto a = rolling_avg(s, win);
            auto wa = oracle::avg(s, win);
            auto w = rolling_wma(s, win);
            auto ww = oracle::wma(s, win);
            auto v = rolling_var(s, win);
            auto wv = oracle::variance(s, win);
            for (std::size_t i = 0; i < s.points.size(); ++i) {
                CHECK(std::abs(a[i] - wa[i]) < 1e-9);
                CHECK(std::abs(w[i] - ww[i]) < 1e-9);
                CHECK(std::abs(v[i] - wv[i]) < 1e-9);
            }
        }
    }
}

TEST_CASE("shift invariance and scale covariance") {
    Rng rng(107);
    DeviceSeries s = random_series(rng, 150);
    DeviceSeries shifted = s;
    DeviceSeries scaled = s;
    const double c = 17.5, k = -2.25;
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        shifted.points[i].value += c;
        scaled.points[i].value *= k;
    }
    const int win = 2;
    auto avg0 = rolling_avg(s, win), avg1 = rolling_avg(shifted, win),
         avg2 = rolling_avg(scaled, win);
    auto wma0 = rolling_wma(s, win), wma1 = rolling_wma(shifted, win),
         wma2 = rolling_wma(scaled, win);
    auto ew0 = rolling_ewma(s, 0.4), ew1 = rolling_ewma(shifted, 0.4),
         ew2 = rolling_ewma(scaled, 0.4);
    auto wd0 = rolling_wma_diff(s, win), wd1 = rolling_wma_diff(shifted, win),
         wd2 = rolling_wma_diff(scaled, win);
    auto var0 = rolling_var(s, win), var1 = rolling_var(shifted, win),
         var2 = rolling_var(scaled, win);
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        CHECK(std::abs(avg1[i] - (avg0[i] + c)) < 1e-9);
        CHECK(std::abs(wma1[i] - (wma0[i] + c)) < 1e-9);
        CHECK(std::abs(ew1[i] - (ew0[i] + c)) < 1e-9);
        CHECK(std::abs(wd1[i] - wd0[i]) < 1e-9);
        CHECK(std::abs(var1[i] - var0[i]) < 1e-9);
        CHECK(std::abs(avg2[i] - k * avg0[i]) < 1e-9);
        CHECK(std::abs(wma2[i] - k * wma0[i]) < 1e-9);
        CHECK(std::abs(ew2[i] - k * ew0[i]) < 1e-9);
        CHECK(std::abs(wd2[i] - k * wd0[i]) < 1e-9);
        CHECK(std::abs(var2[i] - k * k * var0[i]) < 1e-7);
    }
}

TEST_CASE("causality: a value depends only on its prefix") {
    Rng rng(109);
    DeviceSeries s = random_series(rng, 60);
    for (const FeatureSpec& spec : FeatureSpec::all_for_metric("snr")) {
        FeatureSeries full = compute_feature(s, spec);
        DeviceSeries prefix = s;
        prefix.points.resize(30);
        FeatureSeries part = compute_feature(prefix, spec);
        for (std::size_t i = 0; i < part.points.size(); ++i)
            CHECK(part.points[i].value == full.points[i].value);
    }
}

TEST_CASE("generate_all: 37 per metric, 333 for nine, distinct names") {
    auto one = FeatureSpec::all_for_metric("snr");
    CHECK(one.size() == 37);
    std::set<std::string> names;
    for (const auto& spec : one)
        names.insert(spec.name());
    CHECK(names.size() == 37);

    CHECK(FeatureSpec::full_grid(metrics::default_list()).size() == 333);
    CHECK(FeatureSpec::full_grid({"snr", "txpower"}).size() == 74);
}

TEST_CASE("feature names render and parse") {
    FeatureSpec var2{"snr", FeatureModel::Var, 2, 0};
    CHECK(var2.name() == "snr-var-2");
    FeatureSpec wd4{"rxpower", FeatureModel::WmaDiff, 4, 0};
    CHECK(wd4.name() == "rxpower-wma-diff-4");
    FeatureSpec ew{"t3timeouts", FeatureModel::Ewma, 0, 0.3};
    CHECK(ew.name() == "t3timeouts-ewma-0.3");
    for (const auto& name : {"snr-var-2", "rxpower-wma-diff-4", "t3timeouts-ewma-0.3",
                             "uncorrectable-avg-7"}) {
        CHECK(FeatureSpec::parse(name).name() == name);
    }
}
