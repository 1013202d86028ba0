// SPDX-License-Identifier: Apache-2.0
#include <fstream>

#include "doctest.h"
#include "pnmkit/config.hpp"
#include "pnmkit/error.hpp"

using namespace pnmkit;

namespace {

std::string write_config(const std::string& body) {
    std::string path = "/tmp/pnmkit_test_pipeline.conf";
    std::ofstream out(path);
    out << body;
    return path;
}

} // namespace

TEST_CASE("config: load with overrides") {
    std::string path = write_config(R"(# comment line
cadence_hours = 2
metrics = snr,txpower
dispatch_actions = Dispatch,Truck Roll
description_keywords = Data Down
n_features = 3
window_x = 4
window_y = 8
cluster_combine = all
direction.snr.avg = two-sided
)");
    PipelineConfig cfg = PipelineConfig::load(path);
    CHECK(cfg.cadence_hours == 2);
    CHECK(cfg.metrics == std::vector<std::string>{"snr", "txpower"});
    CHECK(cfg.ticket_filter.dispatch_actions.count("Truck Roll") == 1);
    CHECK(cfg.ticket_filter.description_keywords.size() == 1);
    CHECK(cfg.n_features == 3);
    CHECK(cfg.window_x == 4);
    CHECK_FALSE(cfg.cluster_combine_any);
    CHECK(cfg.direction_for("snr", FeatureModel::Avg) == RuleKind::TwoSided);
}

TEST_CASE("config: unknown keys and invalid values fail loudly") {
    try {
        PipelineConfig::load(write_config("no_such_key = 1\n"));
        FAIL("expected ConfigInvalid");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ConfigInvalid);
    }
    CHECK_THROWS_AS(PipelineConfig::load(write_config("n_features = lots\n")), Error);
    CHECK_THROWS_AS(PipelineConfig::load(write_config("window_x = 9\nwindow_y = 3\n")),
                    Error);
    CHECK_THROWS_AS(PipelineConfig::load(write_config("direction.snr.avg = sideways\n")),
                    Error);
}

TEST_CASE("config: default direction table") {
    PipelineConfig cfg;
    CHECK(cfg.direction_for("snr", FeatureModel::Var) == RuleKind::OneSidedHigh);
    CHECK(cfg.direction_for("txpower", FeatureModel::Var) == RuleKind::OneSidedHigh);
    CHECK(cfg.direction_for("snr", FeatureModel::Avg) == RuleKind::OneSidedLow);
    CHECK(cfg.direction_for("mtr", FeatureModel::Ewma) == RuleKind::OneSidedLow);
    CHECK(cfg.direction_for("txpower", FeatureModel::Avg) == RuleKind::TwoSided);
    CHECK(cfg.direction_for("rxpower", FeatureModel::WmaDiff) == RuleKind::TwoSided);
    CHECK(cfg.direction_for("uncorrectable", FeatureModel::WmaDiff) ==
          RuleKind::OneSidedHigh);
    CHECK(cfg.direction_for("t3timeouts", FeatureModel::Avg) == RuleKind::OneSidedHigh);
}

TEST_CASE("config: canonical form hashes stably and distinguishes changes") {
    PipelineConfig a, b;
    CHECK(a.hash() == b.hash());
    b.n_features = 7;
    CHECK(a.hash() != b.hash());
    PipelineConfig c = PipelineConfig::load(
        write_config("n_features = 7\n"));
    CHECK(b.hash() == c.hash());
}

TEST_CASE("config: grids render as expected") {
    PipelineConfig cfg;
    auto ys = cfg.sweep_y_range();
    CHECK(ys.front() == 6);
    CHECK(ys.back() == 18);
    auto grid = cfg.similarity_grid();
    CHECK(grid.front() == 0.5);
    CHECK(grid.back() == doctest::Approx(0.99));
    CHECK(grid.size() == 50);
}
