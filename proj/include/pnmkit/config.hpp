// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "pnmkit/core.hpp"
#include "pnmkit/features.hpp"
#include "pnmkit/ingest.hpp"
#include "pnmkit/training.hpp"

namespace pnmkit {

/// One key-value config file holds every hyper-parameter; flags override.
/// Unknown keys are rejected so typos fail loudly.
struct PipelineConfig {
    double cadence_hours = 4;
    double max_gap_hours = 24;
    std::vector<std::string> metrics = metrics::default_list();
    TicketFilterConfig ticket_filter;

    int grid_steps = 200;
    int n_features = 5;
    int trr_min_support = 5; // abnormal-side tickets a candidate threshold needs

    int window_x = 0; // 0 = pick via sweep
    int window_y = 12;
    int sweep_y_min = 6;
    int sweep_y_max = 18;
    int sweep_y_step = 2;
    double coverage_floor = 0.15;

    std::vector<std::string> cluster_features{"snr", "txpower"};
    int min_group = 2;
    bool cluster_combine_any = true;
    double similarity_grid_min = 0.50;
    double similarity_grid_max = 0.99;
    double similarity_grid_step = 0.01;
    double informative_min_trr = 2.0;

    double mtr_threshold_db = 18.0;

    // "<metric>.<model>" -> rule kind, overriding the default direction table
    std::map<std::string, std::string> direction_overrides;

    static PipelineConfig load(const std::string& path);
    void apply_line(const std::string& key, const std::string& value);

    /// Stable full serialization; equal configs hash equally.
    std::string canonical() const;
    std::string hash() const;

    std::int64_t max_gap_seconds() const;

    /// Which side of the threshold is abnormal for a feature family.
    /// Defaults: variance spikes are abnormal everywhere; low levels are
    /// abnormal for snr/mtr; power levels are two-sided; counter-derived
    /// features are abnormal when high.
    RuleKind direction_for(const std::string& metric, FeatureModel model) const;

    std::vector<double> similarity_grid() const;
    std::vector<int> sweep_y_range() const;
};

/// Throws ConfigInvalid on out-of-range values.
void validate(const PipelineConfig& cfg);

} // namespace pnmkit
