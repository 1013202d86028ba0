// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "pnmkit/core.hpp"

namespace pnmkit {

enum class FeatureModel { Avg, Wma, Ewma, WmaDiff, Var };

std::string feature_model_name(FeatureModel m); // "avg", "wma", "ewma", "wma-diff", "var"

/// One statistic of one metric, e.g. snr-var-2 = variance of snr over a
/// trailing 2-day window. Windowed models carry window_days (1..7);
/// ewma carries lambda (0.1..0.9).
struct FeatureSpec {
    std::string metric;
    FeatureModel model = FeatureModel::Avg;
    int window_days = 0;
    double lambda = 0;

    std::string name() const; // "<metric>-<model>-<param>"
    static FeatureSpec parse(const std::string& name);

    bool operator==(const FeatureSpec&) const = default;

    /// The 37 variants of one metric: 7 avg + 7 wma + 7 wma-diff + 7 var
    /// (1..7 day windows) + 9 ewma (lambda 0.1..0.9).
    static std::vector<FeatureSpec> all_for_metric(const std::string& metric);
    static std::vector<FeatureSpec> full_grid(const std::vector<std::string>& metrics);
};

struct FeatureSeries {
    FeatureSpec spec;
    std::string device_id;
    std::vector<SeriesPoint> points; // same timestamps as the source series
};

// Values aligned one-to-one with the input points. A trailing win-day
// window at point i covers all points with ts in (t_i - win*86400, t_i];
// a window holding only point i yields the identity value.
std::vector<double> rolling_avg(const DeviceSeries& s, int window_days);
std::vector<double> rolling_wma(const DeviceSeries& s, int window_days);
std::vector<double> rolling_wma_diff(const DeviceSeries& s, int window_days);
std::vector<double> rolling_var(const DeviceSeries& s, int window_days);
std::vector<double> rolling_ewma(const DeviceSeries& s, double lambda);

FeatureSeries compute_feature(const DeviceSeries& s, const FeatureSpec& spec);

/// Feature dump rows: device, ts, feature_name, value.
void write_feature_csv(std::ostream& out, const std::vector<FeatureSeries>& series);

} // namespace pnmkit
