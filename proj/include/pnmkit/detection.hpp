// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pnmkit/core.hpp"
#include "pnmkit/ingest.hpp"
#include "pnmkit/training.hpp"

namespace pnmkit {

enum class FaultType { Maintenance, Service };

std::string fault_type_name(FaultType t);

/// A contiguous faulty interval of one device.
///
/// The event begins at the first point whose trailing y-window holds at
/// least x abnormal points and ends at the first point whose window drops
/// below x; the interval is [begin point, end trigger point). An event cut
/// short by a collection gap longer than max_gap ends at the last point's
/// capped hold (last ts + max_gap); one still open at the end of the data
/// ends at last ts + 1.
struct AnomalyEvent {
    std::string device_id;
    Interval interval;
    int n_abnormal_points = 0;        // abnormal points observed by this event
    std::uint32_t trigger_mask = 0;   // bit k = rules[k] fired during the event
    std::optional<FaultType> fault_type;
    std::optional<std::string> cluster_id;
};

std::vector<std::string> trigger_rule_names(std::uint32_t mask,
                                            std::span<const ThresholdRule> rules);

struct DetectOptions {
    int window_x = 8;
    int window_y = 12;
    std::int64_t max_gap_seconds = 24 * kSecondsPerHour;
};

std::vector<AnomalyEvent> sliding_window_detect(const LabeledSeries& labels,
                                                const DetectOptions& opt);

struct SweepCell {
    int x = 0;
    int y = 0;
    std::optional<double> accuracy;
    std::optional<double> coverage;
    std::optional<double> normalized_rate;
};

struct SweepResult {
    std::vector<SweepCell> table; // every (x, y) evaluated, y-major order
    int best_x = 0;
    int best_y = 0;
};

/// Evaluates every x in 1..y for each y and recommends the cell with the
/// highest ticket prediction accuracy subject to coverage >= coverage_floor
/// (ties: higher normalized rate, then smaller y, then smaller x). Throws
/// NoFeasibleParams when no cell clears the floor.
SweepResult sweep_window_params(const std::vector<LabeledSeries>& labels,
                                const std::vector<Ticket>& tickets, const DeviceIndex& index,
                                Interval observation_window, const std::vector<int>& y_range,
                                double coverage_floor, std::int64_t max_gap_seconds,
                                int jobs = 1);

void write_sweep_csv(std::ostream& out, const SweepResult& sweep);

} // namespace pnmkit
