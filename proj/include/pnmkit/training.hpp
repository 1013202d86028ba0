// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnmkit/core.hpp"
#include "pnmkit/features.hpp"
#include "pnmkit/ingest.hpp"
#include "pnmkit/intervals.hpp"

namespace pnmkit {

enum class RuleKind { OneSidedLow, OneSidedHigh, TwoSided };

std::string rule_kind_name(RuleKind k);
RuleKind rule_kind_parse(const std::string& name);

/// A learned anomaly rule for one feature. One-sided rules carry exactly
/// one bound; a value on the boundary is normal.
struct ThresholdRule {
    FeatureSpec spec;
    RuleKind kind = RuleKind::OneSidedHigh;
    std::optional<double> thr_low;  // abnormal when value < thr_low
    std::optional<double> thr_high; // abnormal when value > thr_high
    double trr = 0;     // ticketing rate ratio achieved on training data
    double trr_lcb = 0; // two-sigma-shrunk ratio; guards selection against
                        // small-support estimates (0 = not computed)

    bool fires(double value) const;
    double selection_key() const { return trr_lcb != 0 ? trr_lcb : trr; }
};

struct TicketingRate {
    double per_hour = 0;
    bool zero_duration = false;
};

/// Tickets created inside the periods, per hour of total period duration.
TicketingRate ticketing_rate(const IntervalSet& periods, const std::vector<Ticket>& tickets);

/// Ticket creation times on each device's timeline. A ticket is attributed
/// to every device of its account; tickets of unknown accounts are counted
/// and excluded.
struct DeviceTickets {
    std::map<std::string, std::vector<Timestamp>> by_device; // sorted times
    std::size_t attributed_pairs = 0;
    std::size_t unattributed_tickets = 0;

    static DeviceTickets build(const std::vector<Ticket>& tickets, const DeviceIndex& index);
};

/// One collection period flattened for threshold search: the feature value,
/// how long it held, and how many tickets were created while it held.
struct WeightedValue {
    double value = 0;
    std::int64_t duration = 0; // seconds
    std::int32_t tickets = 0;
};

struct LearnOptions {
    int grid_steps = 200;
    std::int64_t max_gap_seconds = 24 * kSecondsPerHour;
    // minimum tickets on the abnormal side for a candidate's ratio to be
    // trusted; rate estimates from one or two lucky tickets otherwise win
    // the argmax on sparse data
    int min_abnormal_tickets = 5;
};

/// Flattens one feature across all devices into weighted values, clipped to
/// the observation window. Time not covered by any holding interval belongs
/// to neither the normal nor the abnormal side.
std::vector<WeightedValue> collect_weighted_values(const std::vector<FeatureSeries>& features,
                                                   const DeviceTickets& tickets,
                                                   Interval observation_window,
                                                   std::int64_t max_gap_seconds);

/// Ticketing rate ratio of a candidate rule: rate(abnormal) / rate(normal).
/// nullopt when either side has zero duration or the normal-side rate is
/// zero; callers must sort nullopt below every finite ratio.
std::optional<double> trr_for_values(std::span<const WeightedValue> values, RuleKind kind,
                                     std::optional<double> thr_low,
                                     std::optional<double> thr_high);

std::optional<double> trr_for_threshold(const std::vector<FeatureSeries>& features,
                                        const DeviceTickets& tickets, const ThresholdRule& rule,
                                        Interval observation_window,
                                        std::int64_t max_gap_seconds);

/// Grid-searches candidate thresholds at empirical quantiles of the feature
/// and returns the rule maximizing the ticketing rate ratio. Candidates
/// whose abnormal side outlasts the normal side are rejected (an anomaly
/// rule flags the minority of time). Ties prefer the smaller abnormal
/// duration. nullopt for a degenerate (constant or empty) feature or when
/// every candidate has an undefined ratio.
std::optional<ThresholdRule> learn_threshold_from_values(std::vector<WeightedValue> values,
                                                         const FeatureSpec& spec, RuleKind kind,
                                                         int grid_steps,
                                                         int min_abnormal_tickets = 5);

std::optional<ThresholdRule> learn_threshold(const std::vector<FeatureSeries>& features,
                                             const DeviceTickets& tickets,
                                             Interval observation_window, RuleKind kind,
                                             const LearnOptions& opt = {});

/// Three-stage selection: best hyper-parameter variant per (metric, model),
/// then top two per metric, then the global top n_final. Rules are ranked
/// by the shrunk ratio when present, else by the raw ratio.
std::vector<ThresholdRule> select_features(const std::vector<ThresholdRule>& rules,
                                           int n_final);

/// Labels for one device: which selected rules fire at each collection
/// point. Bit k of `fired` corresponds to rules[k].
struct LabeledSeries {
    std::string device_id;
    std::vector<Timestamp> ts;
    std::vector<std::uint32_t> fired;
};

/// Computes every rule's feature for one device and marks firing points.
/// Rules whose metric has no data for this device never fire; their names
/// are reported in missing_metrics when non-null.
LabeledSeries label_device(const std::map<std::string, DeviceSeries>& series_by_metric,
                           std::span<const ThresholdRule> rules,
                           std::vector<std::string>* missing_metrics = nullptr);

/// Single-point diagnosis: abnormal iff any rule fires at the collection
/// point governing `ts` (the latest point at or before it). Throws
/// MissingFeature when a rule's metric is absent for the device.
bool classify_point(const std::map<std::string, DeviceSeries>& series_by_metric,
                    std::span<const ThresholdRule> rules, Timestamp ts);

} // namespace pnmkit
