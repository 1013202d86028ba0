// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pnmkit/clustering.hpp"
#include "pnmkit/config.hpp"
#include "pnmkit/core.hpp"
#include "pnmkit/detection.hpp"
#include "pnmkit/evaluation.hpp"
#include "pnmkit/training.hpp"

namespace pnmkit {

/// Everything a deployment needs to run detection and diagnosis: the
/// selected rules with their thresholds, the dispatch window, and the
/// learned clustering cutoffs. Serialized as stable-order JSON.
struct TrainedDetector {
    std::string version;
    std::string config_hash;
    int window_x = 8;
    int window_y = 12;
    std::int64_t max_gap_seconds = 24 * kSecondsPerHour;
    std::vector<ThresholdRule> rules;
    std::optional<SimilarityThresholds> similarity;
    std::vector<ThresholdRule> training_summary; // every learned rule's ratio

    std::string to_json() const;
    static TrainedDetector from_json(const std::string& text);
    void save(const std::string& path) const;
    static TrainedDetector load(const std::string& path);
};

/// metric -> device -> series, for the requested metrics only.
std::map<std::string, std::map<std::string, DeviceSeries>>
build_all_series(const std::vector<PnmRecord>& records, const std::vector<std::string>& metrics);

struct TrainStats {
    std::size_t records = 0;
    std::size_t devices = 0;
    std::size_t tickets_total = 0;
    std::size_t tickets_network = 0;
    std::size_t tickets_unattributed = 0;
    std::size_t rules_learned = 0;
    std::size_t rules_degenerate = 0;
};

struct TrainResult {
    TrainedDetector detector;
    std::optional<SweepResult> sweep; // present when the window came from a sweep
    TrainStats stats;
};

/// Full training pass: filter tickets, learn all thresholds, select the top
/// rules, pick window parameters (sweep unless pinned in cfg), and
/// calibrate clustering cutoffs when maintenance tickets exist.
TrainResult train_detector(const std::vector<PnmRecord>& records,
                           const std::vector<Ticket>& tickets, const PipelineConfig& cfg,
                           std::optional<Interval> observation_window = std::nullopt,
                           int jobs = 1);

/// Labels every device with the detector's rules, clipped to the window.
std::vector<LabeledSeries> label_all_devices(
    const std::map<std::string, std::map<std::string, DeviceSeries>>& series,
    const TrainedDetector& detector, std::optional<Interval> observation_window, int jobs = 1);

std::vector<AnomalyEvent> detect_events(const TrainedDetector& detector,
                                        const std::vector<PnmRecord>& records,
                                        std::optional<Interval> observation_window = std::nullopt,
                                        int jobs = 1);

struct DiagnoseVerdict {
    bool point_found = false;
    Timestamp point_ts = 0;
    bool point_abnormal = false;
    bool window_satisfied = false; // x-of-y over the trailing window
    std::vector<std::string> fired_rules;
};

/// Call-time diagnosis of one device at one timestamp, matching what the
/// batch event report says at that instant.
DiagnoseVerdict diagnose(const TrainedDetector& detector,
                         const std::vector<PnmRecord>& records, const std::string& device,
                         Timestamp ts);

/// Types events via the detector's learned similarity cutoffs.
TypingResult cluster_events(const TrainedDetector& detector,
                            const std::vector<PnmRecord>& records,
                            const std::vector<AnomalyEvent>& events, const PipelineConfig& cfg);

ClusteringOptions clustering_options(const PipelineConfig& cfg, int window_y);

// Event report round-trip (CSV with a provenance comment header).
void write_events_csv(std::ostream& out, const std::vector<AnomalyEvent>& events,
                      std::span<const ThresholdRule> rules, const std::string& meta_comment);
std::vector<AnomalyEvent> read_events_csv(std::istream& in,
                                          std::span<const ThresholdRule> rules);
void write_events_jsonl(std::ostream& out, const std::vector<AnomalyEvent>& events,
                        std::span<const ThresholdRule> rules);

struct MetricReport {
    std::optional<double> accuracy;
    CoverageResult coverage;
    std::optional<double> normalized_rate;
    TicketStats stats;
    std::optional<MtrBaseline> mtr; // when MTR data exists
    std::size_t n_events = 0;
    std::size_t n_fault_groups = 0;
};

MetricReport evaluate_events(const std::vector<AnomalyEvent>& events,
                             const std::vector<Ticket>& tickets, const DeviceIndex& index,
                             Interval observation_window, const std::vector<PnmRecord>& records,
                             double mtr_threshold_db);

std::string metric_report_json(const MetricReport& report, const std::string& meta_version,
                               const std::string& config_hash);

/// Bounding interval of all record timestamps, end-exclusive.
Interval data_window(const std::vector<PnmRecord>& records);

} // namespace pnmkit
