// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pnmkit/core.hpp"
#include "pnmkit/detection.hpp"
#include "pnmkit/ingest.hpp"
#include "pnmkit/intervals.hpp"

namespace pnmkit {

/// Concurrent overlapping events across devices of one fiber node (or of
/// the whole dataset when node info is missing) merged into one fault for
/// counting: one reporting customer makes the whole fault "true".
struct FaultGroup {
    std::string fiber_node;
    Interval span;
    std::vector<std::size_t> event_indices;
};

std::vector<FaultGroup> group_faults(const std::vector<AnomalyEvent>& events,
                                     const DeviceIndex& index);

/// Fault groups containing at least one ticket / all fault groups.
/// nullopt when no events were detected (0/0).
std::optional<double> ticket_prediction_accuracy(const std::vector<AnomalyEvent>& events,
                                                 const std::vector<Ticket>& tickets,
                                                 const DeviceIndex& index);

struct CoverageResult {
    std::optional<double> coverage; // covered / eligible, nullopt when eligible = 0
    std::size_t covered = 0;
    std::size_t eligible = 0;
    std::size_t excluded_no_device = 0; // tickets of accounts with no PNM data
};

/// A ticket is covered when its creation time falls inside an event of any
/// device of its account.
CoverageResult ticket_coverage(const std::vector<AnomalyEvent>& events,
                               const std::vector<Ticket>& tickets, const DeviceIndex& index);

/// Ticketing rate inside event intervals over the baseline rate of the
/// whole observation window, both on device-time, so a detector that marks
/// everything abnormal scores exactly 1. nullopt when events are empty or
/// the baseline is zero.
std::optional<double> normalized_ticketing_rate(const std::vector<AnomalyEvent>& events,
                                                const std::vector<Ticket>& tickets,
                                                const DeviceIndex& index,
                                                Interval observation_window);

struct DistSummary {
    std::size_t count = 0;
    std::size_t excluded = 0;
    double mean = 0;
    double median = 0;
    std::vector<std::pair<double, double>> cdf; // (value, cumulative fraction)
};

struct EventLengthPdf {
    double bin_hours = 0;
    std::vector<std::pair<double, double>> bins; // (bin start hours, fraction)
};

struct TicketStats {
    DistSummary lifetime_hours;       // closed tickets only
    DistSummary report_waiting_hours; // tickets matched to an event only
    EventLengthPdf event_length;
};

TicketStats ticket_stats(const std::vector<AnomalyEvent>& events,
                         const std::vector<Ticket>& tickets, const DeviceIndex& index,
                         double event_length_bin_hours = 12.0);

struct MtrBaseline {
    double record_fraction = 0; // raw records with mtr below the threshold
    std::vector<std::pair<Timestamp, double>> day_fraction; // day start -> flagged modem share
    // per-device per-period any-channel-below labels
    std::map<std::string, std::vector<std::pair<Timestamp, bool>>> labels;
};

/// The fixed-threshold comparator: a modem is flagged when any channel's
/// MTR is below threshold_db. Throws MissingMtr when no record carries MTR.
MtrBaseline mtr_baseline(const std::vector<PnmRecord>& records, double threshold_db);

void write_distribution_csv(std::ostream& out, const DistSummary& dist);
void write_event_length_csv(std::ostream& out, const EventLengthPdf& pdf);

} // namespace pnmkit
