// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pnmkit {

/// Integer seconds since the Unix epoch, UTC. Collection cadence is on the
/// order of hours, so sub-second precision is never needed.
using Timestamp = std::int64_t;

inline constexpr std::int64_t kSecondsPerHour = 3600;
inline constexpr std::int64_t kSecondsPerDay = 86400;

/// One telemetry sample of one upstream channel of one device.
struct PnmRecord {
    std::string device_id;  // hashed MAC
    std::string account_id; // hashed account number, joins tickets to devices
    Timestamp timestamp = 0;
    std::int64_t channel_freq_hz = 0;
    double snr_db = 0;
    double tx_power_dbmv = 0;
    double rx_power_dbmv = 0;
    std::uint64_t unerrored = 0;     // cumulative codewords
    std::uint64_t corrected = 0;     // cumulative
    std::uint64_t uncorrectable = 0; // cumulative
    std::uint64_t t3_timeouts = 0;   // cumulative since reboot
    std::uint64_t t4_timeouts = 0;   // cumulative since reboot
    std::optional<double> mtr_db;
    std::string fiber_node; // optional grouping column, empty when absent

    bool operator==(const PnmRecord&) const = default;
};

/// One customer trouble report. part-of-primary tickets are the operator's
/// maintenance-issue flag; everything else is treated as a service ticket.
struct Ticket {
    std::string account_id;
    Timestamp created_at = 0;
    std::optional<Timestamp> closed_at;
    std::string action;
    std::string description;
    bool is_part_of_primary = false;
    std::optional<std::string> primary_ticket_id;

    bool operator==(const Ticket&) const = default;
};

/// Half-open time interval [start, end), end > start.
struct Interval {
    Timestamp start = 0;
    Timestamp end = 0;

    std::int64_t duration() const { return end - start; }
    bool contains(Timestamp t) const { return t >= start && t < end; }
    bool overlaps(const Interval& o) const { return start < o.end && o.start < end; }

    bool operator==(const Interval&) const = default;
};

struct SeriesPoint {
    Timestamp ts = 0;
    double value = 0;

    bool operator==(const SeriesPoint&) const = default;
};

/// Per-device values of one metric, strictly increasing in time. The series
/// defines a right-continuous step function: a value holds from its
/// collection point until the next one.
struct DeviceSeries {
    std::string device_id;
    std::string metric;
    std::vector<SeriesPoint> points;
};

// Canonical metric identifiers. Counter metrics are ingested as cumulative
// totals and differenced into per-interval increments; the rest are gauges.
namespace metrics {

inline constexpr std::string_view kSnr = "snr";
inline constexpr std::string_view kTxPower = "txpower";
inline constexpr std::string_view kRxPower = "rxpower";
inline constexpr std::string_view kUnerrored = "unerrored";
inline constexpr std::string_view kCorrected = "corrected";
inline constexpr std::string_view kUncorrectable = "uncorrectable";
inline constexpr std::string_view kT3Timeouts = "t3timeouts";
inline constexpr std::string_view kT4Timeouts = "t4timeouts";
inline constexpr std::string_view kMtr = "mtr";

std::vector<std::string> default_list();
bool is_counter(std::string_view metric);
/// Worst-channel reduction direction: true when lower is worse (snr, mtr).
bool worst_is_min(std::string_view metric);

} // namespace metrics

/// Data-quality findings. Violations are data, not exceptions.
struct RecordViolation {
    enum class Kind { NonFiniteMetric, NegativeTimestamp };
    Kind kind;
    std::string field;

    bool operator==(const RecordViolation&) const = default;
};

std::vector<RecordViolation> validate_record(const PnmRecord& r);

/// A cumulative counter dropped between two consecutive samples of the same
/// (device, channel). Treated as a reboot/reset, not an error.
struct CounterReset {
    std::string device_id;
    std::int64_t channel_freq_hz;
    Timestamp timestamp;
    std::string field;
};

/// Scans records sorted by (device, channel, timestamp) for counter drops.
std::vector<CounterReset> find_counter_resets(const std::vector<PnmRecord>& sorted);

} // namespace pnmkit
