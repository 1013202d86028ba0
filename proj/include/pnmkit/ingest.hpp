// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pnmkit/core.hpp"
#include "pnmkit/intervals.hpp"

namespace pnmkit {

/// Column-name remapping so real exports with different headers load
/// without preprocessing. Values are the header names to look for.
struct PnmCsvSchema {
    std::string ts = "ts";
    std::string mac = "mac";
    std::string account = "account";
    std::string freq = "freq";
    std::string snr = "snr";
    std::string tx = "tx";
    std::string rx = "rx";
    std::string unerr = "unerr";
    std::string corr = "corr";
    std::string uncorr = "uncorr";
    std::string t3 = "t3";
    std::string t4 = "t4";
    std::string mtr = "mtr";             // optional column
    std::string fiber_node = "fiber_node"; // optional column
};

struct TicketCsvSchema {
    std::string account = "account";
    std::string created = "created";
    std::string closed = "closed";
    std::string action = "action";
    std::string description = "description";
    std::string part_of_primary = "part_of_primary";
    std::string primary_id = "primary_id";
};

struct ParseStats {
    std::size_t rows_total = 0;   // data rows seen (excluding header)
    std::size_t rows_dropped = 0; // unparseable mandatory fields or invariant violations
    std::size_t duplicates = 0;   // identical-key rows replaced by a later row
    // first few (row number, reason) pairs for operator diagnostics
    std::vector<std::pair<std::size_t, std::string>> drop_details;
};

struct PnmParseResult {
    std::vector<PnmRecord> records; // sorted by (device_id, timestamp, channel)
    ParseStats stats;
};

struct TicketParseResult {
    std::vector<Ticket> tickets; // input order of surviving rows
    ParseStats stats;
};

PnmParseResult parse_pnm_csv(const std::string& path, const PnmCsvSchema& schema = {});
PnmParseResult parse_pnm_csv(std::istream& in, const PnmCsvSchema& schema = {});
TicketParseResult parse_ticket_csv(const std::string& path, const TicketCsvSchema& schema = {});
TicketParseResult parse_ticket_csv(std::istream& in, const TicketCsvSchema& schema = {});

void write_pnm_csv(std::ostream& out, const std::vector<PnmRecord>& records,
                   const PnmCsvSchema& schema = {});
void write_ticket_csv(std::ostream& out, const std::vector<Ticket>& tickets,
                      const TicketCsvSchema& schema = {});

/// Selects tickets likely caused by network problems: dispatch actions or
/// network-suggestive description keywords (case-insensitive substring).
struct TicketFilterConfig {
    std::set<std::string> dispatch_actions{"Dispatch"};
    std::set<std::string> description_keywords{"Data Down", "Noisy Line", "Slow Speed"};
};

std::vector<Ticket> filter_network_tickets(const std::vector<Ticket>& tickets,
                                           const TicketFilterConfig& cfg = {});

/// account -> devices and device -> fiber node, built at ingestion. One
/// account may own several devices; a ticket is attributed to all of them.
struct DeviceIndex {
    std::map<std::string, std::vector<std::string>> account_devices;
    std::map<std::string, std::string> device_fiber_node;
    std::vector<std::string> devices; // sorted, unique

    static DeviceIndex build(const std::vector<PnmRecord>& records);
    const std::vector<std::string>* devices_of(const std::string& account) const;
    std::string fiber_node_of(const std::string& device) const; // "" when unknown
};

/// Builds one per-device step-function series for a metric: cumulative
/// counters are differenced into increments (a drop is a reset and the
/// increment is the new raw value), and multi-channel samples at one
/// timestamp reduce to the worst channel.
std::map<std::string, DeviceSeries> build_series(const std::vector<PnmRecord>& records,
                                                 const std::string& metric);

/// Holding interval of point `i`: the value holds until the next point,
/// but a gap longer than max_gap breaks the step function and the capped
/// remainder of the gap belongs to neither normal nor abnormal time. The
/// final point holds nothing (its successor is unknown).
std::optional<Interval> point_hold(const std::vector<SeriesPoint>& points, std::size_t i,
                                   std::int64_t max_gap_seconds);
std::optional<Interval> point_hold(const DeviceSeries& s, std::size_t i,
                                   std::int64_t max_gap_seconds);

/// Union of all holding intervals of a series.
IntervalSet step_coverage(const DeviceSeries& s, std::int64_t max_gap_seconds);

} // namespace pnmkit
