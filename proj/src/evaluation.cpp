// SPDX-License-Identifier: Apache-2.0
#include "pnmkit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <unordered_map>

#include "pnmkit/csv.hpp"
#include "pnmkit/error.hpp"

namespace pnmkit {

namespace {

// per-device events sorted by start; device events never overlap
std::unordered_map<std::string, std::vector<Interval>>
events_by_device(const std::vector<AnomalyEvent>& events) {
    std::unordered_map<std::string, std::vector<Interval>> out;
    for (const AnomalyEvent& e : events)
        out[e.device_id].push_back(e.interval);
    for (auto& [device, ivs] : out)
        std::sort(ivs.begin(), ivs.end(),
                  [](const Interval& a, const Interval& b) { return a.start < b.start; });
    return out;
}

bool any_interval_contains(const std::vector<Interval>& sorted, Timestamp t) {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), t,
                               [](Timestamp v, const Interval& iv) { return v < iv.start; });
    return it != sorted.begin() && std::prev(it)->contains(t);
}

} // namespace

std::vector<FaultGroup> group_faults(const std::vector<AnomalyEvent>& events,
                                     const DeviceIndex& index) {
    // sort event indices by (fiber node, start); a sweep over starts merges
    // every transitively overlapping chain
    std::vector<std::size_t> order(events.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    auto node_of = [&](std::size_t i) { return index.fiber_node_of(events[i].device_id); };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        std::string na = node_of(a), nb = node_of(b);
        if (na != nb)
            return na < nb;
        if (events[a].interval.start != events[b].interval.start)
            return events[a].interval.start < events[b].interval.start;
        return events[a].device_id < events[b].device_id;
    });

    std::vector<FaultGroup> out;
    for (std::size_t i : order) {
        const AnomalyEvent& e = events[i];
        std::string node = node_of(i);
        if (!out.empty() && out.back().fiber_node == node &&
            e.interval.start < out.back().span.end) {
            out.back().span.end = std::max(out.back().span.end, e.interval.end);
            out.back().event_indices.push_back(i);
        } else {
            out.push_back({node, e.interval, {i}});
        }
    }
    return out;
}

std::optional<double> ticket_prediction_accuracy(const std::vector<AnomalyEvent>& events,
                                                 const std::vector<Ticket>& tickets,
                                                 const DeviceIndex& index) {
    std::vector<FaultGroup> groups = group_faults(events, index);
    if (groups.empty())
        return std::nullopt;

    DeviceTickets by_device = DeviceTickets::build(tickets, index);
    static const std::vector<Timestamp> kNone;
    auto device_times = [&](const std::string& d) -> const std::vector<Timestamp>& {
        auto it = by_device.by_device.find(d);
        return it == by_device.by_device.end() ? kNone : it->second;
    };

    std::size_t true_groups = 0;
    for (const FaultGroup& g : groups) {
        bool has_ticket = false;
        for (std::size_t i : g.event_indices) {
            const AnomalyEvent& e = events[i];
            const std::vector<Timestamp>& times = device_times(e.device_id);
            auto lo = std::lower_bound(times.begin(), times.end(), e.interval.start);
            if (lo != times.end() && *lo < e.interval.end) {
                has_ticket = true;
                break;
            }
        }
        if (has_ticket)
            ++true_groups;
    }
    return static_cast<double>(true_groups) / static_cast<double>(groups.size());
}

CoverageResult ticket_coverage(const std::vector<AnomalyEvent>& events,
                               const std::vector<Ticket>& tickets, const DeviceIndex& index) {
    CoverageResult out;
    auto by_device = events_by_device(events);
    for (const Ticket& t : tickets) {
        const std::vector<std::string>* devices = index.devices_of(t.account_id);
        if (!devices || devices->empty()) {
            ++out.excluded_no_device;
            continue;
        }
        ++out.eligible;
        for (const std::string& d : *devices) {
            auto it = by_device.find(d);
            if (it != by_device.end() && any_interval_contains(it->second, t.created_at)) {
                ++out.covered;
                break;
            }
        }
    }
    if (out.eligible > 0)
        out.coverage = static_cast<double>(out.covered) / static_cast<double>(out.eligible);
    return out;
}

std::optional<double> normalized_ticketing_rate(const std::vector<AnomalyEvent>& events,
                                                const std::vector<Ticket>& tickets,
                                                const DeviceIndex& index,
                                                Interval observation_window) {
    const std::int64_t window_seconds = observation_window.duration();
    const std::size_t n_devices = index.devices.size();
    if (window_seconds <= 0 || n_devices == 0)
        return std::nullopt;

    // both rates are on device-time: per (ticket, device) attribution over
    // summed per-device durations, so the all-abnormal detector scores 1
    std::int64_t event_seconds = 0;
    auto by_device = events_by_device(events);
    for (auto& [device, ivs] : by_device) {
        for (const Interval& iv : ivs) {
            Timestamp s = std::max(iv.start, observation_window.start);
            Timestamp e = std::min(iv.end, observation_window.end);
            if (e > s)
                event_seconds += e - s;
        }
    }
    if (event_seconds == 0)
        return std::nullopt;

    std::int64_t pairs_total = 0;
    std::int64_t pairs_in_events = 0;
    for (const Ticket& t : tickets) {
        if (!observation_window.contains(t.created_at))
            continue;
        const std::vector<std::string>* devices = index.devices_of(t.account_id);
        if (!devices)
            continue;
        for (const std::string& d : *devices) {
            ++pairs_total;
            auto it = by_device.find(d);
            if (it != by_device.end() && any_interval_contains(it->second, t.created_at))
                ++pairs_in_events;
        }
    }
    if (pairs_total == 0)
        return std::nullopt;

    const double device_time =
        static_cast<double>(n_devices) * static_cast<double>(window_seconds);
    const double rate_events =
        static_cast<double>(pairs_in_events) / static_cast<double>(event_seconds);
    const double rate_baseline = static_cast<double>(pairs_total) / device_time;
    return rate_events / rate_baseline;
}

namespace {

DistSummary summarize(std::vector<double> values, std::size_t excluded) {
    DistSummary out;
    out.excluded = excluded;
    out.count = values.size();
    if (values.empty())
        return out;
    std::sort(values.begin(), values.end());
    double sum = 0;
    for (double v : values)
        sum += v;
    out.mean = sum / static_cast<double>(values.size());
    const std::size_t n = values.size();
    out.median = (n % 2) ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    out.cdf.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.cdf.emplace_back(values[i], static_cast<double>(i + 1) / static_cast<double>(n));
    return out;
}

} // namespace

TicketStats ticket_stats(const std::vector<AnomalyEvent>& events,
                         const std::vector<Ticket>& tickets, const DeviceIndex& index,
                         double event_length_bin_hours) {
    TicketStats out;

    std::vector<double> lifetimes;
    std::size_t open_tickets = 0;
    for (const Ticket& t : tickets) {
        if (!t.closed_at) {
            ++open_tickets;
            continue;
        }
        lifetimes.push_back(static_cast<double>(*t.closed_at - t.created_at) / kSecondsPerHour);
    }
    out.lifetime_hours = summarize(std::move(lifetimes), open_tickets);

    // waiting time = ticket creation minus the onset of the earliest event
    // of any of the account's devices that contains the creation time
    std::unordered_map<std::string, std::vector<Interval>> by_device = [&] {
        std::unordered_map<std::string, std::vector<Interval>> m;
        for (const AnomalyEvent& e : events)
            m[e.device_id].push_back(e.interval);
        for (auto& [d, ivs] : m)
            std::sort(ivs.begin(), ivs.end(),
                      [](const Interval& a, const Interval& b) { return a.start < b.start; });
        return m;
    }();

    std::vector<double> waits;
    std::size_t unmatched = 0;
    for (const Ticket& t : tickets) {
        const std::vector<std::string>* devices = index.devices_of(t.account_id);
        std::optional<Timestamp> onset;
        if (devices) {
            for (const std::string& d : *devices) {
                auto it = by_device.find(d);
                if (it == by_device.end())
                    continue;
                const std::vector<Interval>& ivs = it->second;
                auto pos =
                    std::upper_bound(ivs.begin(), ivs.end(), t.created_at,
                                     [](Timestamp v, const Interval& iv) { return v < iv.start; });
                if (pos != ivs.begin() && std::prev(pos)->contains(t.created_at)) {
                    Timestamp s = std::prev(pos)->start;
                    if (!onset || s < *onset)
                        onset = s;
                }
            }
        }
        if (!onset) {
            ++unmatched;
            continue;
        }
        waits.push_back(static_cast<double>(t.created_at - *onset) / kSecondsPerHour);
    }
    out.report_waiting_hours = summarize(std::move(waits), unmatched);

    out.event_length.bin_hours = event_length_bin_hours;
    if (!events.empty() && event_length_bin_hours > 0) {
        std::map<std::size_t, std::size_t> hist;
        for (const AnomalyEvent& e : events) {
            double hours = static_cast<double>(e.interval.duration()) / kSecondsPerHour;
            hist[static_cast<std::size_t>(hours / event_length_bin_hours)]++;
        }
        for (const auto& [bin, count] : hist)
            out.event_length.bins.emplace_back(
                static_cast<double>(bin) * event_length_bin_hours,
                static_cast<double>(count) / static_cast<double>(events.size()));
    }
    return out;
}

MtrBaseline mtr_baseline(const std::vector<PnmRecord>& records, double threshold_db) {
    MtrBaseline out;
    std::size_t with_mtr = 0;
    std::size_t below = 0;

    // any-channel reduction per (device, timestamp)
    std::map<std::pair<std::string, Timestamp>, bool> flagged;
    for (const PnmRecord& r : records) {
        if (!r.mtr_db)
            continue;
        ++with_mtr;
        bool bad = *r.mtr_db < threshold_db;
        if (bad)
            ++below;
        auto [it, inserted] = flagged.emplace(std::make_pair(r.device_id, r.timestamp), bad);
        if (!inserted)
            it->second = it->second || bad;
    }
    if (with_mtr == 0)
        throw Error(Errc::MissingMtr, "no record carries an MTR value");
    out.record_fraction = static_cast<double>(below) / static_cast<double>(with_mtr);

    struct DayAgg {
        std::set<std::string> seen;
        std::set<std::string> bad;
    };
    std::map<Timestamp, DayAgg> days;
    for (const auto& [key, bad] : flagged) {
        out.labels[key.first].emplace_back(key.second, bad);
        Timestamp day = (key.second / kSecondsPerDay) * kSecondsPerDay;
        days[day].seen.insert(key.first);
        if (bad)
            days[day].bad.insert(key.first);
    }
    for (const auto& [day, agg] : days)
        out.day_fraction.emplace_back(
            day, static_cast<double>(agg.bad.size()) / static_cast<double>(agg.seen.size()));
    return out;
}

void write_distribution_csv(std::ostream& out, const DistSummary& dist) {
    csv::Writer w(out);
    w.write_row({"value", "cdf"});
    for (const auto& [v, p] : dist.cdf)
        w.write_row({csv::format_double(v), csv::format_double(p)});
}

void write_event_length_csv(std::ostream& out, const EventLengthPdf& pdf) {
    csv::Writer w(out);
    w.write_row({"bin_start_hours", "fraction"});
    for (const auto& [start, frac] : pdf.bins)
        w.write_row({csv::format_double(start), csv::format_double(frac)});
}

} // namespace pnmkit
