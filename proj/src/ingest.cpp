// SPDX-License-Identifier: Apache-2.0
#include "pnmkit/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "pnmkit/csv.hpp"
#include "pnmkit/error.hpp"

namespace pnmkit {

namespace {

constexpr std::size_t kMaxDropDetails = 50;

void note_drop(ParseStats& stats, std::size_t row, const std::string& reason) {
    ++stats.rows_dropped;
    if (stats.drop_details.size() < kMaxDropDetails)
        stats.drop_details.emplace_back(row, reason);
}

// Maps header names to column indexes; throws on missing mandatory columns.
class HeaderMap {
public:
    HeaderMap(const std::vector<std::string>& header) {
        for (std::size_t i = 0; i < header.size(); ++i)
            index_.emplace(header[i], i);
    }

    std::size_t require(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end())
            throw Error(Errc::MissingColumn, name);
        return it->second;
    }

    std::optional<std::size_t> optional(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

private:
    std::unordered_map<std::string, std::size_t> index_;
};

const std::string* field_at(const std::vector<std::string>& row, std::size_t idx) {
    return idx < row.size() ? &row[idx] : nullptr;
}

std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool parse_bool(const std::string& s, bool& out) {
    std::string v = lowercase(s);
    if (v == "1" || v == "true" || v == "yes" || v == "y") {
        out = true;
        return true;
    }
    if (v == "0" || v == "false" || v == "no" || v == "n" || v.empty()) {
        out = false;
        return true;
    }
    return false;
}

} // namespace

PnmParseResult parse_pnm_csv(const std::string& path, const PnmCsvSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoError, "cannot open " + path);
    return parse_pnm_csv(in, schema);
}

PnmParseResult parse_pnm_csv(std::istream& in, const PnmCsvSchema& schema) {
    csv::Reader reader(in);
    std::vector<std::string> row;
    if (!reader.next_row(row))
        throw Error(Errc::EmptyFile, "no header row");
    HeaderMap header(row);

    const std::size_t c_ts = header.require(schema.ts);
    const std::size_t c_mac = header.require(schema.mac);
    const std::size_t c_account = header.require(schema.account);
    const std::size_t c_freq = header.require(schema.freq);
    const std::size_t c_snr = header.require(schema.snr);
    const std::size_t c_tx = header.require(schema.tx);
    const std::size_t c_rx = header.require(schema.rx);
    const std::size_t c_unerr = header.require(schema.unerr);
    const std::size_t c_corr = header.require(schema.corr);
    const std::size_t c_uncorr = header.require(schema.uncorr);
    const std::size_t c_t3 = header.require(schema.t3);
    const std::size_t c_t4 = header.require(schema.t4);
    const auto c_mtr = header.optional(schema.mtr);
    const auto c_fn = header.optional(schema.fiber_node);

    PnmParseResult result;
    while (reader.next_row(row)) {
        ++result.stats.rows_total;
        const std::size_t rowno = reader.rows_read();
        PnmRecord r;

        auto take_str = [&](std::size_t idx, std::string& dst) {
            const std::string* f = field_at(row, idx);
            if (!f || f->empty())
                return false;
            dst = *f;
            return true;
        };
        auto take_int = [&](std::size_t idx, std::int64_t& dst) {
            const std::string* f = field_at(row, idx);
            if (!f)
                return false;
            auto v = csv::parse_int(*f);
            if (!v)
                return false;
            dst = *v;
            return true;
        };
        auto take_uint = [&](std::size_t idx, std::uint64_t& dst) {
            const std::string* f = field_at(row, idx);
            if (!f)
                return false;
            auto v = csv::parse_uint(*f);
            if (!v)
                return false;
            dst = *v;
            return true;
        };
        auto take_real = [&](std::size_t idx, double& dst) {
            const std::string* f = field_at(row, idx);
            if (!f)
                return false;
            auto v = csv::parse_double(*f);
            if (!v || !std::isfinite(*v))
                return false;
            dst = *v;
            return true;
        };

        std::string bad;
        if (!take_str(c_mac, r.device_id))
            bad = schema.mac;
        else if (!take_str(c_account, r.account_id))
            bad = schema.account;
        else if (!take_int(c_ts, r.timestamp) || r.timestamp < 0)
            bad = schema.ts;
        else if (!take_int(c_freq, r.channel_freq_hz))
            bad = schema.freq;
        else if (!take_real(c_snr, r.snr_db))
            bad = schema.snr;
        else if (!take_real(c_tx, r.tx_power_dbmv))
            bad = schema.tx;
        else if (!take_real(c_rx, r.rx_power_dbmv))
            bad = schema.rx;
        else if (!take_uint(c_unerr, r.unerrored))
            bad = schema.unerr;
        else if (!take_uint(c_corr, r.corrected))
            bad = schema.corr;
        else if (!take_uint(c_uncorr, r.uncorrectable))
            bad = schema.uncorr;
        else if (!take_uint(c_t3, r.t3_timeouts))
            bad = schema.t3;
        else if (!take_uint(c_t4, r.t4_timeouts))
            bad = schema.t4;
        if (!bad.empty()) {
            note_drop(result.stats, rowno, "unparseable field '" + bad + "'");
            continue;
        }

        if (c_mtr) {
            const std::string* f = field_at(row, *c_mtr);
            if (f && !f->empty()) {
                auto v = csv::parse_double(*f);
                if (!v || !std::isfinite(*v)) {
                    note_drop(result.stats, rowno, "unparseable field '" + schema.mtr + "'");
                    continue;
                }
                r.mtr_db = *v;
            }
        }
        if (c_fn) {
            if (const std::string* f = field_at(row, *c_fn))
                r.fiber_node = *f;
        }
        result.records.push_back(std::move(r));
    }

    // later row wins on identical (device, timestamp, channel)
    std::stable_sort(result.records.begin(), result.records.end(),
                     [](const PnmRecord& a, const PnmRecord& b) {
                         if (a.device_id != b.device_id)
                             return a.device_id < b.device_id;
                         if (a.timestamp != b.timestamp)
                             return a.timestamp < b.timestamp;
                         return a.channel_freq_hz < b.channel_freq_hz;
                     });
    std::vector<PnmRecord> dedup;
    dedup.reserve(result.records.size());
    for (PnmRecord& r : result.records) {
        if (!dedup.empty() && dedup.back().device_id == r.device_id &&
            dedup.back().timestamp == r.timestamp &&
            dedup.back().channel_freq_hz == r.channel_freq_hz) {
            dedup.back() = std::move(r);
            ++result.stats.duplicates;
        } else {
            dedup.push_back(std::move(r));
        }
    }
    result.records = std::move(dedup);
    return result;
}

TicketParseResult parse_ticket_csv(const std::string& path, const TicketCsvSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoError, "cannot open " + path);
    return parse_ticket_csv(in, schema);
}

TicketParseResult parse_ticket_csv(std::istream& in, const TicketCsvSchema& schema) {
    csv::Reader reader(in);
    std::vector<std::string> row;
    if (!reader.next_row(row))
        throw Error(Errc::EmptyFile, "no header row");
    HeaderMap header(row);

    const std::size_t c_account = header.require(schema.account);
    const std::size_t c_created = header.require(schema.created);
    const std::size_t c_closed = header.require(schema.closed);
    const std::size_t c_action = header.require(schema.action);
    const std::size_t c_desc = header.require(schema.description);
    const std::size_t c_pop = header.require(schema.part_of_primary);
    const std::size_t c_pid = header.require(schema.primary_id);

    TicketParseResult result;
    while (reader.next_row(row)) {
        ++result.stats.rows_total;
        const std::size_t rowno = reader.rows_read();
        Ticket t;

        const std::string* acct = field_at(row, c_account);
        if (!acct || acct->empty()) {
            note_drop(result.stats, rowno, "unparseable field '" + schema.account + "'");
            continue;
        }
        t.account_id = *acct;

        const std::string* created = field_at(row, c_created);
        auto created_v = created ? csv::parse_int(*created) : std::nullopt;
        if (!created_v || *created_v < 0) {
            note_drop(result.stats, rowno, "unparseable field '" + schema.created + "'");
            continue;
        }
        t.created_at = *created_v;

        const std::string* closed = field_at(row, c_closed);
        if (closed && !closed->empty()) {
            auto v = csv::parse_int(*closed);
            if (!v) {
                note_drop(result.stats, rowno, "unparseable field '" + schema.closed + "'");
                continue;
            }
            if (*v < t.created_at) {
                note_drop(result.stats, rowno, "closed before created");
                continue;
            }
            t.closed_at = *v;
        }

        if (const std::string* f = field_at(row, c_action))
            t.action = *f;
        if (const std::string* f = field_at(row, c_desc))
            t.description = *f;

        const std::string* pop = field_at(row, c_pop);
        if (!pop || !parse_bool(*pop, t.is_part_of_primary)) {
            note_drop(result.stats, rowno, "unparseable field '" + schema.part_of_primary + "'");
            continue;
        }

        if (const std::string* f = field_at(row, c_pid)) {
            if (!f->empty())
                t.primary_ticket_id = *f;
        }
        result.tickets.push_back(std::move(t));
    }
    return result;
}

void write_pnm_csv(std::ostream& out, const std::vector<PnmRecord>& records,
                   const PnmCsvSchema& s) {
    csv::Writer w(out);
    w.write_row({s.ts, s.mac, s.account, s.freq, s.snr, s.tx, s.rx, s.unerr, s.corr,
                 s.uncorr, s.t3, s.t4, s.mtr, s.fiber_node});
    for (const PnmRecord& r : records) {
        w.write_row({std::to_string(r.timestamp), r.device_id, r.account_id,
                     std::to_string(r.channel_freq_hz), csv::format_double(r.snr_db),
                     csv::format_double(r.tx_power_dbmv), csv::format_double(r.rx_power_dbmv),
                     std::to_string(r.unerrored), std::to_string(r.corrected),
                     std::to_string(r.uncorrectable), std::to_string(r.t3_timeouts),
                     std::to_string(r.t4_timeouts),
                     r.mtr_db ? csv::format_double(*r.mtr_db) : std::string(),
                     r.fiber_node});
    }
}

void write_ticket_csv(std::ostream& out, const std::vector<Ticket>& tickets,
                      const TicketCsvSchema& s) {
    csv::Writer w(out);
    w.write_row({s.account, s.created, s.closed, s.action, s.description,
                 s.part_of_primary, s.primary_id});
    for (const Ticket& t : tickets) {
        w.write_row({t.account_id, std::to_string(t.created_at),
                     t.closed_at ? std::to_string(*t.closed_at) : std::string(), t.action,
                     t.description, t.is_part_of_primary ? "1" : "0",
                     t.primary_ticket_id.value_or(std::string())});
    }
}

std::vector<Ticket> filter_network_tickets(const std::vector<Ticket>& tickets,
                                           const TicketFilterConfig& cfg) {
    std::vector<std::string> keywords;
    keywords.reserve(cfg.description_keywords.size());
    for (const std::string& k : cfg.description_keywords)
        keywords.push_back(lowercase(k));

    std::vector<Ticket> out;
    for (const Ticket& t : tickets) {
        bool keep = cfg.dispatch_actions.count(t.action) > 0;
        if (!keep) {
            std::string desc = lowercase(t.description);
            for (const std::string& k : keywords) {
                if (!k.empty() && desc.find(k) != std::string::npos) {
                    keep = true;
                    break;
                }
            }
        }
        if (keep)
            out.push_back(t);
    }
    return out;
}

DeviceIndex DeviceIndex::build(const std::vector<PnmRecord>& records) {
    DeviceIndex idx;
    std::map<std::string, std::set<std::string>> acc;
    for (const PnmRecord& r : records) {
        acc[r.account_id].insert(r.device_id);
        if (!r.fiber_node.empty())
            idx.device_fiber_node[r.device_id] = r.fiber_node;
        else
            idx.device_fiber_node.emplace(r.device_id, std::string());
    }
    std::set<std::string> all;
    for (auto& [account, devs] : acc) {
        idx.account_devices[account] = {devs.begin(), devs.end()};
        all.insert(devs.begin(), devs.end());
    }
    idx.devices = {all.begin(), all.end()};
    return idx;
}

const std::vector<std::string>* DeviceIndex::devices_of(const std::string& account) const {
    auto it = account_devices.find(account);
    return it == account_devices.end() ? nullptr : &it->second;
}

std::string DeviceIndex::fiber_node_of(const std::string& device) const {
    auto it = device_fiber_node.find(device);
    return it == device_fiber_node.end() ? std::string() : it->second;
}

std::map<std::string, DeviceSeries> build_series(const std::vector<PnmRecord>& records,
                                                 const std::string& metric) {
    const bool counter = metrics::is_counter(metric);
    const bool min_is_worst = metrics::worst_is_min(metric);

    auto raw_value = [&](const PnmRecord& r) -> std::optional<double> {
        if (metric == metrics::kSnr)
            return r.snr_db;
        if (metric == metrics::kTxPower)
            return r.tx_power_dbmv;
        if (metric == metrics::kRxPower)
            return r.rx_power_dbmv;
        if (metric == metrics::kUnerrored)
            return static_cast<double>(r.unerrored);
        if (metric == metrics::kCorrected)
            return static_cast<double>(r.corrected);
        if (metric == metrics::kUncorrectable)
            return static_cast<double>(r.uncorrectable);
        if (metric == metrics::kT3Timeouts)
            return static_cast<double>(r.t3_timeouts);
        if (metric == metrics::kT4Timeouts)
            return static_cast<double>(r.t4_timeouts);
        if (metric == metrics::kMtr)
            return r.mtr_db;
        throw Error(Errc::ConfigInvalid, "unknown metric '" + metric + "'");
    };

    // group per (device, channel) in time order regardless of input order;
    // a repeated (device, ts, channel) key keeps the later row
    std::map<std::string, std::map<std::int64_t, std::map<Timestamp, double>>> grouped;
    for (const PnmRecord& r : records) {
        auto v = raw_value(r);
        if (!v)
            continue;
        grouped[r.device_id][r.channel_freq_hz][r.timestamp] = *v;
    }

    std::map<std::string, DeviceSeries> out;
    for (auto& [device, channels] : grouped) {
        // difference counters per channel, then reduce to the worst channel
        std::map<Timestamp, double> reduced;
        for (auto& [freq, pts] : channels) {
            double prev = 0;
            bool first = true;
            for (auto& [ts, value] : pts) {
                double increment = value;
                if (counter) {
                    double raw = value;
                    if (first) {
                        ; // first observation is its own increment
                    } else if (raw >= prev) {
                        increment = raw - prev;
                    } else {
                        // counter reset: the increment is the new raw value
                        increment = raw;
                    }
                    prev = raw;
                }
                first = false;
                auto [it, inserted] = reduced.emplace(ts, increment);
                if (!inserted)
                    it->second = min_is_worst ? std::min(it->second, increment)
                                              : std::max(it->second, increment);
            }
        }
        if (reduced.empty())
            continue;

        DeviceSeries s;
        s.device_id = device;
        s.metric = metric;
        s.points.reserve(reduced.size());
        for (const auto& [ts, value] : reduced)
            s.points.push_back({ts, value});
        out.emplace(device, std::move(s));
    }
    return out;
}

std::optional<Interval> point_hold(const std::vector<SeriesPoint>& points, std::size_t i,
                                   std::int64_t max_gap_seconds) {
    if (i + 1 >= points.size())
        return std::nullopt; // final point holds nothing
    Timestamp start = points[i].ts;
    Timestamp next = points[i + 1].ts;
    Timestamp end = std::min(next, start + max_gap_seconds);
    if (end <= start)
        return std::nullopt;
    return Interval{start, end};
}

std::optional<Interval> point_hold(const DeviceSeries& s, std::size_t i,
                                   std::int64_t max_gap_seconds) {
    return point_hold(s.points, i, max_gap_seconds);
}

IntervalSet step_coverage(const DeviceSeries& s, std::int64_t max_gap_seconds) {
    IntervalSet out;
    for (std::size_t i = 0; i + 1 < s.points.size(); ++i) {
        if (auto iv = point_hold(s, i, max_gap_seconds))
            out.add(*iv);
    }
    return out;
}

} // namespace pnmkit
