// SPDX-License-Identifier: Apache-2.0
#include "pnmkit/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "json.hpp"
#include "pnmkit/error.hpp"
#include "pnmkit/parallel.hpp"

namespace pnmkit {

namespace {

// step-function value at time t: latest point at or before t, within its
// max_gap hold
std::optional<double> value_at(const DeviceSeries& s, Timestamp t, std::int64_t max_gap) {
    auto it = std::upper_bound(s.points.begin(), s.points.end(), t,
                               [](Timestamp v, const SeriesPoint& p) { return v < p.ts; });
    if (it == s.points.begin())
        return std::nullopt;
    const SeriesPoint& p = *std::prev(it);
    if (t - p.ts >= max_gap && t != p.ts)
        return std::nullopt;
    return p.value;
}

} // namespace

std::optional<double> pairwise_similarity(const DeviceSeries& a, const DeviceSeries& b,
                                          Interval window, std::int64_t max_gap_seconds,
                                          int min_overlap) {
    // union grid of both devices' collection times within the window
    std::vector<Timestamp> grid;
    auto collect = [&](const DeviceSeries& s) {
        for (const SeriesPoint& p : s.points) {
            if (p.ts >= window.start && p.ts < window.end)
                grid.push_back(p.ts);
        }
    };
    collect(a);
    collect(b);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<double> xs, ys;
    xs.reserve(grid.size());
    ys.reserve(grid.size());
    for (Timestamp t : grid) {
        auto va = value_at(a, t, max_gap_seconds);
        auto vb = value_at(b, t, max_gap_seconds);
        if (va && vb) {
            xs.push_back(*va);
            ys.push_back(*vb);
        }
    }
    if (static_cast<int>(xs.size()) < min_overlap)
        return std::nullopt;

    const std::size_t n = xs.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    const bool a_const = sxx == 0;
    const bool b_const = syy == 0;
    if (a_const || b_const)
        return (a_const && b_const) ? 1.0 : 0.0;
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

SimilarityMatrix build_similarity_matrix(
    const std::map<std::string, const DeviceSeries*>& series_by_device, Interval window,
    std::int64_t max_gap_seconds) {
    SimilarityMatrix m;
    m.devices.reserve(series_by_device.size());
    for (const auto& [device, series] : series_by_device)
        m.devices.push_back(device);
    const std::size_t n = m.devices.size();
    m.values.assign(n * n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const DeviceSeries* si = series_by_device.at(m.devices[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
            const DeviceSeries* sj = series_by_device.at(m.devices[j]);
            double v = -1.0;
            if (si && sj)
                v = pairwise_similarity(*si, *sj, window, max_gap_seconds).value_or(-1.0);
            m.values[i * n + j] = v;
            m.values[j * n + i] = v;
        }
    }
    return m;
}

int Partition::cluster_count() const {
    std::set<int> labels;
    for (const auto& [device, label] : assignment)
        labels.insert(label);
    return static_cast<int>(labels.size());
}

Partition average_linkage(const SimilarityMatrix& sim, double cutoff) {
    const std::size_t n = sim.size();
    Partition out;
    if (n == 0)
        return out;

    struct Cluster {
        std::vector<std::size_t> members;
        std::string rep; // lexicographically smallest member id
        bool active = true;
    };
    std::vector<Cluster> clusters(n);
    for (std::size_t i = 0; i < n; ++i)
        clusters[i] = {{i}, sim.devices[i], true};

    // cross-cluster similarity sums; mean = sums[i][j] / (|i| * |j|)
    std::vector<std::vector<double>> sums(n, std::vector<double>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j)
                sums[i][j] = sim.at(i, j);
        }
    }

    for (;;) {
        double best_mean = -std::numeric_limits<double>::infinity();
        std::size_t best_i = n, best_j = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (!clusters[i].active)
                continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!clusters[j].active)
                    continue;
                const double mean =
                    sums[i][j] / (static_cast<double>(clusters[i].members.size()) *
                                  static_cast<double>(clusters[j].members.size()));
                bool take = false;
                if (mean > best_mean) {
                    take = true;
                } else if (mean == best_mean && best_i < n) {
                    auto key = [&](std::size_t a, std::size_t b) {
                        return std::minmax(clusters[a].rep, clusters[b].rep);
                    };
                    take = key(i, j) < key(best_i, best_j);
                }
                if (take) {
                    best_mean = mean;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        if (best_i == n || best_mean < cutoff)
            break;

        Cluster& a = clusters[best_i];
        Cluster& b = clusters[best_j];
        a.members.insert(a.members.end(), b.members.begin(), b.members.end());
        a.rep = std::min(a.rep, b.rep);
        b.active = false;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == best_i || !clusters[k].active)
                continue;
            sums[best_i][k] += sums[best_j][k];
            sums[k][best_i] = sums[best_i][k];
        }
    }

    // dense labels ordered by cluster representative
    std::vector<const Cluster*> active;
    for (const Cluster& c : clusters) {
        if (c.active)
            active.push_back(&c);
    }
    std::sort(active.begin(), active.end(),
              [](const Cluster* a, const Cluster* b) { return a->rep < b->rep; });
    for (std::size_t label = 0; label < active.size(); ++label) {
        for (std::size_t member : active[label]->members)
            out.assignment[sim.devices[member]] = static_cast<int>(label);
    }
    return out;
}

namespace {

double comb2(double x) { return x * (x - 1) / 2.0; }

struct PairCounts {
    double same_same = 0; // together in both partitions
    double sum_p = 0;     // sum of C(cluster size, 2) in p
    double sum_q = 0;
    double total_pairs = 0;
};

PairCounts contingency(const Partition& p, const Partition& q) {
    if (p.assignment.size() != q.assignment.size())
        throw Error(Errc::MismatchedDevices, "partitions cover different devices");
    std::map<int, std::size_t> p_sizes, q_sizes;
    std::map<std::pair<int, int>, std::size_t> cells;
    for (const auto& [device, pl] : p.assignment) {
        auto it = q.assignment.find(device);
        if (it == q.assignment.end())
            throw Error(Errc::MismatchedDevices, "device '" + device + "' missing in q");
        ++p_sizes[pl];
        ++q_sizes[it->second];
        ++cells[{pl, it->second}];
    }
    PairCounts out;
    out.total_pairs = comb2(static_cast<double>(p.assignment.size()));
    for (const auto& [label, size] : p_sizes)
        out.sum_p += comb2(static_cast<double>(size));
    for (const auto& [label, size] : q_sizes)
        out.sum_q += comb2(static_cast<double>(size));
    for (const auto& [cell, size] : cells)
        out.same_same += comb2(static_cast<double>(size));
    return out;
}

} // namespace

double rand_index(const Partition& p, const Partition& q) {
    PairCounts c = contingency(p, q);
    if (c.total_pairs == 0)
        return 1.0;
    // disagreements: together in exactly one of the two partitions
    const double disagree = c.sum_p + c.sum_q - 2 * c.same_same;
    return (c.total_pairs - disagree) / c.total_pairs;
}

double adjusted_rand_index(const Partition& p, const Partition& q) {
    PairCounts c = contingency(p, q);
    if (c.total_pairs == 0)
        return 1.0;
    const double expected = c.sum_p * c.sum_q / c.total_pairs;
    const double maximum = 0.5 * (c.sum_p + c.sum_q);
    if (maximum == expected) // both partitions degenerate and identical
        return 1.0;
    return (c.same_same - expected) / (maximum - expected);
}

std::vector<Episode> group_episodes(const std::vector<AnomalyEvent>& events,
                                    const DeviceIndex& index, std::int64_t pad_seconds) {
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

    std::vector<Episode> out;
    Timestamp cur_end = 0;
    for (std::size_t i : order) {
        const AnomalyEvent& e = events[i];
        std::string node = node_of(i);
        if (!out.empty() && out.back().fiber_node == node && e.interval.start < cur_end) {
            cur_end = std::max(cur_end, e.interval.end);
            out.back().event_indices.push_back(i);
        } else {
            out.push_back({node, e.interval, {i}});
            cur_end = e.interval.end;
        }
        out.back().window = {out.back().window.start, cur_end};
    }
    for (Episode& ep : out)
        ep.window = {ep.window.start - pad_seconds, ep.window.end + pad_seconds};
    return out;
}

namespace {

struct EpisodeContext {
    std::vector<std::string> devices; // sorted unique members
    std::map<std::string, SimilarityMatrix> matrices; // per clustering feature
};

EpisodeContext build_episode_context(
    const Episode& ep, const std::vector<AnomalyEvent>& events,
    const std::map<std::string, std::map<std::string, DeviceSeries>>& series,
    const ClusteringOptions& opt) {
    EpisodeContext ctx;
    std::set<std::string> members;
    for (std::size_t i : ep.event_indices)
        members.insert(events[i].device_id);
    ctx.devices.assign(members.begin(), members.end());

    for (const std::string& feature : opt.features) {
        auto feat_it = series.find(feature);
        std::map<std::string, const DeviceSeries*> per_device;
        for (const std::string& d : ctx.devices) {
            const DeviceSeries* s = nullptr;
            if (feat_it != series.end()) {
                auto dev_it = feat_it->second.find(d);
                if (dev_it != feat_it->second.end())
                    s = &dev_it->second;
            }
            per_device[d] = s;
        }
        ctx.matrices.emplace(feature,
                             build_similarity_matrix(per_device, ep.window, opt.max_gap_seconds));
    }
    return ctx;
}

// maintenance = member of a cluster with >= min_group devices
std::set<std::string> maintenance_devices(const Partition& partition, int min_group) {
    std::map<int, std::vector<const std::string*>> by_label;
    for (const auto& [device, label] : partition.assignment)
        by_label[label].push_back(&device);
    std::set<std::string> out;
    for (const auto& [label, members] : by_label) {
        if (static_cast<int>(members.size()) >= min_group) {
            for (const std::string* d : members)
                out.insert(*d);
        }
    }
    return out;
}

} // namespace

TypingResult classify_fault_type(const std::vector<AnomalyEvent>& events,
                                 const std::map<std::string, std::map<std::string, DeviceSeries>>&
                                     series_by_metric_by_device,
                                 const DeviceIndex& index, const SimilarityThresholds& thresholds,
                                 const ClusteringOptions& opt) {
    for (const std::string& feature : opt.features) {
        if (!thresholds.cutoff.count(feature))
            throw Error(Errc::ConfigInvalid, "no similarity cutoff for feature '" + feature + "'");
    }

    TypingResult result;
    result.events = events;
    std::vector<Episode> episodes = group_episodes(events, index, opt.pad_seconds);

    for (std::size_t ep_idx = 0; ep_idx < episodes.size(); ++ep_idx) {
        const Episode& ep = episodes[ep_idx];
        EpisodeContext ctx = build_episode_context(ep, events, series_by_metric_by_device, opt);

        std::map<std::string, Partition> partitions;
        for (const std::string& feature : opt.features)
            partitions.emplace(feature,
                               average_linkage(ctx.matrices.at(feature),
                                               thresholds.cutoff.at(feature)));

        // per device: grouped under each feature?
        std::map<std::string, std::optional<std::string>> device_cluster; // first grouping feature
        std::map<std::string, bool> device_maintenance;
        for (const std::string& d : ctx.devices) {
            int grouped_count = 0;
            std::optional<std::string> cluster_id;
            for (const std::string& feature : opt.features) {
                const Partition& part = partitions.at(feature);
                std::set<std::string> maint = maintenance_devices(part, opt.min_group);
                if (maint.count(d)) {
                    ++grouped_count;
                    if (!cluster_id) {
                        cluster_id = ep.fiber_node + "#ep" + std::to_string(ep_idx) + "#" +
                                     feature + "#c" +
                                     std::to_string(part.assignment.at(d));
                    }
                }
            }
            bool is_maint = opt.combine_any ? grouped_count > 0
                                            : grouped_count == static_cast<int>(opt.features.size());
            device_maintenance[d] = is_maint;
            if (is_maint)
                device_cluster[d] = cluster_id;
        }

        for (std::size_t i : ep.event_indices) {
            AnomalyEvent& e = result.events[i];
            if (device_maintenance[e.device_id]) {
                e.fault_type = FaultType::Maintenance;
                e.cluster_id = device_cluster[e.device_id];
            } else {
                e.fault_type = FaultType::Service;
            }
        }

        // report: every cluster of every feature partition
        for (const std::string& feature : opt.features) {
            const Partition& part = partitions.at(feature);
            const SimilarityMatrix& m = ctx.matrices.at(feature);
            std::map<int, std::vector<std::string>> by_label;
            for (const auto& [device, label] : part.assignment)
                by_label[label].push_back(device);
            for (const auto& [label, members] : by_label) {
                ClusterReportRow row;
                row.fiber_node = ep.fiber_node;
                row.feature = feature;
                row.cluster_id = ep.fiber_node + "#ep" + std::to_string(ep_idx) + "#" + feature +
                                 "#c" + std::to_string(label);
                row.members = members;
                row.type = static_cast<int>(members.size()) >= opt.min_group
                               ? FaultType::Maintenance
                               : FaultType::Service;
                if (members.size() < 2) {
                    row.mean_similarity = 1.0;
                } else {
                    std::unordered_map<std::string, std::size_t> pos;
                    for (std::size_t k = 0; k < m.devices.size(); ++k)
                        pos[m.devices[k]] = k;
                    double sum = 0;
                    std::size_t pairs = 0;
                    for (std::size_t ai = 0; ai < members.size(); ++ai) {
                        for (std::size_t bi = ai + 1; bi < members.size(); ++bi) {
                            sum += m.at(pos[members[ai]], pos[members[bi]]);
                            ++pairs;
                        }
                    }
                    row.mean_similarity = sum / static_cast<double>(pairs);
                }
                result.report.push_back(std::move(row));
            }
        }
    }
    return result;
}

SimilarityThresholds search_similarity_threshold(
    const std::vector<AnomalyEvent>& events,
    const std::map<std::string, std::map<std::string, DeviceSeries>>& series_by_metric_by_device,
    const std::vector<Ticket>& tickets, const DeviceIndex& index,
    const std::vector<double>& grid, const ClusteringOptions& opt, int jobs) {
    if (grid.empty())
        throw Error(Errc::ConfigInvalid, "empty similarity grid");

    std::vector<Ticket> maintenance_tickets;
    for (const Ticket& t : tickets) {
        if (t.is_part_of_primary)
            maintenance_tickets.push_back(t);
    }
    if (maintenance_tickets.empty())
        throw Error(Errc::NoMaintenanceTickets, "cannot calibrate the similarity cutoff");
    DeviceTickets maint = DeviceTickets::build(maintenance_tickets, index);
    static const std::vector<Timestamp> kNone;
    auto times_of = [&](const std::string& d) -> const std::vector<Timestamp>& {
        auto it = maint.by_device.find(d);
        return it == maint.by_device.end() ? kNone : it->second;
    };

    std::vector<Episode> episodes = group_episodes(events, index, opt.pad_seconds);
    std::vector<EpisodeContext> contexts(episodes.size());
    parallel_for(episodes.size(), jobs, [&](std::size_t i) {
        contexts[i] = build_episode_context(episodes[i], events, series_by_metric_by_device, opt);
    });

    SimilarityThresholds out;
    for (const std::string& feature : opt.features) {
        double best_cutoff = grid.front();
        double best_trr = -std::numeric_limits<double>::infinity();
        bool best_defined = false;

        std::vector<std::pair<bool, double>> scores(grid.size()); // (defined, trr_m)
        parallel_for(grid.size(), jobs, [&](std::size_t gi) {
            const double cutoff = grid[gi];
            std::int64_t dur_m = 0, dur_s = 0;
            std::int64_t tick_m = 0, tick_s = 0;
            for (std::size_t e = 0; e < episodes.size(); ++e) {
                const Episode& ep = episodes[e];
                const SimilarityMatrix& m = contexts[e].matrices.at(feature);
                Partition part = average_linkage(m, cutoff);
                std::set<std::string> maint_dev = maintenance_devices(part, opt.min_group);
                for (std::size_t i : ep.event_indices) {
                    const AnomalyEvent& ev = events[i];
                    const std::vector<Timestamp>& times = times_of(ev.device_id);
                    auto lo = std::lower_bound(times.begin(), times.end(), ev.interval.start);
                    auto hi = std::lower_bound(times.begin(), times.end(), ev.interval.end);
                    const std::int64_t n_tickets = hi - lo;
                    if (maint_dev.count(ev.device_id)) {
                        dur_m += ev.interval.duration();
                        tick_m += n_tickets;
                    } else {
                        dur_s += ev.interval.duration();
                        tick_s += n_tickets;
                    }
                }
            }
            if (dur_m == 0 || dur_s == 0) {
                scores[gi] = {false, 0};
                return;
            }
            const double rate_m = static_cast<double>(tick_m) / static_cast<double>(dur_m);
            const double rate_s = static_cast<double>(tick_s) / static_cast<double>(dur_s);
            // no maintenance ticket in service periods is a legitimate best
            const double trr_m = rate_s == 0
                                     ? (rate_m > 0 ? std::numeric_limits<double>::infinity() : 0.0)
                                     : rate_m / rate_s;
            scores[gi] = {true, trr_m};
        });

        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            auto [defined, trr_m] = scores[gi];
            if (!defined)
                continue;
            // ties prefer the higher cutoff: the finest grouping that still
            // captures the maintenance tickets
            if (!best_defined || trr_m > best_trr ||
                (trr_m == best_trr && grid[gi] > best_cutoff)) {
                best_defined = true;
                best_trr = trr_m;
                best_cutoff = grid[gi];
            }
        }
        out.cutoff[feature] = best_cutoff;
        out.trr_m[feature] = best_defined ? best_trr : 0.0;
        out.informative[feature] = best_defined && best_trr >= opt.informative_min_trr;
    }
    return out;
}

void write_cluster_report(std::ostream& out, const std::vector<ClusterReportRow>& rows) {
    for (const ClusterReportRow& row : rows) {
        nlohmann::ordered_json j;
        j["fiber_node"] = row.fiber_node;
        j["feature"] = row.feature;
        j["cluster_id"] = row.cluster_id;
        j["members"] = row.members;
        j["mean_similarity"] = row.mean_similarity;
        j["type"] = fault_type_name(row.type);
        out << j.dump() << '\n';
    }
}

} // namespace pnmkit
