// SPDX-License-Identifier: Apache-2.0
#include "pnmkit/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "pnmkit/error.hpp"

namespace pnmkit {

std::string rule_kind_name(RuleKind k) {
    switch (k) {
    case RuleKind::OneSidedLow: return "one-sided-low";
    case RuleKind::OneSidedHigh: return "one-sided-high";
    case RuleKind::TwoSided: return "two-sided";
    }
    return "?";
}

RuleKind rule_kind_parse(const std::string& name) {
    if (name == "one-sided-low")
        return RuleKind::OneSidedLow;
    if (name == "one-sided-high")
        return RuleKind::OneSidedHigh;
    if (name == "two-sided")
        return RuleKind::TwoSided;
    throw Error(Errc::ConfigInvalid, "bad rule kind '" + name + "'");
}

bool ThresholdRule::fires(double value) const {
    switch (kind) {
    case RuleKind::OneSidedLow: return value < *thr_low;
    case RuleKind::OneSidedHigh: return value > *thr_high;
    case RuleKind::TwoSided: return value < *thr_low || value > *thr_high;
    }
    return false;
}

TicketingRate ticketing_rate(const IntervalSet& periods, const std::vector<Ticket>& tickets) {
    TicketingRate out;
    std::int64_t seconds = periods.duration();
    if (seconds == 0) {
        out.zero_duration = true;
        return out;
    }
    std::size_t count = 0;
    for (const Ticket& t : tickets) {
        if (periods.contains(t.created_at))
            ++count;
    }
    out.per_hour = static_cast<double>(count) /
                   (static_cast<double>(seconds) / static_cast<double>(kSecondsPerHour));
    return out;
}

DeviceTickets DeviceTickets::build(const std::vector<Ticket>& tickets, const DeviceIndex& index) {
    DeviceTickets out;
    for (const Ticket& t : tickets) {
        const std::vector<std::string>* devices = index.devices_of(t.account_id);
        if (!devices || devices->empty()) {
            ++out.unattributed_tickets;
            continue;
        }
        for (const std::string& d : *devices) {
            out.by_device[d].push_back(t.created_at);
            ++out.attributed_pairs;
        }
    }
    for (auto& [device, times] : out.by_device)
        std::sort(times.begin(), times.end());
    return out;
}

std::vector<WeightedValue> collect_weighted_values(const std::vector<FeatureSeries>& features,
                                                   const DeviceTickets& tickets,
                                                   Interval observation_window,
                                                   std::int64_t max_gap_seconds) {
    std::vector<WeightedValue> out;
    static const std::vector<Timestamp> kNoTickets;
    for (const FeatureSeries& fs : features) {
        auto it = tickets.by_device.find(fs.device_id);
        const std::vector<Timestamp>& times = it == tickets.by_device.end() ? kNoTickets : it->second;
        for (std::size_t i = 0; i < fs.points.size(); ++i) {
            auto hold = point_hold(fs.points, i, max_gap_seconds);
            if (!hold)
                continue;
            Timestamp s = std::max(hold->start, observation_window.start);
            Timestamp e = std::min(hold->end, observation_window.end);
            if (e <= s)
                continue;
            auto lo = std::lower_bound(times.begin(), times.end(), s);
            auto hi = std::lower_bound(times.begin(), times.end(), e);
            out.push_back({fs.points[i].value, e - s,
                           static_cast<std::int32_t>(hi - lo)});
        }
    }
    return out;
}

namespace {

struct SplitTotals {
    std::int64_t dur_abnormal = 0;
    std::int64_t dur_normal = 0;
    std::int64_t tick_abnormal = 0;
    std::int64_t tick_normal = 0;

    bool defined() const {
        return dur_abnormal != 0 && dur_normal != 0 && tick_normal != 0;
    }

    std::optional<double> trr() const {
        if (!defined())
            return std::nullopt;
        double rate_a = static_cast<double>(tick_abnormal) / static_cast<double>(dur_abnormal);
        double rate_n = static_cast<double>(tick_normal) / static_cast<double>(dur_normal);
        return rate_a / rate_n;
    }

    // two-sigma-shrunk ratio used as the search key: the raw argmax over
    // thousands of candidates rewards splits whose few abnormal-side
    // tickets overestimate the rate
    std::optional<double> trr_lower_bound() const {
        if (!defined())
            return std::nullopt;
        double ka = static_cast<double>(tick_abnormal);
        double kn = static_cast<double>(tick_normal);
        double rate_a = (ka - 2 * std::sqrt(ka)) / static_cast<double>(dur_abnormal);
        double rate_n = (kn + 2 * std::sqrt(kn)) / static_cast<double>(dur_normal);
        return rate_a / rate_n;
    }
};

} // namespace

std::optional<double> trr_for_values(std::span<const WeightedValue> values, RuleKind kind,
                                     std::optional<double> thr_low,
                                     std::optional<double> thr_high) {
    SplitTotals t;
    for (const WeightedValue& w : values) {
        bool abnormal = false;
        switch (kind) {
        case RuleKind::OneSidedLow: abnormal = w.value < *thr_low; break;
        case RuleKind::OneSidedHigh: abnormal = w.value > *thr_high; break;
        case RuleKind::TwoSided: abnormal = w.value < *thr_low || w.value > *thr_high; break;
        }
        if (abnormal) {
            t.dur_abnormal += w.duration;
            t.tick_abnormal += w.tickets;
        } else {
            t.dur_normal += w.duration;
            t.tick_normal += w.tickets;
        }
    }
    return t.trr();
}

std::optional<double> trr_for_threshold(const std::vector<FeatureSeries>& features,
                                        const DeviceTickets& tickets, const ThresholdRule& rule,
                                        Interval observation_window,
                                        std::int64_t max_gap_seconds) {
    auto values = collect_weighted_values(features, tickets, observation_window, max_gap_seconds);
    return trr_for_values(values, rule.kind, rule.thr_low, rule.thr_high);
}

namespace {

// Prefix-sum view of values sorted ascending: any threshold split reduces
// to O(log n) boundary lookups.
class SortedSplit {
public:
    explicit SortedSplit(std::vector<WeightedValue> values) : values_(std::move(values)) {
        std::sort(values_.begin(), values_.end(),
                  [](const WeightedValue& a, const WeightedValue& b) { return a.value < b.value; });
        dur_prefix_.resize(values_.size() + 1, 0);
        tick_prefix_.resize(values_.size() + 1, 0);
        for (std::size_t i = 0; i < values_.size(); ++i) {
            dur_prefix_[i + 1] = dur_prefix_[i] + values_[i].duration;
            tick_prefix_[i + 1] = tick_prefix_[i] + values_[i].tickets;
        }
    }

    const std::vector<WeightedValue>& values() const { return values_; }
    bool empty() const { return values_.empty(); }
    double min_value() const { return values_.front().value; }
    double max_value() const { return values_.back().value; }

    // index of the first value >= v
    std::size_t lower(double v) const {
        return std::lower_bound(values_.begin(), values_.end(), v,
                                [](const WeightedValue& w, double x) { return w.value < x; }) -
               values_.begin();
    }
    // index of the first value > v
    std::size_t upper(double v) const {
        return std::upper_bound(values_.begin(), values_.end(), v,
                                [](double x, const WeightedValue& w) { return x < w.value; }) -
               values_.begin();
    }

    // abnormal = strictly below index `below` plus at-or-above index `above`
    SplitTotals split(std::size_t below, std::size_t above) const {
        SplitTotals t;
        const std::size_t n = values_.size();
        t.dur_abnormal = dur_prefix_[below] + (dur_prefix_[n] - dur_prefix_[above]);
        t.tick_abnormal = tick_prefix_[below] + (tick_prefix_[n] - tick_prefix_[above]);
        t.dur_normal = dur_prefix_[n] - t.dur_abnormal;
        t.tick_normal = tick_prefix_[n] - t.tick_abnormal;
        return t;
    }

    /// Distinct candidate thresholds at grid_steps empirical quantiles.
    std::vector<double> quantile_candidates(int grid_steps) const {
        std::vector<double> out;
        const std::size_t n = values_.size();
        for (int s = 0; s <= grid_steps; ++s) {
            std::size_t idx = static_cast<std::size_t>(
                (static_cast<long double>(s) / grid_steps) * (n - 1));
            double v = values_[idx].value;
            if (out.empty() || v != out.back())
                out.push_back(v);
        }
        return out;
    }

private:
    std::vector<WeightedValue> values_;
    std::vector<std::int64_t> dur_prefix_;
    std::vector<std::int64_t> tick_prefix_;
};

struct Candidate {
    std::optional<double> trr;     // empirical ratio, reported
    std::optional<double> key;     // shrunk ratio, compared
    std::int64_t dur_abnormal = 0;
    std::optional<double> thr_low;
    std::optional<double> thr_high;
};

// Higher shrunk ratio wins; undefined sorts below everything; ties prefer
// the smaller abnormal duration, then lower bounds for determinism.
bool better(const Candidate& a, const Candidate& b) {
    if (a.key.has_value() != b.key.has_value())
        return a.key.has_value();
    if (!a.key.has_value())
        return false;
    if (*a.key != *b.key)
        return *a.key > *b.key;
    if (a.dur_abnormal != b.dur_abnormal)
        return a.dur_abnormal < b.dur_abnormal;
    double al = a.thr_low.value_or(-std::numeric_limits<double>::infinity());
    double bl = b.thr_low.value_or(-std::numeric_limits<double>::infinity());
    if (al != bl)
        return al < bl;
    return a.thr_high.value_or(0) < b.thr_high.value_or(0);
}

} // namespace

std::optional<ThresholdRule> learn_threshold_from_values(std::vector<WeightedValue> values,
                                                         const FeatureSpec& spec, RuleKind kind,
                                                         int grid_steps,
                                                         int min_abnormal_tickets) {
    if (grid_steps < 2)
        throw Error(Errc::ConfigInvalid, "grid_steps must be >= 2");
    if (values.empty())
        return std::nullopt;
    SortedSplit sorted(std::move(values));
    if (sorted.min_value() == sorted.max_value())
        return std::nullopt; // constant feature

    const std::vector<double> grid = sorted.quantile_candidates(grid_steps);
    Candidate best;

    auto consider = [&](std::optional<double> lo, std::optional<double> hi) {
        std::size_t below = lo ? sorted.lower(*lo) : 0;
        std::size_t above = hi ? sorted.upper(*hi) : sorted.values().size();
        SplitTotals t = sorted.split(below, above);
        // an anomaly rule labels the minority of time abnormal; majority
        // splits are inverted bands that overfit sparse tickets
        if (t.dur_abnormal > t.dur_normal)
            return;
        if (t.tick_abnormal < min_abnormal_tickets)
            return;
        Candidate c{t.trr(), t.trr_lower_bound(), t.dur_abnormal, lo, hi};
        if (better(c, best))
            best = c;
    };

    switch (kind) {
    case RuleKind::OneSidedLow:
        for (double c : grid)
            consider(c, std::nullopt);
        break;
    case RuleKind::OneSidedHigh:
        for (double c : grid)
            consider(std::nullopt, c);
        break;
    case RuleKind::TwoSided:
        for (std::size_t i = 0; i < grid.size(); ++i) {
            for (std::size_t j = i; j < grid.size(); ++j)
                consider(grid[i], grid[j]);
        }
        break;
    }

    if (!best.trr)
        return std::nullopt;
    ThresholdRule rule;
    rule.spec = spec;
    rule.kind = kind;
    rule.thr_low = best.thr_low;
    rule.thr_high = best.thr_high;
    rule.trr = *best.trr;
    rule.trr_lcb = *best.key; // may be <= 0 for barely-supported splits
    return rule;
}

std::optional<ThresholdRule> learn_threshold(const std::vector<FeatureSeries>& features,
                                             const DeviceTickets& tickets,
                                             Interval observation_window, RuleKind kind,
                                             const LearnOptions& opt) {
    if (features.empty())
        return std::nullopt;
    auto values =
        collect_weighted_values(features, tickets, observation_window, opt.max_gap_seconds);
    return learn_threshold_from_values(std::move(values), features.front().spec, kind,
                                       opt.grid_steps, opt.min_abnormal_tickets);
}

std::vector<ThresholdRule> select_features(const std::vector<ThresholdRule>& rules, int n_final) {
    auto rule_better = [](const ThresholdRule& a, const ThresholdRule& b) {
        if (a.selection_key() != b.selection_key())
            return a.selection_key() > b.selection_key();
        if (a.trr != b.trr)
            return a.trr > b.trr;
        return a.spec.name() < b.spec.name();
    };

    // stage 1: best hyper-parameter variant per (metric, model)
    std::map<std::pair<std::string, FeatureModel>, ThresholdRule> representatives;
    for (const ThresholdRule& r : rules) {
        if (!std::isfinite(r.trr) || !std::isfinite(r.selection_key()))
            continue;
        auto key = std::make_pair(r.spec.metric, r.spec.model);
        auto [it, inserted] = representatives.emplace(key, r);
        if (!inserted && rule_better(r, it->second))
            it->second = r;
    }

    // stage 2: top two representatives per metric
    std::map<std::string, std::vector<ThresholdRule>> per_metric;
    for (const auto& [key, r] : representatives)
        per_metric[key.first].push_back(r);
    std::vector<ThresholdRule> survivors;
    for (auto& [metric, list] : per_metric) {
        std::sort(list.begin(), list.end(), rule_better);
        for (std::size_t i = 0; i < list.size() && i < 2; ++i)
            survivors.push_back(list[i]);
    }

    // stage 3: global top n_final
    std::sort(survivors.begin(), survivors.end(), rule_better);
    if (static_cast<int>(survivors.size()) > n_final)
        survivors.resize(static_cast<std::size_t>(n_final));
    return survivors;
}

LabeledSeries label_device(const std::map<std::string, DeviceSeries>& series_by_metric,
                           std::span<const ThresholdRule> rules,
                           std::vector<std::string>* missing_metrics) {
    LabeledSeries out;
    if (rules.empty() || series_by_metric.empty())
        return out;
    out.device_id = series_by_metric.begin()->second.device_id;

    // label grid = union of collection timestamps across rule metrics
    // (metrics usually share the grid, but mtr may be sparse)
    std::set<Timestamp> grid;
    for (const ThresholdRule& rule : rules) {
        auto it = series_by_metric.find(rule.spec.metric);
        if (it == series_by_metric.end())
            continue;
        for (const SeriesPoint& p : it->second.points)
            grid.insert(p.ts);
    }
    out.ts.assign(grid.begin(), grid.end());
    out.fired.assign(out.ts.size(), 0);

    for (std::size_t k = 0; k < rules.size(); ++k) {
        const ThresholdRule& rule = rules[k];
        auto it = series_by_metric.find(rule.spec.metric);
        if (it == series_by_metric.end() || it->second.points.empty()) {
            if (missing_metrics)
                missing_metrics->push_back(rule.spec.name());
            continue;
        }
        FeatureSeries fs = compute_feature(it->second, rule.spec);
        std::size_t j = 0;
        for (const SeriesPoint& p : fs.points) {
            while (j < out.ts.size() && out.ts[j] < p.ts)
                ++j;
            if (j < out.ts.size() && out.ts[j] == p.ts && rule.fires(p.value))
                out.fired[j] |= (1u << k);
        }
    }
    return out;
}

bool classify_point(const std::map<std::string, DeviceSeries>& series_by_metric,
                    std::span<const ThresholdRule> rules, Timestamp ts) {
    for (const ThresholdRule& rule : rules) {
        auto it = series_by_metric.find(rule.spec.metric);
        if (it == series_by_metric.end() || it->second.points.empty())
            throw Error(Errc::MissingFeature, rule.spec.name());
        FeatureSeries fs = compute_feature(it->second, rule.spec);
        auto pos = std::upper_bound(fs.points.begin(), fs.points.end(), ts,
                                    [](Timestamp t, const SeriesPoint& p) { return t < p.ts; });
        if (pos == fs.points.begin())
            throw Error(Errc::MissingFeature,
                        rule.spec.name() + " has no data at the queried time");
        if (rule.fires(std::prev(pos)->value))
            return true;
    }
    return false;
}

} // namespace pnmkit
