// SPDX-License-Identifier: Apache-2.0
#include "pnmkit/detection.hpp"

#include <algorithm>
#include <deque>
#include <ostream>

#include "pnmkit/csv.hpp"
#include "pnmkit/error.hpp"
#include "pnmkit/evaluation.hpp"
#include "pnmkit/parallel.hpp"

namespace pnmkit {

std::string fault_type_name(FaultType t) {
    return t == FaultType::Maintenance ? "maintenance" : "service";
}

std::vector<std::string> trigger_rule_names(std::uint32_t mask,
                                            std::span<const ThresholdRule> rules) {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < rules.size(); ++k) {
        if (mask & (1u << k))
            out.push_back(rules[k].spec.name());
    }
    return out;
}

std::vector<AnomalyEvent> sliding_window_detect(const LabeledSeries& labels,
                                                const DetectOptions& opt) {
    if (opt.window_x < 1 || opt.window_x > opt.window_y)
        throw Error(Errc::ConfigInvalid, "need 1 <= x <= y");

    std::vector<AnomalyEvent> out;
    std::deque<std::uint32_t> window; // fired masks of the trailing <= y points
    int abnormal_in_window = 0;
    bool open = false;
    AnomalyEvent cur;

    auto close_at = [&](Timestamp end) {
        cur.interval.end = end;
        out.push_back(cur);
        open = false;
    };

    for (std::size_t i = 0; i < labels.ts.size(); ++i) {
        if (i > 0) {
            std::int64_t gap = labels.ts[i] - labels.ts[i - 1];
            if (gap > opt.max_gap_seconds) {
                // the step function breaks: restart the window, and an open
                // event cannot outlive the previous point's capped hold
                if (open)
                    close_at(labels.ts[i - 1] + opt.max_gap_seconds);
                window.clear();
                abnormal_in_window = 0;
            }
        }

        const std::uint32_t mask = labels.fired[i];
        window.push_back(mask);
        if (mask)
            ++abnormal_in_window;
        if (static_cast<int>(window.size()) > opt.window_y) {
            if (window.front())
                --abnormal_in_window;
            window.pop_front();
        }

        if (!open && abnormal_in_window >= opt.window_x) {
            open = true;
            cur = AnomalyEvent{};
            cur.device_id = labels.device_id;
            cur.interval.start = labels.ts[i];
            cur.n_abnormal_points = abnormal_in_window;
            for (std::uint32_t m : window)
                cur.trigger_mask |= m;
        } else if (open) {
            if (abnormal_in_window < opt.window_x) {
                close_at(labels.ts[i]);
            } else if (mask) {
                ++cur.n_abnormal_points;
                cur.trigger_mask |= mask;
            }
        }
    }
    if (open && !labels.ts.empty())
        close_at(labels.ts.back() + 1); // still faulty at the end of the data

    return out;
}

SweepResult sweep_window_params(const std::vector<LabeledSeries>& labels,
                                const std::vector<Ticket>& tickets, const DeviceIndex& index,
                                Interval observation_window, const std::vector<int>& y_range,
                                double coverage_floor, std::int64_t max_gap_seconds, int jobs) {
    if (y_range.empty())
        throw Error(Errc::ConfigInvalid, "empty y range");

    std::vector<std::pair<int, int>> cells;
    for (int y : y_range) {
        for (int x = 1; x <= y; ++x)
            cells.emplace_back(x, y);
    }

    SweepResult result;
    result.table.resize(cells.size());
    parallel_for(cells.size(), jobs, [&](std::size_t c) {
        auto [x, y] = cells[c];
        DetectOptions opt{x, y, max_gap_seconds};
        std::vector<AnomalyEvent> events;
        for (const LabeledSeries& ls : labels) {
            auto dev_events = sliding_window_detect(ls, opt);
            events.insert(events.end(), dev_events.begin(), dev_events.end());
        }
        SweepCell cell;
        cell.x = x;
        cell.y = y;
        cell.accuracy = ticket_prediction_accuracy(events, tickets, index);
        cell.coverage = ticket_coverage(events, tickets, index).coverage;
        cell.normalized_rate =
            normalized_ticketing_rate(events, tickets, index, observation_window);
        result.table[c] = cell;
    });

    const SweepCell* best = nullptr;
    for (const SweepCell& cell : result.table) {
        if (!cell.accuracy || !cell.coverage || *cell.coverage < coverage_floor)
            continue;
        if (!best) {
            best = &cell;
            continue;
        }
        double a = *cell.accuracy, b = *best->accuracy;
        if (a != b) {
            if (a > b)
                best = &cell;
            continue;
        }
        double nr = cell.normalized_rate.value_or(0), bnr = best->normalized_rate.value_or(0);
        if (nr != bnr) {
            if (nr > bnr)
                best = &cell;
            continue;
        }
        if (cell.y != best->y) {
            if (cell.y < best->y)
                best = &cell;
            continue;
        }
        if (cell.x < best->x)
            best = &cell;
    }
    if (!best)
        throw Error(Errc::NoFeasibleParams,
                    "no (x, y) reaches coverage floor " + csv::format_double(coverage_floor));
    result.best_x = best->x;
    result.best_y = best->y;
    return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
    csv::Writer w(out);
    w.write_row({"x", "y", "accuracy", "coverage", "normalized_rate"});
    auto fmt = [](const std::optional<double>& v) {
        return v ? csv::format_double(*v) : std::string();
    };
    for (const SweepCell& c : sweep.table)
        w.write_row({std::to_string(c.x), std::to_string(c.y), fmt(c.accuracy),
                     fmt(c.coverage), fmt(c.normalized_rate)});
}

} // namespace pnmkit
