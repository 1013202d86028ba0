// SPDX-License-Identifier: Apache-2.0
#include "pnmkit/intervals.hpp"

#include <algorithm>

namespace pnmkit {

IntervalSet::IntervalSet(std::vector<Interval> intervals) {
    std::erase_if(intervals, [](const Interval& iv) { return iv.end <= iv.start; });
    std::sort(intervals.begin(), intervals.end(),
              [](const Interval& a, const Interval& b) { return a.start < b.start; });
    for (const Interval& iv : intervals) {
        if (!intervals_.empty() && iv.start <= intervals_.back().end)
            intervals_.back().end = std::max(intervals_.back().end, iv.end);
        else
            intervals_.push_back(iv);
    }
}

void IntervalSet::add(Interval iv) {
    if (iv.end <= iv.start)
        return;
    auto first = std::lower_bound(
        intervals_.begin(), intervals_.end(), iv,
        [](const Interval& a, const Interval& b) { return a.end < b.start; });
    auto last = first;
    while (last != intervals_.end() && last->start <= iv.end) {
        iv.start = std::min(iv.start, last->start);
        iv.end = std::max(iv.end, last->end);
        ++last;
    }
    last = intervals_.erase(first, last);
    intervals_.insert(last, iv);
}

std::int64_t IntervalSet::duration() const {
    std::int64_t total = 0;
    for (const Interval& iv : intervals_)
        total += iv.duration();
    return total;
}

bool IntervalSet::contains(Timestamp t) const {
    auto it = std::upper_bound(
        intervals_.begin(), intervals_.end(), t,
        [](Timestamp v, const Interval& iv) { return v < iv.start; });
    return it != intervals_.begin() && std::prev(it)->contains(t);
}

Interval IntervalSet::span() const {
    if (intervals_.empty())
        return {0, 0};
    return {intervals_.front().start, intervals_.back().end};
}

IntervalSet IntervalSet::complement_within(Interval window) const {
    IntervalSet out;
    Timestamp cursor = window.start;
    for (const Interval& iv : intervals_) {
        if (iv.end <= window.start || iv.start >= window.end)
            continue;
        if (iv.start > cursor)
            out.intervals_.push_back({cursor, iv.start});
        cursor = std::max(cursor, iv.end);
    }
    if (cursor < window.end)
        out.intervals_.push_back({cursor, window.end});
    return out;
}

IntervalSet IntervalSet::clipped_to(Interval window) const {
    IntervalSet out;
    for (const Interval& iv : intervals_) {
        Timestamp s = std::max(iv.start, window.start);
        Timestamp e = std::min(iv.end, window.end);
        if (e > s)
            out.intervals_.push_back({s, e});
    }
    return out;
}

IntervalSet IntervalSet::unite(const IntervalSet& a, const IntervalSet& b) {
    IntervalSet out = a;
    for (const Interval& iv : b.intervals_)
        out.add(iv);
    return out;
}

IntervalSet IntervalSet::intersect(const IntervalSet& a, const IntervalSet& b) {
    IntervalSet out;
    std::size_t i = 0, j = 0;
    while (i < a.intervals_.size() && j < b.intervals_.size()) {
        const Interval& x = a.intervals_[i];
        const Interval& y = b.intervals_[j];
        Timestamp s = std::max(x.start, y.start);
        Timestamp e = std::min(x.end, y.end);
        if (e > s)
            out.intervals_.push_back({s, e});
        if (x.end < y.end)
            ++i;
        else
            ++j;
    }
    return out;
}

double jaccard_intervals(const IntervalSet& a, const IntervalSet& b) {
    std::int64_t uni = IntervalSet::unite(a, b).duration();
    if (uni == 0)
        return 1.0;
    std::int64_t inter = IntervalSet::intersect(a, b).duration();
    return static_cast<double>(inter) / static_cast<double>(uni);
}

} // namespace pnmkit
