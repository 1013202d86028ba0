// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "pnmkit/core.hpp"

namespace pnmkit {

/// A set of pairwise-disjoint, sorted, non-empty half-open intervals.
/// All durations are exact integer seconds.
class IntervalSet {
public:
    IntervalSet() = default;
    explicit IntervalSet(std::vector<Interval> intervals); // normalizes

    /// Union-adds an interval, merging with any it touches or overlaps.
    void add(Interval iv);

    std::int64_t duration() const;
    bool contains(Timestamp t) const;
    bool empty() const { return intervals_.empty(); }
    std::size_t size() const { return intervals_.size(); }
    const std::vector<Interval>& intervals() const { return intervals_; }

    /// Bounding interval of the set; {0,0} when empty.
    Interval span() const;

    IntervalSet complement_within(Interval window) const;
    IntervalSet clipped_to(Interval window) const;

    static IntervalSet unite(const IntervalSet& a, const IntervalSet& b);
    static IntervalSet intersect(const IntervalSet& a, const IntervalSet& b);

    bool operator==(const IntervalSet&) const = default;

private:
    std::vector<Interval> intervals_;
};

/// duration(a ∩ b) / duration(a ∪ b); 1 when both are empty.
double jaccard_intervals(const IntervalSet& a, const IntervalSet& b);

} // namespace pnmkit
