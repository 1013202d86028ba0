// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "pnmkit/core.hpp"
#include "pnmkit/csv.hpp"
#include "pnmkit/ingest.hpp"
#include "pnmkit/intervals.hpp"
#include "pnmkit/rng.hpp"

using namespace pnmkit;

namespace {

PnmRecord sample_record() {
    PnmRecord r;
    r.device_id = "cm-1";
    r.account_id = "acct-1";
    r.timestamp = 1000;
    r.channel_freq_hz = 10000000;
    r.snr_db = 35.2;
    r.tx_power_dbmv = 45.0;
    r.rx_power_dbmv = 0.5;
    r.unerrored = 100;
    r.corrected = 5;
    r.uncorrectable = 1;
    r.t3_timeouts = 0;
    r.t4_timeouts = 0;
    return r;
}

} // namespace

TEST_CASE("validate_record accepts a clean record") {
    CHECK(validate_record(sample_record()).empty());
}

TEST_CASE("validate_record reports non-finite metrics") {
    PnmRecord r = sample_record();
    r.snr_db = std::numeric_limits<double>::quiet_NaN();
    auto v = validate_record(r);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == RecordViolation::Kind::NonFiniteMetric);
    CHECK(v[0].field == "snr_db");
}

TEST_CASE("counter drop is a reset annotation, not a violation") {
    PnmRecord a = sample_record();
    PnmRecord b = sample_record();
    b.timestamp = 2000;
    a.uncorrectable = 500;
    b.uncorrectable = 3;
    CHECK(validate_record(a).empty());
    CHECK(validate_record(b).empty());
    auto resets = find_counter_resets({a, b});
    REQUIRE(resets.size() == 1);
    CHECK(resets[0].field == "uncorrectable");
    CHECK(resets[0].timestamp == 2000);
}

TEST_CASE("interval set: add merges overlapping and touching") {
    IntervalSet s;
    s.add({0, 10});
    s.add({20, 30});
    s.add({10, 20}); // touches both
    CHECK(s.size() == 1);
    CHECK(s.duration() == 30);
    CHECK(s.contains(0));
    CHECK(s.contains(29));
    CHECK_FALSE(s.contains(30));
}

TEST_CASE("interval set: complement partitions the window exactly") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        IntervalSet s;
        Interval window{0, 100000};
        int n = static_cast<int>(rng.below(20));
        for (int i = 0; i < n; ++i) {
            Timestamp a = static_cast<Timestamp>(rng.below(110000)) - 5000;
            Timestamp b = a + 1 + static_cast<Timestamp>(rng.below(9000));
            s.add({a, b});
        }
        IntervalSet inside = s.clipped_to(window);
        IntervalSet comp = s.complement_within(window);
        CHECK(inside.duration() + comp.duration() == window.duration());
        CHECK(IntervalSet::intersect(inside, comp).duration() == 0);
    }
}

TEST_CASE("interval set: union and intersection against membership scan") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        IntervalSet a, b;
        for (int i = 0; i < 8; ++i) {
            Timestamp s1 = static_cast<Timestamp>(rng.below(1000));
            Timestamp s2 = static_cast<Timestamp>(rng.below(1000));
            a.add({s1, s1 + 1 + static_cast<Timestamp>(rng.below(50))});
            b.add({s2, s2 + 1 + static_cast<Timestamp>(rng.below(50))});
        }
        IntervalSet uni = IntervalSet::unite(a, b);
        IntervalSet inter = IntervalSet::intersect(a, b);
        for (Timestamp t = 0; t < 1100; ++t) {
            CHECK(uni.contains(t) == (a.contains(t) || b.contains(t)));
            CHECK(inter.contains(t) == (a.contains(t) && b.contains(t)));
        }
    }
}

TEST_CASE("jaccard hand cases") {
    IntervalSet a, b;
    CHECK(jaccard_intervals(a, b) == 1.0);
    a.add({0, 10});
    b.add({5, 15});
    CHECK(jaccard_intervals(a, b) == doctest::Approx(1.0 / 3).epsilon(1e-12));
    IntervalSet c;
    c.add({100, 200});
    CHECK(jaccard_intervals(a, c) == 0.0);
    CHECK(jaccard_intervals(a, a) == 1.0);
}

TEST_CASE("pnm record csv round-trip is bit-exact") {
    Rng rng(13);
    std::vector<PnmRecord> records;
    for (int i = 0; i < 500; ++i) {
        PnmRecord r = sample_record();
        r.device_id = "cm-" + std::to_string(rng.below(50));
        r.account_id = "acct,with\"quote" + std::to_string(rng.below(50));
        r.timestamp = static_cast<Timestamp>(rng.below(1u << 30));
        r.channel_freq_hz = 10000000 + 6400000 * static_cast<std::int64_t>(rng.below(4));
        r.snr_db = rng.normal(35, 20);
        r.tx_power_dbmv = rng.uniform(-1e6, 1e6);
        r.rx_power_dbmv = rng.normal() * std::pow(10.0, rng.uniform(-20, 20));
        r.unerrored = rng.next_u64() >> 12;
        r.corrected = rng.below(1000);
        r.uncorrectable = rng.below(10);
        r.t3_timeouts = rng.below(5);
        r.t4_timeouts = rng.below(3);
        if (rng.uniform() < 0.5)
            r.mtr_db = rng.normal(25, 10);
        if (rng.uniform() < 0.5)
            r.fiber_node = "fn-" + std::to_string(rng.below(10));
        records.push_back(r);
    }
    std::sort(records.begin(), records.end(), [](const PnmRecord& a, const PnmRecord& b) {
        return std::tie(a.device_id, a.timestamp, a.channel_freq_hz) <
               std::tie(b.device_id, b.timestamp, b.channel_freq_hz);
    });
    // distinct keys so the duplicate rule cannot bite
    records.erase(std::unique(records.begin(), records.end(),
                              [](const PnmRecord& a, const PnmRecord& b) {
                                  return a.device_id == b.device_id &&
                                         a.timestamp == b.timestamp &&
                                         a.channel_freq_hz == b.channel_freq_hz;
                              }),
                  records.end());

    std::stringstream buf;
    write_pnm_csv(buf, records);
    auto parsed = parse_pnm_csv(buf);
    CHECK(parsed.stats.rows_dropped == 0);
    REQUIRE(parsed.records.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        CHECK(parsed.records[i] == records[i]);
}

TEST_CASE("ticket csv round-trip is bit-exact") {
    Rng rng(17);
    std::vector<Ticket> tickets;
    for (int i = 0; i < 300; ++i) {
        Ticket t;
        t.account_id = "acct-" + std::to_string(i);
        t.created_at = static_cast<Timestamp>(rng.below(1u << 30));
        if (rng.uniform() < 0.8)
            t.closed_at = t.created_at + static_cast<Timestamp>(rng.below(1u << 20));
        t.action = (i % 3 == 0) ? "Dispatch" : "Closed, no action";
        t.description = "line is \"noisy\"\nsecond line, with comma";
        t.is_part_of_primary = rng.uniform() < 0.3;
        if (t.is_part_of_primary)
            t.primary_ticket_id = "pri-" + std::to_string(rng.below(10));
        tickets.push_back(t);
    }
    std::stringstream buf;
    write_ticket_csv(buf, tickets);
    auto parsed = parse_ticket_csv(buf);
    CHECK(parsed.stats.rows_dropped == 0);
    REQUIRE(parsed.tickets.size() == tickets.size());
    for (std::size_t i = 0; i < tickets.size(); ++i)
        CHECK(parsed.tickets[i] == tickets[i]);
}

TEST_CASE("format_double round-trips exactly") {
    Rng rng(19);
    for (int i = 0; i < 2000; ++i) {
        double v = rng.normal() * std::pow(10.0, rng.uniform(-300, 300));
        auto parsed = csv::parse_double(csv::format_double(v));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == v);
    }
}
