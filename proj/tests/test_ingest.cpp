// SPDX-License-Identifier: Apache-2.0
#include <map>
#include <sstream>

#include "doctest.h"
#include "pnmkit/error.hpp"
#include "pnmkit/ingest.hpp"
#include "pnmkit/rng.hpp"

using namespace pnmkit;

namespace {

const char* kHeader = "ts,mac,account,freq,snr,tx,rx,unerr,corr,uncorr,t3,t4,mtr,fiber_node\n";

std::string row(Timestamp ts, const std::string& mac, const std::string& snr = "35.0") {
    return std::to_string(ts) + "," + mac + ",acct-1,10000000," + snr +
           ",45,0,100,5,1,0,0,25,fn-1\n";
}

} // namespace

TEST_CASE("parse_pnm_csv: well-formed file") {
    std::stringstream in(std::string(kHeader) + row(1000, "cm-1") + row(2000, "cm-1") +
                         row(1000, "cm-2"));
    auto result = parse_pnm_csv(in);
    CHECK(result.records.size() == 3);
    CHECK(result.stats.rows_dropped == 0);
    // sorted by (device, ts)
    CHECK(result.records[0].device_id == "cm-1");
    CHECK(result.records[0].timestamp == 1000);
    CHECK(result.records[2].device_id == "cm-2");
}

TEST_CASE("parse_pnm_csv: bad row dropped with row number") {
    std::stringstream in(std::string(kHeader) + row(1000, "cm-1") +
                         row(2000, "cm-1", "not-a-number") + row(3000, "cm-1"));
    auto result = parse_pnm_csv(in);
    CHECK(result.records.size() == 2);
    CHECK(result.stats.rows_dropped == 1);
    REQUIRE(result.stats.drop_details.size() == 1);
    CHECK(result.stats.drop_details[0].first == 3); // header is row 1
    CHECK(result.stats.drop_details[0].second.find("snr") != std::string::npos);
}

TEST_CASE("parse_pnm_csv: duplicate key keeps the later row") {
    std::stringstream in(std::string(kHeader) + row(1000, "cm-1", "30") +
                         row(1000, "cm-1", "31") + row(1000, "cm-1", "32"));
    auto result = parse_pnm_csv(in);
    REQUIRE(result.records.size() == 1);
    CHECK(result.stats.duplicates == 2);
    CHECK(result.records[0].snr_db == 32.0);
}

TEST_CASE("parse_pnm_csv: missing column and empty file") {
    std::stringstream empty("");
    CHECK_THROWS_AS(parse_pnm_csv(empty), Error);
    std::stringstream noheader("ts,mac\n1,2\n");
    try {
        parse_pnm_csv(noheader);
        FAIL("expected MissingColumn");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MissingColumn);
    }
}

TEST_CASE("parse_ticket_csv: empty close time stays open, closed<created drops") {
    std::stringstream in("account,created,closed,action,description,part_of_primary,primary_id\n"
                         "acct-1,1000,,Dispatch,slow,0,\n"
                         "acct-2,2000,1500,Dispatch,down,0,\n"
                         "acct-3,2000,2500,Closed,ok,1,pri-7\n");
    auto result = parse_ticket_csv(in);
    REQUIRE(result.tickets.size() == 2);
    CHECK_FALSE(result.tickets[0].closed_at.has_value());
    CHECK(result.stats.rows_dropped == 1);
    CHECK(result.tickets[1].primary_ticket_id == std::optional<std::string>("pri-7"));
}

TEST_CASE("filter_network_tickets: action and keyword rules") {
    Ticket dispatch{"a", 1, {}, "Dispatch", "other", false, {}};
    Ticket educated{"a", 1, {}, "Customer Education", "billing question", false, {}};
    Ticket keyword{"a", 1, {}, "Closed", "customer reports NOISY LINE at night", false, {}};
    auto kept = filter_network_tickets({dispatch, educated, keyword});
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].action == "Dispatch");
    CHECK(kept[1].description.find("NOISY") != std::string::npos);
}

TEST_CASE("filter_network_tickets is idempotent") {
    Rng rng(23);
    std::vector<Ticket> tickets;
    const char* actions[] = {"Dispatch", "Closed", "Customer Education", "Cancelled"};
    const char* descs[] = {"Data Down", "slow speed observed", "billing", "noisy line",
                           "wants upgrade"};
    for (int i = 0; i < 200; ++i) {
        Ticket t;
        t.account_id = "a" + std::to_string(i);
        t.created_at = static_cast<Timestamp>(i);
        t.action = actions[rng.below(4)];
        t.description = descs[rng.below(5)];
        tickets.push_back(t);
    }
    auto once = filter_network_tickets(tickets);
    auto twice = filter_network_tickets(once);
    CHECK(once == twice);
}

TEST_CASE("build_series: counter differencing and reset") {
    std::vector<PnmRecord> records;
    for (int i = 0; i < 3; ++i) {
        PnmRecord r;
        r.device_id = "cm-1";
        r.account_id = "acct-1";
        r.timestamp = 1000 * (i + 1);
        r.channel_freq_hz = 1;
        r.uncorrectable = (i == 0) ? 10 : (i == 1) ? 14 : 14;
        records.push_back(r);
    }
    auto series = build_series(records, "uncorrectable");
    REQUIRE(series.count("cm-1"));
    const auto& pts = series["cm-1"].points;
    REQUIRE(pts.size() == 3);
    CHECK(pts[0].value == 10);
    CHECK(pts[1].value == 4);
    CHECK(pts[2].value == 0);

    // reset: [10, 3] -> [10, 3]
    records.resize(2);
    records[1].uncorrectable = 3;
    auto reset_series = build_series(records, "uncorrectable");
    const auto& rp = reset_series["cm-1"].points;
    REQUIRE(rp.size() == 2);
    CHECK(rp[0].value == 10);
    CHECK(rp[1].value == 3);
}

TEST_CASE("build_series: worst-channel reduction") {
    std::vector<PnmRecord> records;
    for (int c = 0; c < 2; ++c) {
        PnmRecord r;
        r.device_id = "cm-1";
        r.account_id = "acct-1";
        r.timestamp = 1000;
        r.channel_freq_hz = c;
        r.snr_db = (c == 0) ? 30 : 25;
        r.tx_power_dbmv = (c == 0) ? 44 : 47;
        records.push_back(r);
    }
    CHECK(build_series(records, "snr")["cm-1"].points[0].value == 25);     // min is worst
    CHECK(build_series(records, "txpower")["cm-1"].points[0].value == 47); // max is worst
}

TEST_CASE("step function covers exactly last minus first when gaps are short") {
    Rng rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        DeviceSeries s;
        s.device_id = "d";
        s.metric = "snr";
        Timestamp t = 0;
        for (int i = 0; i < 50; ++i) {
            s.points.push_back({t, rng.normal()});
            t += 3600 + static_cast<Timestamp>(rng.below(20 * 3600)); // always < 24h
        }
        IntervalSet cover = step_coverage(s, 24 * 3600);
        CHECK(cover.duration() == s.points.back().ts - s.points.front().ts);
    }
}

TEST_CASE("long gaps are excluded from coverage") {
    DeviceSeries s;
    s.device_id = "d";
    s.metric = "snr";
    s.points = {{0, 1.0}, {10 * 3600, 1.0}, {100 * 3600, 1.0}, {104 * 3600, 1.0}};
    IntervalSet cover = step_coverage(s, 24 * 3600);
    // second hold is capped at 24h; the remaining 66h of the gap vanish
    CHECK(cover.duration() == 10 * 3600 + 24 * 3600 + 4 * 3600);
}

TEST_CASE("device index joins accounts and fiber nodes") {
    std::vector<PnmRecord> records(3);
    records[0].device_id = "cm-1";
    records[0].account_id = "acct-1";
    records[0].fiber_node = "fn-1";
    records[1].device_id = "cm-2";
    records[1].account_id = "acct-1";
    records[1].fiber_node = "fn-2";
    records[2].device_id = "cm-3";
    records[2].account_id = "acct-2";
    auto index = DeviceIndex::build(records);
    REQUIRE(index.devices_of("acct-1"));
    CHECK(index.devices_of("acct-1")->size() == 2);
    CHECK(index.fiber_node_of("cm-2") == "fn-2");
    CHECK(index.fiber_node_of("cm-3") == "");
    CHECK(index.devices.size() == 3);
}

TEST_CASE("10k-row ticket file canonical round-trip is byte-identical") {
    Rng rng(31);
    std::vector<Ticket> tickets;
    for (int i = 0; i < 10000; ++i) {
        Ticket t;
        t.account_id = "acct-" + std::to_string(rng.below(2000));
        t.created_at = static_cast<Timestamp>(rng.below(1u << 28));
        if (rng.uniform() < 0.9)
            t.closed_at = t.created_at + static_cast<Timestamp>(rng.below(1u << 22));
        t.action = rng.uniform() < 0.5 ? "Dispatch" : "Closed";
        t.description = "Data Down";
        t.is_part_of_primary = rng.uniform() < 0.2;
        tickets.push_back(t);
    }
    std::stringstream first;
    write_ticket_csv(first, tickets);
    auto parsed = parse_ticket_csv(first);
    std::stringstream second;
    write_ticket_csv(second, parsed.tickets);
    CHECK(first.str() == second.str());
}
