// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one criterion per function, one PASS/FAIL line each.
// Exit code = number of failed criteria. The CLI binary path (for the
// determinism criterion) comes from argv[1] or PNMKIT_CLI.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "pnmkit/clustering.hpp"
#include "pnmkit/error.hpp"
#include "pnmkit/pipeline.hpp"
#include "pnmkit/rng.hpp"
#include "pnmkit/synthgen.hpp"
#include "support/oracles.hpp"

using namespace pnmkit;
namespace fs = std::filesystem;

namespace {

std::string g_cli_path;

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }

    void note(const std::string& info) {
        if (ok)
            detail = info;
    }
};

// ---------------------------------------------------------------- criterion 1

Check feature_oracle_equivalence() {
    Check c;
    Rng rng(1001);
    const auto specs = FeatureSpec::all_for_metric("snr");
    for (int series_i = 0; series_i < 100 && c.ok; ++series_i) {
        DeviceSeries s;
        s.device_id = "d";
        s.metric = "snr";
        int n = 1 + static_cast<int>(rng.below(500));
        Timestamp t = 1546732800;
        for (int i = 0; i < n; ++i) {
            s.points.push_back({t, rng.normal(35, 10)});
            t += 2 * 3600 + static_cast<Timestamp>(rng.below(6 * 3600));
            if (rng.uniform() < 0.01)
                t += 3 * kSecondsPerDay; // occasional collection outage
        }
        for (const FeatureSpec& spec : specs) {
            FeatureSeries got = compute_feature(s, spec);
            std::vector<double> want;
            switch (spec.model) {
            case FeatureModel::Avg: want = oracle::avg(s, spec.window_days); break;
            case FeatureModel::Wma: want = oracle::wma(s, spec.window_days); break;
            case FeatureModel::WmaDiff: want = oracle::wma_diff(s, spec.window_days); break;
            case FeatureModel::Var: want = oracle::variance(s, spec.window_days); break;
            case FeatureModel::Ewma: want = oracle::ewma_closed_form(s, spec.lambda); break;
            }
            for (int i = 0; i < n; ++i) {
                if (std::abs(got.points[i].value - want[i]) >= 1e-9) {
                    c.require(false, spec.name() + " deviates at point " +
                                         std::to_string(i) + " of series " +
                                         std::to_string(series_i));
                    break;
                }
            }
            if (!c.ok)
                break;
        }
    }
    return c;
}

// ---------------------------------------------------------------- criterion 2

SynthConfig dmax_config() {
    SynthConfig cfg;
    cfg.seed = 20260801;
    cfg.n_fiber_nodes = 25;
    cfg.devices_per_node = 40; // 1000 devices
    cfg.duration_days = 90;
    cfg.cadence_hours = 4;
    cfg.lambda_n_per_hour = 0.002;
    cfg.lambda_a_per_hour = 0.018; // ratio 9 -> D_max = 10
    for (int node = 0; node < 25; ++node) {
        for (int k = 0; k < 5; ++k) {
            // 5 staggered 72h group faults per node, ~3.3% of device-time
            double start = 24 + (node % 8) * 36 + k * 408;
            cfg.faults.push_back({FaultType::Maintenance, node, {}, 8, start, 72,
                                  {{"txpower", 8}}});
        }
    }
    return cfg;
}

Check dmax_recovery() {
    Check c;
    SynthOutput data = generate(dmax_config());
    const SynthConfig cfg = dmax_config();
    const std::int64_t cadence = 4 * 3600;
    const std::int64_t n_points = cfg.duration_days * kSecondsPerDay / cadence;

    // planted separable feature: 0 at baseline, 10 inside that device's
    // ground-truth fault periods
    DeviceIndex index = DeviceIndex::build(data.records);
    std::vector<FeatureSeries> features;
    std::vector<std::vector<bool>> in_fault;
    for (const std::string& device : index.devices) {
        IntervalSet periods = data.truth.fault_periods(device);
        FeatureSeries fs;
        fs.spec = {"planted", FeatureModel::Var, 1, 0};
        fs.device_id = device;
        std::vector<bool> flags;
        for (std::int64_t k = 0; k < n_points; ++k) {
            Timestamp ts = cfg.start_time + k * cadence;
            bool faulty = periods.contains(ts);
            fs.points.push_back({ts, faulty ? 10.0 : 0.0});
            flags.push_back(faulty);
        }
        features.push_back(std::move(fs));
        in_fault.push_back(std::move(flags));
    }

    std::vector<Ticket> net = filter_network_tickets(data.tickets);
    DeviceTickets tickets = DeviceTickets::build(net, index);
    Interval window = data_window(data.records);

    auto rule = learn_threshold(features, tickets, window, RuleKind::OneSidedHigh);
    c.require(rule.has_value(), "no threshold learned");
    if (!c.ok)
        return c;

    c.require(std::abs(rule->trr - 10.0) <= 1.5,
              "measured max ratio " + std::to_string(rule->trr) + " not within 15% of 10");
    c.note("max ratio " + std::to_string(rule->trr));

    // zero misclassified collection periods on the noise-free feature
    for (std::size_t d = 0; d < features.size() && c.ok; ++d) {
        const auto& pts = features[d].points;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            if (rule->fires(pts[i].value) != in_fault[d][i]) {
                c.require(false, "misclassified period on " + features[d].device_id);
                break;
            }
        }
    }
    return c;
}

// ---------------------------------------------------------------- criterion 3

Check monotone_degradation() {
    Check c;
    // noise-free fixture: distinct hourly values, fault block far above the
    // baseline range, tickets placed deterministically (2 per fault period,
    // 1 in each of the lowest-value normal periods)
    // 1000 of 4000 points faulty so the quantile grid has many candidates
    // on both sides of the boundary within +-10 steps
    const int n = 4000;
    const int fault_lo = 2000, fault_hi = 3000;
    std::vector<double> values(n);
    std::vector<Timestamp> tickets;
    for (int i = 0; i < n; ++i) {
        bool faulty = i >= fault_lo && i < fault_hi;
        values[i] = faulty ? 1000.0 + i : 0.001 * i;
        Timestamp base = static_cast<Timestamp>(i) * 3600;
        if (faulty) {
            tickets.push_back(base + 600);
            tickets.push_back(base + 1200);
        } else if (i < 300) { // low-value periods, far below the boundary
            tickets.push_back(base + 1800);
        }
    }
    FeatureSeries fs;
    fs.spec = {"planted", FeatureModel::Var, 1, 0};
    fs.device_id = "d";
    for (int i = 0; i < n; ++i)
        fs.points.push_back({static_cast<Timestamp>(i) * 3600, values[i]});
    DeviceTickets dt;
    dt.by_device["d"] = tickets;

    const int grid_steps = 200;
    Interval window{0, static_cast<Timestamp>(n) * 3600};
    auto weighted = collect_weighted_values({fs}, dt, window, 24 * 3600);
    auto rule = learn_threshold_from_values(weighted, fs.spec, RuleKind::OneSidedHigh,
                                            grid_steps);
    c.require(rule.has_value(), "no threshold learned");
    if (!c.ok)
        return c;
    auto measured = [&](double thr) {
        return trr_for_values(weighted, RuleKind::OneSidedHigh, std::nullopt, thr);
    };
    auto best = measured(*rule->thr_high);
    c.require(best.has_value(), "learned threshold has undefined ratio");

    // the implementation's candidate grid: quantiles of the sorted values
    std::vector<WeightedValue> sorted = weighted;
    std::sort(sorted.begin(), sorted.end(),
              [](const WeightedValue& a, const WeightedValue& b) { return a.value < b.value; });
    std::vector<double> grid;
    for (int s = 0; s <= grid_steps; ++s) {
        double v = sorted[static_cast<std::size_t>(
                              (static_cast<long double>(s) / grid_steps) *
                              (sorted.size() - 1))]
                       .value;
        if (grid.empty() || v != grid.back())
            grid.push_back(v);
    }
    auto pos = std::lower_bound(grid.begin(), grid.end(), *rule->thr_high) - grid.begin();
    c.require(grid[static_cast<std::size_t>(pos)] == *rule->thr_high,
              "learned threshold not on the candidate grid");

    for (int k = 1; k <= 10 && c.ok; ++k) {
        if (pos - k >= 0) {
            auto t = measured(grid[static_cast<std::size_t>(pos - k)]);
            c.require(t.has_value() && *t <= *best,
                      "ratio increased " + std::to_string(k) + " steps down");
        }
        if (pos + k < static_cast<std::ptrdiff_t>(grid.size())) {
            auto t = measured(grid[static_cast<std::size_t>(pos + k)]);
            c.require(t.has_value() && *t <= *best,
                      "ratio increased " + std::to_string(k) + " steps up");
        }
    }
    return c;
}

// ---------------------------------------------------------------- criterion 4

Check sliding_window_equivalence() {
    Check c;
    Rng rng(4001);
    const std::int64_t max_gap = 24 * 3600;
    for (int trial = 0; trial < 1000 && c.ok; ++trial) {
        LabeledSeries labels;
        labels.device_id = "d";
        int n = 1 + static_cast<int>(rng.below(400));
        double p = rng.uniform(0.05, 0.7);
        Timestamp t = 0;
        for (int i = 0; i < n; ++i) {
            labels.ts.push_back(t);
            labels.fired.push_back(rng.uniform() < p ? (1u << rng.below(5)) : 0u);
            t += 4 * 3600;
            if (rng.uniform() < 0.02)
                t += 5 * max_gap;
        }
        for (int y = 1; y <= 20 && c.ok; ++y) {
            for (int x = 1; x <= y; ++x) {
                auto got = sliding_window_detect(labels, {x, y, max_gap});
                auto want = oracle::sliding_window(labels, x, y, max_gap);
                if (!oracle::events_equal(got, want)) {
                    c.require(false, "mismatch at trial " + std::to_string(trial) + " x=" +
                                         std::to_string(x) + " y=" + std::to_string(y));
                    break;
                }
            }
        }
    }
    return c;
}

// ---------------------------------------------------------------- criterion 5

SynthConfig e2e_config() {
    SynthConfig cfg;
    cfg.seed = 20260805;
    cfg.n_fiber_nodes = 12;
    cfg.devices_per_node = 10; // 120 devices
    cfg.duration_days = 90;
    cfg.lambda_n_per_hour = 0.004;
    cfg.lambda_a_per_hour = 0.036; // ratio 9
    // ~5% of device-time faulty, spread over both the train and test halves
    for (int node = 0; node < 12; ++node) {
        for (int k = 0; k < 3; ++k) {
            double start = 24.0 * (3 + node * 2 + k * 29);
            std::map<std::string, double> deltas{{"snr", -12.0}, {"txpower", 8.0},
                                                 {"uncorrectable", 40.0}};
            if (node % 3 == 1)
                deltas = {{"txpower", 10.0}, {"t3timeouts", 30.0}};
            cfg.faults.push_back(
                {FaultType::Maintenance, node, {0, 1, 2, 3, 4, 5}, 0, start, 60, deltas});
        }
    }
    // maintenance groups draw from devices 0..5, service faults use 6..7,
    // so no device ever carries two overlapping faults
    for (int k = 0; k < 20; ++k) {
        int node = k % 12;
        int device = 6 + k / 12;
        double start = 24.0 * (10 + k * 4);
        cfg.faults.push_back({FaultType::Service, node, {device}, 0, start, 48,
                              {{"snr", -14.0}, {"uncorrectable", 50.0}}});
    }
    return cfg;
}

Check end_to_end_quality() {
    Check c;
    SynthOutput data = generate(e2e_config());
    Interval full = data_window(data.records);
    Timestamp split = e2e_config().start_time + 60 * kSecondsPerDay;

    PipelineConfig cfg; // defaults: n_features 5, coverage floor 0.15, sweep
    TrainResult trained =
        train_detector(data.records, data.tickets, cfg, Interval{full.start, split}, 4);
    c.require(trained.detector.rules.size() == 5, "expected 5 selected rules");
    c.require(trained.sweep.has_value(), "window parameters should come from the sweep");

    auto events =
        detect_events(trained.detector, data.records, Interval{split, full.end}, 4);
    c.require(!events.empty(), "no events detected on the test split");

    DeviceIndex index = DeviceIndex::build(data.records);
    std::vector<Ticket> net = filter_network_tickets(data.tickets);
    std::erase_if(net, [&](const Ticket& t) {
        return t.created_at < split || t.created_at >= full.end;
    });
    auto accuracy = ticket_prediction_accuracy(events, net, index);
    auto rate = normalized_ticketing_rate(events, net, index, Interval{split, full.end});
    c.require(accuracy.has_value(), "accuracy undefined");
    c.require(rate.has_value(), "normalized rate undefined");
    if (c.ok) {
        c.require(*accuracy >= 0.75,
                  "accuracy " + std::to_string(*accuracy) + " below 0.75");
        c.require(*rate >= 3.0, "normalized rate " + std::to_string(*rate) + " below 3");
        c.note("accuracy " + std::to_string(*accuracy) + ", normalized rate " +
               std::to_string(*rate) + ", " + std::to_string(events.size()) + " events");
    }
    return c;
}

// ---------------------------------------------------------------- criterion 6

Check clustering_oracle_equivalence() {
    Check c;
    Rng rng(6001);
    for (int trial = 0; trial < 200 && c.ok; ++trial) {
        std::size_t n = 2 + rng.below(39);
        SimilarityMatrix m;
        for (std::size_t i = 0; i < n; ++i)
            m.devices.push_back("dev-" + std::to_string(100 + i));
        m.values.assign(n * n, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double v = rng.uniform(-1, 1);
                m.values[i * n + j] = v;
                m.values[j * n + i] = v;
            }
        }
        double cutoff = rng.uniform(-0.2, 0.99);
        Partition got = average_linkage(m, cutoff);
        Partition want = oracle::naive_average_linkage(m, cutoff);
        c.require(got.assignment == want.assignment,
                  "partition mismatch at trial " + std::to_string(trial));
    }
    return c;
}

// ---------------------------------------------------------------- criterion 7

SynthConfig fault_type_config() {
    SynthConfig cfg;
    cfg.seed = 20260807;
    cfg.n_fiber_nodes = 20;
    cfg.devices_per_node = 12; // 240 devices
    cfg.duration_days = 90;
    cfg.lambda_n_per_hour = 0.004;
    cfg.lambda_a_per_hour = 0.05;
    cfg.maintenance_ticket_prob = 0.7;
    cfg.group_noise_fraction = 0.2; // sigma = delta / 5
    // 16 maintenance groups of 7 devices; 100 isolated service faults
    for (int g = 0; g < 16; ++g) {
        std::vector<int> devices;
        for (int d = 0; d < 7; ++d)
            devices.push_back(d);
        double start = 24.0 * (4 + g * 5);
        cfg.faults.push_back({FaultType::Maintenance, g, devices, 0, start, 72,
                              {{"txpower", 8.0}, {"snr", -10.0}}});
    }
    for (int k = 0; k < 100; ++k) {
        int node = k % 20;
        int device = (node < 16) ? 7 + (k / 20) : 2 + (k / 20); // never reused
        double start = 24.0 * (6 + (k % 25) * 3);
        cfg.faults.push_back({FaultType::Service, node, {device}, 0, start, 60,
                              {{"txpower", 9.0}, {"snr", -11.0}}});
    }
    return cfg;
}

Check fault_type_recovery() {
    Check c;
    SynthOutput data = generate(fault_type_config());
    PipelineConfig cfg;
    TrainResult trained = train_detector(data.records, data.tickets, cfg, std::nullopt, 4);
    c.require(trained.detector.similarity.has_value(), "no similarity thresholds learned");
    if (!c.ok)
        return c;

    auto events = detect_events(trained.detector, data.records, std::nullopt, 4);
    TypingResult typed = cluster_events(trained.detector, data.records, events, cfg);

    // predicted partition over the planted-fault devices: the cluster of the
    // event covering the planted interval; devices never grouped stay
    // singletons
    auto truth_groups = data.truth.device_group();
    Partition predicted, truth;
    int next_singleton = 1000000;
    std::map<std::string, int> cluster_labels;
    std::map<std::string, int> truth_labels;
    for (const auto& [device, group] : truth_groups) {
        if (!truth_labels.count(group))
            truth_labels[group] = static_cast<int>(truth_labels.size());
        truth.assignment[device] = truth_labels[group];

        IntervalSet periods = data.truth.fault_periods(device);
        std::optional<std::string> cluster;
        for (const AnomalyEvent& e : typed.events) {
            if (e.device_id != device || !e.cluster_id)
                continue;
            IntervalSet es;
            es.add(e.interval);
            if (IntervalSet::intersect(es, periods).duration() > 0) {
                cluster = e.cluster_id;
                break;
            }
        }
        if (cluster) {
            if (!cluster_labels.count(*cluster))
                cluster_labels[*cluster] = static_cast<int>(cluster_labels.size());
            predicted.assignment[device] = cluster_labels[*cluster];
        } else {
            predicted.assignment[device] = next_singleton++;
        }
    }

    double ri = rand_index(predicted, truth);
    double ari = adjusted_rand_index(predicted, truth);
    c.require(ri >= 0.95, "rand index " + std::to_string(ri) + " below 0.95");
    c.require(ari >= 0.90, "adjusted rand index " + std::to_string(ari) + " below 0.90");
    c.note("RI " + std::to_string(ri) + ", ARI " + std::to_string(ari));
    return c;
}

// ---------------------------------------------------------------- criterion 8

Check ri_ari_correctness() {
    Check c;
    Partition a, b;
    for (int i = 0; i < 50; ++i) {
        a.assignment["dev-" + std::to_string(i)] = i / 7;
        b.assignment["dev-" + std::to_string(i)] = i / 7;
    }
    c.require(rand_index(a, b) == 1.0, "identical partitions: RI != 1");
    c.require(adjusted_rand_index(a, b) == 1.0, "identical partitions: ARI != 1");

    // hand-computed 4-element cases
    Partition p, q;
    p.assignment = {{"a", 0}, {"b", 0}, {"c", 1}, {"d", 1}};
    q.assignment = {{"a", 0}, {"b", 1}, {"c", 0}, {"d", 1}};
    c.require(rand_index(p, q) == 2.0 / 6.0, "RI of ab|cd vs ac|bd is not 2/6");
    Partition one, singletons;
    for (const char* d : {"a", "b", "c", "d"}) {
        one.assignment[d] = 0;
        singletons.assignment[d] = static_cast<int>(singletons.assignment.size());
    }
    c.require(adjusted_rand_index(one, singletons) == 0.0,
              "ARI of one-cluster vs singletons is not 0");

    Rng rng(8001);
    Partition truth;
    for (int i = 0; i < 80; ++i)
        truth.assignment["dev-" + std::to_string(i)] = i / 8;
    double sum = 0;
    for (int t = 0; t < 200; ++t) {
        Partition random;
        for (int i = 0; i < 80; ++i)
            random.assignment["dev-" + std::to_string(i)] =
                static_cast<int>(rng.below(10));
        sum += adjusted_rand_index(truth, random);
    }
    c.require(std::abs(sum / 200) <= 0.05, "mean ARI of random partitions beyond +-0.05");
    return c;
}

// ---------------------------------------------------------------- criterion 9

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Check cli_determinism() {
    Check c;
    if (g_cli_path.empty()) {
        c.require(false, "CLI path not provided (argv[1] or PNMKIT_CLI)");
        return c;
    }
    fs::path base = fs::temp_directory_path() / "pnmkit_accept9";
    fs::remove_all(base);
    fs::create_directories(base);

    // a compact synth config exercising the whole pipeline
    SynthConfig scfg;
    scfg.seed = 909;
    scfg.n_fiber_nodes = 4;
    scfg.devices_per_node = 8;
    scfg.duration_days = 30;
    scfg.lambda_n_per_hour = 0.01;
    scfg.lambda_a_per_hour = 0.09;
    scfg.faults = {
        {FaultType::Maintenance, 0, {}, 5, 24 * 3, 60, {{"snr", -12.0}, {"txpower", 8.0}}},
        {FaultType::Maintenance, 1, {}, 4, 24 * 12, 72, {{"txpower", 10.0}}},
        {FaultType::Maintenance, 2, {}, 4, 24 * 20, 60, {{"snr", -11.0}, {"txpower", 7.0}}},
        {FaultType::Service, 3, {2}, 0, 24 * 8, 48, {{"snr", -14.0}}},
        {FaultType::Service, 3, {5}, 0, 24 * 18, 48, {{"txpower", 9.0}}},
    };
    {
        std::ofstream f(base / "synth.json");
        f << scfg.to_json();
    }

    auto run = [&](const std::string& args) {
        std::string cmd = g_cli_path + " " + args + " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };

    for (const char* jobs : {"1", "4"}) {
        fs::path dir = base / (std::string("run_j") + jobs);
        fs::create_directories(dir);
        std::string d = dir.string();
        int rc = 0;
        rc |= run("synth --synth-config " + (base / "synth.json").string() + " --out-dir " +
                  d + "/data");
        rc |= run("train --pnm " + d + "/data/pnm.csv --tickets " + d +
                  "/data/tickets.csv --out-dir " + d + "/model --jobs " + jobs);
        rc |= run("detect --detector " + d + "/model/detector.json --pnm " + d +
                  "/data/pnm.csv --out-dir " + d + "/out --jobs " + jobs);
        rc |= run("cluster --detector " + d + "/model/detector.json --pnm " + d +
                  "/data/pnm.csv --events " + d + "/out/events.csv --out-dir " + d + "/out");
        rc |= run("eval --events " + d + "/out/typed_events.csv --pnm " + d +
                  "/data/pnm.csv --tickets " + d + "/data/tickets.csv --detector " + d +
                  "/model/detector.json --out-dir " + d + "/out");
        c.require(rc == 0, std::string("pipeline run failed with jobs=") + jobs);
    }
    if (!c.ok)
        return c;

    for (const char* file :
         {"data/pnm.csv", "data/tickets.csv", "data/ground_truth.json",
          "model/detector.json", "model/sweep.csv", "out/events.csv",
          "out/typed_events.csv", "out/clusters.jsonl", "out/metrics.json",
          "out/lifetime_cdf.csv", "out/waiting_cdf.csv", "out/event_length_pdf.csv"}) {
        std::string a = slurp(base / "run_j1" / file);
        std::string b = slurp(base / "run_j4" / file);
        c.require(!a.empty(), std::string(file) + " is empty");
        c.require(a == b, std::string(file) + " differs between --jobs 1 and --jobs 4");
    }
    return c;
}

// --------------------------------------------------------------- criterion 10

Check metric_cross_checks() {
    Check c;
    // all-time events score exactly 1
    std::vector<PnmRecord> records(3);
    for (int i = 0; i < 3; ++i) {
        records[i].device_id = "cm-" + std::to_string(i);
        records[i].account_id = "acct-" + std::to_string(i);
    }
    DeviceIndex index = DeviceIndex::build(records);
    Interval window{0, 500 * 3600};
    std::vector<AnomalyEvent> events;
    for (int i = 0; i < 3; ++i) {
        AnomalyEvent e;
        e.device_id = "cm-" + std::to_string(i);
        e.interval = window;
        events.push_back(e);
    }
    Rng rng(10001);
    std::vector<Ticket> tickets;
    for (int i = 0; i < 100; ++i) {
        Ticket t;
        t.account_id = "acct-" + std::to_string(rng.below(3));
        t.created_at = static_cast<Timestamp>(rng.below(500 * 3600));
        tickets.push_back(t);
    }
    auto rate = normalized_ticketing_rate(events, tickets, index, window);
    c.require(rate.has_value() && *rate == 1.0, "all-time events: rate != 1.0 exactly");

    IntervalSet a, b;
    a.add({0, 10});
    b.add({5, 15});
    c.require(jaccard_intervals(a, b) == 1.0 / 3.0, "jaccard [0,10) vs [5,15) != 1/3");
    c.require(jaccard_intervals(IntervalSet{}, IntervalSet{}) == 1.0,
              "jaccard of empty sets != 1");
    IntervalSet d;
    d.add({100, 110});
    c.require(jaccard_intervals(a, d) == 0.0, "jaccard of disjoint sets != 0");
    return c;
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 1)
        g_cli_path = argv[1];
    else if (const char* env = std::getenv("PNMKIT_CLI"))
        g_cli_path = env;

    struct Criterion {
        const char* name;
        std::function<Check()> fn;
    };
    const Criterion criteria[] = {
        {"1 feature oracle equivalence (37 variants, 1e-9)", feature_oracle_equivalence},
        {"2 rate-ratio maximum recovery (lambda ratio 9 -> ~10)", dmax_recovery},
        {"3 monotone degradation around the learned threshold", monotone_degradation},
        {"4 sliding-window equals brute force (x,y <= 20)", sliding_window_equivalence},
        {"5 end-to-end detection quality on a held-out split", end_to_end_quality},
        {"6 average linkage equals the naive reference", clustering_oracle_equivalence},
        {"7 fault-type recovery (16 groups + 100 service)", fault_type_recovery},
        {"8 rand index / adjusted rand index correctness", ri_ari_correctness},
        {"9 CLI pipeline determinism across runs and --jobs", cli_determinism},
        {"10 metric cross-checks (rate pitfall, jaccard)", metric_cross_checks},
    };

    int failures = 0;
    for (const Criterion& cr : criteria) {
        auto start = std::chrono::steady_clock::now();
        Check result;
        try {
            result = cr.fn();
        } catch (const std::exception& e) {
            result.ok = false;
            result.detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                          .count();
        std::printf("%s criterion %s (%.1fs)%s%s\n", result.ok ? "PASS" : "FAIL", cr.name,
                    secs, result.detail.empty() ? "" : " -- ", result.detail.c_str());
        std::fflush(stdout);
        if (!result.ok)
            ++failures;
    }
    return failures;
}
