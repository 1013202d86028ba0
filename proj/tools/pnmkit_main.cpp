// SPDX-License-Identifier: Apache-2.0
// pnmkit: learns anomaly thresholds for access-network telemetry from
// trouble tickets, detects persistent faults, and separates shared-plant
// from single-premise issues.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "pnmkit/csv.hpp"
#include "pnmkit/error.hpp"
#include "pnmkit/pipeline.hpp"
#include "pnmkit/synthgen.hpp"
#include "pnmkit/version.hpp"

namespace fs = std::filesystem;
using namespace pnmkit;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    int jobs = 1;
    std::optional<std::int64_t> from_ts;
    std::optional<std::int64_t> to_ts;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_window = true) {
    cmd->add_option("--config", args.config_path, "pipeline config file (key = value)")
        ->envname("PNMKIT_CONFIG");
    cmd->add_option("--out-dir", args.out_dir, "output directory")->envname("PNMKIT_OUT_DIR");
    cmd->add_option("--jobs", args.jobs, "worker threads (results are identical for any value)")
        ->envname("PNMKIT_JOBS")
        ->check(CLI::Range(1, 256));
    if (with_window) {
        args.from_ts.reset();
        args.to_ts.reset();
        cmd->add_option("--from", args.from_ts, "observation window start (epoch seconds)");
        cmd->add_option("--to", args.to_ts, "observation window end, exclusive");
    }
}

PipelineConfig load_config(const CommonArgs& args) {
    if (args.config_path.empty())
        return PipelineConfig{};
    return PipelineConfig::load(args.config_path);
}

std::optional<Interval> window_of(const CommonArgs& args,
                                  const std::vector<PnmRecord>& records) {
    if (!args.from_ts && !args.to_ts)
        return std::nullopt;
    Interval full = data_window(records);
    return Interval{args.from_ts.value_or(full.start), args.to_ts.value_or(full.end)};
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    std::string path = dir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::IoError, "cannot write " + path);
    return out;
}

std::string meta_line(const PipelineConfig& cfg, const std::string& extra = "") {
    std::string line = std::string("pnmkit ") + kVersion + " config=" + cfg.hash();
    if (!extra.empty())
        line += " " + extra;
    return line;
}

void report_parse(const char* what, const ParseStats& stats) {
    std::cerr << what << ": " << stats.rows_total - stats.rows_dropped << " rows";
    if (stats.rows_dropped)
        std::cerr << ", " << stats.rows_dropped << " dropped";
    if (stats.duplicates)
        std::cerr << ", " << stats.duplicates << " duplicates replaced";
    std::cerr << "\n";
    for (const auto& [rowno, reason] : stats.drop_details)
        std::cerr << "  row " << rowno << ": " << reason << "\n";
}

int run_synth(const std::string& synth_config, const CommonArgs& args,
              std::optional<std::uint64_t> seed_override,
              const std::string& write_example) {
    if (!write_example.empty()) {
        std::ofstream out(write_example);
        if (!out)
            throw Error(Errc::IoError, "cannot write " + write_example);
        out << example_synth_config_json();
        std::cout << "example synth config written to " << write_example << "\n";
        return 0;
    }
    if (synth_config.empty())
        throw Error(Errc::ConfigInvalid, "synth needs --synth-config (or --write-example)");
    SynthConfig cfg = SynthConfig::from_json_file(synth_config);
    if (seed_override)
        cfg.seed = *seed_override;
    SynthOutput out = generate(cfg);
    write_synth_output(out, args.out_dir);
    std::cout << "wrote " << out.records.size() << " records, " << out.tickets.size()
              << " tickets, " << out.truth.faults.size() << " planted faults to "
              << args.out_dir << "\n";
    return 0;
}

int run_train(const std::string& pnm_path, const std::string& ticket_path,
              const CommonArgs& args, const PipelineConfig& cfg,
              const std::string& dump_features) {
    auto pnm = parse_pnm_csv(pnm_path);
    report_parse("pnm", pnm.stats);
    auto tickets = parse_ticket_csv(ticket_path);
    report_parse("tickets", tickets.stats);

    TrainResult result = train_detector(pnm.records, tickets.tickets, cfg,
                                        window_of(args, pnm.records), args.jobs);
    fs::create_directories(args.out_dir);
    result.detector.save(args.out_dir + "/detector.json");
    if (result.sweep) {
        auto out = open_out(args.out_dir, "sweep.csv");
        csv::Writer w(out);
        w.write_comment(meta_line(cfg));
        write_sweep_csv(out, *result.sweep);
    }
    if (!dump_features.empty()) {
        std::ofstream out(dump_features, std::ios::binary);
        if (!out)
            throw Error(Errc::IoError, "cannot write " + dump_features);
        auto series = build_all_series(pnm.records, cfg.metrics);
        std::vector<FeatureSeries> all;
        for (const ThresholdRule& rule : result.detector.rules) {
            auto metric_it = series.find(rule.spec.metric);
            if (metric_it == series.end())
                continue;
            for (const auto& [device, s] : metric_it->second)
                all.push_back(compute_feature(s, rule.spec));
        }
        write_feature_csv(out, all);
    }

    std::cout << "trained " << result.stats.rules_learned << " rules ("
              << result.stats.rules_degenerate << " degenerate) from "
              << result.stats.tickets_network << " network tickets\n";
    std::cout << "selected:";
    for (const ThresholdRule& r : result.detector.rules)
        std::cout << " " << r.spec.name() << "(trr=" << r.trr << ")";
    std::cout << "\nwindow: " << result.detector.window_x << " of "
              << result.detector.window_y << "\n";
    if (result.detector.similarity) {
        std::cout << "similarity cutoffs:";
        for (const auto& [f, s] : result.detector.similarity->cutoff)
            std::cout << " " << f << "=" << s;
        std::cout << "\n";
    }
    return 0;
}

int run_detect(const std::string& detector_path, const std::string& pnm_path,
               const CommonArgs& args, const PipelineConfig& cfg, const std::string& format,
               const std::string& at_device, std::optional<std::int64_t> at_ts) {
    TrainedDetector detector = TrainedDetector::load(detector_path);
    auto pnm = parse_pnm_csv(pnm_path);
    report_parse("pnm", pnm.stats);

    if (at_ts || !at_device.empty()) {
        if (!at_ts || at_device.empty())
            throw Error(Errc::ConfigInvalid, "single-query mode needs both --at and --device");
        DiagnoseVerdict v = diagnose(detector, pnm.records, at_device, *at_ts);
        if (!v.point_found) {
            std::cout << "no-data: device has no collection point at or before the query\n";
            return 0;
        }
        std::cout << (v.window_satisfied ? "abnormal" : "normal") << ", "
                  << detector.window_x << "-of-" << detector.window_y
                  << (v.window_satisfied ? " satisfied" : " not satisfied")
                  << " at point " << v.point_ts << "\n";
        if (v.point_abnormal) {
            std::cout << "point rules fired:";
            for (const std::string& name : v.fired_rules)
                std::cout << " " << name;
            std::cout << "\n";
        }
        return 0;
    }

    auto events = detect_events(detector, pnm.records, window_of(args, pnm.records), args.jobs);
    if (format == "jsonl") {
        auto out = open_out(args.out_dir, "events.jsonl");
        write_events_jsonl(out, events, detector.rules);
    } else {
        auto out = open_out(args.out_dir, "events.csv");
        write_events_csv(out, events, detector.rules, meta_line(cfg));
    }
    std::cout << "detected " << events.size() << " events\n";
    return 0;
}

int run_cluster(const std::string& detector_path, const std::string& pnm_path,
                const std::string& events_path, const CommonArgs& args,
                const PipelineConfig& cfg) {
    TrainedDetector detector = TrainedDetector::load(detector_path);
    auto pnm = parse_pnm_csv(pnm_path);
    std::ifstream ev_in(events_path, std::ios::binary);
    if (!ev_in)
        throw Error(Errc::IoError, "cannot open " + events_path);
    auto events = read_events_csv(ev_in, detector.rules);

    TypingResult typed = cluster_events(detector, pnm.records, events, cfg);
    {
        auto out = open_out(args.out_dir, "typed_events.csv");
        write_events_csv(out, typed.events, detector.rules, meta_line(cfg));
    }
    {
        auto out = open_out(args.out_dir, "clusters.jsonl");
        write_cluster_report(out, typed.report);
    }
    std::size_t maint = 0;
    for (const AnomalyEvent& e : typed.events)
        maint += e.fault_type == FaultType::Maintenance;
    std::cout << "typed " << typed.events.size() << " events: " << maint << " maintenance, "
              << typed.events.size() - maint << " service\n";
    return 0;
}

int run_sweep(const std::string& detector_path, const std::string& pnm_path,
              const std::string& ticket_path, const CommonArgs& args,
              const PipelineConfig& cfg) {
    TrainedDetector detector = TrainedDetector::load(detector_path);
    auto pnm = parse_pnm_csv(pnm_path);
    auto tickets = parse_ticket_csv(ticket_path);
    std::vector<Ticket> net = filter_network_tickets(tickets.tickets, cfg.ticket_filter);

    Interval window = window_of(args, pnm.records).value_or(data_window(pnm.records));
    DeviceIndex index = DeviceIndex::build(pnm.records);
    auto series = build_all_series(pnm.records, cfg.metrics);
    auto labels = label_all_devices(series, detector, window, args.jobs);
    SweepResult sweep =
        sweep_window_params(labels, net, index, window, cfg.sweep_y_range(),
                            cfg.coverage_floor, detector.max_gap_seconds, args.jobs);
    auto out = open_out(args.out_dir, "sweep.csv");
    csv::Writer w(out);
    w.write_comment(meta_line(cfg));
    write_sweep_csv(out, sweep);
    std::cout << "recommended x=" << sweep.best_x << " y=" << sweep.best_y << "\n";
    return 0;
}

int run_eval(const std::string& events_path, const std::string& pnm_path,
             const std::string& ticket_path, const std::string& detector_path,
             const CommonArgs& args, const PipelineConfig& cfg) {
    std::vector<ThresholdRule> rules;
    if (!detector_path.empty())
        rules = TrainedDetector::load(detector_path).rules;
    auto pnm = parse_pnm_csv(pnm_path);
    auto tickets = parse_ticket_csv(ticket_path);
    std::vector<Ticket> net = filter_network_tickets(tickets.tickets, cfg.ticket_filter);
    std::ifstream ev_in(events_path, std::ios::binary);
    if (!ev_in)
        throw Error(Errc::IoError, "cannot open " + events_path);
    auto events = read_events_csv(ev_in, rules);

    Interval window = window_of(args, pnm.records).value_or(data_window(pnm.records));
    DeviceIndex index = DeviceIndex::build(pnm.records);
    MetricReport report =
        evaluate_events(events, net, index, window, pnm.records, cfg.mtr_threshold_db);
    {
        auto out = open_out(args.out_dir, "metrics.json");
        out << metric_report_json(report, kVersion, cfg.hash());
    }
    {
        auto out = open_out(args.out_dir, "lifetime_cdf.csv");
        write_distribution_csv(out, report.stats.lifetime_hours);
    }
    {
        auto out = open_out(args.out_dir, "waiting_cdf.csv");
        write_distribution_csv(out, report.stats.report_waiting_hours);
    }
    {
        auto out = open_out(args.out_dir, "event_length_pdf.csv");
        write_event_length_csv(out, report.stats.event_length);
    }
    auto show = [](const char* name, const std::optional<double>& v) {
        std::cout << name << ": ";
        if (v)
            std::cout << *v;
        else
            std::cout << "undefined";
        std::cout << "\n";
    };
    show("ticket prediction accuracy", report.accuracy);
    show("ticket coverage", report.coverage.coverage);
    show("normalized ticketing rate", report.normalized_rate);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"access-network telemetry fault detection and diagnosis"};
    app.set_version_flag("--version", std::string("pnmkit ") + kVersion);
    app.require_subcommand(1);

    CommonArgs args;

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    std::string synth_config, write_example;
    std::optional<std::uint64_t> seed_override;
    synth->add_option("--synth-config", synth_config, "SynthConfig JSON file");
    synth->add_option("--seed", seed_override, "override the config seed");
    synth->add_option("--write-example", write_example, "write an example config and exit");
    add_common(synth, args, false);

    auto* train = app.add_subcommand("train", "learn thresholds and window parameters");
    std::string pnm_path, ticket_path, dump_features;
    train->add_option("--pnm", pnm_path, "PNM CSV file")->required();
    train->add_option("--tickets", ticket_path, "ticket CSV file")->required();
    train->add_option("--dump-features", dump_features, "write selected feature values CSV");
    int n_features_flag = 0;
    int wx_flag = -1, wy_flag = 0;
    train->add_option("--n-features", n_features_flag, "override n_features");
    train->add_option("--x", wx_flag, "pin window x (skips the sweep)");
    train->add_option("--y", wy_flag, "pin window y");
    add_common(train, args);

    auto* detect = app.add_subcommand("detect", "run the detector over telemetry");
    std::string detector_path, format = "csv", at_device;
    std::optional<std::int64_t> at_ts;
    detect->add_option("--detector", detector_path, "trained detector JSON")->required();
    detect->add_option("--pnm", pnm_path, "PNM CSV file")->required();
    detect->add_option("--format", format, "events format: csv|jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    detect->add_option("--at", at_ts, "single-query mode: timestamp");
    detect->add_option("--device", at_device, "single-query mode: device id");
    add_common(detect, args);

    auto* cluster = app.add_subcommand("cluster", "type events maintenance/service");
    std::string events_path;
    cluster->add_option("--detector", detector_path, "trained detector JSON")->required();
    cluster->add_option("--pnm", pnm_path, "PNM CSV file")->required();
    cluster->add_option("--events", events_path, "events CSV from detect")->required();
    add_common(cluster, args);

    auto* sweep = app.add_subcommand("sweep", "window-parameter table");
    sweep->add_option("--detector", detector_path, "trained detector JSON")->required();
    sweep->add_option("--pnm", pnm_path, "PNM CSV file")->required();
    sweep->add_option("--tickets", ticket_path, "ticket CSV file")->required();
    add_common(sweep, args);

    auto* eval = app.add_subcommand("eval", "score events against tickets");
    eval->add_option("--events", events_path, "events CSV")->required();
    eval->add_option("--pnm", pnm_path, "PNM CSV file")->required();
    eval->add_option("--tickets", ticket_path, "ticket CSV file")->required();
    eval->add_option("--detector", detector_path, "detector JSON (names trigger rules)");
    add_common(eval, args);

    CLI11_PARSE(app, argc, argv);

    try {
        PipelineConfig cfg = load_config(args);
        if (train->parsed()) {
            if (n_features_flag > 0)
                cfg.n_features = n_features_flag;
            if (wx_flag >= 0)
                cfg.window_x = wx_flag;
            if (wy_flag > 0)
                cfg.window_y = wy_flag;
            validate(cfg);
            return run_train(pnm_path, ticket_path, args, cfg, dump_features);
        }
        if (synth->parsed())
            return run_synth(synth_config, args, seed_override, write_example);
        if (detect->parsed())
            return run_detect(detector_path, pnm_path, args, cfg, format, at_device, at_ts);
        if (cluster->parsed())
            return run_cluster(detector_path, pnm_path, events_path, args, cfg);
        if (sweep->parsed())
            return run_sweep(detector_path, pnm_path, ticket_path, args, cfg);
        if (eval->parsed())
            return run_eval(events_path, pnm_path, ticket_path, detector_path, args, cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == Errc::ConfigInvalid ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
