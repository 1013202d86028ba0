// SPDX-License-Identifier: Apache-2.0
#include "pnmkit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "pnmkit/csv.hpp"
#include "pnmkit/error.hpp"
#include "pnmkit/parallel.hpp"
#include "pnmkit/version.hpp"

namespace pnmkit {

using nlohmann::ordered_json;

namespace {

ordered_json rule_to_json(const ThresholdRule& r) {
    ordered_json j;
    j["feature"] = r.spec.name();
    j["kind"] = rule_kind_name(r.kind);
    if (r.thr_low)
        j["thr_low"] = *r.thr_low;
    if (r.thr_high)
        j["thr_high"] = *r.thr_high;
    j["trr"] = r.trr;
    if (r.trr_lcb > 0)
        j["trr_lcb"] = r.trr_lcb;
    return j;
}

ThresholdRule rule_from_json(const ordered_json& j) {
    ThresholdRule r;
    r.spec = FeatureSpec::parse(j.at("feature").get<std::string>());
    r.kind = rule_kind_parse(j.at("kind").get<std::string>());
    if (j.contains("thr_low"))
        r.thr_low = j.at("thr_low").get<double>();
    if (j.contains("thr_high"))
        r.thr_high = j.at("thr_high").get<double>();
    r.trr = j.at("trr").get<double>();
    r.trr_lcb = j.value("trr_lcb", 0.0);
    return r;
}

} // namespace

std::string TrainedDetector::to_json() const {
    ordered_json j;
    j["format"] = "pnmkit-detector";
    j["version"] = version.empty() ? kVersion : version;
    j["config_hash"] = config_hash;
    j["window_x"] = window_x;
    j["window_y"] = window_y;
    j["max_gap_seconds"] = max_gap_seconds;
    ordered_json rule_list = ordered_json::array();
    for (const ThresholdRule& r : rules)
        rule_list.push_back(rule_to_json(r));
    j["rules"] = rule_list;
    if (similarity) {
        ordered_json s;
        ordered_json cutoff, trr_m, informative;
        for (const auto& [f, v] : similarity->cutoff)
            cutoff[f] = v;
        for (const auto& [f, v] : similarity->trr_m) {
            // JSON has no infinity; the sentinel string round-trips
            if (std::isinf(v))
                trr_m[f] = "inf";
            else
                trr_m[f] = v;
        }
        for (const auto& [f, v] : similarity->informative)
            informative[f] = v;
        s["cutoff"] = cutoff;
        s["trr_m"] = trr_m;
        s["informative"] = informative;
        j["similarity"] = s;
    }
    ordered_json summary = ordered_json::array();
    for (const ThresholdRule& r : training_summary)
        summary.push_back(rule_to_json(r));
    j["training_summary"] = summary;
    return j.dump(2) + "\n";
}

TrainedDetector TrainedDetector::from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw Error(Errc::ConfigInvalid, std::string("bad detector file: ") + e.what());
    }
    if (j.value("format", std::string()) != "pnmkit-detector")
        throw Error(Errc::ConfigInvalid, "not a detector file");
    TrainedDetector d;
    d.version = j.value("version", std::string());
    d.config_hash = j.value("config_hash", std::string());
    d.window_x = j.at("window_x").get<int>();
    d.window_y = j.at("window_y").get<int>();
    if (d.window_x < 1 || d.window_x > d.window_y)
        throw Error(Errc::ConfigInvalid, "detector window violates 1 <= x <= y");
    d.max_gap_seconds = j.value("max_gap_seconds", d.max_gap_seconds);
    if (d.max_gap_seconds <= 0)
        throw Error(Errc::ConfigInvalid, "detector max_gap_seconds must be positive");
    for (const auto& rj : j.at("rules"))
        d.rules.push_back(rule_from_json(rj));
    if (j.contains("similarity")) {
        SimilarityThresholds s;
        const auto& sj = j.at("similarity");
        for (auto& [f, v] : sj.at("cutoff").items())
            s.cutoff[f] = v.get<double>();
        for (auto& [f, v] : sj.at("trr_m").items())
            s.trr_m[f] = v.is_string() ? std::numeric_limits<double>::infinity()
                                       : v.get<double>();
        for (auto& [f, v] : sj.at("informative").items())
            s.informative[f] = v.get<bool>();
        d.similarity = std::move(s);
    }
    if (j.contains("training_summary")) {
        for (const auto& rj : j.at("training_summary"))
            d.training_summary.push_back(rule_from_json(rj));
    }
    return d;
}

void TrainedDetector::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::IoError, "cannot write " + path);
    out << to_json();
}

TrainedDetector TrainedDetector::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoError, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

std::map<std::string, std::map<std::string, DeviceSeries>>
build_all_series(const std::vector<PnmRecord>& records, const std::vector<std::string>& metrics) {
    std::map<std::string, std::map<std::string, DeviceSeries>> out;
    for (const std::string& m : metrics)
        out[m] = build_series(records, m);
    return out;
}

Interval data_window(const std::vector<PnmRecord>& records) {
    if (records.empty())
        return {0, 0};
    Timestamp lo = records.front().timestamp, hi = records.front().timestamp;
    for (const PnmRecord& r : records) {
        lo = std::min(lo, r.timestamp);
        hi = std::max(hi, r.timestamp);
    }
    return {lo, hi + 1};
}

TrainResult train_detector(const std::vector<PnmRecord>& records,
                           const std::vector<Ticket>& tickets, const PipelineConfig& cfg,
                           std::optional<Interval> observation_window, int jobs) {
    if (records.empty())
        throw Error(Errc::EmptyFile, "no PNM records to train on");
    TrainResult result;
    result.stats.records = records.size();
    result.stats.tickets_total = tickets.size();

    const Interval window = observation_window.value_or(data_window(records));
    const std::int64_t max_gap = cfg.max_gap_seconds();

    DeviceIndex index = DeviceIndex::build(records);
    result.stats.devices = index.devices.size();

    std::vector<Ticket> net = filter_network_tickets(tickets, cfg.ticket_filter);
    std::erase_if(net, [&](const Ticket& t) { return !window.contains(t.created_at); });
    result.stats.tickets_network = net.size();
    if (net.empty())
        throw Error(Errc::NoTickets, "no network-related tickets in the training window");
    DeviceTickets dev_tickets = DeviceTickets::build(net, index);
    result.stats.tickets_unattributed = dev_tickets.unattributed_tickets;

    auto series = build_all_series(records, cfg.metrics);

    // learn one rule per (metric, variant); parallel across the grid
    struct Task {
        FeatureSpec spec;
        RuleKind kind;
    };
    std::vector<Task> tasks;
    for (const std::string& metric : cfg.metrics) {
        for (const FeatureSpec& spec : FeatureSpec::all_for_metric(metric))
            tasks.push_back({spec, cfg.direction_for(metric, spec.model)});
    }

    // per-metric hold durations and ticket counts are shared by all 37
    // variants; cache them once per device
    struct PointCache {
        std::vector<std::int64_t> dur;
        std::vector<std::int32_t> ticks;
    };
    std::map<std::string, std::map<std::string, PointCache>> weight_cache;
    static const std::vector<Timestamp> kNone;
    for (const std::string& metric : cfg.metrics) {
        auto& per_device = weight_cache[metric];
        for (const auto& [device, s] : series.at(metric)) {
            PointCache cache;
            cache.dur.assign(s.points.size(), 0);
            cache.ticks.assign(s.points.size(), 0);
            auto it = dev_tickets.by_device.find(device);
            const std::vector<Timestamp>& times =
                it == dev_tickets.by_device.end() ? kNone : it->second;
            for (std::size_t i = 0; i < s.points.size(); ++i) {
                auto hold = point_hold(s, i, max_gap);
                if (!hold)
                    continue;
                Timestamp lo = std::max(hold->start, window.start);
                Timestamp hi = std::min(hold->end, window.end);
                if (hi <= lo)
                    continue;
                cache.dur[i] = hi - lo;
                auto a = std::lower_bound(times.begin(), times.end(), lo);
                auto b = std::lower_bound(times.begin(), times.end(), hi);
                cache.ticks[i] = static_cast<std::int32_t>(b - a);
            }
            per_device.emplace(device, std::move(cache));
        }
    }

    std::vector<std::optional<ThresholdRule>> learned(tasks.size());
    parallel_for(tasks.size(), jobs, [&](std::size_t ti) {
        const Task& task = tasks[ti];
        const auto& metric_series = series.at(task.spec.metric);
        const auto& metric_cache = weight_cache.at(task.spec.metric);
        std::vector<WeightedValue> values;
        for (const auto& [device, s] : metric_series) {
            const PointCache& cache = metric_cache.at(device);
            FeatureSeries fs = compute_feature(s, task.spec);
            for (std::size_t i = 0; i < fs.points.size(); ++i) {
                if (cache.dur[i] > 0)
                    values.push_back({fs.points[i].value, cache.dur[i], cache.ticks[i]});
            }
        }
        learned[ti] = learn_threshold_from_values(std::move(values), task.spec, task.kind,
                                                  cfg.grid_steps, cfg.trr_min_support);
    });

    std::vector<ThresholdRule> all_rules;
    for (const auto& r : learned) {
        if (r)
            all_rules.push_back(*r);
        else
            ++result.stats.rules_degenerate;
    }
    result.stats.rules_learned = all_rules.size();

    TrainedDetector det;
    det.version = kVersion;
    det.config_hash = cfg.hash();
    det.max_gap_seconds = max_gap;
    det.rules = select_features(all_rules, cfg.n_features);
    det.training_summary = all_rules;
    std::sort(det.training_summary.begin(), det.training_summary.end(),
              [](const ThresholdRule& a, const ThresholdRule& b) {
                  if (a.selection_key() != b.selection_key())
                      return a.selection_key() > b.selection_key();
                  return a.spec.name() < b.spec.name();
              });

    // window parameters: pinned in config, or picked by the sweep
    std::vector<LabeledSeries> labels;
    auto build_labels = [&]() {
        if (labels.empty())
            labels = label_all_devices(series, det, window, jobs);
    };

    if (cfg.window_x > 0) {
        det.window_x = cfg.window_x;
        det.window_y = cfg.window_y;
    } else {
        build_labels();
        result.sweep = sweep_window_params(labels, net, index, window, cfg.sweep_y_range(),
                                           cfg.coverage_floor, max_gap, jobs);
        det.window_x = result.sweep->best_x;
        det.window_y = result.sweep->best_y;
    }

    // clustering calibration needs maintenance-flagged tickets
    bool any_maintenance = std::any_of(net.begin(), net.end(),
                                       [](const Ticket& t) { return t.is_part_of_primary; });
    if (any_maintenance && !det.rules.empty()) {
        build_labels();
        DetectOptions opt{det.window_x, det.window_y, max_gap};
        std::vector<AnomalyEvent> events;
        for (const LabeledSeries& ls : labels) {
            auto evs = sliding_window_detect(ls, opt);
            events.insert(events.end(), evs.begin(), evs.end());
        }
        if (!events.empty()) {
            ClusteringOptions copt = clustering_options(cfg, det.window_y);
            det.similarity = search_similarity_threshold(events, series, net, index,
                                                         cfg.similarity_grid(), copt, jobs);
        }
    }

    result.detector = std::move(det);
    return result;
}

ClusteringOptions clustering_options(const PipelineConfig& cfg, int window_y) {
    ClusteringOptions opt;
    opt.features = cfg.cluster_features;
    opt.min_group = cfg.min_group;
    opt.combine_any = cfg.cluster_combine_any;
    opt.max_gap_seconds = cfg.max_gap_seconds();
    opt.pad_seconds = static_cast<std::int64_t>(
        std::llround(window_y * cfg.cadence_hours * kSecondsPerHour));
    opt.informative_min_trr = cfg.informative_min_trr;
    return opt;
}

std::vector<LabeledSeries> label_all_devices(
    const std::map<std::string, std::map<std::string, DeviceSeries>>& series,
    const TrainedDetector& detector, std::optional<Interval> observation_window, int jobs) {
    std::map<std::string, std::map<std::string, DeviceSeries>> by_device;
    for (const auto& [metric, devices] : series) {
        for (const auto& [device, s] : devices)
            by_device[device][metric] = s;
    }
    std::vector<const std::map<std::string, DeviceSeries>*> ptrs;
    std::vector<std::string> names;
    for (const auto& [device, m] : by_device) {
        names.push_back(device);
        ptrs.push_back(&m);
    }
    std::vector<LabeledSeries> labels(ptrs.size());
    parallel_for(ptrs.size(), jobs, [&](std::size_t i) {
        LabeledSeries ls = label_device(*ptrs[i], detector.rules);
        if (ls.device_id.empty())
            ls.device_id = names[i];
        if (observation_window) {
            LabeledSeries clipped;
            clipped.device_id = ls.device_id;
            for (std::size_t k = 0; k < ls.ts.size(); ++k) {
                if (observation_window->contains(ls.ts[k])) {
                    clipped.ts.push_back(ls.ts[k]);
                    clipped.fired.push_back(ls.fired[k]);
                }
            }
            ls = std::move(clipped);
        }
        labels[i] = std::move(ls);
    });
    return labels;
}

std::vector<AnomalyEvent> detect_events(const TrainedDetector& detector,
                                        const std::vector<PnmRecord>& records,
                                        std::optional<Interval> observation_window, int jobs) {
    std::vector<std::string> needed;
    for (const ThresholdRule& r : detector.rules) {
        if (std::find(needed.begin(), needed.end(), r.spec.metric) == needed.end())
            needed.push_back(r.spec.metric);
    }
    auto series = build_all_series(records, needed);
    auto labels = label_all_devices(series, detector, observation_window, jobs);

    DetectOptions opt{detector.window_x, detector.window_y, detector.max_gap_seconds};
    std::vector<std::vector<AnomalyEvent>> per_device(labels.size());
    parallel_for(labels.size(), jobs,
                 [&](std::size_t i) { per_device[i] = sliding_window_detect(labels[i], opt); });
    std::vector<AnomalyEvent> events;
    for (auto& evs : per_device)
        events.insert(events.end(), evs.begin(), evs.end());
    return events;
}

DiagnoseVerdict diagnose(const TrainedDetector& detector,
                         const std::vector<PnmRecord>& records, const std::string& device,
                         Timestamp ts) {
    std::vector<std::string> needed;
    for (const ThresholdRule& r : detector.rules) {
        if (std::find(needed.begin(), needed.end(), r.spec.metric) == needed.end())
            needed.push_back(r.spec.metric);
    }
    std::map<std::string, DeviceSeries> device_series;
    for (const std::string& metric : needed) {
        auto all = build_series(records, metric);
        auto it = all.find(device);
        if (it != all.end())
            device_series[metric] = std::move(it->second);
    }
    if (device_series.empty())
        throw Error(Errc::MissingFeature, "device '" + device + "' has no telemetry");

    LabeledSeries labels = label_device(device_series, detector.rules);
    DiagnoseVerdict verdict;
    auto pos = std::upper_bound(labels.ts.begin(), labels.ts.end(), ts);
    if (pos == labels.ts.begin())
        return verdict; // no collection point at or before ts
    std::size_t idx = static_cast<std::size_t>(pos - labels.ts.begin()) - 1;
    verdict.point_found = true;
    verdict.point_ts = labels.ts[idx];
    verdict.point_abnormal = labels.fired[idx] != 0;
    verdict.fired_rules = trigger_rule_names(labels.fired[idx], detector.rules);

    // replay the window state up to idx
    int count = 0;
    std::vector<bool> window_flags;
    for (std::size_t i = 0; i <= idx; ++i) {
        if (i > 0 && labels.ts[i] - labels.ts[i - 1] > detector.max_gap_seconds) {
            window_flags.clear();
            count = 0;
        }
        window_flags.push_back(labels.fired[i] != 0);
        if (labels.fired[i])
            ++count;
        if (static_cast<int>(window_flags.size()) > detector.window_y) {
            if (window_flags.front())
                --count;
            window_flags.erase(window_flags.begin());
        }
    }
    verdict.window_satisfied = count >= detector.window_x;
    return verdict;
}

TypingResult cluster_events(const TrainedDetector& detector,
                            const std::vector<PnmRecord>& records,
                            const std::vector<AnomalyEvent>& events, const PipelineConfig& cfg) {
    if (!detector.similarity)
        throw Error(Errc::ConfigInvalid,
                    "detector has no similarity thresholds; train with maintenance tickets");
    DeviceIndex index = DeviceIndex::build(records);
    ClusteringOptions opt = clustering_options(cfg, detector.window_y);
    auto series = build_all_series(records, opt.features);
    return classify_fault_type(events, series, index, *detector.similarity, opt);
}

void write_events_csv(std::ostream& out, const std::vector<AnomalyEvent>& events,
                      std::span<const ThresholdRule> rules, const std::string& meta_comment) {
    csv::Writer w(out);
    if (!meta_comment.empty())
        w.write_comment(meta_comment);
    w.write_row({"device", "start", "end", "points", "trigger_rules", "fault_type",
                 "cluster_id"});
    for (const AnomalyEvent& e : events) {
        std::string triggers;
        for (const std::string& name : trigger_rule_names(e.trigger_mask, rules)) {
            if (!triggers.empty())
                triggers += ";";
            triggers += name;
        }
        w.write_row({e.device_id, std::to_string(e.interval.start),
                     std::to_string(e.interval.end), std::to_string(e.n_abnormal_points),
                     triggers, e.fault_type ? fault_type_name(*e.fault_type) : std::string(),
                     e.cluster_id.value_or(std::string())});
    }
}

std::vector<AnomalyEvent> read_events_csv(std::istream& in,
                                          std::span<const ThresholdRule> rules) {
    csv::Reader reader(in);
    std::vector<std::string> row;
    if (!reader.next_row(row))
        throw Error(Errc::EmptyFile, "no header row");
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < row.size(); ++i)
        col[row[i]] = i;
    for (const char* name : {"device", "start", "end", "points"}) {
        if (!col.count(name))
            throw Error(Errc::MissingColumn, name);
    }
    std::map<std::string, std::size_t> rule_index;
    for (std::size_t k = 0; k < rules.size(); ++k)
        rule_index[rules[k].spec.name()] = k;

    std::vector<AnomalyEvent> events;
    while (reader.next_row(row)) {
        AnomalyEvent e;
        e.device_id = row.at(col["device"]);
        e.interval.start = csv::parse_int(row.at(col["start"])).value_or(0);
        e.interval.end = csv::parse_int(row.at(col["end"])).value_or(0);
        e.n_abnormal_points =
            static_cast<int>(csv::parse_int(row.at(col["points"])).value_or(0));
        if (col.count("trigger_rules")) {
            std::stringstream ss(row.at(col["trigger_rules"]));
            std::string name;
            while (std::getline(ss, name, ';')) {
                auto it = rule_index.find(name);
                if (it != rule_index.end())
                    e.trigger_mask |= (1u << it->second);
            }
        }
        if (col.count("fault_type")) {
            const std::string& ft = row.at(col["fault_type"]);
            if (ft == "maintenance")
                e.fault_type = FaultType::Maintenance;
            else if (ft == "service")
                e.fault_type = FaultType::Service;
        }
        if (col.count("cluster_id") && !row.at(col["cluster_id"]).empty())
            e.cluster_id = row.at(col["cluster_id"]);
        events.push_back(std::move(e));
    }
    return events;
}

void write_events_jsonl(std::ostream& out, const std::vector<AnomalyEvent>& events,
                        std::span<const ThresholdRule> rules) {
    for (const AnomalyEvent& e : events) {
        ordered_json j;
        j["device"] = e.device_id;
        j["start"] = e.interval.start;
        j["end"] = e.interval.end;
        j["points"] = e.n_abnormal_points;
        j["trigger_rules"] = trigger_rule_names(e.trigger_mask, rules);
        if (e.fault_type)
            j["fault_type"] = fault_type_name(*e.fault_type);
        if (e.cluster_id)
            j["cluster_id"] = *e.cluster_id;
        out << j.dump() << '\n';
    }
}

MetricReport evaluate_events(const std::vector<AnomalyEvent>& events,
                             const std::vector<Ticket>& tickets, const DeviceIndex& index,
                             Interval observation_window, const std::vector<PnmRecord>& records,
                             double mtr_threshold_db) {
    MetricReport report;
    report.n_events = events.size();
    report.n_fault_groups = group_faults(events, index).size();
    report.accuracy = ticket_prediction_accuracy(events, tickets, index);
    report.coverage = ticket_coverage(events, tickets, index);
    report.normalized_rate =
        normalized_ticketing_rate(events, tickets, index, observation_window);
    report.stats = ticket_stats(events, tickets, index);
    bool has_mtr = std::any_of(records.begin(), records.end(),
                               [](const PnmRecord& r) { return r.mtr_db.has_value(); });
    if (has_mtr)
        report.mtr = mtr_baseline(records, mtr_threshold_db);
    return report;
}

std::string metric_report_json(const MetricReport& report, const std::string& meta_version,
                               const std::string& config_hash) {
    ordered_json j;
    j["meta"] = ordered_json{{"tool", "pnmkit"},
                             {"version", meta_version},
                             {"config_hash", config_hash}};
    auto opt = [](const std::optional<double>& v) {
        return v ? ordered_json(*v) : ordered_json(nullptr);
    };
    j["n_events"] = report.n_events;
    j["n_fault_groups"] = report.n_fault_groups;
    j["ticket_prediction_accuracy"] = opt(report.accuracy);
    j["ticket_coverage"] = opt(report.coverage.coverage);
    j["tickets_covered"] = report.coverage.covered;
    j["tickets_eligible"] = report.coverage.eligible;
    j["tickets_excluded_no_device"] = report.coverage.excluded_no_device;
    j["normalized_ticketing_rate"] = opt(report.normalized_rate);
    auto dist = [](const DistSummary& d) {
        return ordered_json{{"count", d.count},
                            {"excluded", d.excluded},
                            {"mean", d.mean},
                            {"median", d.median}};
    };
    j["ticket_lifetime_hours"] = dist(report.stats.lifetime_hours);
    j["report_waiting_hours"] = dist(report.stats.report_waiting_hours);
    if (report.mtr) {
        ordered_json m;
        m["threshold_flagged_record_fraction"] = report.mtr->record_fraction;
        ordered_json days = ordered_json::array();
        for (const auto& [day, frac] : report.mtr->day_fraction)
            days.push_back(ordered_json{{"day", day}, {"fraction", frac}});
        m["day_fraction"] = days;
        j["mtr_baseline"] = m;
    } else {
        j["mtr_baseline"] = nullptr;
    }
    return j.dump(2) + "\n";
}

} // namespace pnmkit
