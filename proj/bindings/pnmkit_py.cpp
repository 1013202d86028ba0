// SPDX-License-Identifier: Apache-2.0
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pnmkit/clustering.hpp"
#include "pnmkit/error.hpp"
#include "pnmkit/pipeline.hpp"
#include "pnmkit/synthgen.hpp"
#include "pnmkit/version.hpp"

namespace py = pybind11;
using namespace pnmkit;

namespace {

std::vector<double> series_values(const DeviceSeries& s) {
    std::vector<double> out;
    out.reserve(s.points.size());
    for (const SeriesPoint& p : s.points)
        out.push_back(p.value);
    return out;
}

std::vector<Timestamp> series_timestamps(const DeviceSeries& s) {
    std::vector<Timestamp> out;
    out.reserve(s.points.size());
    for (const SeriesPoint& p : s.points)
        out.push_back(p.ts);
    return out;
}

DeviceSeries make_series(const std::string& device, const std::string& metric,
                         const std::vector<Timestamp>& ts, const std::vector<double>& values) {
    if (ts.size() != values.size())
        throw Error(Errc::ConfigInvalid, "timestamps and values differ in length");
    DeviceSeries s;
    s.device_id = device;
    s.metric = metric;
    s.points.reserve(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
        s.points.push_back({ts[i], values[i]});
    return s;
}

Partition partition_from_dict(const std::map<std::string, int>& assignment) {
    Partition p;
    p.assignment = assignment;
    return p;
}

} // namespace

PYBIND11_MODULE(_pnmkit, m) {
    m.doc() = "telemetry fault detection: ticket-driven thresholds, x-of-y "
              "event detection, and co-anomaly clustering";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "PnmkitError");

    py::class_<Interval>(m, "Interval")
        .def(py::init<Timestamp, Timestamp>(), py::arg("start"), py::arg("end"))
        .def_readwrite("start", &Interval::start)
        .def_readwrite("end", &Interval::end)
        .def("duration", &Interval::duration)
        .def("contains", &Interval::contains)
        .def("__repr__", [](const Interval& iv) {
            return "Interval(" + std::to_string(iv.start) + ", " + std::to_string(iv.end) + ")";
        });

    py::class_<PnmRecord>(m, "PnmRecord")
        .def(py::init<>())
        .def_readwrite("device_id", &PnmRecord::device_id)
        .def_readwrite("account_id", &PnmRecord::account_id)
        .def_readwrite("timestamp", &PnmRecord::timestamp)
        .def_readwrite("channel_freq_hz", &PnmRecord::channel_freq_hz)
        .def_readwrite("snr_db", &PnmRecord::snr_db)
        .def_readwrite("tx_power_dbmv", &PnmRecord::tx_power_dbmv)
        .def_readwrite("rx_power_dbmv", &PnmRecord::rx_power_dbmv)
        .def_readwrite("unerrored", &PnmRecord::unerrored)
        .def_readwrite("corrected", &PnmRecord::corrected)
        .def_readwrite("uncorrectable", &PnmRecord::uncorrectable)
        .def_readwrite("t3_timeouts", &PnmRecord::t3_timeouts)
        .def_readwrite("t4_timeouts", &PnmRecord::t4_timeouts)
        .def_readwrite("mtr_db", &PnmRecord::mtr_db)
        .def_readwrite("fiber_node", &PnmRecord::fiber_node);

    py::class_<Ticket>(m, "Ticket")
        .def(py::init<>())
        .def_readwrite("account_id", &Ticket::account_id)
        .def_readwrite("created_at", &Ticket::created_at)
        .def_readwrite("closed_at", &Ticket::closed_at)
        .def_readwrite("action", &Ticket::action)
        .def_readwrite("description", &Ticket::description)
        .def_readwrite("is_part_of_primary", &Ticket::is_part_of_primary)
        .def_readwrite("primary_ticket_id", &Ticket::primary_ticket_id);

    py::class_<DeviceSeries>(m, "DeviceSeries")
        .def(py::init(&make_series), py::arg("device_id"), py::arg("metric"),
             py::arg("timestamps"), py::arg("values"))
        .def_readonly("device_id", &DeviceSeries::device_id)
        .def_readonly("metric", &DeviceSeries::metric)
        .def_property_readonly("timestamps", &series_timestamps)
        .def_property_readonly("values", &series_values)
        .def("__len__", [](const DeviceSeries& s) { return s.points.size(); });

    // csv ingestion
    m.def(
        "parse_pnm_csv",
        [](const std::string& path) {
            auto result = parse_pnm_csv(path);
            return py::make_tuple(result.records,
                                  py::dict(py::arg("rows_total") = result.stats.rows_total,
                                           py::arg("rows_dropped") = result.stats.rows_dropped,
                                           py::arg("duplicates") = result.stats.duplicates));
        },
        py::arg("path"), "parse a PNM CSV file -> (records, stats)");
    m.def(
        "parse_ticket_csv",
        [](const std::string& path) {
            auto result = parse_ticket_csv(path);
            return py::make_tuple(result.tickets,
                                  py::dict(py::arg("rows_total") = result.stats.rows_total,
                                           py::arg("rows_dropped") = result.stats.rows_dropped));
        },
        py::arg("path"), "parse a ticket CSV file -> (tickets, stats)");
    m.def(
        "filter_network_tickets",
        [](const std::vector<Ticket>& tickets) { return filter_network_tickets(tickets); },
        py::arg("tickets"), "keep dispatch-action or network-keyword tickets");
    m.def("build_series", &build_series, py::arg("records"), py::arg("metric"),
          "per-device step-function series of one metric (counters differenced, "
          "worst channel)");

    // features
    py::enum_<FeatureModel>(m, "FeatureModel")
        .value("AVG", FeatureModel::Avg)
        .value("WMA", FeatureModel::Wma)
        .value("EWMA", FeatureModel::Ewma)
        .value("WMA_DIFF", FeatureModel::WmaDiff)
        .value("VAR", FeatureModel::Var);
    py::class_<FeatureSpec>(m, "FeatureSpec")
        .def(py::init<>())
        .def_static("parse", &FeatureSpec::parse, py::arg("name"))
        .def_static("all_for_metric", &FeatureSpec::all_for_metric, py::arg("metric"))
        .def_static("full_grid", &FeatureSpec::full_grid, py::arg("metrics"))
        .def_readwrite("metric", &FeatureSpec::metric)
        .def_readwrite("model", &FeatureSpec::model)
        .def_readwrite("window_days", &FeatureSpec::window_days)
        .def_readwrite("lambda_", &FeatureSpec::lambda)
        .def("name", &FeatureSpec::name)
        .def("__repr__", [](const FeatureSpec& s) { return "FeatureSpec(" + s.name() + ")"; });
    m.def(
        "compute_feature",
        [](const DeviceSeries& s, const std::string& name) {
            FeatureSeries fs = compute_feature(s, FeatureSpec::parse(name));
            std::vector<double> values;
            values.reserve(fs.points.size());
            for (const SeriesPoint& p : fs.points)
                values.push_back(p.value);
            return values;
        },
        py::arg("series"), py::arg("feature_name"),
        "feature values aligned with the series timestamps, e.g. 'snr-var-2'");

    // detection types
    py::enum_<FaultType>(m, "FaultType")
        .value("MAINTENANCE", FaultType::Maintenance)
        .value("SERVICE", FaultType::Service);
    py::class_<AnomalyEvent>(m, "AnomalyEvent")
        .def_readonly("device_id", &AnomalyEvent::device_id)
        .def_readonly("interval", &AnomalyEvent::interval)
        .def_readonly("n_abnormal_points", &AnomalyEvent::n_abnormal_points)
        .def_readonly("fault_type", &AnomalyEvent::fault_type)
        .def_readonly("cluster_id", &AnomalyEvent::cluster_id)
        .def("__repr__", [](const AnomalyEvent& e) {
            return "AnomalyEvent(" + e.device_id + ", [" + std::to_string(e.interval.start) +
                   ", " + std::to_string(e.interval.end) + "))";
        });

    // config and detector
    py::class_<PipelineConfig>(m, "PipelineConfig")
        .def(py::init<>())
        .def_static("load", &PipelineConfig::load, py::arg("path"))
        .def_readwrite("cadence_hours", &PipelineConfig::cadence_hours)
        .def_readwrite("max_gap_hours", &PipelineConfig::max_gap_hours)
        .def_readwrite("metrics", &PipelineConfig::metrics)
        .def_readwrite("grid_steps", &PipelineConfig::grid_steps)
        .def_readwrite("n_features", &PipelineConfig::n_features)
        .def_readwrite("trr_min_support", &PipelineConfig::trr_min_support)
        .def_readwrite("window_x", &PipelineConfig::window_x)
        .def_readwrite("window_y", &PipelineConfig::window_y)
        .def_readwrite("sweep_y_min", &PipelineConfig::sweep_y_min)
        .def_readwrite("sweep_y_max", &PipelineConfig::sweep_y_max)
        .def_readwrite("sweep_y_step", &PipelineConfig::sweep_y_step)
        .def_readwrite("coverage_floor", &PipelineConfig::coverage_floor)
        .def_readwrite("min_group", &PipelineConfig::min_group)
        .def("hash", &PipelineConfig::hash);

    py::class_<ThresholdRule>(m, "ThresholdRule")
        .def_property_readonly("feature", [](const ThresholdRule& r) { return r.spec.name(); })
        .def_property_readonly("kind",
                               [](const ThresholdRule& r) { return rule_kind_name(r.kind); })
        .def_readonly("thr_low", &ThresholdRule::thr_low)
        .def_readonly("thr_high", &ThresholdRule::thr_high)
        .def_readonly("trr", &ThresholdRule::trr)
        .def("fires", &ThresholdRule::fires, py::arg("value"));

    py::class_<TrainedDetector>(m, "TrainedDetector")
        .def_readonly("window_x", &TrainedDetector::window_x)
        .def_readonly("window_y", &TrainedDetector::window_y)
        .def_readonly("rules", &TrainedDetector::rules)
        .def("to_json", &TrainedDetector::to_json)
        .def("save", &TrainedDetector::save, py::arg("path"))
        .def_static("load", &TrainedDetector::load, py::arg("path"));

    m.def(
        "train",
        [](const std::vector<PnmRecord>& records, const std::vector<Ticket>& tickets,
           const PipelineConfig& cfg, std::optional<Interval> window, int jobs) {
            TrainResult r = train_detector(records, tickets, cfg, window, jobs);
            return py::make_tuple(
                r.detector,
                py::dict(py::arg("devices") = r.stats.devices,
                         py::arg("tickets_network") = r.stats.tickets_network,
                         py::arg("rules_learned") = r.stats.rules_learned,
                         py::arg("rules_degenerate") = r.stats.rules_degenerate));
        },
        py::arg("records"), py::arg("tickets"), py::arg("config") = PipelineConfig{},
        py::arg("window") = std::nullopt, py::arg("jobs") = 1,
        "learn thresholds, select features and window parameters -> (detector, stats)");

    m.def("detect", &detect_events, py::arg("detector"), py::arg("records"),
          py::arg("window") = std::nullopt, py::arg("jobs") = 1,
          "x-of-y fault events per device");

    m.def(
        "cluster",
        [](const TrainedDetector& det, const std::vector<PnmRecord>& records,
           const std::vector<AnomalyEvent>& events, const PipelineConfig& cfg) {
            return cluster_events(det, records, events, cfg).events;
        },
        py::arg("detector"), py::arg("records"), py::arg("events"),
        py::arg("config") = PipelineConfig{},
        "label events maintenance/service via co-anomaly clustering");

    m.def(
        "evaluate",
        [](const std::vector<AnomalyEvent>& events, const std::vector<Ticket>& tickets,
           const std::vector<PnmRecord>& records, std::optional<Interval> window) {
            DeviceIndex index = DeviceIndex::build(records);
            Interval w = window.value_or(data_window(records));
            auto coverage = ticket_coverage(events, tickets, index);
            py::dict out;
            out["ticket_prediction_accuracy"] =
                ticket_prediction_accuracy(events, tickets, index);
            out["ticket_coverage"] = coverage.coverage;
            out["tickets_excluded_no_device"] = coverage.excluded_no_device;
            out["normalized_ticketing_rate"] =
                normalized_ticketing_rate(events, tickets, index, w);
            return out;
        },
        py::arg("events"), py::arg("tickets"), py::arg("records"),
        py::arg("window") = std::nullopt, "detection quality metrics against tickets");

    m.def(
        "diagnose",
        [](const TrainedDetector& det, const std::vector<PnmRecord>& records,
           const std::string& device, Timestamp ts) {
            DiagnoseVerdict v = diagnose(det, records, device, ts);
            py::dict out;
            out["point_found"] = v.point_found;
            out["point_ts"] = v.point_ts;
            out["point_abnormal"] = v.point_abnormal;
            out["window_satisfied"] = v.window_satisfied;
            out["fired_rules"] = v.fired_rules;
            return out;
        },
        py::arg("detector"), py::arg("records"), py::arg("device"), py::arg("ts"),
        "call-time diagnosis of one device at one timestamp");

    // clustering primitives
    m.def(
        "pairwise_similarity",
        [](const DeviceSeries& a, const DeviceSeries& b, Interval window,
           std::int64_t max_gap_seconds) {
            return pairwise_similarity(a, b, window, max_gap_seconds);
        },
        py::arg("a"), py::arg("b"), py::arg("window"),
        py::arg("max_gap_seconds") = 24 * kSecondsPerHour,
        "step-hold Pearson similarity; None on insufficient overlap");
    m.def(
        "average_linkage",
        [](const std::vector<std::string>& devices,
           const std::vector<std::vector<double>>& matrix, double cutoff) {
            SimilarityMatrix m2;
            m2.devices = devices;
            const std::size_t n = devices.size();
            m2.values.assign(n * n, 1.0);
            for (std::size_t i = 0; i < n; ++i) {
                if (matrix[i].size() != n)
                    throw Error(Errc::ConfigInvalid, "similarity matrix is not square");
                for (std::size_t j = 0; j < n; ++j)
                    m2.values[i * n + j] = matrix[i][j];
            }
            return average_linkage(m2, cutoff).assignment;
        },
        py::arg("devices"), py::arg("matrix"), py::arg("cutoff"),
        "agglomerative average-linkage clusters -> {device: label}");
    m.def(
        "rand_index",
        [](const std::map<std::string, int>& p, const std::map<std::string, int>& q) {
            return rand_index(partition_from_dict(p), partition_from_dict(q));
        },
        py::arg("p"), py::arg("q"));
    m.def(
        "adjusted_rand_index",
        [](const std::map<std::string, int>& p, const std::map<std::string, int>& q) {
            return adjusted_rand_index(partition_from_dict(p), partition_from_dict(q));
        },
        py::arg("p"), py::arg("q"));

    // synthetic data
    py::class_<SynthOutput>(m, "SynthOutput")
        .def_readonly("records", &SynthOutput::records)
        .def_readonly("tickets", &SynthOutput::tickets)
        .def_property_readonly("ground_truth_json",
                               [](const SynthOutput& o) { return o.truth.to_json(); });
    m.def(
        "synth_generate",
        [](const std::string& config_json) {
            // route the JSON text through the file loader for one parser
            std::string tmp =
                (std::filesystem::temp_directory_path() / "pnmkit_py_synth.json").string();
            {
                std::ofstream f(tmp);
                f << config_json;
            }
            SynthConfig cfg = SynthConfig::from_json_file(tmp);
            std::filesystem::remove(tmp);
            return generate(cfg);
        },
        py::arg("config_json"), "generate a synthetic dataset from a SynthConfig JSON string");
    m.def("synth_example_config", &example_synth_config_json,
          "a ready-to-edit SynthConfig JSON example");
    m.def(
        "synth_write",
        [](const SynthOutput& out, const std::string& dir) { write_synth_output(out, dir); },
        py::arg("output"), py::arg("dir"), "write pnm.csv, tickets.csv, ground_truth.json");

    m.def(
        "mtr_baseline",
        [](const std::vector<PnmRecord>& records, double threshold_db) {
            MtrBaseline b = mtr_baseline(records, threshold_db);
            py::dict out;
            out["record_fraction"] = b.record_fraction;
            out["day_fraction"] = b.day_fraction;
            return out;
        },
        py::arg("records"), py::arg("threshold_db") = 18.0,
        "fixed-threshold MTR comparator: share of modems below threshold");
}
