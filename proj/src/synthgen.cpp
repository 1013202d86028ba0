// SPDX-License-Identifier: Apache-2.0
#include "pnmkit/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"
#include "pnmkit/error.hpp"
#include "pnmkit/ingest.hpp"
#include "pnmkit/rng.hpp"

namespace pnmkit {

namespace {

using nlohmann::ordered_json;

std::string device_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "cm-%05d", index);
    return buf;
}

std::string account_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "acct-%05d", index);
    return buf;
}

std::string node_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "fn-%03d", index);
    return buf;
}

std::map<std::string, MetricModel> default_metric_models() {
    return {
        {"snr", {35.0, 0.5}},        {"txpower", {45.0, 0.5}},
        {"rxpower", {0.0, 0.5}},     {"mtr", {25.0, 0.5}},
        {"unerrored", {20000, 300}}, {"corrected", {100, 30}},
        {"uncorrectable", {2, 2}},   {"t3timeouts", {0.3, 0.8}},
        {"t4timeouts", {0.1, 0.4}},
    };
}

const std::vector<std::string>& generation_order() {
    static const std::vector<std::string> order = metrics::default_list();
    return order;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

} // namespace

void SynthConfig::finalize() {
    if (metric_models.empty())
        metric_models = default_metric_models();
    else {
        for (auto& [name, model] : default_metric_models())
            metric_models.emplace(name, model);
    }
    if (n_fiber_nodes < 1 || devices_per_node < 1)
        throw Error(Errc::ConfigInvalid, "need at least one fiber node and device");
    if (duration_days < 1)
        throw Error(Errc::ConfigInvalid, "duration_days must be positive");
    if (cadence_hours <= 0)
        throw Error(Errc::ConfigInvalid, "cadence_hours must be positive");
    if (channels < 1)
        throw Error(Errc::ConfigInvalid, "need at least one channel");
    if (lambda_n_per_hour <= 0)
        throw Error(Errc::ConfigInvalid, "lambda_n must be > 0");
    if (lambda_a_per_hour < 0)
        throw Error(Errc::ConfigInvalid, "lambda_a must be >= 0");
    const double total_hours = duration_days * 24.0;
    for (const FaultSpec& f : faults) {
        if (f.fiber_node < 0 || f.fiber_node >= n_fiber_nodes)
            throw Error(Errc::ConfigInvalid, "fault fiber_node out of range");
        int n = f.device_indices.empty() ? f.device_count
                                         : static_cast<int>(f.device_indices.size());
        if (f.type == FaultType::Maintenance && n < 2)
            throw Error(Errc::ConfigInvalid, "a maintenance fault needs >= 2 devices");
        if (f.type == FaultType::Service && n != 1)
            throw Error(Errc::ConfigInvalid, "a service fault affects exactly 1 device");
        if (n > devices_per_node)
            throw Error(Errc::ConfigInvalid, "fault asks for more devices than the node has");
        for (int d : f.device_indices) {
            if (d < 0 || d >= devices_per_node)
                throw Error(Errc::ConfigInvalid, "fault device index out of range");
        }
        if (f.start_hours < 0 || f.duration_hours <= 0 ||
            f.start_hours + f.duration_hours > total_hours)
            throw Error(Errc::ConfigInvalid, "fault interval outside the dataset");
        if (f.deltas.empty())
            throw Error(Errc::ConfigInvalid, "fault needs at least one metric delta");
    }
}

IntervalSet GroundTruth::fault_periods(const std::string& device) const {
    IntervalSet out;
    auto it = device_faults.find(device);
    if (it == device_faults.end())
        return out;
    for (std::size_t i : it->second)
        out.add(faults[i].interval);
    return out;
}

std::map<std::string, std::string> GroundTruth::device_group() const {
    std::map<std::string, std::string> out;
    for (const auto& [device, idxs] : device_faults) {
        if (!idxs.empty())
            out[device] = faults[idxs.front()].group_id; // earliest fault wins
    }
    return out;
}

SynthOutput generate(const SynthConfig& raw) {
    SynthConfig cfg = raw;
    cfg.finalize();

    const Rng master(cfg.seed);
    const int n_devices = cfg.n_fiber_nodes * cfg.devices_per_node;
    const std::int64_t cadence_sec =
        static_cast<std::int64_t>(std::llround(cfg.cadence_hours * kSecondsPerHour));
    const std::int64_t total_sec = static_cast<std::int64_t>(cfg.duration_days) * kSecondsPerDay;
    const std::int64_t n_points = total_sec / cadence_sec;
    const double total_hours = static_cast<double>(total_sec) / kSecondsPerHour;

    SynthOutput out;

    // resolve the fault schedule to concrete devices and intervals
    int maint_count = 0, service_count = 0;
    for (std::size_t fi = 0; fi < cfg.faults.size(); ++fi) {
        const FaultSpec& spec = cfg.faults[fi];
        PlantedFault f;
        f.type = spec.type;
        f.fiber_node = node_name(spec.fiber_node);
        f.group_id = (spec.type == FaultType::Maintenance)
                         ? "mf-" + std::to_string(maint_count++)
                         : "sf-" + std::to_string(service_count++);
        Timestamp fstart =
            cfg.start_time +
            static_cast<std::int64_t>(std::llround(spec.start_hours * kSecondsPerHour));
        Timestamp fend =
            fstart + static_cast<std::int64_t>(std::llround(spec.duration_hours * kSecondsPerHour));
        f.interval = {fstart, fend};

        std::vector<int> indices = spec.device_indices;
        if (indices.empty()) {
            // sample distinct devices of the node
            Rng pick = master.child(3, fi);
            std::vector<int> pool(cfg.devices_per_node);
            for (int d = 0; d < cfg.devices_per_node; ++d)
                pool[d] = d;
            for (int k = 0; k < spec.device_count; ++k) {
                std::size_t j = k + pick.below(pool.size() - k);
                std::swap(pool[k], pool[j]);
                indices.push_back(pool[k]);
            }
            std::sort(indices.begin(), indices.end());
        }
        for (int d : indices)
            f.devices.push_back(device_name(spec.fiber_node * cfg.devices_per_node + d));
        out.truth.faults.push_back(std::move(f));
    }

    for (std::size_t i = 0; i < out.truth.faults.size(); ++i) {
        for (const std::string& d : out.truth.faults[i].devices)
            out.truth.device_faults[d].push_back(i);
    }
    for (auto& [device, idxs] : out.truth.device_faults) {
        std::sort(idxs.begin(), idxs.end(), [&](std::size_t a, std::size_t b) {
            return out.truth.faults[a].interval.start < out.truth.faults[b].interval.start;
        });
        for (std::size_t k = 1; k < idxs.size(); ++k) {
            if (out.truth.faults[idxs[k]].interval.start <
                out.truth.faults[idxs[k - 1]].interval.end)
                throw Error(Errc::ConfigInvalid,
                            "device " + device + " has overlapping planted faults");
        }
    }

    // shared waveform per fault: the group moves together, devices add
    // independent noise on top
    std::vector<std::vector<double>> waveforms(out.truth.faults.size());
    std::vector<std::int64_t> wave_first_point(out.truth.faults.size());
    for (std::size_t fi = 0; fi < out.truth.faults.size(); ++fi) {
        const Interval iv = out.truth.faults[fi].interval;
        std::int64_t k_first = ceil_div(iv.start - cfg.start_time, cadence_sec);
        std::int64_t k_last = (iv.end - 1 - cfg.start_time) / cadence_sec;
        wave_first_point[fi] = k_first;
        Rng wave_rng = master.child(4, fi);
        std::vector<double>& wave = waveforms[fi];
        wave.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, k_last - k_first + 1)));
        for (std::int64_t k = k_first; k <= k_last; ++k)
            wave.push_back(1.0 + cfg.fault_wiggle * wave_rng.normal());
    }

    // telemetry
    for (int di = 0; di < n_devices; ++di) {
        const std::string device = device_name(di);
        const std::string account = account_name(di);
        const std::string node = node_name(di / cfg.devices_per_node);
        Rng rng = master.child(1, static_cast<std::uint64_t>(di));

        const auto faults_it = out.truth.device_faults.find(device);
        const std::vector<std::size_t>* dev_faults =
            faults_it == out.truth.device_faults.end() ? nullptr : &faults_it->second;

        std::vector<std::vector<double>> cum(cfg.channels,
                                             std::vector<double>(generation_order().size(), 0));
        for (std::int64_t k = 0; k < n_points; ++k) {
            const Timestamp t = cfg.start_time + k * cadence_sec;
            const PlantedFault* active = nullptr;
            std::size_t active_idx = 0;
            if (dev_faults) {
                for (std::size_t i : *dev_faults) {
                    if (out.truth.faults[i].interval.contains(t)) {
                        active = &out.truth.faults[i];
                        active_idx = i;
                        break;
                    }
                }
            }
            for (int c = 0; c < cfg.channels; ++c) {
                PnmRecord r;
                r.device_id = device;
                r.account_id = account;
                r.fiber_node = node;
                r.timestamp = t;
                r.channel_freq_hz = 10000000 + 6400000 * c;

                for (std::size_t mi = 0; mi < generation_order().size(); ++mi) {
                    const std::string& metric = generation_order()[mi];
                    const MetricModel& model = cfg.metric_models.at(metric);
                    double delta = 0;
                    bool has_delta = false;
                    if (active) {
                        // planted faults mirror cfg.faults index-for-index
                        const auto& deltas = cfg.faults[active_idx].deltas;
                        auto dit = deltas.find(metric);
                        if (dit != deltas.end()) {
                            delta = dit->second;
                            has_delta = true;
                        }
                    }
                    double value;
                    if (metrics::is_counter(metric)) {
                        double mean = model.mean;
                        double var = model.sigma * model.sigma;
                        if (has_delta && delta > 0) {
                            mean *= delta; // counters take multiplicative factors
                            var *= delta * delta;
                        }
                        double inc = static_cast<double>(rng.negative_binomial(mean, var));
                        cum[c][mi] += inc;
                        value = cum[c][mi];
                    } else {
                        value = rng.normal(model.mean, model.sigma);
                        if (has_delta) {
                            const std::vector<double>& wave = waveforms[active_idx];
                            std::int64_t wk = k - wave_first_point[active_idx];
                            double shape = (wk >= 0 && wk < static_cast<std::int64_t>(wave.size()))
                                               ? wave[wk]
                                               : 1.0;
                            value += delta * shape +
                                     rng.normal(0, cfg.group_noise_fraction * std::abs(delta));
                        }
                    }

                    if (metric == metrics::kSnr)
                        r.snr_db = value;
                    else if (metric == metrics::kTxPower)
                        r.tx_power_dbmv = value;
                    else if (metric == metrics::kRxPower)
                        r.rx_power_dbmv = value;
                    else if (metric == metrics::kMtr)
                        r.mtr_db = value;
                    else if (metric == metrics::kUnerrored)
                        r.unerrored = static_cast<std::uint64_t>(value);
                    else if (metric == metrics::kCorrected)
                        r.corrected = static_cast<std::uint64_t>(value);
                    else if (metric == metrics::kUncorrectable)
                        r.uncorrectable = static_cast<std::uint64_t>(value);
                    else if (metric == metrics::kT3Timeouts)
                        r.t3_timeouts = static_cast<std::uint64_t>(value);
                    else if (metric == metrics::kT4Timeouts)
                        r.t4_timeouts = static_cast<std::uint64_t>(value);
                }
                out.records.push_back(std::move(r));
            }
        }

        // tickets
        Rng trng = master.child(2, static_cast<std::uint64_t>(di));
        auto emit = [&](Timestamp created, const char* action, const char* description,
                        bool maint_flag, const std::string& primary) {
            Ticket t;
            t.account_id = account;
            t.created_at = created;
            t.action = action;
            t.description = description;
            t.is_part_of_primary = maint_flag;
            if (maint_flag && !primary.empty())
                t.primary_ticket_id = primary;
            if (trng.uniform() >= 0.05) { // a few tickets stay open
                double life_sec = trng.lognormal(
                    std::log(cfg.ticket_lifetime_median_hours * kSecondsPerHour),
                    cfg.ticket_lifetime_log_sigma);
                t.closed_at = created + static_cast<Timestamp>(std::llround(life_sec));
            }
            out.tickets.push_back(std::move(t));
        };
        static const char* kNetDescriptions[3] = {"Data Down", "Noisy Line", "Slow Speed"};
        static const char* kJunkActions[2] = {"Customer Education", "Cancelled"};
        static const char* kJunkDescriptions[2] = {"billing question", "wants plan change"};

        std::uint64_t n_base = trng.poisson(cfg.lambda_n_per_hour * total_hours);
        for (std::uint64_t i = 0; i < n_base; ++i) {
            Timestamp created = cfg.start_time + static_cast<Timestamp>(trng.below(total_sec));
            bool flag = trng.uniform() < cfg.baseline_maintenance_flag_prob;
            emit(created, "Dispatch", kNetDescriptions[trng.below(3)], flag, "pri-noise");
        }
        if (dev_faults) {
            for (std::size_t i : *dev_faults) {
                const PlantedFault& f = out.truth.faults[i];
                double dur_hours = static_cast<double>(f.interval.duration()) / kSecondsPerHour;
                std::uint64_t n_extra = trng.poisson(cfg.lambda_a_per_hour * dur_hours);
                for (std::uint64_t j = 0; j < n_extra; ++j) {
                    Timestamp created =
                        f.interval.start +
                        static_cast<Timestamp>(trng.below(f.interval.duration()));
                    bool flag = f.type == FaultType::Maintenance &&
                                trng.uniform() < cfg.maintenance_ticket_prob;
                    emit(created, "Dispatch", kNetDescriptions[trng.below(3)], flag, f.group_id);
                }
            }
        }
        std::uint64_t n_junk = trng.poisson(cfg.non_network_rate_per_hour * total_hours);
        for (std::uint64_t i = 0; i < n_junk; ++i) {
            Timestamp created = cfg.start_time + static_cast<Timestamp>(trng.below(total_sec));
            emit(created, kJunkActions[trng.below(2)], kJunkDescriptions[trng.below(2)], false,
                 "");
        }
    }

    std::sort(out.records.begin(), out.records.end(),
              [](const PnmRecord& a, const PnmRecord& b) {
                  if (a.device_id != b.device_id)
                      return a.device_id < b.device_id;
                  if (a.timestamp != b.timestamp)
                      return a.timestamp < b.timestamp;
                  return a.channel_freq_hz < b.channel_freq_hz;
              });
    std::sort(out.tickets.begin(), out.tickets.end(), [](const Ticket& a, const Ticket& b) {
        if (a.created_at != b.created_at)
            return a.created_at < b.created_at;
        if (a.account_id != b.account_id)
            return a.account_id < b.account_id;
        if (a.action != b.action)
            return a.action < b.action;
        return a.description < b.description;
    });
    return out;
}

SynthConfig SynthConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::IoError, "cannot open " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error(Errc::ConfigInvalid, std::string("bad synth config: ") + e.what());
    }
    SynthConfig cfg;
    try {
        cfg.seed = j.value("seed", cfg.seed);
        cfg.start_time = j.value("start_time", cfg.start_time);
        cfg.n_fiber_nodes = j.value("n_fiber_nodes", cfg.n_fiber_nodes);
        cfg.devices_per_node = j.value("devices_per_node", cfg.devices_per_node);
        cfg.duration_days = j.value("duration_days", cfg.duration_days);
        cfg.cadence_hours = j.value("cadence_hours", cfg.cadence_hours);
        cfg.channels = j.value("channels", cfg.channels);
        cfg.lambda_n_per_hour = j.value("lambda_n_per_hour", cfg.lambda_n_per_hour);
        cfg.lambda_a_per_hour = j.value("lambda_a_per_hour", cfg.lambda_a_per_hour);
        cfg.non_network_rate_per_hour =
            j.value("non_network_rate_per_hour", cfg.non_network_rate_per_hour);
        cfg.maintenance_ticket_prob =
            j.value("maintenance_ticket_prob", cfg.maintenance_ticket_prob);
        cfg.baseline_maintenance_flag_prob =
            j.value("baseline_maintenance_flag_prob", cfg.baseline_maintenance_flag_prob);
        cfg.fault_wiggle = j.value("fault_wiggle", cfg.fault_wiggle);
        cfg.group_noise_fraction = j.value("group_noise_fraction", cfg.group_noise_fraction);
        cfg.ticket_lifetime_median_hours =
            j.value("ticket_lifetime_median_hours", cfg.ticket_lifetime_median_hours);
        cfg.ticket_lifetime_log_sigma =
            j.value("ticket_lifetime_log_sigma", cfg.ticket_lifetime_log_sigma);
        if (j.contains("metrics")) {
            for (auto& [name, m] : j.at("metrics").items())
                cfg.metric_models[name] = {m.value("mean", 0.0), m.value("sigma", 0.0)};
        }
        if (j.contains("faults")) {
            for (auto& f : j.at("faults")) {
                FaultSpec spec;
                std::string type = f.value("type", std::string("maintenance"));
                if (type == "maintenance")
                    spec.type = FaultType::Maintenance;
                else if (type == "service")
                    spec.type = FaultType::Service;
                else
                    throw Error(Errc::ConfigInvalid, "bad fault type '" + type + "'");
                spec.fiber_node = f.value("fiber_node", 0);
                spec.device_count = f.value("device_count", 0);
                if (f.contains("devices"))
                    spec.device_indices = f.at("devices").get<std::vector<int>>();
                spec.start_hours = f.value("start_hours", 0.0);
                spec.duration_hours = f.value("duration_hours", 0.0);
                if (f.contains("deltas")) {
                    for (auto& [metric, d] : f.at("deltas").items())
                        spec.deltas[metric] = d.get<double>();
                }
                cfg.faults.push_back(std::move(spec));
            }
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(Errc::ConfigInvalid, std::string("bad synth config: ") + e.what());
    }
    cfg.finalize();
    return cfg;
}

std::string SynthConfig::to_json() const {
    ordered_json j;
    j["seed"] = seed;
    j["start_time"] = start_time;
    j["n_fiber_nodes"] = n_fiber_nodes;
    j["devices_per_node"] = devices_per_node;
    j["duration_days"] = duration_days;
    j["cadence_hours"] = cadence_hours;
    j["channels"] = channels;
    j["lambda_n_per_hour"] = lambda_n_per_hour;
    j["lambda_a_per_hour"] = lambda_a_per_hour;
    j["non_network_rate_per_hour"] = non_network_rate_per_hour;
    j["maintenance_ticket_prob"] = maintenance_ticket_prob;
    j["baseline_maintenance_flag_prob"] = baseline_maintenance_flag_prob;
    j["fault_wiggle"] = fault_wiggle;
    j["group_noise_fraction"] = group_noise_fraction;
    j["ticket_lifetime_median_hours"] = ticket_lifetime_median_hours;
    j["ticket_lifetime_log_sigma"] = ticket_lifetime_log_sigma;
    ordered_json models;
    for (const auto& [name, m] : metric_models)
        models[name] = ordered_json{{"mean", m.mean}, {"sigma", m.sigma}};
    j["metrics"] = models;
    ordered_json fault_list = ordered_json::array();
    for (const FaultSpec& f : faults) {
        ordered_json fj;
        fj["type"] = f.type == FaultType::Maintenance ? "maintenance" : "service";
        fj["fiber_node"] = f.fiber_node;
        if (!f.device_indices.empty())
            fj["devices"] = f.device_indices;
        else
            fj["device_count"] = f.device_count;
        fj["start_hours"] = f.start_hours;
        fj["duration_hours"] = f.duration_hours;
        ordered_json deltas;
        for (const auto& [metric, d] : f.deltas)
            deltas[metric] = d;
        fj["deltas"] = deltas;
        fault_list.push_back(fj);
    }
    j["faults"] = fault_list;
    return j.dump(2) + "\n";
}

std::string GroundTruth::to_json() const {
    ordered_json j;
    ordered_json fault_list = ordered_json::array();
    for (const PlantedFault& f : faults) {
        ordered_json fj;
        fj["group_id"] = f.group_id;
        fj["type"] = fault_type_name(f.type);
        fj["fiber_node"] = f.fiber_node;
        fj["devices"] = f.devices;
        fj["start"] = f.interval.start;
        fj["end"] = f.interval.end;
        fault_list.push_back(fj);
    }
    j["faults"] = fault_list;
    ordered_json per_device;
    for (const auto& [device, idxs] : device_faults) {
        ordered_json list = ordered_json::array();
        for (std::size_t i : idxs) {
            list.push_back(ordered_json{{"start", faults[i].interval.start},
                                        {"end", faults[i].interval.end},
                                        {"type", fault_type_name(faults[i].type)},
                                        {"group_id", faults[i].group_id}});
        }
        per_device[device] = list;
    }
    j["per_device"] = per_device;
    return j.dump(2) + "\n";
}

void write_synth_output(const SynthOutput& out, const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir + "/pnm.csv", std::ios::binary);
        if (!f)
            throw Error(Errc::IoError, "cannot write " + dir + "/pnm.csv");
        write_pnm_csv(f, out.records);
    }
    {
        std::ofstream f(dir + "/tickets.csv", std::ios::binary);
        if (!f)
            throw Error(Errc::IoError, "cannot write " + dir + "/tickets.csv");
        write_ticket_csv(f, out.tickets);
    }
    {
        std::ofstream f(dir + "/ground_truth.json", std::ios::binary);
        if (!f)
            throw Error(Errc::IoError, "cannot write " + dir + "/ground_truth.json");
        f << out.truth.to_json();
    }
}

std::string example_synth_config_json() {
    SynthConfig cfg;
    cfg.seed = 42;
    cfg.n_fiber_nodes = 4;
    cfg.devices_per_node = 10;
    cfg.duration_days = 30;
    cfg.faults = {
        {FaultType::Maintenance, 0, {}, 5, 24 * 3, 48, {{"snr", -12}, {"txpower", 8}}},
        {FaultType::Maintenance, 1, {}, 4, 24 * 10, 72, {{"txpower", 10}, {"uncorrectable", 40}}},
        {FaultType::Service, 2, {3}, 0, 24 * 6, 36, {{"snr", -10}, {"t3timeouts", 30}}},
        {FaultType::Service, 3, {7}, 0, 24 * 20, 48, {{"rxpower", 6}, {"corrected", 25}}},
    };
    cfg.finalize();
    return cfg.to_json();
}

} // namespace pnmkit
