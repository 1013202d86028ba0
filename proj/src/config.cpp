// SPDX-License-Identifier: Apache-2.0
#include "pnmkit/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pnmkit/csv.hpp"
#include "pnmkit/error.hpp"

namespace pnmkit {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

std::string join_list(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += ",";
        out += v[i];
    }
    return out;
}

double to_double(const std::string& key, const std::string& value) {
    auto v = csv::parse_double(value);
    if (!v)
        throw Error(Errc::ConfigInvalid, key + " = '" + value + "' is not a number");
    return *v;
}

int to_int(const std::string& key, const std::string& value) {
    auto v = csv::parse_int(value);
    if (!v)
        throw Error(Errc::ConfigInvalid, key + " = '" + value + "' is not an integer");
    return static_cast<int>(*v);
}

} // namespace

void PipelineConfig::apply_line(const std::string& key, const std::string& value) {
    if (key == "cadence_hours")
        cadence_hours = to_double(key, value);
    else if (key == "max_gap_hours")
        max_gap_hours = to_double(key, value);
    else if (key == "metrics")
        metrics = split_list(value);
    else if (key == "dispatch_actions") {
        ticket_filter.dispatch_actions.clear();
        for (auto& a : split_list(value))
            ticket_filter.dispatch_actions.insert(a);
    } else if (key == "description_keywords") {
        ticket_filter.description_keywords.clear();
        for (auto& k : split_list(value))
            ticket_filter.description_keywords.insert(k);
    } else if (key == "grid_steps")
        grid_steps = to_int(key, value);
    else if (key == "n_features")
        n_features = to_int(key, value);
    else if (key == "window_x")
        window_x = to_int(key, value);
    else if (key == "window_y")
        window_y = to_int(key, value);
    else if (key == "sweep_y_min")
        sweep_y_min = to_int(key, value);
    else if (key == "sweep_y_max")
        sweep_y_max = to_int(key, value);
    else if (key == "sweep_y_step")
        sweep_y_step = to_int(key, value);
    else if (key == "coverage_floor")
        coverage_floor = to_double(key, value);
    else if (key == "cluster_features")
        cluster_features = split_list(value);
    else if (key == "min_group")
        min_group = to_int(key, value);
    else if (key == "cluster_combine") {
        if (value == "any")
            cluster_combine_any = true;
        else if (value == "all")
            cluster_combine_any = false;
        else
            throw Error(Errc::ConfigInvalid, "cluster_combine must be any|all");
    } else if (key == "similarity_grid_min")
        similarity_grid_min = to_double(key, value);
    else if (key == "similarity_grid_max")
        similarity_grid_max = to_double(key, value);
    else if (key == "similarity_grid_step")
        similarity_grid_step = to_double(key, value);
    else if (key == "informative_min_trr")
        informative_min_trr = to_double(key, value);
    else if (key == "mtr_threshold_db")
        mtr_threshold_db = to_double(key, value);
    else if (key.rfind("direction.", 0) == 0) {
        std::string family = key.substr(10);
        rule_kind_parse(value); // validate now
        direction_overrides[family] = value;
    } else
        throw Error(Errc::ConfigInvalid, "unknown config key '" + key + "'");
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::IoError, "cannot open " + path);
    PipelineConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#')
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(Errc::ConfigInvalid,
                        path + ":" + std::to_string(lineno) + ": expected key = value");
        cfg.apply_line(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    validate(cfg);
    return cfg;
}

void validate(const PipelineConfig& cfg) {
    if (cfg.cadence_hours <= 0 || cfg.max_gap_hours <= 0)
        throw Error(Errc::ConfigInvalid, "cadence_hours and max_gap_hours must be positive");
    if (cfg.metrics.empty())
        throw Error(Errc::ConfigInvalid, "metrics list is empty");
    if (cfg.grid_steps < 2)
        throw Error(Errc::ConfigInvalid, "grid_steps must be >= 2");
    if (cfg.trr_min_support < 0)
        throw Error(Errc::ConfigInvalid, "trr_min_support must be >= 0");
    if (cfg.n_features < 1 || cfg.n_features > 32)
        throw Error(Errc::ConfigInvalid, "n_features must be in 1..32");
    if (cfg.window_y < 1 || cfg.window_x < 0 || cfg.window_x > cfg.window_y)
        throw Error(Errc::ConfigInvalid, "need 0 <= window_x <= window_y");
    if (cfg.sweep_y_min < 1 || cfg.sweep_y_max < cfg.sweep_y_min || cfg.sweep_y_step < 1)
        throw Error(Errc::ConfigInvalid, "bad sweep y range");
    if (cfg.min_group < 2)
        throw Error(Errc::ConfigInvalid, "min_group must be >= 2");
    if (cfg.similarity_grid_min > cfg.similarity_grid_max || cfg.similarity_grid_step <= 0)
        throw Error(Errc::ConfigInvalid, "bad similarity grid");
    if (cfg.ticket_filter.dispatch_actions.empty() &&
        cfg.ticket_filter.description_keywords.empty())
        throw Error(Errc::ConfigInvalid, "ticket filter needs actions or keywords");
}

std::string PipelineConfig::canonical() const {
    std::ostringstream out;
    out << "cadence_hours = " << csv::format_double(cadence_hours) << "\n";
    out << "max_gap_hours = " << csv::format_double(max_gap_hours) << "\n";
    out << "metrics = " << join_list(metrics) << "\n";
    out << "dispatch_actions = "
        << join_list({ticket_filter.dispatch_actions.begin(),
                      ticket_filter.dispatch_actions.end()})
        << "\n";
    out << "description_keywords = "
        << join_list({ticket_filter.description_keywords.begin(),
                      ticket_filter.description_keywords.end()})
        << "\n";
    out << "grid_steps = " << grid_steps << "\n";
    out << "trr_min_support = " << trr_min_support << "\n";
    out << "n_features = " << n_features << "\n";
    out << "window_x = " << window_x << "\n";
    out << "window_y = " << window_y << "\n";
    out << "sweep_y_min = " << sweep_y_min << "\n";
    out << "sweep_y_max = " << sweep_y_max << "\n";
    out << "sweep_y_step = " << sweep_y_step << "\n";
    out << "coverage_floor = " << csv::format_double(coverage_floor) << "\n";
    out << "cluster_features = " << join_list(cluster_features) << "\n";
    out << "min_group = " << min_group << "\n";
    out << "cluster_combine = " << (cluster_combine_any ? "any" : "all") << "\n";
    out << "similarity_grid_min = " << csv::format_double(similarity_grid_min) << "\n";
    out << "similarity_grid_max = " << csv::format_double(similarity_grid_max) << "\n";
    out << "similarity_grid_step = " << csv::format_double(similarity_grid_step) << "\n";
    out << "informative_min_trr = " << csv::format_double(informative_min_trr) << "\n";
    out << "mtr_threshold_db = " << csv::format_double(mtr_threshold_db) << "\n";
    for (const auto& [family, kind] : direction_overrides)
        out << "direction." << family << " = " << kind << "\n";
    return out.str();
}

std::string PipelineConfig::hash() const {
    // FNV-1a 64
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::int64_t PipelineConfig::max_gap_seconds() const {
    return static_cast<std::int64_t>(std::llround(max_gap_hours * kSecondsPerHour));
}

RuleKind PipelineConfig::direction_for(const std::string& metric, FeatureModel model) const {
    auto it = direction_overrides.find(metric + "." + feature_model_name(model));
    if (it != direction_overrides.end())
        return rule_kind_parse(it->second);

    if (model == FeatureModel::Var)
        return RuleKind::OneSidedHigh;
    const bool quality_gauge = metric == metrics::kSnr || metric == metrics::kMtr;
    const bool power_gauge = metric == metrics::kTxPower || metric == metrics::kRxPower;
    if (quality_gauge)
        return RuleKind::OneSidedLow; // low snr/mtr is bad, sudden drops too
    if (power_gauge)
        return RuleKind::TwoSided; // power deviating either way is bad
    return RuleKind::OneSidedHigh; // error counters: high is bad
}

std::vector<double> PipelineConfig::similarity_grid() const {
    std::vector<double> out;
    for (double v = similarity_grid_min; v <= similarity_grid_max + 1e-12;
         v += similarity_grid_step)
        out.push_back(std::min(v, similarity_grid_max));
    return out;
}

std::vector<int> PipelineConfig::sweep_y_range() const {
    std::vector<int> out;
    for (int y = sweep_y_min; y <= sweep_y_max; y += sweep_y_step)
        out.push_back(y);
    return out;
}

} // namespace pnmkit
