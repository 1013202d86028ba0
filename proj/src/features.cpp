// SPDX-License-Identifier: Apache-2.0
#include "pnmkit/features.hpp"

#include <cmath>
#include <ostream>

#include "pnmkit/csv.hpp"
#include "pnmkit/error.hpp"

namespace pnmkit {

std::string feature_model_name(FeatureModel m) {
    switch (m) {
    case FeatureModel::Avg: return "avg";
    case FeatureModel::Wma: return "wma";
    case FeatureModel::Ewma: return "ewma";
    case FeatureModel::WmaDiff: return "wma-diff";
    case FeatureModel::Var: return "var";
    }
    return "?";
}

namespace {

std::string lambda_str(double lambda) {
    // the grid is 0.1..0.9; render with one decimal
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%.1f", lambda);
    return buf;
}

} // namespace

std::string FeatureSpec::name() const {
    if (model == FeatureModel::Ewma)
        return metric + "-ewma-" + lambda_str(lambda);
    return metric + "-" + feature_model_name(model) + "-" + std::to_string(window_days);
}

FeatureSpec FeatureSpec::parse(const std::string& name) {
    auto first = name.find('-');
    auto last = name.rfind('-');
    if (first == std::string::npos || last == first)
        throw Error(Errc::ConfigInvalid, "bad feature name '" + name + "'");
    FeatureSpec spec;
    spec.metric = name.substr(0, first);
    std::string model = name.substr(first + 1, last - first - 1);
    std::string param = name.substr(last + 1);
    if (model == "avg")
        spec.model = FeatureModel::Avg;
    else if (model == "wma")
        spec.model = FeatureModel::Wma;
    else if (model == "ewma")
        spec.model = FeatureModel::Ewma;
    else if (model == "wma-diff")
        spec.model = FeatureModel::WmaDiff;
    else if (model == "var")
        spec.model = FeatureModel::Var;
    else
        throw Error(Errc::ConfigInvalid, "bad feature model in '" + name + "'");
    if (spec.model == FeatureModel::Ewma) {
        auto v = csv::parse_double(param);
        if (!v || *v <= 0 || *v >= 1)
            throw Error(Errc::ConfigInvalid, "bad ewma lambda in '" + name + "'");
        spec.lambda = *v;
    } else {
        auto v = csv::parse_int(param);
        if (!v || *v < 1)
            throw Error(Errc::ConfigInvalid, "bad window in '" + name + "'");
        spec.window_days = static_cast<int>(*v);
    }
    return spec;
}

std::vector<FeatureSpec> FeatureSpec::all_for_metric(const std::string& metric) {
    std::vector<FeatureSpec> out;
    out.reserve(37);
    for (FeatureModel m : {FeatureModel::Avg, FeatureModel::Wma, FeatureModel::WmaDiff,
                           FeatureModel::Var}) {
        for (int win = 1; win <= 7; ++win)
            out.push_back({metric, m, win, 0});
    }
    for (int i = 1; i <= 9; ++i)
        out.push_back({metric, FeatureModel::Ewma, 0, i / 10.0});
    return out;
}

std::vector<FeatureSpec> FeatureSpec::full_grid(const std::vector<std::string>& metrics) {
    std::vector<FeatureSpec> out;
    out.reserve(metrics.size() * 37);
    for (const std::string& m : metrics) {
        auto specs = all_for_metric(m);
        out.insert(out.end(), specs.begin(), specs.end());
    }
    return out;
}

namespace {

// Calls fn(i, lo) for every point, where [lo, i] is the trailing window.
template <typename Fn>
void for_each_window(const DeviceSeries& s, int window_days, Fn&& fn) {
    const std::int64_t span = static_cast<std::int64_t>(window_days) * kSecondsPerDay;
    std::size_t lo = 0;
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        while (s.points[lo].ts <= s.points[i].ts - span)
            ++lo;
        fn(i, lo);
    }
}

} // namespace

std::vector<double> rolling_avg(const DeviceSeries& s, int window_days) {
    std::vector<double> out(s.points.size());
    double sum = 0;
    std::size_t prev_lo = 0;
    for_each_window(s, window_days, [&](std::size_t i, std::size_t lo) {
        sum += s.points[i].value;
        while (prev_lo < lo)
            sum -= s.points[prev_lo++].value;
        out[i] = sum / static_cast<double>(i - lo + 1);
    });
    return out;
}

std::vector<double> rolling_wma(const DeviceSeries& s, int window_days) {
    // weights n..1 newest-to-oldest, anchored at the oldest in-window point:
    // appending point i adds weight n; dropping the oldest lowers every
    // remaining weight by one, i.e. weighted -= sum
    std::vector<double> out(s.points.size());
    double sum = 0;
    double weighted = 0;
    std::size_t prev_lo = 0;
    for_each_window(s, window_days, [&](std::size_t i, std::size_t lo) {
        weighted += static_cast<double>(i - prev_lo + 1) * s.points[i].value;
        sum += s.points[i].value;
        while (prev_lo < lo) {
            weighted -= sum;
            sum -= s.points[prev_lo].value;
            ++prev_lo;
        }
        const double n = static_cast<double>(i - lo + 1);
        out[i] = weighted / (n * (n + 1) / 2.0);
    });
    return out;
}

std::vector<double> rolling_wma_diff(const DeviceSeries& s, int window_days) {
    std::vector<double> out = rolling_wma(s, window_days);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = s.points[i].value - out[i];
    return out;
}

std::vector<double> rolling_var(const DeviceSeries& s, int window_days) {
    // two-pass per window: exact zero for constant windows, no cancellation
    std::vector<double> mean = rolling_avg(s, window_days);
    std::vector<double> out(s.points.size());
    for_each_window(s, window_days, [&](std::size_t i, std::size_t lo) {
        double acc = 0;
        for (std::size_t k = lo; k <= i; ++k) {
            const double d = s.points[k].value - mean[i];
            acc += d * d;
        }
        out[i] = acc / static_cast<double>(i - lo + 1);
    });
    return out;
}

std::vector<double> rolling_ewma(const DeviceSeries& s, double lambda) {
    std::vector<double> out(s.points.size());
    if (out.empty())
        return out;
    out[0] = s.points[0].value;
    for (std::size_t i = 1; i < out.size(); ++i)
        out[i] = lambda * s.points[i].value + (1 - lambda) * out[i - 1];
    return out;
}

FeatureSeries compute_feature(const DeviceSeries& s, const FeatureSpec& spec) {
    std::vector<double> values;
    switch (spec.model) {
    case FeatureModel::Avg: values = rolling_avg(s, spec.window_days); break;
    case FeatureModel::Wma: values = rolling_wma(s, spec.window_days); break;
    case FeatureModel::WmaDiff: values = rolling_wma_diff(s, spec.window_days); break;
    case FeatureModel::Var: values = rolling_var(s, spec.window_days); break;
    case FeatureModel::Ewma: values = rolling_ewma(s, spec.lambda); break;
    }
    FeatureSeries out;
    out.spec = spec;
    out.device_id = s.device_id;
    out.points.resize(s.points.size());
    for (std::size_t i = 0; i < s.points.size(); ++i)
        out.points[i] = {s.points[i].ts, values[i]};
    return out;
}

void write_feature_csv(std::ostream& out, const std::vector<FeatureSeries>& series) {
    csv::Writer w(out);
    w.write_row({"device", "ts", "feature_name", "value"});
    for (const FeatureSeries& fs : series) {
        const std::string name = fs.spec.name();
        for (const SeriesPoint& p : fs.points)
            w.write_row({fs.device_id, std::to_string(p.ts), name,
                         csv::format_double(p.value)});
    }
}

} // namespace pnmkit
