// SPDX-License-Identifier: Apache-2.0
#include "pnmkit/core.hpp"

#include <cmath>

namespace pnmkit {

namespace metrics {

std::vector<std::string> default_list() {
    return {std::string(kSnr),         std::string(kTxPower),
            std::string(kRxPower),     std::string(kUnerrored),
            std::string(kCorrected),   std::string(kUncorrectable),
            std::string(kT3Timeouts),  std::string(kT4Timeouts),
            std::string(kMtr)};
}

bool is_counter(std::string_view metric) {
    return metric == kUnerrored || metric == kCorrected || metric == kUncorrectable ||
           metric == kT3Timeouts || metric == kT4Timeouts;
}

bool worst_is_min(std::string_view metric) {
    return metric == kSnr || metric == kMtr;
}

} // namespace metrics

std::vector<RecordViolation> validate_record(const PnmRecord& r) {
    std::vector<RecordViolation> out;
    if (r.timestamp < 0)
        out.push_back({RecordViolation::Kind::NegativeTimestamp, "timestamp"});
    if (!std::isfinite(r.snr_db))
        out.push_back({RecordViolation::Kind::NonFiniteMetric, "snr_db"});
    if (!std::isfinite(r.tx_power_dbmv))
        out.push_back({RecordViolation::Kind::NonFiniteMetric, "tx_power_dbmv"});
    if (!std::isfinite(r.rx_power_dbmv))
        out.push_back({RecordViolation::Kind::NonFiniteMetric, "rx_power_dbmv"});
    if (r.mtr_db && !std::isfinite(*r.mtr_db))
        out.push_back({RecordViolation::Kind::NonFiniteMetric, "mtr_db"});
    return out;
}

std::vector<CounterReset> find_counter_resets(const std::vector<PnmRecord>& sorted) {
    std::vector<CounterReset> out;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        const PnmRecord& prev = sorted[i - 1];
        const PnmRecord& cur = sorted[i];
        if (cur.device_id != prev.device_id || cur.channel_freq_hz != prev.channel_freq_hz)
            continue;
        auto check = [&](std::uint64_t a, std::uint64_t b, const char* field) {
            if (b < a)
                out.push_back({cur.device_id, cur.channel_freq_hz, cur.timestamp, field});
        };
        check(prev.unerrored, cur.unerrored, "unerrored");
        check(prev.corrected, cur.corrected, "corrected");
        check(prev.uncorrectable, cur.uncorrectable, "uncorrectable");
        check(prev.t3_timeouts, cur.t3_timeouts, "t3_timeouts");
        check(prev.t4_timeouts, cur.t4_timeouts, "t4_timeouts");
    }
    return out;
}

} // namespace pnmkit
