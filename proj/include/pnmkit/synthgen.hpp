// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pnmkit/core.hpp"
#include "pnmkit/detection.hpp"

namespace pnmkit {

/// One planted fault. Gauge metrics receive an additive delta waveform;
/// counter metrics have their per-interval increment mean multiplied by the
/// delta. Maintenance faults share one waveform across the group (plus
/// small per-device noise); service faults get a device-unique waveform.
struct FaultSpec {
    FaultType type = FaultType::Maintenance;
    int fiber_node = 0;
    std::vector<int> device_indices; // within the node; empty -> sample device_count
    int device_count = 0;
    double start_hours = 0; // from dataset start
    double duration_hours = 0;
    std::map<std::string, double> deltas;
};

struct MetricModel {
    double mean = 0;
    double sigma = 0;
};

struct SynthConfig {
    std::uint64_t seed = 1;
    Timestamp start_time = 1546732800; // 2019-01-06 00:00:00 UTC
    int n_fiber_nodes = 2;
    int devices_per_node = 8;
    int duration_days = 30;
    double cadence_hours = 4;
    int channels = 1;
    std::map<std::string, MetricModel> metric_models; // defaults filled when empty
    std::vector<FaultSpec> faults;
    double lambda_n_per_hour = 0.004;  // network-ticket noise, per device
    double lambda_a_per_hour = 0.036;  // extra rate inside that device's faults
    double non_network_rate_per_hour = 0.002; // junk the ticket filter must drop
    double maintenance_ticket_prob = 0.7; // fault tickets flagged part-of-primary
    double baseline_maintenance_flag_prob = 0.02;
    double fault_wiggle = 0.8;        // shared waveform fluctuation, fraction of delta
    double group_noise_fraction = 0.2; // per-device noise inside a group, fraction of delta
    double ticket_lifetime_median_hours = 24;
    double ticket_lifetime_log_sigma = 1.0;

    static SynthConfig from_json_file(const std::string& path);
    std::string to_json() const;
    /// Fills metric_models defaults and validates; throws ConfigInvalid.
    void finalize();
};

struct PlantedFault {
    std::string group_id;
    FaultType type = FaultType::Maintenance;
    std::string fiber_node;
    std::vector<std::string> devices;
    Interval interval;
};

struct GroundTruth {
    std::vector<PlantedFault> faults;
    /// fault intervals per device, sorted, non-overlapping
    std::map<std::string, std::vector<std::size_t>> device_faults; // indexes into faults

    IntervalSet fault_periods(const std::string& device) const;
    /// ground-truth partition of the planted-fault devices: one cluster per
    /// maintenance group, singletons for service faults
    std::map<std::string, std::string> device_group() const;

    std::string to_json() const;
};

struct SynthOutput {
    std::vector<PnmRecord> records; // canonical (device, ts, channel) order
    std::vector<Ticket> tickets;    // by (created_at, account, ...)
    GroundTruth truth;
};

SynthOutput generate(const SynthConfig& cfg);

/// Writes pnm.csv, tickets.csv and ground_truth.json under dir.
void write_synth_output(const SynthOutput& out, const std::string& dir);

/// A ready-to-run example configuration for the CLI.
std::string example_synth_config_json();

} // namespace pnmkit
