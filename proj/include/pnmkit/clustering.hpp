// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pnmkit/core.hpp"
#include "pnmkit/detection.hpp"
#include "pnmkit/ingest.hpp"

namespace pnmkit {

/// Pearson correlation of the two step functions resampled onto the union
/// of their collection timestamps inside `window`. Both-constant vectors
/// are perfectly similar (1), a constant against a varying one is
/// unrelated (0). nullopt when fewer than min_overlap aligned samples
/// exist (InsufficientOverlap as a value).
std::optional<double> pairwise_similarity(const DeviceSeries& a, const DeviceSeries& b,
                                          Interval window, std::int64_t max_gap_seconds,
                                          int min_overlap = 3);

/// Dense symmetric similarity matrix; pairs with insufficient overlap get
/// the minimum similarity -1.
struct SimilarityMatrix {
    std::vector<std::string> devices;
    std::vector<double> values; // row-major n*n, diagonal 1

    double at(std::size_t i, std::size_t j) const { return values[i * devices.size() + j]; }
    std::size_t size() const { return devices.size(); }
};

SimilarityMatrix build_similarity_matrix(
    const std::map<std::string, const DeviceSeries*>& series_by_device, Interval window,
    std::int64_t max_gap_seconds);

/// Cluster labels per device; labels are dense 0..k-1 ordered by each
/// cluster's lexicographically smallest member.
struct Partition {
    std::map<std::string, int> assignment;

    int cluster_count() const;
    bool operator==(const Partition&) const = default;
};

/// Agglomerative average-linkage clustering: repeatedly merges the pair of
/// clusters with the highest mean pairwise similarity while that mean is
/// >= cutoff. Ties break toward the lexicographically smallest member-id
/// pair.
Partition average_linkage(const SimilarityMatrix& sim, double cutoff);

/// (TP+TN) / all device pairs. Throws MismatchedDevices on different
/// device sets. Trivial sets (n < 2) score 1.
double rand_index(const Partition& p, const Partition& q);

/// Hypergeometric-expectation adjustment of the rand index; 1 for
/// identical partitions, ~0 for random ones.
double adjusted_rand_index(const Partition& p, const Partition& q);

/// Devices of one fiber node whose anomaly events overlap in time
/// (transitively). Clustering runs per episode over the union of event
/// spans padded on both sides.
struct Episode {
    std::string fiber_node;
    Interval window; // padded
    std::vector<std::size_t> event_indices;
};

std::vector<Episode> group_episodes(const std::vector<AnomalyEvent>& events,
                                    const DeviceIndex& index, std::int64_t pad_seconds);

struct ClusteringOptions {
    std::vector<std::string> features{"snr", "txpower"};
    int min_group = 2;       // cluster members needed to call it maintenance
    bool combine_any = true; // maintenance when grouped under any feature (vs all)
    std::int64_t max_gap_seconds = 24 * kSecondsPerHour;
    std::int64_t pad_seconds = 12 * 4 * kSecondsPerHour; // one window_y of cadence
    double informative_min_trr = 2.0; // learned cutoff below this ratio is flagged
};

/// Per-feature similarity cutoffs learned by maximizing the maintenance
/// ticketing rate ratio.
struct SimilarityThresholds {
    std::map<std::string, double> cutoff;
    std::map<std::string, double> trr_m; // may be +inf when no maintenance
                                         // ticket lands in service periods
    std::map<std::string, bool> informative;
};

struct ClusterReportRow {
    std::string fiber_node;
    std::string feature;
    std::string cluster_id;
    std::vector<std::string> members;
    double mean_similarity = 0;
    FaultType type = FaultType::Service;
};

struct TypingResult {
    std::vector<AnomalyEvent> events; // input events with fault_type/cluster_id set
    std::vector<ClusterReportRow> report;
};

/// Types every event maintenance or service: a device is a maintenance
/// case when any clustering feature groups it with >= min_group - 1 other
/// concurrently anomalous devices of its fiber node.
TypingResult classify_fault_type(const std::vector<AnomalyEvent>& events,
                                 const std::map<std::string, std::map<std::string, DeviceSeries>>&
                                     series_by_metric_by_device,
                                 const DeviceIndex& index, const SimilarityThresholds& thresholds,
                                 const ClusteringOptions& opt);

/// Grid-search of the similarity cutoff per clustering feature: each value
/// runs the cluster->type pass and scores the maintenance ticketing rate
/// during diagnosed-maintenance periods over diagnosed-service periods.
/// Throws NoMaintenanceTickets when the training tickets carry no
/// part-of-primary flag.
SimilarityThresholds search_similarity_threshold(
    const std::vector<AnomalyEvent>& events,
    const std::map<std::string, std::map<std::string, DeviceSeries>>& series_by_metric_by_device,
    const std::vector<Ticket>& tickets, const DeviceIndex& index,
    const std::vector<double>& grid, const ClusteringOptions& opt, int jobs = 1);

void write_cluster_report(std::ostream& out, const std::vector<ClusterReportRow>& rows);

} // namespace pnmkit
