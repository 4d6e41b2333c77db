#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "miace/clustering.hpp"
#include "miace/train.hpp"

namespace miace {

/// Exhaustive search: scores every positive-bag instance (as a whitened
/// candidate direction) with the full objective and keeps the best. Ties
/// break to the lowest (bag, instance) pair. Cost O(N+ (N+ + N-)).
InitResult init_original(const BackgroundStats& stats, const MilDataset& dataset);

/// K-means over all whitened instances regardless of bag structure, then the
/// center with the best objective. K objective evaluations.
InitResult init_kmeans(const BackgroundStats& stats, const MilDataset& dataset,
                       int cluster_count, std::uint64_t seed);

/// The multiple instance cluster rank of one cluster: a weighted blend of
/// the proportion of positive bags touching the cluster, the proportion of
/// positive instances in it, and (penalized) the proportion of negative
/// instances in it, shifted and scaled into [0, 1].
///
/// `assignment` labels the dataset's instances flattened in bag order.
double mic_rank(int cluster, int cluster_count, const std::vector<int>& assignment,
                const MilDataset& dataset, const RankWeights& weights);

/// K-means plus the cluster rank instead of the objective: picks the
/// top-ranked center without a single objective evaluation.
InitResult init_ranked_kmeans(const BackgroundStats& stats, const MilDataset& dataset,
                              int cluster_count, const RankWeights& weights,
                              std::uint64_t seed);

/// Per-instance cluster relevances for one bag: GMM posteriors normalized to
/// sum to 1 over the bag, one row per mixture component (K x bag size).
/// Throws when a component's total responsibility underflows.
Eigen::MatrixXd bag_relevances(const GmmModel& gmm, const BackgroundStats& stats,
                               const Bag& bag);

/// Relevance-weighted averages of a bag's whitened instances, one exemplar
/// per mixture component. Each exemplar is a convex combination of the
/// bag's whitened instances.
std::vector<Eigen::VectorXd> exemplar_points(const GmmModel& gmm,
                                             const BackgroundStats& stats,
                                             const Bag& bag);

/// GMM clustering of all whitened instances, then one exemplar per
/// (positive bag, component) as candidates — K * (positive bag count)
/// objective evaluations. Degenerate exemplars are skipped.
InitResult init_mi_cr(const BackgroundStats& stats, const MilDataset& dataset,
                      int cluster_count, std::uint64_t seed);

/// All whitened instances stacked row-wise in bag order (the clustering
/// view of a dataset).
Eigen::MatrixXd whitened_matrix(const BackgroundStats& stats, const MilDataset& dataset);

/// Dispatches to the initializer named in the config.
InitResult initialize(const BackgroundStats& stats, const MilDataset& dataset,
                      const TrainConfig& config);

} // namespace miace
