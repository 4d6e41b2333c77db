#include "miace/init.hpp"

#include <cmath>
#include <limits>

namespace miace {

namespace {
constexpr double kDegenerateNorm = 1e-12;
constexpr double kRelevanceFloor = 1e-300;
} // namespace

Eigen::MatrixXd whitened_matrix(const BackgroundStats& stats, const MilDataset& dataset) {
    Eigen::MatrixXd points(dataset.instance_count(), dataset.dimensionality());
    Eigen::Index row = 0;
    for (const Bag& bag : dataset.bags()) {
        for (const Instance& inst : bag.instances) {
            points.row(row++) = stats.whiten(inst.features).transpose();
        }
    }
    return points;
}

InitResult init_original(const BackgroundStats& stats, const MilDataset& dataset) {
    MiAceObjective problem(stats, dataset);

    InitResult result;
    result.method = InitMethod::original;
    result.candidate_count = dataset.positive_instance_count();

    Eigen::VectorXd best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const Bag& bag : dataset.bags()) {
        if (bag.label != BagLabel::positive) continue;
        for (const Instance& inst : bag.instances) {
            const Eigen::VectorXd candidate = stats.whiten(inst.features);
            if (candidate.norm() < kDegenerateNorm) continue;
            const double score = problem.evaluate(candidate);
            if (score > best_score) {
                best_score = score;
                best = candidate;
            }
        }
    }
    if (best.size() == 0) {
        throw NumericError("initialization failed: every positive instance whitens "
                           "to the background mean");
    }
    result.signature = make_signature(best, stats);
    result.selection_score = best_score;
    result.objective_evaluations = problem.evaluation_count();
    return result;
}

InitResult init_kmeans(const BackgroundStats& stats, const MilDataset& dataset,
                       int cluster_count, std::uint64_t seed) {
    const Eigen::MatrixXd points = whitened_matrix(stats, dataset);
    const KMeansModel km = kmeans(points, cluster_count, seed);
    MiAceObjective problem(stats, dataset);

    InitResult result;
    result.method = InitMethod::kmeans;
    result.candidate_count = static_cast<std::size_t>(cluster_count);
    result.cluster_iterations = km.iterations;

    Eigen::VectorXd best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < cluster_count; ++c) {
        const Eigen::VectorXd center = km.centers.row(c).transpose();
        if (center.norm() < kDegenerateNorm) continue;
        const double score = problem.evaluate(center);
        if (score > best_score) {
            best_score = score;
            best = center;
        }
    }
    if (best.size() == 0) {
        throw NumericError("initialization failed: every cluster center is degenerate");
    }
    result.signature = make_signature(best, stats);
    result.selection_score = best_score;
    result.objective_evaluations = problem.evaluation_count();
    return result;
}

double mic_rank(int cluster, int cluster_count, const std::vector<int>& assignment,
                const MilDataset& dataset, const RankWeights& weights) {
    if (cluster < 0 || cluster >= cluster_count) {
        throw ValidationError("cluster index " + std::to_string(cluster) +
                              " out of range [0, " + std::to_string(cluster_count) + ")");
    }
    if (assignment.size() != dataset.instance_count()) {
        throw DimensionError("assignment length does not match instance count");
    }
    const double w_sum = weights.positive_bags + weights.positive_instances +
                         weights.negative_instances;
    if (weights.positive_bags < 0.0 || weights.positive_instances < 0.0 ||
        weights.negative_instances < 0.0 || w_sum <= 0.0) {
        throw ValidationError("rank weights must be nonnegative and not all zero");
    }

    std::size_t pos_bags_touching = 0;  // positive bags with an instance in the cluster
    std::size_t pos_in_cluster = 0;
    std::size_t neg_in_cluster = 0;
    std::size_t flat = 0;
    for (const Bag& bag : dataset.bags()) {
        bool touches = false;
        for (std::size_t i = 0; i < bag.instances.size(); ++i, ++flat) {
            if (assignment[flat] != cluster) continue;
            touches = true;
            if (bag.label == BagLabel::positive) {
                ++pos_in_cluster;
            } else {
                ++neg_in_cluster;
            }
        }
        if (touches && bag.label == BagLabel::positive) ++pos_bags_touching;
    }

    const double bag_frac = static_cast<double>(pos_bags_touching) /
                            static_cast<double>(dataset.positive_bag_count());
    const double pos_frac = static_cast<double>(pos_in_cluster) /
                            static_cast<double>(dataset.positive_instance_count());
    const double neg_frac = static_cast<double>(neg_in_cluster) /
                            static_cast<double>(dataset.negative_instance_count());
    return (weights.positive_bags * bag_frac + weights.positive_instances * pos_frac -
            weights.negative_instances * neg_frac + weights.negative_instances) /
           w_sum;
}

InitResult init_ranked_kmeans(const BackgroundStats& stats, const MilDataset& dataset,
                              int cluster_count, const RankWeights& weights,
                              std::uint64_t seed) {
    const Eigen::MatrixXd points = whitened_matrix(stats, dataset);
    const KMeansModel km = kmeans(points, cluster_count, seed);

    InitResult result;
    result.method = InitMethod::ranked_kmeans;
    result.candidate_count = static_cast<std::size_t>(cluster_count);
    result.cluster_iterations = km.iterations;

    Eigen::VectorXd best;
    double best_rank = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < cluster_count; ++c) {
        const Eigen::VectorXd center = km.centers.row(c).transpose();
        if (center.norm() < kDegenerateNorm) continue;
        const double rank = mic_rank(c, cluster_count, km.assignment, dataset, weights);
        if (rank > best_rank) {
            best_rank = rank;
            best = center;
        }
    }
    if (best.size() == 0) {
        throw NumericError("initialization failed: every cluster center is degenerate");
    }
    result.signature = make_signature(best, stats);
    result.selection_score = best_rank;
    result.objective_evaluations = 0;
    return result;
}

Eigen::MatrixXd bag_relevances(const GmmModel& gmm, const BackgroundStats& stats,
                               const Bag& bag) {
    if (bag.label != BagLabel::positive) {
        throw ValidationError("exemplars are defined for positive bags only");
    }
    if (bag.instances.empty()) throw ValidationError("bag has no instances");
    const Eigen::Index n = static_cast<Eigen::Index>(bag.instances.size());
    Eigen::MatrixXd points(n, stats.dimensionality());
    for (Eigen::Index i = 0; i < n; ++i) {
        points.row(i) = stats.whiten(bag.instances[i].features).transpose();
    }
    const Eigen::MatrixXd resp = gmm_posteriors(gmm, points);  // n x K

    const Eigen::Index k = resp.cols();
    Eigen::MatrixXd relevances(k, n);
    for (Eigen::Index c = 0; c < k; ++c) {
        const double z = resp.col(c).sum();
        if (z < kRelevanceFloor) {
            throw NumericError("relevance underflow for cluster " + std::to_string(c) +
                               " in bag '" + bag.id + "'");
        }
        relevances.row(c) = resp.col(c).transpose() / z;
    }
    return relevances;
}

std::vector<Eigen::VectorXd> exemplar_points(const GmmModel& gmm,
                                             const BackgroundStats& stats,
                                             const Bag& bag) {
    const Eigen::MatrixXd relevances = bag_relevances(gmm, stats, bag);
    const Eigen::Index n = relevances.cols();
    Eigen::MatrixXd points(n, stats.dimensionality());
    for (Eigen::Index i = 0; i < n; ++i) {
        points.row(i) = stats.whiten(bag.instances[i].features).transpose();
    }
    std::vector<Eigen::VectorXd> exemplars;
    exemplars.reserve(relevances.rows());
    for (Eigen::Index c = 0; c < relevances.rows(); ++c) {
        exemplars.push_back((relevances.row(c) * points).transpose());
    }
    return exemplars;
}

InitResult init_mi_cr(const BackgroundStats& stats, const MilDataset& dataset,
                      int cluster_count, std::uint64_t seed) {
    const Eigen::MatrixXd points = whitened_matrix(stats, dataset);
    const GmmModel gmm = gmm_fit(points, cluster_count, seed);
    MiAceObjective problem(stats, dataset);

    InitResult result;
    result.method = InitMethod::mi_cr;
    result.candidate_count =
        static_cast<std::size_t>(cluster_count) * dataset.positive_bag_count();
    result.cluster_iterations = gmm.iterations;

    Eigen::VectorXd best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const Bag& bag : dataset.bags()) {
        if (bag.label != BagLabel::positive) continue;
        const Eigen::Index n = static_cast<Eigen::Index>(bag.instances.size());
        Eigen::MatrixXd bag_points(n, stats.dimensionality());
        for (Eigen::Index i = 0; i < n; ++i) {
            bag_points.row(i) = stats.whiten(bag.instances[i].features).transpose();
        }
        const Eigen::MatrixXd resp = gmm_posteriors(gmm, bag_points);
        for (int c = 0; c < cluster_count; ++c) {
            const double z = resp.col(c).sum();
            if (z < kRelevanceFloor) continue;  // relevance underflow: skip exemplar
            const Eigen::VectorXd exemplar =
                (resp.col(c).transpose() * bag_points).transpose() / z;
            if (exemplar.norm() < kDegenerateNorm) continue;
            const double score = problem.evaluate(exemplar);
            if (score > best_score) {
                best_score = score;
                best = exemplar;
            }
        }
    }
    if (best.size() == 0) {
        throw NumericError("initialization failed: every exemplar is degenerate");
    }
    result.signature = make_signature(best, stats);
    result.selection_score = best_score;
    result.objective_evaluations = problem.evaluation_count();
    return result;
}

InitResult initialize(const BackgroundStats& stats, const MilDataset& dataset,
                      const TrainConfig& config) {
    switch (config.initializer) {
        case InitMethod::original:
            return init_original(stats, dataset);
        case InitMethod::kmeans:
            return init_kmeans(stats, dataset, config.cluster_count, config.seed);
        case InitMethod::ranked_kmeans:
            return init_ranked_kmeans(stats, dataset, config.cluster_count,
                                      config.rank_weights, config.seed);
        case InitMethod::mi_cr:
            return init_mi_cr(stats, dataset, config.cluster_count, config.seed);
    }
    throw ValidationError("unknown initializer");
}

} // namespace miace
