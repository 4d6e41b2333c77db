#pragma once

// Test-only oracles, deliberately independent of the library's computation
// paths: the detection statistic via explicit quadratic forms with a matrix
// inverse (never the whitener), the objective via a naive double loop over
// bags, and the cluster rank by direct counting.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "miace/mil.hpp"
#include "miace/whitening.hpp"

namespace oracle {

/// Detection statistic straight from the quadratic-form definition, using
/// an explicit inverse of the covariance.
inline double ace_direct(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& s_raw, const Eigen::VectorXd& x) {
    const Eigen::MatrixXd inv = covariance.inverse();
    const Eigen::VectorXd c = x - mean;
    const double denom = std::sqrt(s_raw.dot(inv * s_raw)) * std::sqrt(c.dot(inv * c));
    if (denom < 1e-300) return 0.0;
    return s_raw.dot(inv * c) / denom;
}

/// Same statistic for a whitened-space signature direction: undo the
/// whitening to recover a raw-space direction first.
inline double ace_direct_whitened_sig(const miace::BackgroundStats& stats,
                                      const Eigen::VectorXd& s_whitened,
                                      const Eigen::VectorXd& x) {
    const Eigen::VectorXd s_raw = stats.whitener.inverse() * s_whitened;
    return ace_direct(stats.covariance, stats.mean, s_raw, x);
}

/// The objective evaluated by a naive double loop over bags and instances,
/// entirely through ace_direct.
inline double objective_naive(const miace::BackgroundStats& stats,
                              const Eigen::VectorXd& s_whitened,
                              const miace::MilDataset& dataset) {
    const Eigen::VectorXd s_raw = stats.whitener.inverse() * s_whitened;
    double pos = 0.0, neg = 0.0;
    std::size_t pos_bags = 0, neg_bags = 0;
    for (const miace::Bag& bag : dataset.bags()) {
        if (bag.label == miace::BagLabel::positive) {
            double best = -2.0;
            for (const miace::Instance& inst : bag.instances) {
                best = std::max(best,
                                ace_direct(stats.covariance, stats.mean, s_raw,
                                           inst.features));
            }
            pos += best;
            ++pos_bags;
        } else {
            double sum = 0.0;
            for (const miace::Instance& inst : bag.instances) {
                sum += ace_direct(stats.covariance, stats.mean, s_raw, inst.features);
            }
            neg += sum / static_cast<double>(bag.instances.size());
            ++neg_bags;
        }
    }
    return pos / static_cast<double>(pos_bags) - neg / static_cast<double>(neg_bags);
}

/// Exhaustive original-initializer scan: every positive instance as a
/// candidate, scored by objective_naive, ties to the first in bag order.
/// Returns the flat index of the winner among positive instances.
inline std::size_t init_original_naive(const miace::BackgroundStats& stats,
                                       const miace::MilDataset& dataset) {
    std::size_t best_index = 0, flat = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const miace::Bag& bag : dataset.bags()) {
        if (bag.label != miace::BagLabel::positive) continue;
        for (const miace::Instance& inst : bag.instances) {
            const Eigen::VectorXd candidate = stats.whiten(inst.features);
            if (candidate.norm() >= 1e-12) {
                const double score = objective_naive(stats, candidate, dataset);
                if (score > best_score) {
                    best_score = score;
                    best_index = flat;
                }
            }
            ++flat;
        }
    }
    return best_index;
}

/// Cluster rank counted by hand.
inline double mic_rank_counted(int cluster, const std::vector<int>& assignment,
                               const miace::MilDataset& dataset, double w_bag,
                               double w_pos, double w_neg) {
    double n_bag_touch = 0, n_pos = 0, n_neg = 0;
    double total_pos_bags = 0, total_pos = 0, total_neg = 0;
    std::size_t flat = 0;
    for (const miace::Bag& bag : dataset.bags()) {
        bool touch = false;
        for (std::size_t i = 0; i < bag.instances.size(); ++i, ++flat) {
            const bool here = assignment[flat] == cluster;
            if (bag.label == miace::BagLabel::positive) {
                total_pos += 1;
                if (here) n_pos += 1;
            } else {
                total_neg += 1;
                if (here) n_neg += 1;
            }
            touch = touch || here;
        }
        if (bag.label == miace::BagLabel::positive) {
            total_pos_bags += 1;
            if (touch) n_bag_touch += 1;
        }
    }
    return (w_bag * (n_bag_touch / total_pos_bags) + w_pos * (n_pos / total_pos) -
            w_neg * (n_neg / total_neg) + w_neg) /
           (w_bag + w_pos + w_neg);
}

/// Zero-mean identity-covariance background (whitening is the identity map).
inline miace::BackgroundStats identity_stats(int d) {
    miace::BackgroundStats stats;
    stats.mean = Eigen::VectorXd::Zero(d);
    stats.covariance = Eigen::MatrixXd::Identity(d, d);
    stats.regularization = 0.0;
    stats.finalize();
    return stats;
}

/// Random well-conditioned background statistics for property tests.
inline miace::BackgroundStats random_stats(int d, miace::Rng& rng,
                                           double eig_min = 0.5, double eig_max = 2.0) {
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd eigs(d);
    for (int i = 0; i < d; ++i) eigs[i] = rng.uniform(eig_min, eig_max);
    miace::BackgroundStats stats;
    stats.covariance = q * eigs.asDiagonal() * q.transpose();
    stats.covariance = 0.5 * (stats.covariance + stats.covariance.transpose().eval());
    stats.mean.resize(d);
    for (int i = 0; i < d; ++i) stats.mean[i] = rng.normal();
    stats.regularization = 0.0;
    stats.finalize();
    return stats;
}

inline Eigen::VectorXd random_vector(int d, miace::Rng& rng) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = rng.normal();
    return v;
}

/// Small random MIL dataset for brute-force comparisons.
inline miace::MilDataset random_dataset(int d, std::size_t pos_bags,
                                        std::size_t max_bag_size, std::size_t neg_count,
                                        miace::Rng& rng) {
    std::vector<miace::Bag> bags;
    for (std::size_t b = 0; b < pos_bags; ++b) {
        miace::Bag bag;
        bag.id = "p" + std::to_string(b);
        bag.label = miace::BagLabel::positive;
        bag.lane_id = "lane" + std::to_string(b % 3);
        const std::size_t count = 1 + rng.index(max_bag_size);
        for (std::size_t i = 0; i < count; ++i) {
            bag.instances.push_back(
                miace::Instance{random_vector(d, rng),
                                Eigen::Vector2d(rng.uniform(), rng.uniform()), bag.id});
        }
        bags.push_back(std::move(bag));
    }
    miace::Bag neg;
    neg.id = "n0";
    neg.label = miace::BagLabel::negative;
    neg.lane_id = "lane9";
    for (std::size_t i = 0; i < neg_count; ++i) {
        neg.instances.push_back(
            miace::Instance{random_vector(d, rng),
                            Eigen::Vector2d(rng.uniform(), rng.uniform()), "n0"});
    }
    bags.push_back(std::move(neg));
    return miace::MilDataset(std::move(bags));
}

} // namespace oracle
