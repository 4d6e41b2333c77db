#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "miace/common.hpp"

namespace miace {

struct KMeansModel {
    Eigen::MatrixXd centers;      // K x d
    std::vector<int> assignment;  // per point, in [0, K)
    double inertia = 0.0;         // sum of squared distances to assigned centers
    int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding. Empty clusters are re-seeded to
/// the point currently farthest from its center. Stops when the squared
/// Frobenius norm of the center shift drops below tol times the mean
/// per-feature variance. Deterministic per seed.
KMeansModel kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                   int max_iter = 100, double tol = 1e-4);

struct GmmModel {
    Eigen::VectorXd weights;                  // K mixing proportions, sum 1
    Eigen::MatrixXd means;                    // K x d
    std::vector<Eigen::MatrixXd> covariances; // K of d x d, positive-definite
    std::vector<double> log_likelihood_trace; // mean log-likelihood per point
    int iterations = 0;
};

/// Full-covariance Gaussian mixture fit by expectation-maximization,
/// initialized from a k-means partition. Responsibilities are computed in
/// log space; each M-step adds a cov_ridge * trace/d ridge to keep the
/// covariances positive-definite. The trace stores mean log-likelihood per
/// point and stops once the gain drops below tol.
GmmModel gmm_fit(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                 int max_iter = 200, double tol = 1e-4, double cov_ridge = 1e-6);

/// N x K responsibility matrix; rows sum to 1.
Eigen::MatrixXd gmm_posteriors(const GmmModel& model, const Eigen::MatrixXd& points);

struct MeanShiftResult {
    std::vector<Eigen::Vector2d> modes;
    std::vector<int> assignment;  // per point: mode index, or -1 if weight zero
};

/// Weighted flat-kernel mean shift over 2-D points. Each positive-weight
/// point ascends the weighted local mean inside the bandwidth ball;
/// converged positions within merge_radius collapse into one mode. Zero
/// total weight yields an empty result. Mode positions are invariant under
/// positive rescaling of all weights.
MeanShiftResult mean_shift(const std::vector<Eigen::Vector2d>& points,
                           const std::vector<double>& weights, double bandwidth,
                           double merge_radius, int max_iter = 100);

} // namespace miace
