#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>

#include "miace/mil.hpp"

namespace miace {

/// Background statistics estimated from the negative bags, plus the
/// whitening factor W = V diag(1/sqrt(lambda)) V^T satisfying
/// W^T W = covariance^{-1}. Immutable after fit; whiten() is pure.
struct BackgroundStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;   // regularized, symmetric positive-definite
    Eigen::MatrixXd whitener;     // symmetric inverse square root
    double regularization = 0.0;  // ridge actually added to the diagonal

    int dimensionality() const { return static_cast<int>(mean.size()); }

    /// W * (x - mean).
    Eigen::VectorXd whiten(const Eigen::VectorXd& x) const;

    /// Hash over (d, mean, covariance, regularization) used to detect
    /// signatures applied against the wrong background.
    std::uint64_t fingerprint() const { return fingerprint_; }

    void finalize();  // recomputes whitener and fingerprint from covariance

private:
    std::uint64_t fingerprint_ = 0;
};

/// Estimates mean and covariance from all negative-bag instances.
/// The ridge is epsilon * trace(sample covariance)/d; when the sample
/// covariance has zero trace the ridge falls back to epsilon itself so the
/// result stays positive-definite.
BackgroundStats fit_background(const MilDataset& dataset, double epsilon = 1e-6);

void save_background(const BackgroundStats& stats, const std::filesystem::path& path);
BackgroundStats load_background(const std::filesystem::path& path);

} // namespace miace
