#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "miace/evaluation.hpp"
#include "miace/mil.hpp"

namespace miace {

/// Synthetic EMI-like site. Targets share one planted feature-space shape;
/// burial depth only scales its magnitude, which is exactly the regime the
/// detection statistic is built for. The background is correlated Gaussian
/// noise so whitening is non-trivially exercised.
struct SynthConfig {
    int dimensionality = 8;
    int lanes = 5;
    int grids_per_lane = 4;
    std::uint64_t signature_seed = 1;

    double depth_scale_min = 0.3;   // magnitude multipliers per target
    double depth_scale_max = 1.0;
    double background_correlation = 0.6;  // AR(1) feature correlation
    double background_scale = 1.0;

    /// Whitened-space signal norm per sample is snr * depth * class scale
    /// * sqrt(d); snr ~ per-dimension signal-to-noise after whitening.
    double snr = 5.0;

    int samples_per_sweep = 400;
    double response_radius = 0.3;  // meters; also the positive-bag radius
    double signal_fill = 0.7;      // signal support radius / response radius

    // Target class mix (normalized) and per-class response scales.
    double mix_high = 1.0, mix_low = 0.0, mix_none = 0.0;
    double class_scale_high = 1.0, class_scale_low = 0.6, class_scale_none = 0.35;

    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthSite {
    MilDataset dataset;
    std::vector<Sweep> sweeps;
    GroundTruth truth;
    Eigen::VectorXd planted_signature;      // raw space, unit norm
    Eigen::VectorXd background_mean;        // generator truth, for oracles
    Eigen::MatrixXd background_covariance;
};

/// Deterministic per seed: lays out lanes of grids, one target per grid,
/// draws every sweep sample, injects the depth-scaled planted signature
/// inside each target's signal radius, and carves the MIL bags out of the
/// sweep samples. Positive bag per grid; one pooled negative bag from the
/// blank leading stretch of every grid (pseudo-lane "blank" so it stays in
/// every cross-validation training split).
SynthSite generate_site(const SynthConfig& config);

/// Cosine in whitened space between a signature and a raw-space direction.
double whitened_cosine(const BackgroundStats& stats, const Signature& signature,
                       const Eigen::VectorXd& raw_direction);

/// Bare planted-signal MIL dataset without spatial structure, shaped for the
/// trainer and the initializer benchmarks.
struct PlantedDatasetConfig {
    int dimensionality = 8;
    std::size_t positive_bags = 20;
    std::size_t instances_per_positive_bag = 5;
    std::size_t negative_instances = 500;
    double target_fraction = 0.5;  // signal-bearing share of each positive bag
    double snr = 5.0;
    double depth_scale_min = 0.5;
    double depth_scale_max = 1.0;
    double background_correlation = 0.6;
    std::uint64_t seed = 0;
};

struct PlantedDataset {
    MilDataset dataset;
    Eigen::VectorXd planted_signature;  // raw space, unit norm
};

PlantedDataset make_planted_dataset(const PlantedDatasetConfig& config);

void save_planted_signature(const Eigen::VectorXd& signature,
                            const std::filesystem::path& path);
Eigen::VectorXd load_planted_signature(const std::filesystem::path& path);

} // namespace miace
