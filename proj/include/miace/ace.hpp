#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "miace/whitening.hpp"

namespace miace {

/// A learned target signature, stored as a unit-norm vector in the whitened
/// coordinate space of the background it was trained against. Only the
/// direction matters: the detection statistic is invariant to signature
/// scale, so magnitude is never persisted.
struct Signature {
    Eigen::VectorXd whitened;
    std::uint64_t stats_fingerprint = 0;
};

/// Builds a unit-norm signature from a whitened-space direction.
Signature make_signature(const Eigen::VectorXd& whitened_direction,
                         const BackgroundStats& stats);

struct ConfidenceEntry {
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    std::string sweep_id;
    double confidence = 0.0;
};

struct ConfidenceMap {
    std::vector<ConfidenceEntry> entries;
};

/// The detection statistic: cosine between the signature and the whitened
/// test sample. A sample indistinguishable from the background (whitened
/// norm below 1e-12) scores 0. Always in [-1, 1].
double ace(const BackgroundStats& stats, const Signature& signature,
           const Eigen::VectorXd& x);

/// Scores every sample of a sweep, preserving order and positions.
ConfidenceMap score_sweep(const BackgroundStats& stats, const Signature& signature,
                          const Sweep& sweep);

// CSV schema: sweep_id,pos_x,pos_y,confidence
void save_confidence_map(const ConfidenceMap& map, const std::filesystem::path& path);
ConfidenceMap load_confidence_map(const std::filesystem::path& path);

} // namespace miace
