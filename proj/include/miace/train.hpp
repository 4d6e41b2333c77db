#pragma once

#include <Eigen/Core>
#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "miace/ace.hpp"
#include "miace/whitening.hpp"

namespace miace {

enum class InitMethod { original, kmeans, ranked_kmeans, mi_cr };

std::string to_string(InitMethod method);
InitMethod init_method_from_string(const std::string& name);

/// Weights of the multiple instance cluster rank: positive-bag proportion,
/// positive-instance proportion, negative-instance proportion.
struct RankWeights {
    double positive_bags = 1.0;
    double positive_instances = 1.0;
    double negative_instances = 1.0;
};

struct TrainConfig {
    int max_iterations = 100;
    double convergence_tol = 1e-6;   // on the change of the objective
    InitMethod initializer = InitMethod::original;
    int cluster_count = 5;
    RankWeights rank_weights;
    std::uint64_t seed = 0;
    double epsilon = 1e-6;           // background covariance ridge scale

    void validate() const;
};

/// Outcome of one initialization strategy.
struct InitResult {
    Signature signature;
    std::size_t candidate_count = 0;      // N+ / K / K / K * positive bag count
    double selection_score = 0.0;         // winning objective value or MIC rank
    InitMethod method = InitMethod::original;
    std::size_t objective_evaluations = 0;
    int cluster_iterations = 0;           // K-means/EM iterations, 0 for original
};

struct TrainResult {
    BackgroundStats stats;
    InitResult init;
    Signature initial_signature;
    Signature optimized_signature;
    std::vector<double> objective_trace;  // nondecreasing
    int iterations_run = 0;
    std::chrono::duration<double> init_wall_time{0.0};
    std::chrono::duration<double> opt_wall_time{0.0};
};

/// Evaluates the MI-ACE objective against a fixed dataset and background.
///
/// Instances are whitened and unit-normalized once at construction. Each
/// evaluate() walks every positive instance (per-bag max) and every negative
/// instance (per-bag mean), so one call costs O((N+ + N-) d) — the unit the
/// complexity accounting is written in. Calls are counted.
class MiAceObjective {
public:
    MiAceObjective(const BackgroundStats& stats, const MilDataset& dataset);

    /// Objective value for a whitened-space direction (normalized internally).
    double evaluate(const Eigen::VectorXd& s_whitened) const;

    std::size_t evaluation_count() const { return evaluations_; }

    std::size_t positive_bag_count() const { return positive_bags_.size(); }
    /// Index of the bag representative for a unit direction (ties: lowest index).
    std::size_t representative_index(std::size_t positive_bag,
                                     const Eigen::VectorXd& unit_s) const;
    /// Whitened, unit-normalized instance of a positive bag.
    const Eigen::MatrixXd& positive_bag_units(std::size_t positive_bag) const {
        return positive_bags_[positive_bag].units;
    }
    /// The precomputed background term of the update rule: mean over negative
    /// bags of their per-bag mean whitened unit instances.
    const Eigen::VectorXd& negative_mean() const { return negative_mean_; }

private:
    struct BagUnits {
        Eigen::MatrixXd units;  // d x n, columns unit-norm (or zero) whitened
    };
    std::vector<BagUnits> positive_bags_;
    std::vector<BagUnits> negative_bags_;
    Eigen::VectorXd negative_mean_;
    mutable std::size_t evaluations_ = 0;
};

/// The MI-ACE objective: mean best-instance response over positive bags minus
/// mean per-bag mean response over negative bags, both normalized by bag
/// counts.
double objective(const BackgroundStats& stats, const Eigen::VectorXd& s_whitened,
                 const MilDataset& dataset);

/// The instance of a positive bag with the highest detection statistic under
/// the current signature; ties break to the lowest instance index.
Instance bag_representative(const BackgroundStats& stats, const Signature& signature,
                            const Bag& bag);

/// One update step: average of the whitened, normalized bag representatives
/// minus the precomputed background mean term, renormalized. Throws when the
/// two coincide (vanishing update direction).
Signature update_signature(const BackgroundStats& stats, const MilDataset& dataset,
                           const Signature& current);

/// Full training run: fit background, initialize, then alternate
/// representative selection and signature updates until the objective change
/// drops below tolerance. Deterministic for a fixed (dataset, config) pair.
TrainResult train(const MilDataset& dataset, const TrainConfig& config);

/// Signature file: version, dimensionality, initializer, fingerprint,
/// whitened signature, objective trace.
struct SignatureRecord {
    Signature signature;
    std::string initializer = "unknown";
    std::vector<double> objective_trace;
};

void save_signature(const SignatureRecord& record, const std::filesystem::path& path);
SignatureRecord load_signature(const std::filesystem::path& path);

} // namespace miace
