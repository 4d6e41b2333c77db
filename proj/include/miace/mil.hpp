#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "miace/common.hpp"

namespace miace {

/// One sensor sample: a d-dimensional feature vector with its spatial
/// position (meters) and the sweep it came from. Positions ride along even
/// in training bags so one schema serves training and sweep scoring; the
/// trainer ignores them.
struct Instance {
    Eigen::VectorXd features;
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    std::string sweep_id;
};

enum class BagLabel { negative = 0, positive = 1 };

struct Bag {
    std::string id;
    BagLabel label = BagLabel::negative;
    std::string lane_id;
    std::vector<Instance> instances;
};

/// A validated MIL dataset: nonempty bags, consistent dimensionality,
/// at least one bag of each label. Immutable after construction.
class MilDataset {
public:
    explicit MilDataset(std::vector<Bag> bags);

    const std::vector<Bag>& bags() const { return bags_; }
    int dimensionality() const { return d_; }

    std::size_t positive_instance_count() const { return n_pos_; }
    std::size_t negative_instance_count() const { return n_neg_; }
    std::size_t positive_bag_count() const { return n_pos_bags_; }
    std::size_t negative_bag_count() const { return bags_.size() - n_pos_bags_; }
    std::size_t instance_count() const { return n_pos_ + n_neg_; }

    /// Lane ids in order of first appearance.
    std::vector<std::string> lane_ids() const;

private:
    friend std::pair<MilDataset, MilDataset>
    split_by_lane(const MilDataset&, const std::string&);

    struct PartialSplitTag {};
    MilDataset(std::vector<Bag> bags, PartialSplitTag);
    void compute_counts();
    void check_instances() const;

    std::vector<Bag> bags_;
    int d_ = 0;
    std::size_t n_pos_ = 0;
    std::size_t n_neg_ = 0;
    std::size_t n_pos_bags_ = 0;
};

/// A scored sweep: instances grouped by sweep id, tagged with the lane the
/// sweep was collected on.
struct Sweep {
    std::string id;
    std::string lane_id;
    std::vector<Instance> samples;
};

// CSV schema (header required):
//   bag_id,label,lane_id,sweep_id,pos_x,pos_y,f_0,...,f_{d-1}
// label in {0,1}, positions in meters, one row per instance.
MilDataset load_dataset(const std::filesystem::path& path);
void save_dataset(const MilDataset& dataset, const std::filesystem::path& path);

/// Reads the same CSV schema but groups rows into sweeps by sweep_id,
/// ignoring bag structure and labels.
std::vector<Sweep> load_sweeps(const std::filesystem::path& path);
void save_sweeps(const std::vector<Sweep>& sweeps, int dimensionality,
                 const std::filesystem::path& path);

/// Partitions bags by lane. The train side must keep both labels; the test
/// side is allowed to be single-label (it is scored, never trained on).
std::pair<MilDataset, MilDataset>
split_by_lane(const MilDataset& dataset, const std::string& held_out_lane);

} // namespace miace
