#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "miace/alarms.hpp"
#include "miace/train.hpp"

namespace miace {

enum class MetalClass { high, low, none };

std::string to_string(MetalClass metal);
MetalClass metal_class_from_string(const std::string& name);

struct Target {
    std::string id;
    std::string lane_id;
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    double response_radius = 0.25;
    MetalClass metal = MetalClass::high;
};

struct GroundTruth {
    std::vector<Target> targets;
};

// CSV schema: target_id,lane_id,pos_x,pos_y,response_radius,metal_class
GroundTruth load_ground_truth(const std::filesystem::path& path);
void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);

/// Which targets count toward detection probability.
enum class Subset { high, low, all };

Subset subset_from_string(const std::string& name);
bool subset_contains(Subset subset, MetalClass metal);

struct LabeledAlarm {
    Alarm alarm;
    bool is_true = false;                     // center inside some target's radius
    std::optional<std::size_t> target_index;  // nearest covering target
};

/// An alarm is true when its center falls inside the response radius of any
/// target; the nearest covering target takes the credit.
std::vector<LabeledAlarm> label_alarms(const std::vector<Alarm>& alarms,
                                       const GroundTruth& truth);

struct RocPoint {
    double threshold = 0.0;
    std::size_t false_alarms = 0;
    double pd = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;
    double auc = 0.0;  // trapezoid over the observed false-alarm range
};

/// Threshold sweep over the distinct alarm scores, descending. At each
/// threshold pd counts distinct subset targets hit by an at-or-above
/// threshold true alarm; fa counts at-or-above-threshold false alarms.
/// True alarms on out-of-subset targets count toward neither.
RocCurve roc(const std::vector<LabeledAlarm>& alarms, const GroundTruth& truth,
             Subset subset);

// CSV schema: threshold,false_alarms,pd rows, then one `auc=<value>` footer.
void save_roc(const RocCurve& curve, const std::filesystem::path& path);

struct FoldResult {
    std::string held_out_lane;
    TrainResult train_result;
    std::size_t alarms_init = 0;
    std::size_t alarms_optimized = 0;
};

struct CrossValidationResult {
    std::vector<FoldResult> folds;
    std::vector<std::string> skipped_lanes;
    std::vector<LabeledAlarm> pooled_init;       // alarms from unoptimized signatures
    std::vector<LabeledAlarm> pooled_optimized;  // alarms from optimized signatures
    RocCurve roc_init;
    RocCurve roc_optimized;
};

/// Lane-based cross validation: each lane present among the sweeps is held
/// out once; the model trains on the bags of every other lane, scores the
/// held-out sweeps, and the resulting alarms pool into one ROC. Both the
/// initialization-only and the optimized signature are evaluated. Folds
/// whose training split loses a label are skipped and reported.
CrossValidationResult cross_validate(const MilDataset& dataset,
                                     const std::vector<Sweep>& sweeps,
                                     const GroundTruth& truth,
                                     const TrainConfig& config,
                                     const AlarmParams& alarm_params,
                                     Subset subset);

} // namespace miace
