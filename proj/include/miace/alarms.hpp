#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "miace/ace.hpp"

namespace miace {

struct AlarmSample {
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    double confidence = 0.0;
};

/// A spatially clustered detection: the mean-shift mode location, the
/// samples that fund its score (cluster members plus everything inside the
/// halo), and the halo-weighted score.
struct Alarm {
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    std::vector<AlarmSample> members;
    double score = 0.0;
    std::string sweep_id;
};

struct AlarmParams {
    double bandwidth = 0.25;       // mean-shift kernel radius, meters
    double merge_radius = 0.125;   // mode merge distance, meters
    double conf_threshold = 0.2;   // confidences below this carry no kernel weight
    double halo = 0.25;            // membership radius around the alarm center
    int max_iter = 100;
};

/// Mean of each member's confidence weighted by its distance to the center
/// over the halo radius; cluster members past the halo are clamped to
/// weight 1 so weights stay in [0, 1]. A lone sample at the center scores 0.
double score_alarm(const std::vector<AlarmSample>& members,
                   const Eigen::Vector2d& center, double halo);

/// Clusters each sweep's samples by weighted mean shift (weights are the
/// thresholded confidences), builds one alarm per mode, and returns all
/// alarms sorted by descending score. A map whose confidences all fall
/// below the threshold yields no alarms.
std::vector<Alarm> generate_alarms(const ConfidenceMap& map,
                                   const AlarmParams& params = {});

// CSV schema: sweep_id,center_x,center_y,score,n_members
void save_alarms(const std::vector<Alarm>& alarms, const std::filesystem::path& path);
std::vector<Alarm> load_alarms(const std::filesystem::path& path);

} // namespace miace
