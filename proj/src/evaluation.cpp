#include "miace/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>

namespace miace {

std::string to_string(MetalClass metal) {
    switch (metal) {
        case MetalClass::high: return "high";
        case MetalClass::low: return "low";
        case MetalClass::none: return "none";
    }
    return "unknown";
}

MetalClass metal_class_from_string(const std::string& name) {
    if (name == "high") return MetalClass::high;
    if (name == "low") return MetalClass::low;
    if (name == "none") return MetalClass::none;
    throw ValidationError("unknown metal class '" + name + "'");
}

Subset subset_from_string(const std::string& name) {
    if (name == "high") return Subset::high;
    if (name == "low") return Subset::low;
    if (name == "all") return Subset::all;
    throw ValidationError("unknown subset '" + name + "' (expected high|low|all)");
}

bool subset_contains(Subset subset, MetalClass metal) {
    switch (subset) {
        case Subset::high: return metal == MetalClass::high;
        case Subset::low: return metal == MetalClass::low;
        case Subset::all: return true;
    }
    return false;
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) ||
        line.rfind("target_id,lane_id,pos_x,pos_y,response_radius,metal_class", 0) != 0) {
        throw ParseError("line 1: expected ground truth header");
    }
    GroundTruth truth;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (fields.size() != 6) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 6 columns");
        }
        Target t;
        t.id = fields[0];
        t.lane_id = fields[1];
        t.position.x() = parse_double(fields[2], line_no);
        t.position.y() = parse_double(fields[3], line_no);
        t.response_radius = parse_double(fields[4], line_no);
        if (t.response_radius <= 0.0) {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": response radius must be positive");
        }
        t.metal = metal_class_from_string(fields[5]);
        truth.targets.push_back(std::move(t));
    }
    return truth;
}

void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "target_id,lane_id,pos_x,pos_y,response_radius,metal_class\n";
    for (const Target& t : truth.targets) {
        out << t.id << ',' << t.lane_id << ',' << format_double(t.position.x()) << ','
            << format_double(t.position.y()) << ','
            << format_double(t.response_radius) << ',' << to_string(t.metal) << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<LabeledAlarm> label_alarms(const std::vector<Alarm>& alarms,
                                       const GroundTruth& truth) {
    std::vector<LabeledAlarm> labeled;
    labeled.reserve(alarms.size());
    for (const Alarm& alarm : alarms) {
        LabeledAlarm la;
        la.alarm = alarm;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < truth.targets.size(); ++t) {
            const Target& target = truth.targets[t];
            const double dist = (alarm.center - target.position).norm();
            if (dist <= target.response_radius && dist < best_dist) {
                best_dist = dist;
                la.is_true = true;
                la.target_index = t;
            }
        }
        labeled.push_back(std::move(la));
    }
    return labeled;
}

RocCurve roc(const std::vector<LabeledAlarm>& alarms, const GroundTruth& truth,
             Subset subset) {
    std::size_t subset_targets = 0;
    for (const Target& t : truth.targets) {
        if (subset_contains(subset, t.metal)) ++subset_targets;
    }
    if (subset_targets == 0) {
        throw ValidationError("detection probability undefined: no targets in subset");
    }

    // Sort alarm indices by descending score; sweep distinct scores.
    std::vector<std::size_t> order(alarms.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return alarms[a].alarm.score > alarms[b].alarm.score;
    });

    RocCurve curve;
    std::set<std::size_t> detected;  // distinct subset targets hit so far
    std::size_t false_alarms = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = alarms[order[i]].alarm.score;
        for (; i < order.size() && alarms[order[i]].alarm.score == threshold; ++i) {
            const LabeledAlarm& la = alarms[order[i]];
            if (!la.is_true) {
                ++false_alarms;
            } else if (la.target_index &&
                       subset_contains(subset, truth.targets[*la.target_index].metal)) {
                detected.insert(*la.target_index);
            }
            // true alarms on out-of-subset targets count toward neither axis
        }
        curve.points.push_back(RocPoint{
            threshold, false_alarms,
            static_cast<double>(detected.size()) / static_cast<double>(subset_targets)});
    }

    if (curve.points.empty()) {
        curve.auc = 0.0;
        return curve;
    }
    const double fa_min = static_cast<double>(curve.points.front().false_alarms);
    const double fa_max = static_cast<double>(curve.points.back().false_alarms);
    if (fa_max > fa_min) {
        double area = 0.0;
        for (std::size_t p = 1; p < curve.points.size(); ++p) {
            const double dx = static_cast<double>(curve.points[p].false_alarms) -
                              static_cast<double>(curve.points[p - 1].false_alarms);
            area += dx * 0.5 * (curve.points[p].pd + curve.points[p - 1].pd);
        }
        curve.auc = area / (fa_max - fa_min);
    } else {
        // Degenerate sweep (constant false-alarm count): report the final pd.
        curve.auc = curve.points.back().pd;
    }
    return curve;
}

void save_roc(const RocCurve& curve, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "threshold,false_alarms,pd\n";
    for (const RocPoint& p : curve.points) {
        out << format_double(p.threshold) << ',' << p.false_alarms << ','
            << format_double(p.pd) << '\n';
    }
    out << "auc=" << format_double(curve.auc) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

CrossValidationResult cross_validate(const MilDataset& dataset,
                                     const std::vector<Sweep>& sweeps,
                                     const GroundTruth& truth,
                                     const TrainConfig& config,
                                     const AlarmParams& alarm_params,
                                     Subset subset) {
    // Folds come from the lanes the sweeps were collected on; bags on other
    // lanes (e.g. a pooled blank-sweep negative bag) stay in every training
    // split.
    std::vector<std::string> lanes;
    for (const Sweep& sweep : sweeps) {
        if (std::find(lanes.begin(), lanes.end(), sweep.lane_id) == lanes.end()) {
            lanes.push_back(sweep.lane_id);
        }
    }
    if (lanes.size() < 2) {
        throw ValidationError("cross validation needs at least 2 lanes of sweeps");
    }

    CrossValidationResult result;
    std::vector<Alarm> pooled_init, pooled_opt;
    for (const std::string& lane : lanes) {
        std::vector<Bag> train_bags;
        for (const Bag& bag : dataset.bags()) {
            if (bag.lane_id != lane) train_bags.push_back(bag);
        }
        bool has_pos = false, has_neg = false;
        for (const Bag& bag : train_bags) {
            (bag.label == BagLabel::positive ? has_pos : has_neg) = true;
        }
        if (train_bags.empty() || !has_pos || !has_neg) {
            result.skipped_lanes.push_back(lane);
            continue;
        }

        FoldResult fold;
        fold.held_out_lane = lane;
        const MilDataset train_split{std::move(train_bags)};
        fold.train_result = train(train_split, config);

        for (const Sweep& sweep : sweeps) {
            if (sweep.lane_id != lane) continue;
            const ConfidenceMap map_init = score_sweep(
                fold.train_result.stats, fold.train_result.initial_signature, sweep);
            const ConfidenceMap map_opt = score_sweep(
                fold.train_result.stats, fold.train_result.optimized_signature, sweep);
            auto alarms_init = generate_alarms(map_init, alarm_params);
            auto alarms_opt = generate_alarms(map_opt, alarm_params);
            fold.alarms_init += alarms_init.size();
            fold.alarms_optimized += alarms_opt.size();
            pooled_init.insert(pooled_init.end(),
                               std::make_move_iterator(alarms_init.begin()),
                               std::make_move_iterator(alarms_init.end()));
            pooled_opt.insert(pooled_opt.end(),
                              std::make_move_iterator(alarms_opt.begin()),
                              std::make_move_iterator(alarms_opt.end()));
        }
        result.folds.push_back(std::move(fold));
    }
    if (result.folds.empty()) {
        throw ValidationError("every cross-validation fold was skipped");
    }

    result.pooled_init = label_alarms(pooled_init, truth);
    result.pooled_optimized = label_alarms(pooled_opt, truth);
    result.roc_init = roc(result.pooled_init, truth, subset);
    result.roc_optimized = roc(result.pooled_optimized, truth, subset);
    return result;
}

} // namespace miace
