#include <doctest.h>

#include <filesystem>
#include <set>

#include "miace/evaluation.hpp"
#include "miace/synth.hpp"
#include "oracles.hpp"

using namespace miace;

namespace {

Alarm make_alarm(double x, double y, double score, const std::string& sweep = "s0") {
    Alarm a;
    a.center = Eigen::Vector2d(x, y);
    a.score = score;
    a.sweep_id = sweep;
    a.members.resize(1);
    return a;
}

GroundTruth two_targets() {
    GroundTruth truth;
    truth.targets.push_back(Target{"t0", "lane0", Eigen::Vector2d(0, 0), 0.25,
                                   MetalClass::high});
    truth.targets.push_back(Target{"t1", "lane1", Eigen::Vector2d(5, 0), 0.25,
                                   MetalClass::low});
    return truth;
}

} // namespace

TEST_CASE("labeling respects the response radius boundary") {
    const GroundTruth truth = two_targets();
    const std::vector<Alarm> alarms{
        make_alarm(0.0, 0.0, 0.9),            // dead center: true
        make_alarm(0.25, 0.0, 0.8),           // exactly on the radius: true
        make_alarm(0.2501, 0.0, 0.7),         // just outside: false
        make_alarm(5.0, 0.24, 0.6),           // inside t1: true
    };
    const auto labeled = label_alarms(alarms, truth);
    CHECK(labeled[0].is_true);
    CHECK(*labeled[0].target_index == 0);
    CHECK(labeled[1].is_true);
    CHECK_FALSE(labeled[2].is_true);
    CHECK(labeled[3].is_true);
    CHECK(*labeled[3].target_index == 1);
}

TEST_CASE("nearest target takes the credit when radii overlap") {
    GroundTruth truth;
    truth.targets.push_back(Target{"a", "lane0", Eigen::Vector2d(0, 0), 1.0,
                                   MetalClass::high});
    truth.targets.push_back(Target{"b", "lane0", Eigen::Vector2d(1.0, 0), 1.0,
                                   MetalClass::high});
    const auto labeled = label_alarms({make_alarm(0.7, 0.0, 0.5)}, truth);
    REQUIRE(labeled[0].is_true);
    CHECK(truth.targets[*labeled[0].target_index].id == "b");
}

TEST_CASE("labeling matches a naive nearest-target scan on random geometry") {
    Rng rng(23);
    for (int round = 0; round < 50; ++round) {
        GroundTruth truth;
        const std::size_t n_targets = 1 + rng.index(5);
        for (std::size_t t = 0; t < n_targets; ++t) {
            truth.targets.push_back(Target{"t" + std::to_string(t), "lane0",
                                           Eigen::Vector2d(rng.uniform(0, 10),
                                                           rng.uniform(0, 10)),
                                           0.2 + rng.uniform() * 0.5, MetalClass::high});
        }
        const Alarm alarm = make_alarm(rng.uniform(0, 10), rng.uniform(0, 10), 0.5);
        const auto labeled = label_alarms({alarm}, truth);

        bool any = false;
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_t = 0;
        for (std::size_t t = 0; t < truth.targets.size(); ++t) {
            const double dist = (alarm.center - truth.targets[t].position).norm();
            if (dist <= truth.targets[t].response_radius && dist < best) {
                best = dist;
                best_t = t;
                any = true;
            }
        }
        CHECK(labeled[0].is_true == any);
        if (any) CHECK(*labeled[0].target_index == best_t);
    }
}

TEST_CASE("labels are translation invariant") {
    Rng rng(29);
    GroundTruth truth = two_targets();
    std::vector<Alarm> alarms{make_alarm(0.1, 0.1, 0.9), make_alarm(3.0, 0.0, 0.4)};
    const auto base = label_alarms(alarms, truth);

    const Eigen::Vector2d shift(rng.normal() * 10, rng.normal() * 10);
    for (Target& t : truth.targets) t.position += shift;
    for (Alarm& a : alarms) a.center += shift;
    const auto moved = label_alarms(alarms, truth);
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(base[i].is_true == moved[i].is_true);
    }
}

TEST_CASE("roc on a perfect detector") {
    const GroundTruth truth = two_targets();
    const std::vector<Alarm> alarms{make_alarm(0.0, 0.0, 0.9),
                                    make_alarm(5.0, 0.0, 0.8)};
    const RocCurve curve = roc(label_alarms(alarms, truth), truth, Subset::all);
    CHECK(curve.auc == doctest::Approx(1.0));
    CHECK(curve.points.back().pd == doctest::Approx(1.0));
    CHECK(curve.points.back().false_alarms == 0);
}

TEST_CASE("roc with no true alarms is flat zero") {
    const GroundTruth truth = two_targets();
    const std::vector<Alarm> alarms{make_alarm(2.0, 2.0, 0.9),
                                    make_alarm(8.0, 0.0, 0.5),
                                    make_alarm(9.0, 0.0, 0.3)};
    const RocCurve curve = roc(label_alarms(alarms, truth), truth, Subset::all);
    CHECK(curve.auc == 0.0);
    for (const RocPoint& p : curve.points) CHECK(p.pd == 0.0);
}

TEST_CASE("roc subset filters the detection axis") {
    const GroundTruth truth = two_targets();  // one high, one low
    const std::vector<Alarm> alarms{
        make_alarm(0.0, 0.0, 0.9),   // hits the high target
        make_alarm(5.0, 0.0, 0.8),   // hits the low target
        make_alarm(2.0, 2.0, 0.7),   // false alarm
    };
    const auto labeled = label_alarms(alarms, truth);

    const RocCurve high = roc(labeled, truth, Subset::high);
    CHECK(high.points.front().pd == doctest::Approx(1.0));  // high target found first
    // The low-target hit is neither a detection (out of subset) nor a false alarm.
    CHECK(high.points[1].false_alarms == 0);
    CHECK(high.points.back().false_alarms == 1);

    const RocCurve low = roc(labeled, truth, Subset::low);
    CHECK(low.points.front().pd == 0.0);
    CHECK(low.points[1].pd == doctest::Approx(1.0));

    CHECK_THROWS_AS(roc({}, GroundTruth{}, Subset::all), ValidationError);
}

TEST_CASE("roc matches a naive per-threshold recount") {
    Rng rng(31);
    for (int round = 0; round < 30; ++round) {
        GroundTruth truth;
        const std::size_t n_targets = 2 + rng.index(4);
        for (std::size_t t = 0; t < n_targets; ++t) {
            truth.targets.push_back(
                Target{"t" + std::to_string(t), "lane0",
                       Eigen::Vector2d(rng.uniform(0, 10), rng.uniform(0, 10)),
                       0.3 + 0.4 * rng.uniform(),
                       rng.uniform() < 0.5 ? MetalClass::high : MetalClass::low});
        }
        std::vector<Alarm> alarms;
        const std::size_t n_alarms = 1 + rng.index(12);
        for (std::size_t a = 0; a < n_alarms; ++a) {
            // Quantized scores so ties happen.
            alarms.push_back(make_alarm(rng.uniform(0, 10), rng.uniform(0, 10),
                                        0.1 * static_cast<double>(1 + rng.index(9))));
        }
        const auto labeled = label_alarms(alarms, truth);
        const RocCurve curve = roc(labeled, truth, Subset::all);

        for (const RocPoint& point : curve.points) {
            std::size_t fa = 0;
            std::set<std::size_t> hits;
            for (const LabeledAlarm& la : labeled) {
                if (la.alarm.score < point.threshold) continue;
                if (!la.is_true) {
                    ++fa;
                } else if (la.target_index) {
                    hits.insert(*la.target_index);
                }
            }
            CHECK(point.false_alarms == fa);
            CHECK(point.pd == doctest::Approx(static_cast<double>(hits.size()) /
                                              static_cast<double>(n_targets)));
        }
        // Monotone pd along the descending-threshold sweep.
        for (std::size_t p = 1; p < curve.points.size(); ++p) {
            CHECK(curve.points[p].pd >= curve.points[p - 1].pd);
        }
    }
}

TEST_CASE("cross validation scores every sweep exactly once") {
    SynthConfig config;
    config.lanes = 3;
    config.grids_per_lane = 2;
    config.samples_per_sweep = 150;
    config.snr = 5.0;
    config.seed = 2;
    const SynthSite site = generate_site(config);

    TrainConfig tc;
    tc.initializer = InitMethod::kmeans;
    tc.cluster_count = 3;
    const CrossValidationResult cv =
        cross_validate(site.dataset, site.sweeps, site.truth, tc, AlarmParams{},
                       Subset::all);

    CHECK(cv.folds.size() == 3);
    CHECK(cv.skipped_lanes.empty());
    std::set<std::string> held;
    for (const FoldResult& fold : cv.folds) held.insert(fold.held_out_lane);
    CHECK(held.size() == 3);

    // Pooled alarm count is the sum over folds.
    std::size_t sum_init = 0, sum_opt = 0;
    for (const FoldResult& fold : cv.folds) {
        sum_init += fold.alarms_init;
        sum_opt += fold.alarms_optimized;
    }
    CHECK(cv.pooled_init.size() == sum_init);
    CHECK(cv.pooled_optimized.size() == sum_opt);

    // Both the init-only and the optimized ROC are produced.
    CHECK_FALSE(cv.roc_init.points.empty());
    CHECK_FALSE(cv.roc_optimized.points.empty());

    // No lane trains on itself: each fold's training bags exclude the lane.
    for (const FoldResult& fold : cv.folds) {
        CHECK(fold.train_result.iterations_run >= 1);
    }
}

TEST_CASE("ground truth csv round-trips") {
    GroundTruth truth = two_targets();
    const auto path = std::filesystem::temp_directory_path() / "miace_truth.csv";
    save_ground_truth(truth, path);
    const GroundTruth loaded = load_ground_truth(path);
    REQUIRE(loaded.targets.size() == truth.targets.size());
    for (std::size_t i = 0; i < truth.targets.size(); ++i) {
        CHECK(loaded.targets[i].id == truth.targets[i].id);
        CHECK(loaded.targets[i].position == truth.targets[i].position);
        CHECK(loaded.targets[i].response_radius == truth.targets[i].response_radius);
        CHECK(loaded.targets[i].metal == truth.targets[i].metal);
    }
}
