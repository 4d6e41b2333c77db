#include <doctest.h>

#include <filesystem>

#include "miace/ace.hpp"
#include "oracles.hpp"

using namespace miace;

TEST_CASE("perfect match and orthogonal samples under identity stats") {
    const BackgroundStats stats = oracle::identity_stats(3);
    const Signature sig = make_signature(Eigen::Vector3d(1, 0, 0), stats);
    CHECK(ace(stats, sig, Eigen::Vector3d(1, 0, 0)) == doctest::Approx(1.0));
    CHECK(ace(stats, sig, Eigen::Vector3d(0, 1, 0)) == doctest::Approx(0.0));
    CHECK(ace(stats, sig, Eigen::Vector3d(-2, 0, 0)) == doctest::Approx(-1.0));
}

TEST_CASE("background-mean samples score zero") {
    Rng rng(3);
    const BackgroundStats stats = oracle::random_stats(4, rng);
    const Signature sig = make_signature(oracle::random_vector(4, rng), stats);
    CHECK(ace(stats, sig, stats.mean) == 0.0);
}

TEST_CASE("agrees with the direct quadratic-form definition") {
    Rng rng(101);
    for (int round = 0; round < 200; ++round) {
        const int d = 2 + static_cast<int>(rng.index(6));
        const BackgroundStats stats = oracle::random_stats(d, rng);
        const Eigen::VectorXd s_raw = oracle::random_vector(d, rng);
        const Eigen::VectorXd x = oracle::random_vector(d, rng);

        // The library stores W * s_raw; both routes must meet at the formula.
        const Signature sig = make_signature(stats.whitener * s_raw, stats);
        const double direct = oracle::ace_direct(stats.covariance, stats.mean, s_raw, x);
        CHECK(ace(stats, sig, x) == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("bounded and magnitude-invariant about the background mean") {
    Rng rng(7);
    for (int round = 0; round < 2000; ++round) {
        const int d = 2 + static_cast<int>(rng.index(5));
        const BackgroundStats stats = oracle::random_stats(d, rng);
        const Signature sig = make_signature(oracle::random_vector(d, rng), stats);
        const Eigen::VectorXd x = oracle::random_vector(d, rng);

        const double value = ace(stats, sig, x);
        CHECK(value >= -1.0 - 1e-9);
        CHECK(value <= 1.0 + 1e-9);

        const double alpha = 0.1 + 3.0 * rng.uniform();
        const Eigen::VectorXd scaled = stats.mean + alpha * (x - stats.mean);
        CHECK(ace(stats, sig, scaled) == doctest::Approx(value).epsilon(1e-9));
        const Eigen::VectorXd flipped = stats.mean - alpha * (x - stats.mean);
        CHECK(ace(stats, sig, flipped) == doctest::Approx(-value).epsilon(1e-9));
    }
}

TEST_CASE("stale signatures and dimension mismatches are rejected") {
    Rng rng(19);
    const BackgroundStats stats = oracle::random_stats(3, rng);
    const BackgroundStats other = oracle::random_stats(3, rng);
    const Signature sig = make_signature(oracle::random_vector(3, rng), stats);
    CHECK_THROWS_AS(ace(other, sig, Eigen::Vector3d(1, 0, 0)), ValidationError);
    CHECK_THROWS_AS(ace(stats, sig, Eigen::Vector2d(1, 0)), DimensionError);
}

TEST_CASE("score_sweep is pointwise and order-preserving") {
    Rng rng(29);
    const BackgroundStats stats = oracle::identity_stats(3);
    const Signature sig = make_signature(Eigen::Vector3d(0, 0, 1), stats);

    Sweep sweep;
    sweep.id = "s0";
    sweep.lane_id = "l0";
    for (int i = 0; i < 40; ++i) {
        sweep.samples.push_back(Instance{oracle::random_vector(3, rng),
                                         Eigen::Vector2d(i * 0.1, 0.0), "s0"});
    }
    sweep.samples[5].features = stats.mean;  // degenerate sample

    const ConfidenceMap map = score_sweep(stats, sig, sweep);
    REQUIRE(map.entries.size() == sweep.samples.size());
    CHECK(map.entries[5].confidence == 0.0);
    for (std::size_t i = 0; i < map.entries.size(); ++i) {
        CHECK(map.entries[i].position == sweep.samples[i].position);
        CHECK(map.entries[i].confidence ==
              ace(stats, sig, sweep.samples[i].features));
    }

    // Permuting the sweep permutes the entries identically.
    Sweep reversed = sweep;
    std::reverse(reversed.samples.begin(), reversed.samples.end());
    const ConfidenceMap rmap = score_sweep(stats, sig, reversed);
    for (std::size_t i = 0; i < map.entries.size(); ++i) {
        CHECK(rmap.entries[map.entries.size() - 1 - i].confidence ==
              map.entries[i].confidence);
    }

    Sweep empty{"e", "l0", {}};
    CHECK_THROWS_AS(score_sweep(stats, sig, empty), ValidationError);
}

TEST_CASE("confidence map csv round-trips") {
    ConfidenceMap map;
    Rng rng(31);
    for (int i = 0; i < 25; ++i) {
        map.entries.push_back(ConfidenceEntry{
            Eigen::Vector2d(rng.normal(), rng.normal()), "s" + std::to_string(i % 3),
            rng.uniform(-1.0, 1.0)});
    }
    const auto path = std::filesystem::temp_directory_path() / "miace_conf.csv";
    save_confidence_map(map, path);
    const ConfidenceMap loaded = load_confidence_map(path);
    REQUIRE(loaded.entries.size() == map.entries.size());
    for (std::size_t i = 0; i < map.entries.size(); ++i) {
        CHECK(loaded.entries[i].position == map.entries[i].position);
        CHECK(loaded.entries[i].sweep_id == map.entries[i].sweep_id);
        CHECK(loaded.entries[i].confidence == map.entries[i].confidence);
    }
}
