#include <doctest.h>

#include <filesystem>

#include "miace/alarms.hpp"
#include "oracles.hpp"

using namespace miace;

TEST_CASE("default alarm parameters") {
    // The halo default of 0.25 m applies whenever the flag is omitted.
    const AlarmParams defaults;
    CHECK(defaults.halo == 0.25);
    CHECK(defaults.bandwidth == 0.25);
    CHECK(defaults.merge_radius == 0.125);
    CHECK(defaults.conf_threshold == 0.2);
}

TEST_CASE("alarm score pins the three reference cases") {
    const Eigen::Vector2d center(0.0, 0.0);
    const double halo = 0.25;

    // Single member at the center: weight 0, score 0.
    CHECK(score_alarm({AlarmSample{center, 0.9}}, center, halo) == 0.0);

    // Single member at the halo boundary with confidence 1: weight 1, score 1.
    CHECK(score_alarm({AlarmSample{Eigen::Vector2d(halo, 0.0), 1.0}}, center, halo) ==
          doctest::Approx(1.0));

    // Ring of 4 at half the halo with confidence 0.8: 0.5 * 0.8 = 0.4.
    const std::vector<AlarmSample> ring{
        AlarmSample{Eigen::Vector2d(halo / 2, 0), 0.8},
        AlarmSample{Eigen::Vector2d(-halo / 2, 0), 0.8},
        AlarmSample{Eigen::Vector2d(0, halo / 2), 0.8},
        AlarmSample{Eigen::Vector2d(0, -halo / 2), 0.8}};
    CHECK(score_alarm(ring, center, halo) == doctest::Approx(0.4));
}

TEST_CASE("members past the halo clamp to weight one") {
    const Eigen::Vector2d center(0.0, 0.0);
    const double score =
        score_alarm({AlarmSample{Eigen::Vector2d(5.0, 0.0), 0.6}}, center, 0.25);
    CHECK(score == doctest::Approx(0.6));
}

TEST_CASE("score is linear in the confidences") {
    Rng rng(7);
    std::vector<AlarmSample> members;
    for (int i = 0; i < 30; ++i) {
        members.push_back(AlarmSample{Eigen::Vector2d(0.3 * rng.normal(), 0.3 * rng.normal()),
                                      rng.uniform()});
    }
    const Eigen::Vector2d center(0.0, 0.0);
    const double base = score_alarm(members, center, 0.25);
    std::vector<AlarmSample> scaled = members;
    for (AlarmSample& m : scaled) m.confidence *= 3.5;
    CHECK(score_alarm(scaled, center, 0.25) == doctest::Approx(3.5 * base).epsilon(1e-12));
}

TEST_CASE("moving a member radially outward never lowers the score") {
    Rng rng(11);
    for (int round = 0; round < 200; ++round) {
        std::vector<AlarmSample> members;
        const std::size_t n = 1 + rng.index(8);
        for (std::size_t i = 0; i < n; ++i) {
            members.push_back(AlarmSample{
                Eigen::Vector2d(0.2 * rng.normal(), 0.2 * rng.normal()), rng.uniform()});
        }
        const Eigen::Vector2d center(0.0, 0.0);
        const double halo = 0.25;
        const double before = score_alarm(members, center, halo);

        // Push one member outward (still within the halo).
        const std::size_t pick = rng.index(n);
        Eigen::Vector2d dir = members[pick].position;
        if (dir.norm() < 1e-12) dir = Eigen::Vector2d(1.0, 0.0);
        dir.normalize();
        const double r = std::min(members[pick].position.norm(), halo);
        members[pick].position = dir * (r + rng.uniform() * (halo - r));
        const double after = score_alarm(members, center, halo);
        if (members[pick].confidence >= 0.0) {
            CHECK(after >= before - 1e-12);
        }
    }
}

TEST_CASE("a tight high-confidence blob yields exactly one centered alarm") {
    Rng rng(13);
    ConfidenceMap map;
    // Low-level background noise across a 4 m sweep.
    for (int i = 0; i < 200; ++i) {
        map.entries.push_back(ConfidenceEntry{
            Eigen::Vector2d(rng.uniform(0.0, 4.0), rng.uniform(-0.5, 0.5)), "s0",
            0.05 * rng.uniform()});
    }
    // A tight blob of high confidence near (2, 0).
    for (int i = 0; i < 40; ++i) {
        map.entries.push_back(ConfidenceEntry{
            Eigen::Vector2d(2.0 + 0.05 * rng.normal(), 0.05 * rng.normal()), "s0",
            0.8 + 0.2 * rng.uniform()});
    }
    const auto alarms = generate_alarms(map, AlarmParams{});
    REQUIRE(alarms.size() == 1);
    CHECK((alarms[0].center - Eigen::Vector2d(2.0, 0.0)).norm() < 0.1);
    CHECK(alarms[0].sweep_id == "s0");
    CHECK(alarms[0].score > 0.0);
}

TEST_CASE("uniformly zero confidences produce no alarms") {
    ConfidenceMap map;
    for (int i = 0; i < 50; ++i) {
        map.entries.push_back(
            ConfidenceEntry{Eigen::Vector2d(i * 0.1, 0.0), "s0", 0.0});
    }
    CHECK(generate_alarms(map, AlarmParams{}).empty());
}

TEST_CASE("sweeps cluster independently and alarms sort by score") {
    Rng rng(17);
    ConfidenceMap map;
    for (int s = 0; s < 3; ++s) {
        const std::string sweep = "s" + std::to_string(s);
        for (int i = 0; i < 30; ++i) {
            // Same spatial blob in every sweep; confidences grow with s.
            map.entries.push_back(ConfidenceEntry{
                Eigen::Vector2d(1.0 + 0.04 * rng.normal(), 0.04 * rng.normal()), sweep,
                0.3 + 0.2 * s + 0.05 * rng.uniform()});
        }
    }
    const auto alarms = generate_alarms(map, AlarmParams{});
    REQUIRE(alarms.size() == 3);
    for (std::size_t i = 1; i < alarms.size(); ++i) {
        CHECK(alarms[i - 1].score >= alarms[i].score);
    }
    CHECK(alarms[0].sweep_id == "s2");
    CHECK(alarms[2].sweep_id == "s0");
}

TEST_CASE("halo membership pulls in sub-threshold neighbors") {
    ConfidenceMap map;
    // One strong sample and one weak neighbor inside the halo.
    map.entries.push_back(ConfidenceEntry{Eigen::Vector2d(0.0, 0.0), "s0", 0.9});
    map.entries.push_back(ConfidenceEntry{Eigen::Vector2d(0.1, 0.0), "s0", 0.05});
    const auto alarms = generate_alarms(map, AlarmParams{});
    REQUIRE(alarms.size() == 1);
    CHECK(alarms[0].members.size() == 2);
}

TEST_CASE("alarm csv round-trips the scoring fields") {
    Rng rng(19);
    std::vector<Alarm> alarms;
    for (int i = 0; i < 10; ++i) {
        Alarm a;
        a.center = Eigen::Vector2d(rng.normal(), rng.normal());
        a.score = rng.uniform();
        a.sweep_id = "s" + std::to_string(i % 2);
        a.members.resize(1 + rng.index(5));
        alarms.push_back(std::move(a));
    }
    const auto path = std::filesystem::temp_directory_path() / "miace_alarms.csv";
    save_alarms(alarms, path);
    const auto loaded = load_alarms(path);
    REQUIRE(loaded.size() == alarms.size());
    for (std::size_t i = 0; i < alarms.size(); ++i) {
        CHECK(loaded[i].center == alarms[i].center);
        CHECK(loaded[i].score == alarms[i].score);
        CHECK(loaded[i].sweep_id == alarms[i].sweep_id);
        CHECK(loaded[i].members.size() == alarms[i].members.size());
    }
}
