#include <doctest.h>

#include "miace/synth.hpp"
#include "miace/train.hpp"
#include "oracles.hpp"

using namespace miace;

TEST_CASE("equal seeds generate bit-identical sites") {
    SynthConfig config;
    config.lanes = 2;
    config.grids_per_lane = 2;
    config.samples_per_sweep = 100;
    config.seed = 9;
    const SynthSite a = generate_site(config);
    const SynthSite b = generate_site(config);

    CHECK(a.planted_signature == b.planted_signature);
    REQUIRE(a.dataset.bags().size() == b.dataset.bags().size());
    for (std::size_t i = 0; i < a.dataset.bags().size(); ++i) {
        const Bag& lhs = a.dataset.bags()[i];
        const Bag& rhs = b.dataset.bags()[i];
        REQUIRE(lhs.instances.size() == rhs.instances.size());
        for (std::size_t j = 0; j < lhs.instances.size(); ++j) {
            CHECK(lhs.instances[j].features == rhs.instances[j].features);
            CHECK(lhs.instances[j].position == rhs.instances[j].position);
        }
    }
    REQUIRE(a.truth.targets.size() == b.truth.targets.size());
    for (std::size_t i = 0; i < a.truth.targets.size(); ++i) {
        CHECK(a.truth.targets[i].position == b.truth.targets[i].position);
    }
}

TEST_CASE("generated background matches the configured covariance") {
    SynthConfig config;
    config.dimensionality = 4;
    config.lanes = 2;
    config.grids_per_lane = 1;
    config.seed = 17;
    const SynthSite site = generate_site(config);

    // Draw a large pure-background sample through the same machinery: the
    // negative (blank) bag instances are untouched background.
    Eigen::MatrixXd samples(100000, 4);
    {
        Rng rng(33);
        const Eigen::MatrixXd chol =
            Eigen::LLT<Eigen::MatrixXd>(site.background_covariance).matrixL();
        for (int i = 0; i < samples.rows(); ++i) {
            Eigen::VectorXd z(4);
            for (int j = 0; j < 4; ++j) z[j] = rng.normal();
            samples.row(i) = (site.background_mean + chol * z).transpose();
        }
    }
    const Eigen::RowVectorXd mean = samples.colwise().mean();
    const Eigen::MatrixXd centered = samples.rowwise() - mean;
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(samples.rows() - 1);
    const double rel_err = (cov - site.background_covariance).norm() /
                           site.background_covariance.norm();
    CHECK(rel_err < 0.05);
}

TEST_CASE("high snr drives target samples to the planted direction") {
    SynthConfig config;
    config.lanes = 2;
    config.grids_per_lane = 2;
    config.snr = 1e6;
    config.seed = 21;
    const SynthSite site = generate_site(config);
    const BackgroundStats stats = fit_background(site.dataset);

    for (const Bag& bag : site.dataset.bags()) {
        if (bag.label != BagLabel::positive) continue;
        // Some bag instance whitens to (nearly) the planted direction.
        double best = -1.0;
        const Eigen::VectorXd planted_w = stats.whitener * site.planted_signature;
        for (const Instance& inst : bag.instances) {
            const Eigen::VectorXd w = stats.whiten(inst.features);
            if (w.norm() < 1e-12) continue;
            best = std::max(best, w.dot(planted_w) / (w.norm() * planted_w.norm()));
        }
        CHECK(best >= 0.999);
    }
}

TEST_CASE("every positive bag contains signal-bearing samples") {
    SynthConfig config;
    config.lanes = 3;
    config.grids_per_lane = 3;
    config.snr = 50.0;
    config.seed = 25;
    const SynthSite site = generate_site(config);

    // At this snr the signal dominates: the strongest in-bag response must
    // stand far above the blank-bag responses.
    const BackgroundStats stats = fit_background(site.dataset);
    const Signature planted =
        make_signature(stats.whitener * site.planted_signature, stats);
    for (const Bag& bag : site.dataset.bags()) {
        if (bag.label != BagLabel::positive) continue;
        double best = -1.0;
        for (const Instance& inst : bag.instances) {
            best = std::max(best, ace(stats, planted, inst.features));
        }
        CHECK(best > 0.9);
    }
}

TEST_CASE("planted dataset shapes follow the request") {
    PlantedDatasetConfig config;
    config.positive_bags = 7;
    config.instances_per_positive_bag = 9;
    config.negative_instances = 123;
    config.seed = 1;
    const PlantedDataset planted = make_planted_dataset(config);
    CHECK(planted.dataset.positive_bag_count() == 7);
    CHECK(planted.dataset.positive_instance_count() == 63);
    CHECK(planted.dataset.negative_instance_count() == 123);
    CHECK(planted.planted_signature.norm() == doctest::Approx(1.0));
}

TEST_CASE("planted signature file round-trips") {
    Rng rng(37);
    const Eigen::VectorXd sig = oracle::random_vector(6, rng);
    const auto path = std::filesystem::temp_directory_path() / "miace_planted.txt";
    save_planted_signature(sig, path);
    CHECK(load_planted_signature(path) == sig);
}

TEST_CASE("config invariants are enforced") {
    SynthConfig config;
    config.lanes = 1;
    CHECK_THROWS_AS(generate_site(config), ValidationError);
    config = SynthConfig{};
    config.snr = 0.0;
    CHECK_THROWS_AS(generate_site(config), ValidationError);
    config = SynthConfig{};
    config.depth_scale_min = 0.8;
    config.depth_scale_max = 0.3;
    CHECK_THROWS_AS(generate_site(config), ValidationError);
}
