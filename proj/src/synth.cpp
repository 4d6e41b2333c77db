#include "miace/synth.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <sstream>

namespace miace {

namespace {

// Site layout constants (meters).
constexpr double kGridLength = 4.0;
constexpr double kLaneSpacing = 2.0;
constexpr double kSweepWidth = 0.8;
constexpr double kBlankLength = 1.2;   // leading target-free stretch of a grid
constexpr double kBlankBagCut = 1.0;   // blank samples this far in feed the negative bag
constexpr int kSweepRows = 5;

Eigen::MatrixXd ar1_covariance(int d, double rho, double scale) {
    Eigen::MatrixXd cov(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            cov(i, j) = scale * scale * std::pow(rho, std::abs(i - j));
        }
    }
    return cov;
}

Eigen::VectorXd random_unit(int d, Rng& rng) {
    Eigen::VectorXd v(d);
    double norm = 0.0;
    do {
        for (int i = 0; i < d; ++i) v[i] = rng.normal();
        norm = v.norm();
    } while (norm < 1e-8);
    return v / norm;
}

// Amplitude making the whitened signal norm equal snr_effective * sqrt(d).
double calibrated_amplitude(const Eigen::MatrixXd& covariance,
                            const Eigen::VectorXd& direction, double snr_effective) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
    const Eigen::MatrixXd whitener =
        eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
        eig.eigenvectors().transpose();
    const double whitened_norm = (whitener * direction).norm();
    return snr_effective * std::sqrt(static_cast<double>(direction.size())) /
           whitened_norm;
}

struct BackgroundSampler {
    Eigen::VectorXd mean;
    Eigen::MatrixXd chol;  // lower factor of the covariance

    Eigen::VectorXd draw(Rng& rng) const {
        Eigen::VectorXd z(mean.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
        return mean + chol * z;
    }
};

} // namespace

void SynthConfig::validate() const {
    if (dimensionality < 2) throw ValidationError("dimensionality must be at least 2");
    if (lanes < 2) throw ValidationError("need at least 2 lanes");
    if (grids_per_lane < 1) throw ValidationError("need at least 1 grid per lane");
    if (snr <= 0.0) throw ValidationError("snr must be positive");
    if (depth_scale_min <= 0.0 || depth_scale_max < depth_scale_min) {
        throw ValidationError("depth scale range must be positive and ordered");
    }
    if (background_correlation < 0.0 || background_correlation >= 1.0) {
        throw ValidationError("background correlation must be in [0, 1)");
    }
    if (samples_per_sweep < 2 * kSweepRows) {
        throw ValidationError("samples_per_sweep too small for the sweep layout");
    }
    if (response_radius <= 0.0) throw ValidationError("response radius must be positive");
    if (signal_fill <= 0.0 || signal_fill > 1.0) {
        throw ValidationError("signal_fill must be in (0, 1]");
    }
    if (mix_high < 0.0 || mix_low < 0.0 || mix_none < 0.0 ||
        mix_high + mix_low + mix_none <= 0.0) {
        throw ValidationError("metal class mix must be nonnegative and not all zero");
    }
}

SynthSite generate_site(const SynthConfig& config) {
    config.validate();
    const int d = config.dimensionality;

    Rng sig_rng(config.signature_seed);
    Eigen::VectorXd planted = random_unit(d, sig_rng);

    Rng rng(config.seed);
    BackgroundSampler background;
    const Eigen::MatrixXd covariance =
        ar1_covariance(d, config.background_correlation, config.background_scale);
    background.mean = Eigen::VectorXd(d);
    for (int i = 0; i < d; ++i) background.mean[i] = 2.0 * rng.normal();
    background.chol = Eigen::LLT<Eigen::MatrixXd>(covariance).matrixL();

    const double unit_amplitude = calibrated_amplitude(covariance, planted, config.snr);

    const double mix_total = config.mix_high + config.mix_low + config.mix_none;
    const double cum_high = config.mix_high / mix_total;
    const double cum_low = cum_high + config.mix_low / mix_total;

    const int nx = config.samples_per_sweep / kSweepRows;
    const double dx = kGridLength / nx;
    const double dy = kSweepWidth / (kSweepRows - 1);

    std::vector<Sweep> sweeps;
    GroundTruth truth;
    std::vector<Bag> bags;
    Bag negative;
    negative.id = "blanks";
    negative.label = BagLabel::negative;
    negative.lane_id = "blank";

    const int n_targets = config.lanes * config.grids_per_lane;
    int target_counter = 0;
    for (int lane = 0; lane < config.lanes; ++lane) {
        const std::string lane_id = "lane" + std::to_string(lane);
        const double lane_y = lane * kLaneSpacing;
        for (int grid = 0; grid < config.grids_per_lane; ++grid) {
            const double grid_x0 = grid * kGridLength;
            const std::string grid_id =
                lane_id + "_grid" + std::to_string(grid);

            // One target per grid, placed clear of the blank stretch and edges.
            Target target;
            target.id = "t" + std::to_string(target_counter);
            target.lane_id = lane_id;
            const double margin = config.response_radius + 0.2;
            target.position.x() =
                grid_x0 + rng.uniform(kBlankLength + margin, kGridLength - margin);
            target.position.y() = lane_y + rng.uniform(-0.15, 0.15);
            target.response_radius = config.response_radius;
            const double frac = (target_counter + 0.5) / n_targets;
            target.metal = frac < cum_high  ? MetalClass::high
                           : frac < cum_low ? MetalClass::low
                                            : MetalClass::none;
            ++target_counter;

            const double class_scale = target.metal == MetalClass::high
                                           ? config.class_scale_high
                                       : target.metal == MetalClass::low
                                           ? config.class_scale_low
                                           : config.class_scale_none;
            const double depth =
                rng.uniform(config.depth_scale_min, config.depth_scale_max);
            const double amplitude = unit_amplitude * depth * class_scale;
            const double signal_radius = config.signal_fill * config.response_radius;

            Sweep sweep;
            sweep.id = grid_id;
            sweep.lane_id = lane_id;
            Bag positive;
            positive.id = grid_id;
            positive.label = BagLabel::positive;
            positive.lane_id = lane_id;

            for (int ix = 0; ix < nx; ++ix) {
                for (int iy = 0; iy < kSweepRows; ++iy) {
                    Instance inst;
                    inst.sweep_id = grid_id;
                    inst.position.x() = grid_x0 + (ix + 0.5) * dx;
                    inst.position.y() = lane_y - kSweepWidth / 2.0 + iy * dy;
                    inst.features = background.draw(rng);
                    const double dist = (inst.position - target.position).norm();
                    if (dist <= signal_radius) {
                        inst.features += amplitude * planted;
                    }
                    if (dist <= config.response_radius) {
                        positive.instances.push_back(inst);
                    }
                    if (inst.position.x() - grid_x0 <= kBlankBagCut) {
                        negative.instances.push_back(inst);
                    }
                    sweep.samples.push_back(std::move(inst));
                }
            }
            if (positive.instances.empty()) {
                throw NumericError("sweep sampling too sparse: grid '" + grid_id +
                                   "' produced an empty positive bag");
            }
            bags.push_back(std::move(positive));
            sweeps.push_back(std::move(sweep));
            truth.targets.push_back(std::move(target));
        }
    }
    bags.push_back(std::move(negative));
    return SynthSite{MilDataset(std::move(bags)), std::move(sweeps), std::move(truth),
                     std::move(planted), std::move(background.mean), covariance};
}

double whitened_cosine(const BackgroundStats& stats, const Signature& signature,
                       const Eigen::VectorXd& raw_direction) {
    const Eigen::VectorXd w = stats.whitener * raw_direction;
    const double norm = w.norm();
    if (norm < 1e-12) throw NumericError("direction whitens to zero");
    return signature.whitened.dot(w) / norm;
}

PlantedDataset make_planted_dataset(const PlantedDatasetConfig& config) {
    if (config.dimensionality < 2) throw ValidationError("dimensionality must be >= 2");
    if (config.positive_bags < 1 || config.instances_per_positive_bag < 1) {
        throw ValidationError("need at least one positive bag with one instance");
    }
    if (config.negative_instances < 2) {
        throw ValidationError("need at least 2 negative instances");
    }
    if (config.target_fraction <= 0.0 || config.target_fraction > 1.0) {
        throw ValidationError("target_fraction must be in (0, 1]");
    }
    const int d = config.dimensionality;

    Rng rng(config.seed);
    Eigen::VectorXd planted = random_unit(d, rng);

    BackgroundSampler background;
    const Eigen::MatrixXd covariance =
        ar1_covariance(d, config.background_correlation, 1.0);
    background.mean = Eigen::VectorXd(d);
    for (int i = 0; i < d; ++i) background.mean[i] = 2.0 * rng.normal();
    background.chol = Eigen::LLT<Eigen::MatrixXd>(covariance).matrixL();

    const double unit_amplitude = calibrated_amplitude(covariance, planted, config.snr);

    const std::size_t signal_count = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::ceil(config.target_fraction *
                         static_cast<double>(config.instances_per_positive_bag))));

    std::vector<Bag> bags;
    for (std::size_t b = 0; b < config.positive_bags; ++b) {
        Bag bag;
        bag.id = "pos" + std::to_string(b);
        bag.label = BagLabel::positive;
        bag.lane_id = "lane" + std::to_string(b % 5);
        const double depth =
            rng.uniform(config.depth_scale_min, config.depth_scale_max);
        for (std::size_t i = 0; i < config.instances_per_positive_bag; ++i) {
            Instance inst;
            inst.sweep_id = bag.id;
            inst.position = Eigen::Vector2d(static_cast<double>(b), static_cast<double>(i));
            inst.features = background.draw(rng);
            if (i < signal_count) {
                inst.features += unit_amplitude * depth * planted;
            }
            bag.instances.push_back(std::move(inst));
        }
        bags.push_back(std::move(bag));
    }
    Bag negative;
    negative.id = "neg";
    negative.label = BagLabel::negative;
    negative.lane_id = "blank";
    for (std::size_t i = 0; i < config.negative_instances; ++i) {
        Instance inst;
        inst.sweep_id = "neg";
        inst.position = Eigen::Vector2d(-1.0, static_cast<double>(i));
        inst.features = background.draw(rng);
        negative.instances.push_back(std::move(inst));
    }
    bags.push_back(std::move(negative));

    return PlantedDataset{MilDataset(std::move(bags)), std::move(planted)};
}

void save_planted_signature(const Eigen::VectorXd& signature,
                            const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "planted-signature v1\n";
    out << "d " << signature.size() << '\n';
    out << "signature";
    for (Eigen::Index i = 0; i < signature.size(); ++i) {
        out << ' ' << format_double(signature[i]);
    }
    out << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

Eigen::VectorXd load_planted_signature(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "planted-signature v1") {
        throw ParseError("line 1: not a planted signature file");
    }
    if (!std::getline(in, line)) throw ParseError("line 2: missing dimensionality");
    std::istringstream dline(line);
    std::string key;
    long d = 0;
    dline >> key >> d;
    if (key != "d" || d < 2) throw ParseError("line 2: expected 'd <dim>'");
    if (!std::getline(in, line)) throw ParseError("line 3: missing signature");
    std::istringstream sline(line);
    sline >> key;
    if (key != "signature") throw ParseError("line 3: expected 'signature'");
    Eigen::VectorXd v(d);
    for (long i = 0; i < d; ++i) {
        std::string tok;
        if (!(sline >> tok)) throw ParseError("line 3: signature too short");
        v[i] = parse_double(tok, 3);
    }
    return v;
}

} // namespace miace
