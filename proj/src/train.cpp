#include "miace/train.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "miace/init.hpp"

namespace miace {

namespace {
constexpr double kDegenerateNorm = 1e-12;

Eigen::VectorXd unit_or_zero(const Eigen::VectorXd& v) {
    const double n = v.norm();
    return n < kDegenerateNorm ? Eigen::VectorXd::Zero(v.size()).eval() : (v / n).eval();
}
} // namespace

std::string to_string(InitMethod method) {
    switch (method) {
        case InitMethod::original: return "original";
        case InitMethod::kmeans: return "kmeans";
        case InitMethod::ranked_kmeans: return "ranked-kmeans";
        case InitMethod::mi_cr: return "mi-cr";
    }
    return "unknown";
}

InitMethod init_method_from_string(const std::string& name) {
    if (name == "original") return InitMethod::original;
    if (name == "kmeans") return InitMethod::kmeans;
    if (name == "ranked-kmeans") return InitMethod::ranked_kmeans;
    if (name == "mi-cr") return InitMethod::mi_cr;
    throw ValidationError("unknown initializer '" + name + "'");
}

void TrainConfig::validate() const {
    if (max_iterations < 1) throw ValidationError("max_iterations must be at least 1");
    if (convergence_tol <= 0.0) throw ValidationError("convergence_tol must be positive");
    if (cluster_count < 1) throw ValidationError("cluster_count must be positive");
    if (rank_weights.positive_bags < 0.0 || rank_weights.positive_instances < 0.0 ||
        rank_weights.negative_instances < 0.0) {
        throw ValidationError("rank weights must be nonnegative");
    }
    if (rank_weights.positive_bags + rank_weights.positive_instances +
            rank_weights.negative_instances <= 0.0) {
        throw ValidationError("rank weights must not all be zero");
    }
    if (epsilon < 0.0) throw ValidationError("epsilon must be nonnegative");
}

MiAceObjective::MiAceObjective(const BackgroundStats& stats, const MilDataset& dataset) {
    const int d = dataset.dimensionality();
    if (stats.dimensionality() != d) {
        throw DimensionError("background statistics dimensionality mismatch");
    }
    for (const Bag& bag : dataset.bags()) {
        BagUnits units;
        units.units.resize(d, static_cast<Eigen::Index>(bag.instances.size()));
        for (std::size_t i = 0; i < bag.instances.size(); ++i) {
            units.units.col(static_cast<Eigen::Index>(i)) =
                unit_or_zero(stats.whiten(bag.instances[i].features));
        }
        (bag.label == BagLabel::positive ? positive_bags_ : negative_bags_)
            .push_back(std::move(units));
    }
    negative_mean_ = Eigen::VectorXd::Zero(d);
    for (const BagUnits& bag : negative_bags_) {
        negative_mean_ += bag.units.rowwise().mean();
    }
    if (!negative_bags_.empty()) {
        negative_mean_ /= static_cast<double>(negative_bags_.size());
    }
}

double MiAceObjective::evaluate(const Eigen::VectorXd& s_whitened) const {
    const double norm = s_whitened.norm();
    if (norm < kDegenerateNorm) throw ValidationError("objective of a zero signature");
    const Eigen::VectorXd u = s_whitened / norm;

    double positive = 0.0;
    for (const BagUnits& bag : positive_bags_) {
        positive += (u.transpose() * bag.units).maxCoeff();
    }
    if (!positive_bags_.empty()) positive /= static_cast<double>(positive_bags_.size());

    double negative = 0.0;
    for (const BagUnits& bag : negative_bags_) {
        negative += (u.transpose() * bag.units).mean();
    }
    if (!negative_bags_.empty()) negative /= static_cast<double>(negative_bags_.size());

    ++evaluations_;
    return positive - negative;
}

std::size_t MiAceObjective::representative_index(std::size_t positive_bag,
                                                 const Eigen::VectorXd& unit_s) const {
    const Eigen::MatrixXd& units = positive_bags_.at(positive_bag).units;
    Eigen::Index best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < units.cols(); ++i) {
        const double score = unit_s.dot(units.col(i));
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    return static_cast<std::size_t>(best);
}

double objective(const BackgroundStats& stats, const Eigen::VectorXd& s_whitened,
                 const MilDataset& dataset) {
    return MiAceObjective(stats, dataset).evaluate(s_whitened);
}

Instance bag_representative(const BackgroundStats& stats, const Signature& signature,
                            const Bag& bag) {
    if (bag.label != BagLabel::positive) {
        throw ValidationError("bag representative is defined for positive bags only");
    }
    if (bag.instances.empty()) throw ValidationError("bag has no instances");
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < bag.instances.size(); ++i) {
        const double score = ace(stats, signature, bag.instances[i].features);
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    return bag.instances[best];
}

Signature update_signature(const BackgroundStats& stats, const MilDataset& dataset,
                           const Signature& current) {
    MiAceObjective problem(stats, dataset);
    Eigen::VectorXd t = Eigen::VectorXd::Zero(stats.dimensionality());
    for (std::size_t b = 0; b < problem.positive_bag_count(); ++b) {
        const std::size_t idx = problem.representative_index(b, current.whitened);
        t += problem.positive_bag_units(b).col(static_cast<Eigen::Index>(idx));
    }
    t /= static_cast<double>(problem.positive_bag_count());
    t -= problem.negative_mean();
    if (t.norm() < kDegenerateNorm) {
        throw NumericError("degenerate update: positive representatives coincide "
                           "with the background mean");
    }
    return make_signature(t, stats);
}

TrainResult train(const MilDataset& dataset, const TrainConfig& config) {
    config.validate();

    TrainResult result;
    result.stats = fit_background(dataset, config.epsilon);

    const auto init_start = std::chrono::steady_clock::now();
    result.init = initialize(result.stats, dataset, config);
    result.init_wall_time = std::chrono::steady_clock::now() - init_start;
    result.initial_signature = result.init.signature;

    const auto opt_start = std::chrono::steady_clock::now();
    MiAceObjective problem(result.stats, dataset);
    Eigen::VectorXd s = result.initial_signature.whitened;
    result.objective_trace.push_back(problem.evaluate(s));

    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        Eigen::VectorXd t = Eigen::VectorXd::Zero(s.size());
        for (std::size_t b = 0; b < problem.positive_bag_count(); ++b) {
            const std::size_t idx = problem.representative_index(b, s);
            t += problem.positive_bag_units(b).col(static_cast<Eigen::Index>(idx));
        }
        t /= static_cast<double>(problem.positive_bag_count());
        t -= problem.negative_mean();
        const double t_norm = t.norm();
        if (t_norm < kDegenerateNorm) {
            throw NumericError("degenerate update: positive representatives coincide "
                               "with the background mean");
        }
        s = t / t_norm;
        result.objective_trace.push_back(problem.evaluate(s));
        result.iterations_run = iter;
        const std::size_t n = result.objective_trace.size();
        if (std::abs(result.objective_trace[n - 1] - result.objective_trace[n - 2]) <
            config.convergence_tol) {
            break;
        }
    }
    result.optimized_signature = make_signature(s, result.stats);
    result.opt_wall_time = std::chrono::steady_clock::now() - opt_start;
    return result;
}

void save_signature(const SignatureRecord& record, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    const Eigen::Index d = record.signature.whitened.size();
    out << "miace-signature v1\n";
    out << "d " << d << '\n';
    out << "initializer " << record.initializer << '\n';
    out << "stats_fingerprint " << record.signature.stats_fingerprint << '\n';
    out << "signature";
    for (Eigen::Index j = 0; j < d; ++j) {
        out << ' ' << format_double(record.signature.whitened[j]);
    }
    out << '\n';
    out << "objective_trace " << record.objective_trace.size();
    for (double v : record.objective_trace) out << ' ' << format_double(v);
    out << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

SignatureRecord load_signature(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> std::string& {
        if (!std::getline(in, line)) {
            throw ParseError("line " + std::to_string(line_no + 1) +
                             ": unexpected end of " + path.string());
        }
        ++line_no;
        return line;
    };
    if (next_line() != "miace-signature v1") {
        throw ParseError("line 1: not a miace signature file");
    }
    SignatureRecord record;
    std::string key;
    long d = 0;
    {
        std::istringstream s(next_line());
        s >> key >> d;
        if (key != "d" || d < 2) throw ParseError("line 2: expected 'd <dim>'");
    }
    {
        std::istringstream s(next_line());
        s >> key >> record.initializer;
        if (key != "initializer") throw ParseError("line 3: expected 'initializer'");
    }
    {
        std::istringstream s(next_line());
        s >> key >> record.signature.stats_fingerprint;
        if (key != "stats_fingerprint") {
            throw ParseError("line 4: expected 'stats_fingerprint'");
        }
    }
    {
        std::istringstream s(next_line());
        s >> key;
        if (key != "signature") throw ParseError("line 5: expected 'signature'");
        record.signature.whitened.resize(d);
        for (long j = 0; j < d; ++j) {
            std::string tok;
            if (!(s >> tok)) throw ParseError("line 5: signature has too few entries");
            record.signature.whitened[j] = parse_double(tok, line_no);
        }
    }
    {
        std::istringstream s(next_line());
        std::size_t count = 0;
        s >> key >> count;
        if (key != "objective_trace") {
            throw ParseError("line 6: expected 'objective_trace'");
        }
        record.objective_trace.resize(count);
        for (std::size_t j = 0; j < count; ++j) {
            std::string tok;
            if (!(s >> tok)) throw ParseError("line 6: objective trace too short");
            record.objective_trace[j] = parse_double(tok, line_no);
        }
    }
    return record;
}

} // namespace miace
