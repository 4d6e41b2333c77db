#include "miace/whitening.hpp"

#include <Eigen/Eigenvalues>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace miace {

namespace {

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace

Eigen::VectorXd BackgroundStats::whiten(const Eigen::VectorXd& x) const {
    if (x.size() != mean.size()) {
        throw DimensionError("whiten: vector has length " + std::to_string(x.size()) +
                             ", expected " + std::to_string(mean.size()));
    }
    return whitener * (x - mean);
}

void BackgroundStats::finalize() {
    const Eigen::Index d = mean.size();
    if (covariance.rows() != d || covariance.cols() != d) {
        throw DimensionError("background covariance shape does not match mean");
    }
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw ValidationError("background covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
    if (eig.info() != Eigen::Success) {
        throw NumericError("eigendecomposition of background covariance failed");
    }
    if (eig.eigenvalues().minCoeff() <= 0.0) {
        throw NumericError("background covariance is not positive-definite; "
                           "increase epsilon");
    }
    whitener = eig.eigenvectors() *
               eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
               eig.eigenvectors().transpose();

    std::uint64_t h = 0xcbf29ce484222325ull;
    const std::int64_t dim = d;
    h = fnv1a(&dim, sizeof dim, h);
    h = fnv1a(mean.data(), sizeof(double) * d, h);
    h = fnv1a(covariance.data(), sizeof(double) * d * d, h);
    h = fnv1a(&regularization, sizeof regularization, h);
    fingerprint_ = h;
}

BackgroundStats fit_background(const MilDataset& dataset, double epsilon) {
    if (epsilon < 0.0) throw ValidationError("epsilon must be nonnegative");
    const int d = dataset.dimensionality();
    const std::size_t n = dataset.negative_instance_count();
    if (n < 2) {
        throw NumericError("background estimation needs at least 2 negative instances");
    }
    if (n < static_cast<std::size_t>(d) + 1 && epsilon == 0.0) {
        throw NumericError("fewer than d+1 negative instances; a positive epsilon "
                           "is required");
    }

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const Bag& bag : dataset.bags()) {
        if (bag.label != BagLabel::negative) continue;
        for (const Instance& inst : bag.instances) mean += inst.features;
    }
    mean /= static_cast<double>(n);

    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
    for (const Bag& bag : dataset.bags()) {
        if (bag.label != BagLabel::negative) continue;
        for (const Instance& inst : bag.instances) {
            const Eigen::VectorXd c = inst.features - mean;
            scatter.noalias() += c * c.transpose();
        }
    }
    Eigen::MatrixXd cov = scatter / static_cast<double>(n - 1);
    cov = 0.5 * (cov + cov.transpose().eval());

    const double trace_scale = cov.trace() / d;
    const double ridge = epsilon * (trace_scale > 0.0 ? trace_scale : 1.0);

    BackgroundStats stats;
    stats.mean = std::move(mean);
    stats.covariance = cov + ridge * Eigen::MatrixXd::Identity(d, d);
    stats.regularization = ridge;
    stats.finalize();
    return stats;
}

void save_background(const BackgroundStats& stats, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    const int d = stats.dimensionality();
    out << "miace-background-stats v1\n";
    out << "d " << d << '\n';
    out << "regularization " << format_double(stats.regularization) << '\n';
    out << "mean";
    for (int j = 0; j < d; ++j) out << ' ' << format_double(stats.mean[j]);
    out << '\n';
    out << "covariance\n";
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            out << (j ? " " : "") << format_double(stats.covariance(i, j));
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

BackgroundStats load_background(const std::filesystem::path& path) {
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

    if (next_line() != "miace-background-stats v1") {
        throw ParseError("line 1: not a miace background stats file");
    }
    std::istringstream dline(next_line());
    std::string key;
    long d = 0;
    dline >> key >> d;
    if (key != "d" || d < 2) throw ParseError("line 2: expected 'd <dim>'");

    BackgroundStats stats;
    std::istringstream rline(next_line());
    std::string rtoken;
    rline >> key >> rtoken;
    if (key != "regularization") throw ParseError("line 3: expected 'regularization'");
    stats.regularization = parse_double(rtoken, line_no);

    std::istringstream mline(next_line());
    mline >> key;
    if (key != "mean") throw ParseError("line 4: expected 'mean'");
    stats.mean.resize(d);
    for (long j = 0; j < d; ++j) {
        std::string tok;
        if (!(mline >> tok)) throw ParseError("line 4: mean has too few entries");
        stats.mean[j] = parse_double(tok, line_no);
    }

    if (next_line() != "covariance") throw ParseError("line 5: expected 'covariance'");
    stats.covariance.resize(d, d);
    for (long i = 0; i < d; ++i) {
        std::istringstream cline(next_line());
        for (long j = 0; j < d; ++j) {
            std::string tok;
            if (!(cline >> tok)) {
                throw ParseError("line " + std::to_string(line_no) +
                                 ": covariance row has too few entries");
            }
            stats.covariance(i, j) = parse_double(tok, line_no);
        }
    }
    stats.finalize();
    return stats;
}

} // namespace miace
