#include "miace/ace.hpp"

#include <fstream>

namespace miace {

namespace {

constexpr double kDegenerateNorm = 1e-12;

void check_match(const BackgroundStats& stats, const Signature& signature) {
    if (signature.whitened.size() != stats.mean.size()) {
        throw DimensionError("signature dimensionality does not match background");
    }
    if (signature.stats_fingerprint != stats.fingerprint()) {
        throw ValidationError("stale signature: trained against different "
                              "background statistics");
    }
}

} // namespace

Signature make_signature(const Eigen::VectorXd& whitened_direction,
                         const BackgroundStats& stats) {
    if (whitened_direction.size() != stats.mean.size()) {
        throw DimensionError("signature direction has wrong dimensionality");
    }
    const double norm = whitened_direction.norm();
    if (norm < kDegenerateNorm) {
        throw NumericError("signature direction has vanishing norm");
    }
    return Signature{whitened_direction / norm, stats.fingerprint()};
}

double ace(const BackgroundStats& stats, const Signature& signature,
           const Eigen::VectorXd& x) {
    check_match(stats, signature);
    const Eigen::VectorXd xw = stats.whiten(x);
    const double norm = xw.norm();
    if (norm < kDegenerateNorm) return 0.0;
    return signature.whitened.dot(xw) / norm;
}

ConfidenceMap score_sweep(const BackgroundStats& stats, const Signature& signature,
                          const Sweep& sweep) {
    check_match(stats, signature);
    if (sweep.samples.empty()) {
        throw ValidationError("sweep '" + sweep.id + "' has no samples");
    }
    ConfidenceMap map;
    map.entries.reserve(sweep.samples.size());
    for (const Instance& inst : sweep.samples) {
        map.entries.push_back(
            ConfidenceEntry{inst.position, sweep.id, ace(stats, signature, inst.features)});
    }
    return map;
}

void save_confidence_map(const ConfidenceMap& map, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "sweep_id,pos_x,pos_y,confidence\n";
    for (const ConfidenceEntry& e : map.entries) {
        out << e.sweep_id << ',' << format_double(e.position.x()) << ','
            << format_double(e.position.y()) << ',' << format_double(e.confidence)
            << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

ConfidenceMap load_confidence_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("sweep_id,pos_x,pos_y,confidence", 0) != 0) {
        throw ParseError("line 1: expected confidence map header");
    }
    ConfidenceMap map;
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
        if (fields.size() != 4) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 4 columns");
        }
        ConfidenceEntry e;
        e.sweep_id = fields[0];
        e.position.x() = parse_double(fields[1], line_no);
        e.position.y() = parse_double(fields[2], line_no);
        e.confidence = parse_double(fields[3], line_no);
        map.entries.push_back(std::move(e));
    }
    return map;
}

} // namespace miace
