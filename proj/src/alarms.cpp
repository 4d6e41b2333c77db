#include "miace/alarms.hpp"

#include <algorithm>
#include <fstream>

#include "miace/clustering.hpp"

namespace miace {

double score_alarm(const std::vector<AlarmSample>& members,
                   const Eigen::Vector2d& center, double halo) {
    if (members.empty()) throw ValidationError("alarm has no member samples");
    if (halo <= 0.0) throw ValidationError("halo radius must be positive");
    double total = 0.0;
    for (const AlarmSample& m : members) {
        const double w = std::min((m.position - center).norm() / halo, 1.0);
        total += w * m.confidence;
    }
    return total / static_cast<double>(members.size());
}

namespace {

std::vector<Alarm> alarms_for_sweep(const std::string& sweep_id,
                                    const std::vector<const ConfidenceEntry*>& entries,
                                    const AlarmParams& params) {
    std::vector<Eigen::Vector2d> positions;
    std::vector<double> weights;
    positions.reserve(entries.size());
    weights.reserve(entries.size());
    for (const ConfidenceEntry* e : entries) {
        positions.push_back(e->position);
        weights.push_back(e->confidence < params.conf_threshold ? 0.0 : e->confidence);
    }

    const MeanShiftResult shift = mean_shift(positions, weights, params.bandwidth,
                                             params.merge_radius, params.max_iter);

    std::vector<Alarm> alarms;
    const double halo_sq = params.halo * params.halo;
    for (std::size_t m = 0; m < shift.modes.size(); ++m) {
        Alarm alarm;
        alarm.center = shift.modes[m];
        alarm.sweep_id = sweep_id;
        // Membership: the mean-shift cluster plus every sample inside the halo.
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const bool in_cluster = shift.assignment[i] == static_cast<int>(m);
            const bool in_halo =
                (positions[i] - alarm.center).squaredNorm() <= halo_sq;
            if (in_cluster || in_halo) {
                alarm.members.push_back(AlarmSample{positions[i], entries[i]->confidence});
            }
        }
        alarm.score = score_alarm(alarm.members, alarm.center, params.halo);
        alarms.push_back(std::move(alarm));
    }
    return alarms;
}

} // namespace

std::vector<Alarm> generate_alarms(const ConfidenceMap& map, const AlarmParams& params) {
    if (map.entries.empty()) throw ValidationError("confidence map is empty");
    if (params.conf_threshold < 0.0) {
        throw ValidationError("confidence threshold must be nonnegative");
    }

    // Sweeps are clustered independently, in order of first appearance.
    std::vector<std::string> sweep_order;
    std::vector<std::vector<const ConfidenceEntry*>> grouped;
    for (const ConfidenceEntry& e : map.entries) {
        std::size_t g = 0;
        for (; g < sweep_order.size(); ++g) {
            if (sweep_order[g] == e.sweep_id) break;
        }
        if (g == sweep_order.size()) {
            sweep_order.push_back(e.sweep_id);
            grouped.emplace_back();
        }
        grouped[g].push_back(&e);
    }

    std::vector<Alarm> alarms;
    for (std::size_t g = 0; g < sweep_order.size(); ++g) {
        auto sweep_alarms = alarms_for_sweep(sweep_order[g], grouped[g], params);
        alarms.insert(alarms.end(), std::make_move_iterator(sweep_alarms.begin()),
                      std::make_move_iterator(sweep_alarms.end()));
    }
    std::stable_sort(alarms.begin(), alarms.end(),
                     [](const Alarm& a, const Alarm& b) { return a.score > b.score; });
    return alarms;
}

void save_alarms(const std::vector<Alarm>& alarms, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "sweep_id,center_x,center_y,score,n_members\n";
    for (const Alarm& a : alarms) {
        out << a.sweep_id << ',' << format_double(a.center.x()) << ','
            << format_double(a.center.y()) << ',' << format_double(a.score) << ','
            << a.members.size() << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<Alarm> load_alarms(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) ||
        line.rfind("sweep_id,center_x,center_y,score,n_members", 0) != 0) {
        throw ParseError("line 1: expected alarm header");
    }
    std::vector<Alarm> alarms;
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
        if (fields.size() != 5) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 5 columns");
        }
        Alarm a;
        a.sweep_id = fields[0];
        a.center.x() = parse_double(fields[1], line_no);
        a.center.y() = parse_double(fields[2], line_no);
        a.score = parse_double(fields[3], line_no);
        const long n = parse_long(fields[4], line_no);
        if (n < 1) throw ParseError("line " + std::to_string(line_no) +
                                    ": member count must be positive");
        a.members.resize(static_cast<std::size_t>(n));  // counts only; samples not persisted
        alarms.push_back(std::move(a));
    }
    return alarms;
}

} // namespace miace
