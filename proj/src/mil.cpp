#include "miace/mil.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace miace {

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

constexpr const char* kHeaderPrefix = "bag_id,label,lane_id,sweep_id,pos_x,pos_y";

struct Row {
    std::string bag_id;
    BagLabel label;
    std::string lane_id;
    Instance instance;
};

// Shared row reader for datasets and sweeps.
std::pair<std::vector<Row>, int> read_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw ParseError("line 1: empty file " + path.string());
    line = strip_cr(line);

    auto header = split_csv(line);
    if (header.size() < 8 || line.rfind(kHeaderPrefix, 0) != 0) {
        throw ParseError("line 1: header must start with '" +
                         std::string(kHeaderPrefix) + ",f_0,...'");
    }
    const int d = static_cast<int>(header.size()) - 6;
    for (int j = 0; j < d; ++j) {
        const std::string expected = "f_" + std::to_string(j);
        if (header[6 + j] != expected) {
            throw ParseError("line 1: feature column " + std::to_string(6 + j) +
                             " must be named " + expected);
        }
    }

    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (static_cast<int>(fields.size()) != d + 6) {
            throw DimensionError("line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(d + 6) + " columns, got " +
                                 std::to_string(fields.size()));
        }
        Row row;
        row.bag_id = std::string(fields[0]);
        const long label = parse_long(fields[1], line_no);
        if (label != 0 && label != 1) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": label must be 0 or 1");
        }
        row.label = label == 1 ? BagLabel::positive : BagLabel::negative;
        row.lane_id = std::string(fields[2]);
        row.instance.sweep_id = std::string(fields[3]);
        row.instance.position.x() = parse_double(fields[4], line_no);
        row.instance.position.y() = parse_double(fields[5], line_no);
        row.instance.features.resize(d);
        for (int j = 0; j < d; ++j) {
            row.instance.features[j] = parse_double(fields[6 + j], line_no);
        }
        if (!row.instance.features.allFinite()) {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": non-finite feature value");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("no data rows in " + path.string());
    return {std::move(rows), d};
}

void write_header(std::ostream& out, int d) {
    out << kHeaderPrefix;
    for (int j = 0; j < d; ++j) out << ",f_" << j;
    out << '\n';
}

void write_row(std::ostream& out, const std::string& bag_id, BagLabel label,
               const std::string& lane_id, const Instance& inst) {
    out << bag_id << ',' << (label == BagLabel::positive ? 1 : 0) << ','
        << lane_id << ',' << inst.sweep_id << ','
        << format_double(inst.position.x()) << ','
        << format_double(inst.position.y());
    for (Eigen::Index j = 0; j < inst.features.size(); ++j) {
        out << ',' << format_double(inst.features[j]);
    }
    out << '\n';
}

} // namespace

MilDataset::MilDataset(std::vector<Bag> bags) : bags_(std::move(bags)) {
    compute_counts();
    check_instances();
    if (n_pos_bags_ == 0 || n_pos_bags_ == bags_.size()) {
        throw ValidationError("dataset needs at least one positive and one negative bag");
    }
}

MilDataset::MilDataset(std::vector<Bag> bags, PartialSplitTag) : bags_(std::move(bags)) {
    compute_counts();
    check_instances();
}

void MilDataset::compute_counts() {
    if (bags_.empty()) throw ValidationError("dataset has no bags");
    for (const Bag& bag : bags_) {
        if (bag.instances.empty()) {
            throw ValidationError("bag '" + bag.id + "' has no instances");
        }
        if (bag.label == BagLabel::positive) {
            ++n_pos_bags_;
            n_pos_ += bag.instances.size();
        } else {
            n_neg_ += bag.instances.size();
        }
    }
    d_ = static_cast<int>(bags_.front().instances.front().features.size());
}

void MilDataset::check_instances() const {
    if (d_ < 2) throw ValidationError("dimensionality must be at least 2");
    for (const Bag& bag : bags_) {
        for (const Instance& inst : bag.instances) {
            if (static_cast<int>(inst.features.size()) != d_) {
                throw DimensionError("bag '" + bag.id + "' mixes dimensionalities " +
                                     std::to_string(d_) + " and " +
                                     std::to_string(inst.features.size()));
            }
            if (!inst.features.allFinite()) {
                throw ValidationError("bag '" + bag.id + "' has a non-finite feature");
            }
        }
    }
}

std::vector<std::string> MilDataset::lane_ids() const {
    std::vector<std::string> lanes;
    for (const Bag& bag : bags_) {
        if (std::find(lanes.begin(), lanes.end(), bag.lane_id) == lanes.end()) {
            lanes.push_back(bag.lane_id);
        }
    }
    return lanes;
}

MilDataset load_dataset(const std::filesystem::path& path) {
    auto [rows, d] = read_rows(path);

    // Group rows into bags by first appearance, preserving row order.
    std::vector<Bag> bags;
    std::map<std::string, std::size_t> index;
    for (Row& row : rows) {
        auto it = index.find(row.bag_id);
        if (it == index.end()) {
            index.emplace(row.bag_id, bags.size());
            Bag bag;
            bag.id = row.bag_id;
            bag.label = row.label;
            bag.lane_id = row.lane_id;
            bags.push_back(std::move(bag));
            it = index.find(row.bag_id);
        } else {
            const Bag& bag = bags[it->second];
            if (bag.label != row.label) {
                throw ValidationError("bag '" + row.bag_id + "' has conflicting labels");
            }
            if (bag.lane_id != row.lane_id) {
                throw ValidationError("bag '" + row.bag_id + "' spans multiple lanes");
            }
        }
        bags[it->second].instances.push_back(std::move(row.instance));
    }
    return MilDataset(std::move(bags));
}

void save_dataset(const MilDataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    write_header(out, dataset.dimensionality());
    for (const Bag& bag : dataset.bags()) {
        for (const Instance& inst : bag.instances) {
            write_row(out, bag.id, bag.label, bag.lane_id, inst);
        }
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<Sweep> load_sweeps(const std::filesystem::path& path) {
    auto [rows, d] = read_rows(path);
    (void)d;
    std::vector<Sweep> sweeps;
    std::map<std::string, std::size_t> index;
    for (Row& row : rows) {
        const std::string& sid = row.instance.sweep_id;
        auto it = index.find(sid);
        if (it == index.end()) {
            index.emplace(sid, sweeps.size());
            sweeps.push_back(Sweep{sid, row.lane_id, {}});
            it = index.find(sid);
        }
        sweeps[it->second].samples.push_back(std::move(row.instance));
    }
    return sweeps;
}

void save_sweeps(const std::vector<Sweep>& sweeps, int dimensionality,
                 const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    write_header(out, dimensionality);
    for (const Sweep& sweep : sweeps) {
        for (const Instance& inst : sweep.samples) {
            write_row(out, sweep.id, BagLabel::negative, sweep.lane_id, inst);
        }
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::pair<MilDataset, MilDataset>
split_by_lane(const MilDataset& dataset, const std::string& held_out_lane) {
    std::vector<Bag> train_bags, test_bags;
    for (const Bag& bag : dataset.bags()) {
        (bag.lane_id == held_out_lane ? test_bags : train_bags).push_back(bag);
    }
    if (test_bags.empty()) {
        throw ValidationError("no bags in lane '" + held_out_lane + "'");
    }
    if (train_bags.empty()) {
        throw ValidationError("holding out lane '" + held_out_lane +
                              "' leaves an empty training split");
    }
    MilDataset train(std::move(train_bags));  // must keep both labels
    MilDataset test(std::move(test_bags), MilDataset::PartialSplitTag{});
    return {std::move(train), std::move(test)};
}

} // namespace miace
