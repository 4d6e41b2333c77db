#include "miace/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "miace/init.hpp"
#include "miace/synth.hpp"

namespace miace {

namespace {

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Least-squares slope of log(time) against log(n_pos).
double loglog_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [n, t] : points) {
        const double x = std::log(n);
        const double y = std::log(t);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(points.size());
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

constexpr InitMethod kMethods[] = {InitMethod::original, InitMethod::kmeans,
                                   InitMethod::ranked_kmeans, InitMethod::mi_cr};

} // namespace

BenchReport run_bench(const std::vector<BenchSize>& sizes, int cluster_count,
                      int trials, std::uint64_t seed) {
    if (trials < 3) throw ValidationError("bench needs at least 3 trials");
    if (sizes.empty()) throw ValidationError("bench needs at least one size");

    BenchReport report;
    report.cluster_count = cluster_count;
    report.trials = trials;

    for (std::size_t si = 0; si < sizes.size(); ++si) {
        const BenchSize& size = sizes[si];
        if (size.n_pos % size.n_pos_bags != 0) {
            throw ValidationError("n_pos must be divisible by n_pos_bags");
        }
        PlantedDatasetConfig config;
        config.dimensionality = size.dimensionality;
        config.positive_bags = size.n_pos_bags;
        config.instances_per_positive_bag = size.n_pos / size.n_pos_bags;
        config.negative_instances = size.n_neg;
        config.seed = seed + si;
        const PlantedDataset planted = make_planted_dataset(config);
        const BackgroundStats stats = fit_background(planted.dataset);

        for (InitMethod method : kMethods) {
            BenchRow row;
            row.method = method;
            row.size = size;
            row.cluster_count = cluster_count;

            TrainConfig tc;
            tc.initializer = method;
            tc.cluster_count = cluster_count;
            tc.seed = seed;

            std::vector<double> times_ms;
            for (int trial = -1; trial < trials; ++trial) {  // trial -1 is warm-up
                const auto start = std::chrono::steady_clock::now();
                const InitResult init = initialize(stats, planted.dataset, tc);
                const std::chrono::duration<double, std::milli> elapsed =
                    std::chrono::steady_clock::now() - start;
                if (trial >= 0) times_ms.push_back(elapsed.count());
                row.candidates = init.candidate_count;
                row.objective_evaluations = init.objective_evaluations;
                row.cluster_iterations = init.cluster_iterations;
            }
            row.median_ms = median(std::move(times_ms));
            report.rows.push_back(row);
        }
    }

    // Speedups over original, averaged across sizes.
    double sum_km = 0, sum_rkm = 0, sum_micr = 0;
    std::size_t n_sizes = sizes.size();
    for (std::size_t si = 0; si < n_sizes; ++si) {
        const double original = report.rows[4 * si + 0].median_ms;
        sum_km += original / report.rows[4 * si + 1].median_ms;
        sum_rkm += original / report.rows[4 * si + 2].median_ms;
        sum_micr += original / report.rows[4 * si + 3].median_ms;
    }
    report.speedup_kmeans = sum_km / static_cast<double>(n_sizes);
    report.speedup_ranked_kmeans = sum_rkm / static_cast<double>(n_sizes);
    report.speedup_mi_cr = sum_micr / static_cast<double>(n_sizes);

    // Slope fit over the sizes sharing the most common n_neg (the ladder).
    std::size_t ladder_neg = sizes.front().n_neg;
    std::size_t best_count = 0;
    for (const BenchSize& a : sizes) {
        std::size_t count = 0;
        for (const BenchSize& b : sizes) {
            if (b.n_neg == a.n_neg) ++count;
        }
        if (count > best_count) {
            best_count = count;
            ladder_neg = a.n_neg;
        }
    }
    std::vector<std::pair<double, double>> original_pts, ranked_pts;
    for (std::size_t si = 0; si < n_sizes; ++si) {
        if (sizes[si].n_neg != ladder_neg) continue;
        original_pts.emplace_back(static_cast<double>(sizes[si].n_pos),
                                  report.rows[4 * si + 0].median_ms);
        ranked_pts.emplace_back(static_cast<double>(sizes[si].n_pos),
                                report.rows[4 * si + 2].median_ms);
    }
    report.original_slope = loglog_slope(original_pts);
    report.ranked_kmeans_slope = loglog_slope(ranked_pts);
    return report;
}

void write_bench_report(const BenchReport& report, std::ostream& out) {
    out << "# MI-ACE initialization benchmark\n";
    out << "# time complexity: Original O(N+(N+ + N-))\n";
    out << "# time complexity: K-Means O(Ki(N+ + N-) + K(N+ + N-))\n";
    out << "# time complexity: Ranked K-Means O(Ki(N+ + N-) + K)\n";
    out << "# time complexity: MI-CR O(Ki(N+ + N-) + KN_B+(N+ + N-))\n";
    out << "# trials=" << report.trials << " (median reported, warm-up discarded)\n";
    out << "method,n_pos,n_neg,n_pos_bags,d,K,median_ms,candidates,objective_evals\n";
    for (const BenchRow& row : report.rows) {
        out << to_string(row.method) << ',' << row.size.n_pos << ',' << row.size.n_neg
            << ',' << row.size.n_pos_bags << ',' << row.size.dimensionality << ','
            << row.cluster_count << ',' << format_double(row.median_ms) << ','
            << row.candidates << ',' << row.objective_evaluations << '\n';
    }
    for (const BenchRow& row : report.rows) {
        if (row.cluster_iterations > 0) {
            out << "# cluster_iterations " << to_string(row.method) << " n_pos="
                << row.size.n_pos << " n_neg=" << row.size.n_neg << ": "
                << row.cluster_iterations << '\n';
        }
    }
    out << "# speedup_over_original kmeans=" << format_double(report.speedup_kmeans)
        << " ranked-kmeans=" << format_double(report.speedup_ranked_kmeans)
        << " mi-cr=" << format_double(report.speedup_mi_cr) << '\n';
    if (std::isfinite(report.original_slope)) {
        out << "# loglog_slope original=" << format_double(report.original_slope)
            << " ranked-kmeans=" << format_double(report.ranked_kmeans_slope) << '\n';
    }
}

} // namespace miace
