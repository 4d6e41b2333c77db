#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "miace/train.hpp"

namespace miace {

struct BenchSize {
    std::size_t n_pos = 1000;
    std::size_t n_neg = 1000;
    std::size_t n_pos_bags = 10;
    int dimensionality = 8;
};

struct BenchRow {
    InitMethod method = InitMethod::original;
    BenchSize size;
    int cluster_count = 0;
    double median_ms = 0.0;
    std::size_t candidates = 0;
    std::size_t objective_evaluations = 0;
    int cluster_iterations = 0;  // observed K-means/EM iterations
};

struct BenchReport {
    std::vector<BenchRow> rows;
    int cluster_count = 0;
    int trials = 0;
    /// log-log slope of the original initializer's median time against N+,
    /// fitted over the sizes sharing the largest-N- ladder. NaN when fewer
    /// than two sizes qualify.
    double original_slope = 0.0;
    double ranked_kmeans_slope = 0.0;
    /// Median-time speedup of each proposed method over original, averaged
    /// over sizes: {kmeans, ranked_kmeans, mi_cr}.
    double speedup_kmeans = 0.0;
    double speedup_ranked_kmeans = 0.0;
    double speedup_mi_cr = 0.0;
};

/// Times all four initializers on planted datasets of the given shapes.
/// Each (size, method) runs `trials` timed repetitions after one discarded
/// warm-up; the row keeps the median. Candidate and objective-evaluation
/// counts are exact and hardware-independent. Single-threaded throughout.
BenchReport run_bench(const std::vector<BenchSize>& sizes, int cluster_count,
                      int trials, std::uint64_t seed);

/// CSV report: method,n_pos,n_neg,n_pos_bags,d,K,median_ms,candidates,objective_evals
/// with the complexity table and fitted slopes echoed as comment lines.
void write_bench_report(const BenchReport& report, std::ostream& out);

} // namespace miace
