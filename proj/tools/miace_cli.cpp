// Command-line front end: gen | train | detect | alarms | score | cv | bench.
// Every stage reads and writes flat files so runs can be resumed, diffed,
// and reproduced exactly from a seed.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "miace/alarms.hpp"
#include "miace/bench.hpp"
#include "miace/evaluation.hpp"
#include "miace/init.hpp"
#include "miace/synth.hpp"
#include "miace/train.hpp"

namespace fs = std::filesystem;
using namespace miace;

namespace {

struct TrainFlags {
    std::string init_name = "original";
    int cluster_count = 5;
    std::vector<double> rank_weights{1.0, 1.0, 1.0};
    double epsilon = 1e-6;
    std::uint64_t seed = 0;
    int max_iterations = 100;
    double tol = 1e-6;

    void attach(CLI::App* cmd) {
        cmd->add_option("--init", init_name, "Initializer")
            ->check(CLI::IsMember({"original", "kmeans", "ranked-kmeans", "mi-cr"}))
            ->capture_default_str();
        cmd->add_option("--k", cluster_count, "Cluster count for the clustering initializers")
            ->capture_default_str();
        cmd->add_option("--rank-weights", rank_weights,
                        "MIC rank weights: positive-bag, positive, negative. Raise the "
                        "first two when positive bags are mostly target; raise the last "
                        "when they are mostly background.")
            ->expected(3);
        cmd->add_option("--epsilon", epsilon, "Background covariance ridge scale")
            ->capture_default_str();
        cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
        cmd->add_option("--max-iters", max_iterations, "Optimization iteration cap")
            ->capture_default_str();
        cmd->add_option("--tol", tol, "Objective-change convergence tolerance")
            ->capture_default_str();
    }

    TrainConfig to_config() const {
        TrainConfig config;
        config.initializer = init_method_from_string(init_name);
        config.cluster_count = cluster_count;
        config.rank_weights = RankWeights{rank_weights.at(0), rank_weights.at(1),
                                          rank_weights.at(2)};
        config.epsilon = epsilon;
        config.seed = seed;
        config.max_iterations = max_iterations;
        config.convergence_tol = tol;
        return config;
    }
};

struct AlarmFlags {
    AlarmParams params;

    void attach(CLI::App* cmd) {
        cmd->add_option("--bandwidth", params.bandwidth, "Mean-shift bandwidth (m)")
            ->capture_default_str();
        cmd->add_option("--merge-radius", params.merge_radius, "Mode merge radius (m)")
            ->capture_default_str();
        cmd->add_option("--threshold", params.conf_threshold,
                        "Confidence floor for mean-shift weights")
            ->capture_default_str();
        cmd->add_option("--halo", params.halo, "Alarm membership radius (m)")
            ->capture_default_str();
    }
};

void write_cv_summary(const CrossValidationResult& cv, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "fold,held_out_lane,iterations,final_objective,init_ms,opt_ms,"
           "alarms_init,alarms_opt\n";
    for (std::size_t i = 0; i < cv.folds.size(); ++i) {
        const FoldResult& fold = cv.folds[i];
        out << i << ',' << fold.held_out_lane << ','
            << fold.train_result.iterations_run << ','
            << format_double(fold.train_result.objective_trace.back()) << ','
            << format_double(fold.train_result.init_wall_time.count() * 1e3) << ','
            << format_double(fold.train_result.opt_wall_time.count() * 1e3) << ','
            << fold.alarms_init << ',' << fold.alarms_optimized << '\n';
    }
    for (const std::string& lane : cv.skipped_lanes) {
        out << "# skipped lane " << lane << " (training split lost a label)\n";
    }
    out << "# auc_init=" << format_double(cv.roc_init.auc) << '\n';
    out << "# auc_opt=" << format_double(cv.roc_optimized.auc) << '\n';
}

std::vector<BenchSize> parse_sizes(const std::string& spec) {
    std::vector<BenchSize> sizes;
    std::size_t start = 0;
    while (start <= spec.size()) {
        std::size_t end = spec.find(',', start);
        if (end == std::string::npos) end = spec.size();
        const std::string token = spec.substr(start, end - start);
        if (!token.empty()) {
            BenchSize size;
            if (std::sscanf(token.c_str(), "%zu:%zu:%zu:%d", &size.n_pos, &size.n_neg,
                            &size.n_pos_bags, &size.dimensionality) != 4) {
                throw ValidationError("bad --sizes entry '" + token +
                                      "' (want npos:nneg:nbags:d)");
            }
            sizes.push_back(size);
        }
        start = end + 1;
    }
    if (sizes.empty()) throw ValidationError("--sizes is empty");
    return sizes;
}

int run(int argc, char** argv) {
    CLI::App app{"MI-ACE target detection pipeline"};
    app.require_subcommand(1);
    // Any flag may come from a config file; explicit flags win. Subcommand
    // options live in sections named after the subcommand.
    app.set_config("--config", "",
                   "Read flags from a TOML/INI config file (flags override)");

    // --- gen ---
    auto* gen = app.add_subcommand("gen", "Generate a synthetic site");
    std::string gen_out_dir = ".";
    SynthConfig synth;
    gen->add_option("--out-dir", gen_out_dir, "Output directory")->capture_default_str();
    gen->add_option("--d", synth.dimensionality, "Feature dimensionality")
        ->capture_default_str();
    gen->add_option("--lanes", synth.lanes, "Lane count")->capture_default_str();
    gen->add_option("--grids", synth.grids_per_lane, "Grids per lane")
        ->capture_default_str();
    gen->add_option("--snr", synth.snr, "Whitened per-dimension signal-to-noise")
        ->capture_default_str();
    gen->add_option("--depth-min", synth.depth_scale_min, "Depth scale lower bound")
        ->capture_default_str();
    gen->add_option("--depth-max", synth.depth_scale_max, "Depth scale upper bound")
        ->capture_default_str();
    gen->add_option("--samples", synth.samples_per_sweep, "Samples per sweep")
        ->capture_default_str();
    gen->add_option("--radius", synth.response_radius, "Target response radius (m)")
        ->capture_default_str();
    gen->add_option("--mix-high", synth.mix_high, "High-metal target share")
        ->capture_default_str();
    gen->add_option("--mix-low", synth.mix_low, "Low-metal target share")
        ->capture_default_str();
    gen->add_option("--mix-none", synth.mix_none, "No-metal target share")
        ->capture_default_str();
    gen->add_option("--seed", synth.seed, "Site seed")->capture_default_str();
    gen->add_option("--signature-seed", synth.signature_seed, "Planted signature seed")
        ->capture_default_str();

    // --- train ---
    auto* train_cmd = app.add_subcommand("train", "Learn a target signature");
    std::string train_data, train_out = "model";
    bool no_optimize = false;
    TrainFlags train_flags;
    train_cmd->add_option("--data", train_data, "Dataset CSV")->required();
    train_cmd->add_option("--out", train_out, "Output prefix (.sig/.stats)")
        ->capture_default_str();
    train_flags.attach(train_cmd);
    train_cmd->add_flag("--no-optimize", no_optimize,
                        "Emit the initialized signature without optimization");

    // --- detect ---
    auto* detect = app.add_subcommand("detect", "Score sweeps into a confidence map");
    std::string detect_model, detect_sweeps, detect_out = "confidence.csv";
    detect->add_option("--model", detect_model, "Model prefix from train")->required();
    detect->add_option("--sweeps", detect_sweeps, "Sweep CSV")->required();
    detect->add_option("--out", detect_out, "Confidence map CSV")->capture_default_str();

    // --- alarms ---
    auto* alarms_cmd = app.add_subcommand("alarms", "Cluster confidences into alarms");
    std::string alarms_conf, alarms_out = "alarms.csv";
    AlarmFlags alarm_flags;
    alarms_cmd->add_option("--conf", alarms_conf, "Confidence map CSV")->required();
    alarms_cmd->add_option("--out", alarms_out, "Alarm CSV")->capture_default_str();
    alarm_flags.attach(alarms_cmd);

    // --- score ---
    auto* score = app.add_subcommand("score", "Score alarms against ground truth");
    std::string score_alarms, score_truth, score_out = "roc.csv", score_subset = "all";
    score->add_option("--alarms", score_alarms, "Alarm CSV")->required();
    score->add_option("--truth", score_truth, "Ground truth CSV")->required();
    score->add_option("--out", score_out, "ROC CSV")->capture_default_str();
    score->add_option("--subset", score_subset, "Target subset")
        ->check(CLI::IsMember({"high", "low", "all"}))
        ->capture_default_str();

    // --- cv ---
    auto* cv_cmd = app.add_subcommand("cv", "Lane-based cross validation");
    std::string cv_data, cv_sweeps, cv_truth, cv_out_dir = ".", cv_subset = "all";
    TrainFlags cv_train_flags;
    AlarmFlags cv_alarm_flags;
    cv_cmd->add_option("--data", cv_data, "Dataset CSV")->required();
    cv_cmd->add_option("--sweeps", cv_sweeps, "Sweep CSV")->required();
    cv_cmd->add_option("--truth", cv_truth, "Ground truth CSV")->required();
    cv_cmd->add_option("--out-dir", cv_out_dir, "Output directory")
        ->capture_default_str();
    cv_cmd->add_option("--subset", cv_subset, "Target subset")
        ->check(CLI::IsMember({"high", "low", "all"}))
        ->capture_default_str();
    cv_train_flags.attach(cv_cmd);
    cv_alarm_flags.attach(cv_cmd);

    // --- bench ---
    auto* bench_cmd = app.add_subcommand("bench", "Time the four initializers");
    std::string bench_out = "bench.csv";
    std::string bench_sizes = "1000:500:10:8,2000:500:20:8,4000:500:40:8";
    int bench_k = 5, bench_trials = 5;
    std::uint64_t bench_seed = 0;
    bench_cmd->add_option("--out", bench_out, "Report CSV")->capture_default_str();
    bench_cmd->add_option("--sizes", bench_sizes,
                          "Comma-separated npos:nneg:nbags:d entries")
        ->capture_default_str();
    bench_cmd->add_option("--k", bench_k, "Cluster count")->capture_default_str();
    bench_cmd->add_option("--trials", bench_trials, "Timed trials per cell (>=3)")
        ->capture_default_str();
    bench_cmd->add_option("--seed", bench_seed, "Dataset seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (gen->parsed()) {
        const SynthSite site = generate_site(synth);
        const fs::path dir(gen_out_dir);
        fs::create_directories(dir);
        save_dataset(site.dataset, dir / "dataset.csv");
        save_sweeps(site.sweeps, site.dataset.dimensionality(), dir / "sweeps.csv");
        save_ground_truth(site.truth, dir / "truth.csv");
        save_planted_signature(site.planted_signature, dir / "planted.txt");
        std::cout << "wrote " << (dir / "dataset.csv").string() << " ("
                  << site.dataset.bags().size() << " bags), sweeps.csv, truth.csv ("
                  << site.truth.targets.size() << " targets), planted.txt\n";
    } else if (train_cmd->parsed()) {
        const MilDataset dataset = load_dataset(train_data);
        const TrainConfig config = train_flags.to_config();
        SignatureRecord record;
        BackgroundStats stats;
        if (no_optimize) {
            // Initialization only: score the candidates, skip the update loop.
            config.validate();
            stats = fit_background(dataset, config.epsilon);
            const InitResult init = initialize(stats, dataset, config);
            record.signature = init.signature;
            record.initializer = to_string(init.method);
            record.objective_trace = {
                objective(stats, init.signature.whitened, dataset)};
            std::cout << "initializer " << record.initializer << ": "
                      << init.candidate_count << " candidates, "
                      << init.objective_evaluations << " objective evals\n";
        } else {
            const TrainResult result = train(dataset, config);
            stats = result.stats;
            record.signature = result.optimized_signature;
            record.initializer = to_string(result.init.method);
            record.objective_trace = result.objective_trace;
            std::cout << "initializer " << record.initializer << ": "
                      << result.init.candidate_count << " candidates, "
                      << result.init.objective_evaluations << " objective evals, "
                      << format_double(result.init_wall_time.count() * 1e3) << " ms\n"
                      << "optimization: " << result.iterations_run << " iterations, "
                      << format_double(result.opt_wall_time.count() * 1e3)
                      << " ms, objective "
                      << format_double(result.objective_trace.back()) << '\n';
        }
        save_signature(record, train_out + ".sig");
        save_background(stats, train_out + ".stats");
        std::cout << "wrote " << train_out << ".sig and " << train_out << ".stats"
                  << (no_optimize ? " (init-only signature)" : "") << '\n';
    } else if (detect->parsed()) {
        const BackgroundStats stats = load_background(detect_model + ".stats");
        const SignatureRecord record = load_signature(detect_model + ".sig");
        const auto sweeps = load_sweeps(detect_sweeps);
        ConfidenceMap all;
        for (const Sweep& sweep : sweeps) {
            const ConfidenceMap map = score_sweep(stats, record.signature, sweep);
            all.entries.insert(all.entries.end(), map.entries.begin(),
                               map.entries.end());
        }
        save_confidence_map(all, detect_out);
        std::cout << "wrote " << detect_out << " (" << all.entries.size()
                  << " samples over " << sweeps.size() << " sweeps)\n";
    } else if (alarms_cmd->parsed()) {
        const ConfidenceMap map = load_confidence_map(alarms_conf);
        const auto alarms = generate_alarms(map, alarm_flags.params);
        save_alarms(alarms, alarms_out);
        std::cout << "wrote " << alarms_out << " (" << alarms.size() << " alarms)\n";
    } else if (score->parsed()) {
        const auto alarms = load_alarms(score_alarms);
        const GroundTruth truth = load_ground_truth(score_truth);
        const RocCurve curve =
            roc(label_alarms(alarms, truth), truth, subset_from_string(score_subset));
        save_roc(curve, score_out);
        std::cout << "wrote " << score_out << " (auc=" << format_double(curve.auc)
                  << ")\n";
    } else if (cv_cmd->parsed()) {
        const MilDataset dataset = load_dataset(cv_data);
        const auto sweeps = load_sweeps(cv_sweeps);
        const GroundTruth truth = load_ground_truth(cv_truth);
        const CrossValidationResult cv =
            cross_validate(dataset, sweeps, truth, cv_train_flags.to_config(),
                           cv_alarm_flags.params, subset_from_string(cv_subset));
        const fs::path dir(cv_out_dir);
        fs::create_directories(dir);
        std::vector<Alarm> alarms_init, alarms_opt;
        for (const LabeledAlarm& la : cv.pooled_init) alarms_init.push_back(la.alarm);
        for (const LabeledAlarm& la : cv.pooled_optimized) {
            alarms_opt.push_back(la.alarm);
        }
        save_alarms(alarms_init, dir / "alarms_init.csv");
        save_alarms(alarms_opt, dir / "alarms_opt.csv");
        save_roc(cv.roc_init, dir / "roc_init.csv");
        save_roc(cv.roc_optimized, dir / "roc_opt.csv");
        write_cv_summary(cv, dir / "cv_summary.csv");
        for (const std::string& lane : cv.skipped_lanes) {
            std::cerr << "warning: skipped lane " << lane
                      << " (training split lost a label)\n";
        }
        std::cout << cv.folds.size() << " folds; auc_init="
                  << format_double(cv.roc_init.auc)
                  << " auc_opt=" << format_double(cv.roc_optimized.auc) << '\n';
    } else if (bench_cmd->parsed()) {
        const BenchReport report =
            run_bench(parse_sizes(bench_sizes), bench_k, bench_trials, bench_seed);
        std::ofstream out(bench_out);
        if (!out) throw IoError("cannot write " + bench_out);
        write_bench_report(report, out);
        write_bench_report(report, std::cout);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 1;
    }
}
