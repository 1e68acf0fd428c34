#ifndef PLEIOVB_BENCHMARK_HPP
#define PLEIOVB_BENCHMARK_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "pleiovb/dataset.hpp"
#include "pleiovb/inference.hpp"
#include "pleiovb/metrics.hpp"
#include "pleiovb/simulator.hpp"
#include "pleiovb/vbem_binary.hpp"
#include "pleiovb/vbem_quant.hpp"

namespace pleiovb {

struct BenchmarkConfig {
    TraitFamily family = TraitFamily::quant;
    std::vector<double> g_grid = {0.0, 0.5, 1.0};
    int replicates = 20;
    int n = 500;
    int n_test = 500;
    int p = 2000;
    double alpha1 = 0.01;
    double h_sq = 0.5;
    double rho = 0.5;
    double tau = 0.2;
    double maf_low = 0.05;
    double maf_high = 0.5;
    double prevalence = 0.1;
    double case_ratio = 0.5;
    std::uint64_t seed = 0;
    int threads = 0; // 0: PLEIOVB_THREADS env var, else hardware concurrency
    FitConfig fit;
};

struct BenchmarkRow {
    double g = 0.0;
    int replicate = 0;
    std::string method; // "joint" or "separate"
    double auc = 0.0;
    double power = 0.0;
    double fdr = 0.0;
    double prediction = 0.0;
};

namespace detail {

inline GwasDataset dataset_from_sim(const Eigen::MatrixXd& genotypes,
                                    const Eigen::VectorXd& phenotype,
                                    const std::vector<std::string>& snp_ids,
                                    const std::vector<std::string>& sample_ids,
                                    TraitFamily family) {
    return center(make_dataset(genotypes, phenotype, std::nullopt, snp_ids, sample_ids,
                               {}, family));
}

struct StudyScores {
    double auc = 0.0;
    double power = 0.0;
    double fdr = 0.0;
    double prediction = 0.0;
};

inline StudyScores score_study(const FitResult& fit, int trait_slot,
                               const GwasDataset& train, const SimulatedStudy& study,
                               const Eigen::VectorXi& truth_gamma, double tau,
                               TraitFamily family) {
    StudyScores s;
    const Eigen::Index p = truth_gamma.size();
    Eigen::VectorXd lfdrs(p);
    Eigen::VectorXd scores(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        lfdrs[j] = fit.lfdr(trait_slot, j);
        scores[j] = 1.0 - lfdrs[j];
    }
    s.auc = auc(scores, truth_gamma);
    s.power = power_at_fdr(lfdrs, truth_gamma, tau);
    s.fdr = empirical_fdr(fdr_select(lfdrs, tau).selected, truth_gamma);

    const Eigen::Index n_test = study.test_genotypes.rows();
    Eigen::VectorXd predicted(n_test);
    if (family == TraitFamily::quant) {
        for (Eigen::Index i = 0; i < n_test; ++i) {
            predicted[i] = predict_quant(study.test_genotypes.row(i), fit, trait_slot,
                                         train.column_means, train.phenotype_mean);
        }
        s.prediction = pearson(predicted, study.test_phenotype);
    } else {
        const Eigen::VectorXd z_new = Eigen::VectorXd::Ones(1);
        Eigen::VectorXi labels(n_test);
        for (Eigen::Index i = 0; i < n_test; ++i) {
            predicted[i] = predict_binary(study.test_genotypes.row(i), z_new, fit,
                                          trait_slot, train.column_means)
                               .prob;
            labels[i] = study.test_phenotype[i] > 0 ? 1 : 0;
        }
        s.prediction = auc(predicted, labels);
    }
    return s;
}

inline int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PLEIOVB_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) return parsed;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

} // namespace detail

// One simulate/fit/score replicate; two rows (joint, separate) per call.
inline std::pair<BenchmarkRow, BenchmarkRow> run_benchmark_replicate(
    const BenchmarkConfig& cfg, double g, int replicate, std::uint64_t stream_index) {
    SimConfig sim_cfg;
    sim_cfg.family = cfg.family;
    sim_cfg.n = cfg.n;
    sim_cfg.n_test = cfg.n_test;
    sim_cfg.p = cfg.p;
    sim_cfg.rho = cfg.rho;
    sim_cfg.maf_low = cfg.maf_low;
    sim_cfg.maf_high = cfg.maf_high;
    sim_cfg.alpha1 = cfg.alpha1;
    sim_cfg.g = g;
    sim_cfg.h_sq = cfg.h_sq;
    sim_cfg.prevalence = cfg.prevalence;
    sim_cfg.case_ratio = cfg.case_ratio;
    sim_cfg.seed = Rng::stream(cfg.seed, stream_index).next_u64();
    const auto sim = simulate_pair(sim_cfg);

    std::array<GwasDataset, 2> train;
    for (int k = 0; k < 2; ++k) {
        train[k] = detail::dataset_from_sim(sim.studies[k].train_genotypes,
                                            sim.studies[k].train_phenotype, sim.snp_ids,
                                            sim.train_sample_ids[k], cfg.family);
    }

    FitResult joint = cfg.family == TraitFamily::quant
                          ? fit_joint_quant(train[0], train[1], cfg.fit)
                          : fit_joint_binary(train[0], train[1], cfg.fit);
    std::array<FitResult, 2> single;
    for (int k = 0; k < 2; ++k) {
        single[k] = cfg.family == TraitFamily::quant
                        ? fit_single_quant(train[k], cfg.fit)
                        : fit_single_binary(train[k], cfg.fit);
    }

    auto average = [&](const std::array<detail::StudyScores, 2>& s) {
        detail::StudyScores avg;
        avg.auc = 0.5 * (s[0].auc + s[1].auc);
        avg.power = 0.5 * (s[0].power + s[1].power);
        avg.fdr = 0.5 * (s[0].fdr + s[1].fdr);
        avg.prediction = 0.5 * (s[0].prediction + s[1].prediction);
        return avg;
    };
    std::array<detail::StudyScores, 2> joint_scores;
    std::array<detail::StudyScores, 2> sep_scores;
    for (int k = 0; k < 2; ++k) {
        joint_scores[k] = detail::score_study(joint, k, train[k], sim.studies[k],
                                              sim.truth.gamma.col(k), cfg.tau, cfg.family);
        sep_scores[k] = detail::score_study(single[k], 0, train[k], sim.studies[k],
                                            sim.truth.gamma.col(k), cfg.tau, cfg.family);
    }
    const auto ja = average(joint_scores);
    const auto sa = average(sep_scores);
    BenchmarkRow jr{g, replicate, "joint", ja.auc, ja.power, ja.fdr, ja.prediction};
    BenchmarkRow sr{g, replicate, "separate", sa.auc, sa.power, sa.fdr, sa.prediction};
    return {jr, sr};
}

// Runs the g-grid x replicates study in a bounded worker pool. Each task
// owns its RNG stream, so the output is independent of scheduling; rows
// come back sorted by (g, replicate, method).
inline std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& cfg) {
    const int n_tasks = static_cast<int>(cfg.g_grid.size()) * cfg.replicates;
    std::vector<BenchmarkRow> rows(static_cast<std::size_t>(n_tasks) * 2);
    std::atomic<int> next_task{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    const int n_threads = std::min(detail::resolve_thread_count(cfg.threads), n_tasks);
    auto worker = [&] {
        while (true) {
            const int task = next_task.fetch_add(1);
            if (task >= n_tasks) break;
            const int g_index = task / cfg.replicates;
            const int replicate = task % cfg.replicates;
            try {
                auto [jr, sr] = run_benchmark_replicate(
                    cfg, cfg.g_grid[static_cast<std::size_t>(g_index)], replicate,
                    static_cast<std::uint64_t>(task));
                rows[static_cast<std::size_t>(task) * 2] = std::move(jr);
                rows[static_cast<std::size_t>(task) * 2 + 1] = std::move(sr);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next_task.store(n_tasks);
                break;
            }
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::sort(rows.begin(), rows.end(), [](const BenchmarkRow& a, const BenchmarkRow& b) {
        return std::tie(a.g, a.replicate, a.method) < std::tie(b.g, b.replicate, b.method);
    });
    return rows;
}

} // namespace pleiovb

#endif
