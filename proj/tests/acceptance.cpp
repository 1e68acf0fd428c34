// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// fail. Statistical criteria run at desk scale (n=500, p=2000, alpha1=0.01,
// h2=0.5, rho=0.5) with fixed seeds.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "pleiovb/benchmark.hpp"
#include "pleiovb/inference.hpp"
#include "pleiovb/metrics.hpp"
#include "pleiovb/rng.hpp"
#include "pleiovb/simulator.hpp"
#include "pleiovb/vbem_binary.hpp"
#include "pleiovb/vbem_quant.hpp"

#include "oracles.hpp"

using namespace pleiovb;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail, double seconds) {
    std::printf("%s criterion %d: %s (%.1fs)\n", pass ? "PASS" : "FAIL", criterion,
                detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++failures;
}

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::pair<GwasDataset, GwasDataset> simulated_pair_datasets(const SimConfig& cfg) {
    auto sim = simulate_pair(cfg);
    return {oracles::wrap_dataset(sim.studies[0].train_genotypes,
                                  sim.studies[0].train_phenotype, cfg.family),
            oracles::wrap_dataset(sim.studies[1].train_genotypes,
                                  sim.studies[1].train_phenotype, cfg.family)};
}

bool trace_monotone(const std::vector<double>& trace) {
    for (std::size_t t = 1; t < trace.size(); ++t) {
        if (trace[t] < trace[t - 1] - 1e-8 * std::abs(trace[t])) return false;
    }
    return true;
}

// --- criterion 1: chi-square mapping of the reported LRT pairs ------------

void criterion_1() {
    Timer timer;
    const double p1 = chisq1_survival(72.5);
    const double p2 = chisq1_survival(4.73);
    const double p3 = chisq1_survival(std::max(-8.87e-2, 0.0));
    const bool ok1 = std::abs(p1 - 1.68e-17) / 1.68e-17 <= 0.05;
    const bool ok2 = std::abs(p2 - 2.96e-2) / 2.96e-2 <= 0.02;
    const bool ok3 = p3 == 1.0;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "chisq1(72.5)=%.3e, chisq1(4.73)=%.3e, negative lambda -> p=%.2f", p1,
                  p2, p3);
    report(1, ok1 && ok2 && ok3, detail, timer.seconds());
}

// --- criterion 2: ELBO monotonicity on random instances -------------------

void criterion_2() {
    Timer timer;
    int bad = 0;
    for (int rep = 0; rep < 50; ++rep) {
        SimConfig cfg;
        cfg.n = 200;
        cfg.n_test = 0;
        cfg.p = 100;
        cfg.alpha1 = 0.05;
        cfg.g = (rep % 5) * 0.25;
        cfg.h_sq = 0.3 + 0.05 * (rep % 5);
        cfg.rho = 0.2 + 0.1 * (rep % 4);
        cfg.seed = 10000 + rep;
        auto [d1, d2] = simulated_pair_datasets(cfg);
        if (!trace_monotone(fit_joint_quant(d1, d2).elbo_trace)) ++bad;
    }
    for (int rep = 0; rep < 50; ++rep) {
        SimConfig cfg;
        cfg.family = TraitFamily::binary;
        cfg.n = 200;
        cfg.n_test = 0;
        cfg.p = 100;
        cfg.alpha1 = 0.05;
        cfg.g = (rep % 5) * 0.25;
        cfg.h_sq = 0.4 + 0.05 * (rep % 3);
        cfg.rho = 0.2 + 0.1 * (rep % 4);
        cfg.seed = 20000 + rep;
        auto [d1, d2] = simulated_pair_datasets(cfg);
        if (!trace_monotone(fit_joint_binary(d1, d2).elbo_trace)) ++bad;
    }
    report(2, bad == 0,
           "100 traces (50 quant + 50 binary), " + std::to_string(bad) +
               " monotonicity violations at 1e-8 relative",
           timer.seconds());
}

// --- criterion 3: enumeration-oracle upper bound ---------------------------

void criterion_3() {
    Timer timer;
    int violations = 0;
    double worst_slack = -1e300;
    for (int rep = 0; rep < 20; ++rep) {
        SimConfig cfg;
        cfg.n = 40 + (rep % 4) * 20; // 40..100
        cfg.n_test = 0;
        cfg.p = 4 + rep % 5; // 4..8
        cfg.alpha1 = 0.25;
        cfg.g = (rep % 3) * 0.5;
        cfg.h_sq = 0.4;
        cfg.rho = 0.3;
        cfg.seed = 30000 + rep;
        auto [d1, d2] = simulated_pair_datasets(cfg);
        const auto fit = fit_joint_quant(d1, d2);
        const double exact = oracles::exact_joint_log_evidence(
            d1.genotypes, d1.phenotype, d2.genotypes, d2.phenotype, fit.params);
        const double slack = fit.final_elbo() - exact;
        worst_slack = std::max(worst_slack, slack);
        if (slack > 1e-9) ++violations;
    }
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "20 instances (p<=8, n<=100), %d bound violations, worst ELBO-logZ=%.3e",
                  violations, worst_slack);
    report(3, violations == 0, detail, timer.seconds());
}

// --- criteria 4-6: desk-scale benchmark comparisons ------------------------

struct MethodSummary {
    double mean_power = 0.0;
    double mean_auc = 0.0;
    double mean_fdr = 0.0;
};

MethodSummary summarize(const std::vector<BenchmarkRow>& rows, const std::string& method,
                        double g, bool any_g = false) {
    MethodSummary s;
    int count = 0;
    for (const auto& r : rows) {
        if (r.method != method) continue;
        if (!any_g && r.g != g) continue;
        s.mean_power += r.power;
        s.mean_auc += r.auc;
        s.mean_fdr += r.fdr;
        ++count;
    }
    s.mean_power /= count;
    s.mean_auc /= count;
    s.mean_fdr /= count;
    return s;
}

void criteria_4_5_6() {
    Timer timer;
    BenchmarkConfig cfg;
    cfg.family = TraitFamily::quant;
    cfg.g_grid = {0.0, 1.0};
    cfg.replicates = 20;
    cfg.seed = 40001;
    const auto quant_rows = run_benchmark(cfg);
    const double quant_seconds = timer.seconds();

    {
        const auto joint = summarize(quant_rows, "joint", 0.0);
        const auto sep = summarize(quant_rows, "separate", 0.0);
        const double diff = std::abs(joint.mean_power - sep.mean_power);
        char detail[200];
        std::snprintf(detail, sizeof(detail),
                      "g=0 mean power: joint=%.3f separate=%.3f |diff|=%.3f (<=0.05)",
                      joint.mean_power, sep.mean_power, diff);
        report(4, diff <= 0.05, detail, quant_seconds);
    }
    {
        int joint_wins = 0;
        int total = 0;
        for (int rep = 0; rep < cfg.replicates; ++rep) {
            double jp = -1.0;
            double sp = -1.0;
            for (const auto& r : quant_rows) {
                if (r.g != 1.0 || r.replicate != rep) continue;
                (r.method == "joint" ? jp : sp) = r.power;
            }
            if (jp >= 0.0 && sp >= 0.0) {
                ++total;
                if (jp >= sp) ++joint_wins;
            }
        }
        const auto joint = summarize(quant_rows, "joint", 1.0);
        const auto sep = summarize(quant_rows, "separate", 1.0);
        const bool ok = joint_wins >= (total * 8 + 9) / 10 && joint.mean_auc >= sep.mean_auc;
        char detail[240];
        std::snprintf(detail, sizeof(detail),
                      "g=1 joint>=separate power in %d/%d replicates; mean AUC joint=%.4f "
                      "separate=%.4f",
                      joint_wins, total, joint.mean_auc, sep.mean_auc);
        report(5, ok, detail, timer.seconds() - quant_seconds);
    }
    {
        Timer binary_timer;
        BenchmarkConfig bcfg = cfg;
        bcfg.family = TraitFamily::binary;
        bcfg.replicates = 10;
        bcfg.seed = 40002;
        const auto binary_rows = run_benchmark(bcfg);
        const auto qj = summarize(quant_rows, "joint", 0.0, true);
        const auto qs = summarize(quant_rows, "separate", 0.0, true);
        const auto bj = summarize(binary_rows, "joint", 0.0, true);
        const auto bs = summarize(binary_rows, "separate", 0.0, true);
        const bool ok = qj.mean_fdr <= 0.25 && qs.mean_fdr <= 0.25 &&
                        bj.mean_fdr <= 0.25 && bs.mean_fdr <= 0.25;
        char detail[240];
        std::snprintf(detail, sizeof(detail),
                      "mean FDR at tau=0.2: quant joint=%.3f sep=%.3f, binary joint=%.3f "
                      "sep=%.3f (<=0.25)",
                      qj.mean_fdr, qs.mean_fdr, bj.mean_fdr, bs.mean_fdr);
        report(6, ok, detail, binary_timer.seconds());
    }
}

// --- criterion 7: LRT level under the g=0 null ------------------------------

void criterion_7() {
    Timer timer;
    int rejections = 0;
    const int replicates = 100;
    for (int rep = 0; rep < replicates; ++rep) {
        SimConfig cfg;
        cfg.n = 500;
        cfg.n_test = 0;
        cfg.p = 2000;
        cfg.alpha1 = 0.01;
        cfg.g = 0.0;
        cfg.h_sq = 0.5;
        cfg.rho = 0.5;
        cfg.seed = 50000 + rep;
        auto [d1, d2] = simulated_pair_datasets(cfg);
        const auto test = pleiotropy_lrt(d1, d2, FitConfig{}, TraitFamily::quant);
        if (test.p_value < 0.05) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / replicates;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "g=0 rejection rate at nominal 0.05: %d/%d = %.3f (<=0.07)", rejections,
                  replicates, rate);
    report(7, rate <= 0.07, detail, timer.seconds());
}

// --- criterion 8: property suite -------------------------------------------

bool property_group_rows_and_residual_cache(std::string& detail) {
    int row_cases = 0;
    int cache_cases = 0;
    bool ok = true;
    for (int rep = 0; rep < 10; ++rep) {
        SimConfig cfg;
        cfg.n = 150;
        cfg.n_test = 0;
        cfg.p = 120;
        cfg.alpha1 = 0.05;
        cfg.g = (rep % 3) * 0.5;
        cfg.h_sq = 0.5;
        cfg.rho = 0.3;
        cfg.seed = 60000 + rep;
        cfg.family = rep % 2 == 0 ? TraitFamily::quant : TraitFamily::binary;
        auto [d1, d2] = simulated_pair_datasets(cfg);
        const auto fit = cfg.family == TraitFamily::quant ? fit_joint_quant(d1, d2)
                                                          : fit_joint_binary(d1, d2);
        for (Eigen::Index j = 0; j < cfg.p; ++j) {
            ++row_cases;
            const double sum = fit.state.group_post.row(j).sum();
            if (std::abs(sum - 1.0) > 1e-10 || fit.state.group_post.row(j).minCoeff() < 0.0) {
                ok = false;
            }
        }
        for (int k = 0; k < 2; ++k) {
            const GwasDataset& d = k == 0 ? d1 : d2;
            Eigen::VectorXd m(cfg.p);
            for (Eigen::Index j = 0; j < cfg.p; ++j) m[j] = fit.state.mean_effect(k, j);
            const Eigen::VectorXd recomputed = d.genotypes * m;
            for (Eigen::Index i = 0; i < d.n_samples(); ++i) {
                ++cache_cases;
                if (std::abs(fit.state.fitted_genetic[k][i] - recomputed[i]) > 1e-8) {
                    ok = false;
                }
            }
        }
    }
    detail += "rows=" + std::to_string(row_cases) + " cache=" + std::to_string(cache_cases);
    return ok && row_cases >= 1000 && cache_cases >= 1000;
}

bool property_permutation_equivariance(std::string& detail) {
    int cases = 0;
    bool ok = true;
    for (int rep = 0; rep < 6; ++rep) {
        SimConfig cfg;
        cfg.n = 120;
        cfg.n_test = 0;
        cfg.p = 90;
        cfg.alpha1 = 0.06;
        cfg.g = 0.5;
        cfg.h_sq = 0.5;
        cfg.rho = 0.3;
        cfg.seed = 61000 + rep;
        auto [d1, d2] = simulated_pair_datasets(cfg);
        const auto base = fit_joint_quant(d1, d2);

        Rng rng(62000 + rep);
        std::vector<int> perm(cfg.p);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = cfg.p - 1; i > 0; --i) {
            std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i + 1))]);
        }
        auto permute = [&](const GwasDataset& d) {
            GwasDataset out = d;
            for (int t = 0; t < cfg.p; ++t) {
                out.genotypes.col(t) = d.genotypes.col(perm[t]);
                out.snp_ids[t] = d.snp_ids[perm[t]];
                out.column_means[t] = d.column_means[perm[t]];
            }
            return out;
        };
        FitConfig fit_cfg;
        std::vector<int> inv(cfg.p);
        for (int t = 0; t < cfg.p; ++t) inv[perm[t]] = t;
        fit_cfg.sweep_order = inv;
        const auto permuted = fit_joint_quant(permute(d1), permute(d2), fit_cfg);

        if (std::abs(permuted.final_elbo() - base.final_elbo()) >
            1e-8 * std::abs(base.final_elbo())) {
            ok = false;
        }
        for (int t = 0; t < cfg.p; ++t) {
            for (int k = 0; k < 2; ++k) {
                ++cases;
                if (std::abs(permuted.state.inclusion(k, t) -
                             base.state.inclusion(k, perm[t])) > 1e-8) {
                    ok = false;
                }
            }
        }
    }
    detail += " perm=" + std::to_string(cases);
    return ok && cases >= 1000;
}

bool property_bohning_grid(std::string& detail) {
    int cases = 0;
    bool ok = true;
    for (double psi = -50.0; psi <= 50.0; psi += 2.5) {
        const auto [b, c] = bohning_coefficients(psi);
        for (double eta = -50.0; eta <= 50.0; eta += 2.5) {
            ++cases;
            const double quadratic =
                -0.5 * kBohningCurvature * eta * eta + (1.0 + b) * eta - c;
            if (quadratic > -log1pexp(-eta) + 1e-12) ok = false;
        }
        const double at_anchor = -0.5 * kBohningCurvature * psi * psi + (1.0 + b) * psi - c;
        if (std::abs(at_anchor + log1pexp(-psi)) > 1e-12) ok = false;
    }
    detail += " bohning=" + std::to_string(cases);
    return ok && cases >= 1000;
}

bool property_fdr_select_monotone(std::string& detail) {
    Rng rng(63000);
    int cases = 0;
    bool ok = true;
    while (cases < 1000) {
        const int p = 5 + static_cast<int>(rng.below(60));
        Eigen::VectorXd lfdrs(p);
        for (int j = 0; j < p; ++j) lfdrs[j] = std::round(rng.uniform() * 12.0) / 12.0;
        const double tau = rng.uniform(0.02, 0.5);
        const double tau2 = std::min(tau + rng.uniform(0.0, 0.45), 0.99);
        const auto sel = fdr_select(lfdrs, tau);
        const auto sel2 = fdr_select(lfdrs, tau2);
        if (!std::includes(sel2.selected.begin(), sel2.selected.end(), sel.selected.begin(),
                           sel.selected.end())) {
            ok = false;
        }
        if (!sel.selected.empty() && sel.estimated_fdr > tau + 1e-12) ok = false;
        ++cases;
    }
    detail += " fdr=" + std::to_string(cases);
    return ok;
}

bool property_auc_invariance(std::string& detail) {
    Rng rng(64000);
    int cases = 0;
    bool ok = true;
    while (cases < 1000) {
        const int n = 10 + static_cast<int>(rng.below(30));
        Eigen::VectorXd scores(n);
        Eigen::VectorXi labels(n);
        bool pos = false;
        bool neg = false;
        for (int i = 0; i < n; ++i) {
            scores[i] = rng.uniform(-2.0, 2.0);
            labels[i] = rng.uniform() < 0.5 ? 1 : 0;
            (labels[i] ? pos : neg) = true;
        }
        if (!pos || !neg) continue;
        ++cases;
        const double base = auc(scores, labels);
        Eigen::VectorXd transformed(n);
        for (int i = 0; i < n; ++i) transformed[i] = std::atan(3.0 * scores[i]) + 5.0;
        if (std::abs(auc(transformed, labels) - base) > 1e-12) ok = false;
        if (std::abs(auc(-scores, labels) - (1.0 - base)) > 1e-12) ok = false;
    }
    detail += " auc=" + std::to_string(cases);
    return ok;
}

void criterion_8() {
    Timer timer;
    std::string detail = "cases per property: ";
    bool ok = true;
    const struct {
        const char* name;
        bool (*check)(std::string&);
    } properties[] = {
        {"rows/cache", &property_group_rows_and_residual_cache},
        {"permutation", &property_permutation_equivariance},
        {"bohning", &property_bohning_grid},
        {"fdr-monotone", &property_fdr_select_monotone},
        {"auc-invariance", &property_auc_invariance},
    };
    for (const auto& prop : properties) {
        if (!prop.check(detail)) {
            detail += std::string(" [") + prop.name + " FAILED]";
            ok = false;
        }
    }
    report(8, ok, detail, timer.seconds());
}

} // namespace

int main() {
    std::printf("acceptance suite (desk scale: n=500, p=2000, alpha1=0.01, h2=0.5, rho=0.5)\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criteria_4_5_6();
    criterion_7();
    criterion_8();
    if (failures == 0) {
        std::printf("all criteria passed\n");
    } else {
        std::printf("%d criteria FAILED\n", failures);
    }
    return failures == 0 ? 0 : 1;
}
