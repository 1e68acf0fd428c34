#ifndef PLEIOVB_SIMULATOR_HPP
#define PLEIOVB_SIMULATOR_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pleiovb/errors.hpp"
#include "pleiovb/math.hpp"
#include "pleiovb/rng.hpp"
#include "pleiovb/types.hpp"

namespace pleiovb {

struct SimConfig {
    TraitFamily family = TraitFamily::quant;
    int n = 3000;
    int n_test = 500;
    int p = 20000;
    double rho = 0.5;
    double maf_low = 0.05;
    double maf_high = 0.5;
    double alpha1 = 0.005; // binary runs typically use 0.0025
    double g = 0.0;
    double h_sq = 0.5;
    double prevalence = 0.1; // binary only
    double case_ratio = 0.5; // binary only
    std::uint64_t seed = 0;

    void validate() const {
        if (n < 1 || n_test < 0 || p < 1) throw UsageError("SimConfig: n, p must be positive");
        if (!(alpha1 > 0.0 && alpha1 < 1.0)) throw UsageError("SimConfig: alpha1 must be in (0,1)");
        if (!(g >= 0.0 && g <= 1.0)) throw UsageError("SimConfig: g must be in [0,1]");
        if (!(h_sq > 0.0 && h_sq < 1.0)) throw UsageError("SimConfig: h_sq must be in (0,1)");
        if (!(rho >= 0.0 && rho < 1.0)) throw UsageError("SimConfig: rho must be in [0,1)");
        if (!(maf_low > 0.0 && maf_low <= maf_high && maf_high <= 0.5)) {
            throw UsageError("SimConfig: MAF range must satisfy 0 < low <= high <= 0.5");
        }
        if (family == TraitFamily::binary) {
            if (!(prevalence > 0.0 && prevalence < 1.0)) {
                throw UsageError("SimConfig: prevalence must be in (0,1)");
            }
            if (!(case_ratio > 0.0 && case_ratio < 1.0)) {
                throw UsageError("SimConfig: case_ratio must be in (0,1)");
            }
        }
    }
};

struct SimTruth {
    Eigen::MatrixXi gamma; // p x 2
    Eigen::MatrixXd beta;  // p x 2
    std::array<double, 2> sigma_e_sq = {0.0, 0.0};
    std::array<double, 2> liability_threshold = {0.0, 0.0};
};

namespace sim_detail {

// Ties round to even, making support counts a deterministic function of
// the configuration.
inline Eigen::Index round_half_even(double x) {
    return static_cast<Eigen::Index>(std::nearbyint(x));
}

// k distinct values from `candidates`, chosen uniformly via a partial
// Fisher-Yates pass. Consumes the prefix of the vector in place.
inline std::vector<Eigen::Index> sample_without_replacement(std::vector<Eigen::Index>& candidates,
                                                            Eigen::Index k, Rng& rng) {
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto swap_with =
            i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(candidates.size() - i)));
        std::swap(candidates[static_cast<std::size_t>(i)], candidates[static_cast<std::size_t>(swap_with)]);
    }
    return {candidates.begin(), candidates.begin() + k};
}

} // namespace sim_detail

// Latent AR(1) normals: w_1 = z_1, w_j = rho w_{j-1} + sqrt(1-rho^2) z_j,
// row per sample. Exposed for the correlation-structure checks.
inline Eigen::MatrixXd gen_ar1_latent(int n, int p, double rho, Rng& rng) {
    Eigen::MatrixXd w(n, p);
    const double scale = std::sqrt(1.0 - rho * rho);
    for (int i = 0; i < n; ++i) {
        double prev = rng.normal();
        w(i, 0) = prev;
        for (int j = 1; j < p; ++j) {
            prev = rho * prev + scale * rng.normal();
            w(i, j) = prev;
        }
    }
    return w;
}

inline Eigen::VectorXd draw_mafs(int p, double maf_low, double maf_high, Rng& rng) {
    Eigen::VectorXd maf(p);
    for (int j = 0; j < p; ++j) maf[j] = rng.uniform(maf_low, maf_high);
    return maf;
}

// Discretizes latent AR(1) normals to {0,1,2} at the Hardy-Weinberg
// quantiles: P(2) = f^2, P(1) = 2f(1-f), P(0) = (1-f)^2.
inline Eigen::MatrixXd gen_genotypes(int n, int p, double rho, const Eigen::VectorXd& maf,
                                     Rng& rng) {
    Eigen::MatrixXd geno = gen_ar1_latent(n, p, rho, rng);
    Eigen::VectorXd hi(p);
    Eigen::VectorXd lo(p);
    for (int j = 0; j < p; ++j) {
        const double f = maf[j];
        hi[j] = normal_quantile(1.0 - f * f);
        lo[j] = normal_quantile((1.0 - f) * (1.0 - f));
    }
    for (int j = 0; j < p; ++j) {
        for (int i = 0; i < n; ++i) {
            const double w = geno(i, j);
            geno(i, j) = w > hi[j] ? 2.0 : (w > lo[j] ? 1.0 : 0.0);
        }
    }
    return geno;
}

inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> gen_genotypes(int n, int p, double rho,
                                                                 double maf_low,
                                                                 double maf_high, Rng& rng) {
    Eigen::VectorXd maf = draw_mafs(p, maf_low, maf_high, rng);
    Eigen::MatrixXd geno = gen_genotypes(n, p, rho, maf, rng);
    return {std::move(geno), std::move(maf)};
}

// Association statuses for the pair of traits. Trait 1 gets round(p alpha1)
// SNPs; round(p alpha1 (alpha1 + g (1-alpha1))) of them are shared with
// trait 2, whose remaining support comes from the complement.
inline std::pair<Eigen::VectorXi, Eigen::VectorXi> gen_association(int p, double alpha1,
                                                                   double g, Rng& rng) {
    const Eigen::Index support = sim_detail::round_half_even(p * alpha1);
    const Eigen::Index shared =
        sim_detail::round_half_even(p * alpha1 * (alpha1 + g * (1.0 - alpha1)));
    if (shared > support || support - shared > p - support) {
        throw UsageError("gen_association: infeasible support counts for p=" + std::to_string(p) +
                         ", alpha1=" + std::to_string(alpha1) + ", g=" + std::to_string(g));
    }
    std::vector<Eigen::Index> all(static_cast<std::size_t>(p));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    const auto support1 = sim_detail::sample_without_replacement(all, support, rng);

    std::vector<Eigen::Index> support1_copy = support1;
    const auto shared_set = sim_detail::sample_without_replacement(support1_copy, shared, rng);

    std::vector<Eigen::Index> complement;
    complement.reserve(static_cast<std::size_t>(p - support));
    {
        std::vector<bool> in1(static_cast<std::size_t>(p), false);
        for (auto j : support1) in1[static_cast<std::size_t>(j)] = true;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (!in1[static_cast<std::size_t>(j)]) complement.push_back(j);
        }
    }
    const auto extra2 = sim_detail::sample_without_replacement(complement, support - shared, rng);

    Eigen::VectorXi gamma1 = Eigen::VectorXi::Zero(p);
    Eigen::VectorXi gamma2 = Eigen::VectorXi::Zero(p);
    for (auto j : support1) gamma1[j] = 1;
    for (auto j : shared_set) gamma2[j] = 1;
    for (auto j : extra2) gamma2[j] = 1;
    return {std::move(gamma1), std::move(gamma2)};
}

// Genetic values X (gamma . beta). Inputs are a raw genotype matrix and the
// full-length gamma/beta columns for one trait.
inline Eigen::VectorXd genetic_value(const Eigen::MatrixXd& genotypes,
                                     const Eigen::VectorXi& gamma, const Eigen::VectorXd& beta) {
    Eigen::VectorXd effect(beta.size());
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        effect[j] = gamma[j] != 0 ? beta[j] : 0.0;
    }
    return genotypes * effect;
}

inline double empirical_variance(const Eigen::VectorXd& v) {
    const double mean = v.mean();
    return (v.array() - mean).square().mean();
}

// y = G + N(0, sigma_e^2) with sigma_e^2 = VarEmp(G) (1-h^2)/h^2, so the
// realized heritability matches h^2 exactly.
inline std::pair<Eigen::VectorXd, double> gen_quant_phenotype(const Eigen::MatrixXd& genotypes,
                                                              const Eigen::VectorXi& gamma,
                                                              const Eigen::VectorXd& beta,
                                                              double h_sq, Rng& rng) {
    const Eigen::VectorXd g_value = genetic_value(genotypes, gamma, beta);
    const double var_g = empirical_variance(g_value);
    if (!(var_g > 0.0)) {
        throw NumericalError("gen_quant_phenotype: genetic value has zero variance (empty support?)");
    }
    const double sigma_e_sq = var_g * (1.0 - h_sq) / h_sq;
    Eigen::VectorXd y(g_value.size());
    const double sd = std::sqrt(sigma_e_sq);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = g_value[i] + sd * rng.normal();
    return {std::move(y), sigma_e_sq};
}

// Noise with a fixed sigma_e^2, for test sets drawn under the training
// model.
inline Eigen::VectorXd gen_quant_phenotype_with_noise(const Eigen::MatrixXd& genotypes,
                                                      const Eigen::VectorXi& gamma,
                                                      const Eigen::VectorXd& beta,
                                                      double sigma_e_sq, Rng& rng) {
    Eigen::VectorXd y = genetic_value(genotypes, gamma, beta);
    const double sd = std::sqrt(sigma_e_sq);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += sd * rng.normal();
    return y;
}

struct BinaryPhenotypeDraw {
    Eigen::VectorXd y; // +/-1 for the selected rows
    std::vector<Eigen::Index> selected_rows;
    double sigma_e_sq = 0.0;
    double threshold = 0.0;
};

// Liability-threshold sampling: liabilities L = G + N(0, sigma_e^2), cases
// are L above the empirical (1-prevalence) quantile of the pool, and the
// requested case/control mix is drawn uniformly from the pool.
inline BinaryPhenotypeDraw gen_binary_phenotype(const Eigen::MatrixXd& pool_genotypes,
                                                const Eigen::VectorXi& gamma,
                                                const Eigen::VectorXd& beta, double h_sq,
                                                double prevalence, double case_ratio, int n,
                                                Rng& rng) {
    const Eigen::Index pool = pool_genotypes.rows();
    const Eigen::VectorXd g_value = genetic_value(pool_genotypes, gamma, beta);
    const double var_g = empirical_variance(g_value);
    if (!(var_g > 0.0)) {
        throw NumericalError("gen_binary_phenotype: genetic value has zero variance (empty support?)");
    }
    BinaryPhenotypeDraw draw;
    draw.sigma_e_sq = var_g * (1.0 - h_sq) / h_sq;
    const double sd = std::sqrt(draw.sigma_e_sq);
    Eigen::VectorXd liability(pool);
    for (Eigen::Index i = 0; i < pool; ++i) liability[i] = g_value[i] + sd * rng.normal();

    std::vector<double> sorted(liability.data(), liability.data() + pool);
    std::sort(sorted.begin(), sorted.end());
    const auto cut = static_cast<std::size_t>(
        std::min<double>(std::ceil((1.0 - prevalence) * static_cast<double>(pool)),
                         static_cast<double>(pool)));
    draw.threshold = sorted[cut - 1];

    std::vector<Eigen::Index> cases;
    std::vector<Eigen::Index> controls;
    for (Eigen::Index i = 0; i < pool; ++i) {
        (liability[i] > draw.threshold ? cases : controls).push_back(i);
    }
    const auto n_cases = sim_detail::round_half_even(n * case_ratio);
    const auto n_controls = static_cast<Eigen::Index>(n) - n_cases;
    if (static_cast<Eigen::Index>(cases.size()) < n_cases ||
        static_cast<Eigen::Index>(controls.size()) < n_controls) {
        throw NumericalError("gen_binary_phenotype: pool too small for the requested "
                             "case/control counts; increase the pool factor");
    }
    const auto chosen_cases = sim_detail::sample_without_replacement(cases, n_cases, rng);
    const auto chosen_controls =
        sim_detail::sample_without_replacement(controls, n_controls, rng);

    draw.selected_rows = chosen_cases;
    draw.selected_rows.insert(draw.selected_rows.end(), chosen_controls.begin(),
                              chosen_controls.end());
    draw.y.resize(n);
    for (Eigen::Index i = 0; i < n_cases; ++i) draw.y[i] = 1.0;
    for (Eigen::Index i = n_cases; i < n; ++i) draw.y[i] = -1.0;
    return draw;
}

struct SimulatedStudy {
    Eigen::MatrixXd train_genotypes; // raw 0/1/2
    Eigen::VectorXd train_phenotype;
    Eigen::MatrixXd test_genotypes;
    Eigen::VectorXd test_phenotype;
};

struct SimulatedPair {
    std::array<SimulatedStudy, 2> studies;
    SimTruth truth;
    Eigen::VectorXd maf;
    std::vector<std::string> snp_ids;
    std::array<std::vector<std::string>, 2> train_sample_ids;
    std::array<std::vector<std::string>, 2> test_sample_ids;
};

// Full synthetic replicate: shared MAFs and SNP set, per-study genotypes,
// association pattern controlled by g, and phenotypes at the requested
// heritability. All draws come from the single stream of `config.seed`.
inline SimulatedPair simulate_pair(const SimConfig& config) {
    config.validate();
    Rng rng(config.seed);
    SimulatedPair out;
    out.maf = draw_mafs(config.p, config.maf_low, config.maf_high, rng);
    auto [gamma1, gamma2] = gen_association(config.p, config.alpha1, config.g, rng);

    out.truth.gamma.resize(config.p, 2);
    out.truth.gamma.col(0) = gamma1;
    out.truth.gamma.col(1) = gamma2;
    out.truth.beta.resize(config.p, 2);
    for (int k = 0; k < 2; ++k) {
        for (int j = 0; j < config.p; ++j) {
            out.truth.beta(j, k) = out.truth.gamma(j, k) != 0 ? rng.normal() : 0.0;
        }
    }

    out.snp_ids.reserve(static_cast<std::size_t>(config.p));
    for (int j = 0; j < config.p; ++j) out.snp_ids.push_back("snp_" + std::to_string(j + 1));

    for (int k = 0; k < 2; ++k) {
        const Eigen::VectorXi gamma = out.truth.gamma.col(k);
        const Eigen::VectorXd beta = out.truth.beta.col(k);
        auto& study = out.studies[k];
        if (config.family == TraitFamily::quant) {
            study.train_genotypes =
                gen_genotypes(config.n, config.p, config.rho, out.maf, rng);
            auto [y, sigma_e_sq] =
                gen_quant_phenotype(study.train_genotypes, gamma, beta, config.h_sq, rng);
            study.train_phenotype = std::move(y);
            out.truth.sigma_e_sq[k] = sigma_e_sq;
            if (config.n_test > 0) {
                study.test_genotypes =
                    gen_genotypes(config.n_test, config.p, config.rho, out.maf, rng);
                study.test_phenotype = gen_quant_phenotype_with_noise(
                    study.test_genotypes, gamma, beta, sigma_e_sq, rng);
            }
        } else {
            const auto pool_for = [&](int want) {
                return static_cast<int>(
                    std::ceil(want * config.case_ratio / config.prevalence) * 2);
            };
            const int train_pool = pool_for(config.n);
            Eigen::MatrixXd pool =
                gen_genotypes(train_pool, config.p, config.rho, out.maf, rng);
            auto draw = gen_binary_phenotype(pool, gamma, beta, config.h_sq,
                                             config.prevalence, config.case_ratio,
                                             config.n, rng);
            study.train_genotypes.resize(config.n, config.p);
            for (int i = 0; i < config.n; ++i) {
                study.train_genotypes.row(i) = pool.row(draw.selected_rows[static_cast<std::size_t>(i)]);
            }
            study.train_phenotype = draw.y;
            out.truth.sigma_e_sq[k] = draw.sigma_e_sq;
            out.truth.liability_threshold[k] = draw.threshold;
            if (config.n_test > 0) {
                const int test_pool = pool_for(config.n_test);
                Eigen::MatrixXd tpool =
                    gen_genotypes(test_pool, config.p, config.rho, out.maf, rng);
                auto tdraw = gen_binary_phenotype(tpool, gamma, beta, config.h_sq,
                                                  config.prevalence, config.case_ratio,
                                                  config.n_test, rng);
                study.test_genotypes.resize(config.n_test, config.p);
                for (int i = 0; i < config.n_test; ++i) {
                    study.test_genotypes.row(i) =
                        tpool.row(tdraw.selected_rows[static_cast<std::size_t>(i)]);
                }
                study.test_phenotype = tdraw.y;
            }
        }
        const auto label = [&](const char* split, int idx) {
            return "study" + std::to_string(k + 1) + "_" + split + "_" + std::to_string(idx + 1);
        };
        for (int i = 0; i < config.n; ++i) out.train_sample_ids[k].push_back(label("train", i));
        for (int i = 0; i < config.n_test; ++i) out.test_sample_ids[k].push_back(label("test", i));
    }
    return out;
}

} // namespace pleiovb

#endif
