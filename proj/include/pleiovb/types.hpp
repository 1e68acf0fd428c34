#ifndef PLEIOVB_TYPES_HPP
#define PLEIOVB_TYPES_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pleiovb/errors.hpp"

namespace pleiovb {

enum class TraitFamily { quant, binary };

inline std::string to_string(TraitFamily f) {
    return f == TraitFamily::quant ? "quant" : "binary";
}

// Joint association-status groups for a SNP pair (gamma_1j, gamma_2j),
// indexed in the fixed order 00, 01, 10, 11.
inline constexpr int kGroup00 = 0;
inline constexpr int kGroup01 = 1;
inline constexpr int kGroup10 = 2;
inline constexpr int kGroup11 = 3;

// Groups in which trait k is associated: L_1 = {10,11}, L_2 = {01,11}.
inline constexpr std::array<std::array<int, 2>, 2> kIncludedGroups = {{
    {{kGroup10, kGroup11}},
    {{kGroup01, kGroup11}},
}};

struct GroupProbs {
    double a00 = 0.0;
    double a01 = 0.0;
    double a10 = 0.0;
    double a11 = 0.0;

    double operator[](int l) const {
        switch (l) {
        case kGroup00: return a00;
        case kGroup01: return a01;
        case kGroup10: return a10;
        default: return a11;
        }
    }
    double& operator[](int l) {
        switch (l) {
        case kGroup00: return a00;
        case kGroup01: return a01;
        case kGroup10: return a10;
        default: return a11;
        }
    }

    // Marginal association probabilities per trait.
    double marginal(int trait) const {
        return trait == 0 ? a10 + a11 : a01 + a11;
    }

    void validate() const {
        const double sum = a00 + a01 + a10 + a11;
        for (int l = 0; l < 4; ++l) {
            if (!((*this)[l] >= 0.0 && (*this)[l] <= 1.0)) {
                throw NumericalError("GroupProbs: entries must lie in [0,1]");
            }
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw NumericalError("GroupProbs: entries must sum to 1");
        }
    }
};

// Point-estimated model parameters. sigma_e_sq is populated for the
// quantitative family, phi (per-study covariate fixed effects) for the
// binary family.
struct ModelParams {
    std::array<double, 2> sigma_beta_sq = {1.0, 1.0};
    std::array<double, 2> sigma_e_sq = {0.0, 0.0};
    std::array<Eigen::VectorXd, 2> phi;
    GroupProbs group_probs;
};

struct FitConfig {
    int max_iter = 1000;
    double rel_tol = 1e-5;
    GroupProbs init_group_probs = {0.97, 0.01, 0.01, 0.01};
    std::array<double, 2> init_sigma_beta_sq = {1.0, 1.0};
    // NaN means "Var(y_k)/2, computed from the data". Quantitative only.
    std::array<double, 2> init_sigma_e_sq = {
        std::numeric_limits<double>::quiet_NaN(),
        std::numeric_limits<double>::quiet_NaN()};
    // Optional override of the SNP sweep order (default: ascending index).
    // Used to keep coordinate updates aligned with a column permutation.
    std::vector<int> sweep_order;

    void validate() const {
        if (max_iter < 1) throw UsageError("FitConfig: max_iter must be >= 1");
        if (!(rel_tol > 0.0)) throw UsageError("FitConfig: rel_tol must be > 0");
        init_group_probs.validate();
    }
};

// Per-SNP variational posterior plus the running per-sample caches.
// mu/s_sq rows are traits; group_post rows are SNPs with columns in the
// group order 00,01,10,11. fitted_genetic[k] caches X_k m_k, the posterior
// mean genetic value, which both solver families maintain incrementally.
struct VariationalState {
    Eigen::MatrixXd mu;         // 2 x p
    Eigen::MatrixXd s_sq;       // 2 x p
    Eigen::MatrixXd group_post; // p x 4
    std::array<Eigen::VectorXd, 2> fitted_genetic;
    // Binary family only.
    std::array<Eigen::VectorXd, 2> psi;
    std::array<Eigen::VectorXd, 2> bohning_b;
    std::array<Eigen::VectorXd, 2> bohning_c;

    // Posterior inclusion probability of SNP j for trait k.
    double inclusion(int trait, Eigen::Index j) const {
        const auto& g = kIncludedGroups[trait];
        return group_post(j, g[0]) + group_post(j, g[1]);
    }

    // Posterior mean effect E[gamma beta] of SNP j for trait k.
    double mean_effect(int trait, Eigen::Index j) const {
        return inclusion(trait, j) * mu(trait, j);
    }
};

struct FitResult {
    ModelParams params;
    VariationalState state;
    std::vector<double> elbo_trace;
    int iterations = 0;
    bool converged = false;
    Eigen::MatrixXd lfdr; // 2 x p
    TraitFamily family = TraitFamily::quant;
    int n_traits = 2;

    double final_elbo() const {
        return elbo_trace.empty() ? -std::numeric_limits<double>::infinity()
                                  : elbo_trace.back();
    }
};

} // namespace pleiovb

#endif
