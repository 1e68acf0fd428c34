#ifndef PLEIOVB_VBEM_COMMON_HPP
#define PLEIOVB_VBEM_COMMON_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pleiovb/errors.hpp"
#include "pleiovb/types.hpp"

namespace pleiovb::detail {

inline constexpr double kProbFloor = 1e-300;
inline constexpr double kPriorClamp = 1e-12;

// Per-trait log-odds contribution of an associated slab against the spike:
// 1/2 log(s^2/sigma_beta^2) + mu^2/(2 s^2).
inline double slab_log_odds(double mu, double s_sq, double sigma_beta_sq) {
    return 0.5 * std::log(s_sq / sigma_beta_sq) + mu * mu / (2.0 * s_sq);
}

// Group posterior via softmax of A_l = log alpha_l + gamma_1(l) d1 +
// gamma_2(l) d2, computed with max subtraction and floored at 1e-300.
inline std::array<double, 4> group_posterior(const std::array<double, 4>& log_prior,
                                             double d1, double d2, int snp,
                                             int iteration) {
    std::array<double, 4> a = {
        log_prior[kGroup00],
        log_prior[kGroup01] + d2,
        log_prior[kGroup10] + d1,
        log_prior[kGroup11] + d1 + d2,
    };
    const double amax = std::max({a[0], a[1], a[2], a[3]});
    if (!std::isfinite(amax)) {
        throw NumericalError("non-finite group log-weight at SNP " + std::to_string(snp) +
                             ", iteration " + std::to_string(iteration));
    }
    std::array<double, 4> w;
    double sum = 0.0;
    for (int l = 0; l < 4; ++l) {
        w[l] = std::exp(a[l] - amax);
        sum += w[l];
    }
    for (int l = 0; l < 4; ++l) {
        w[l] = std::max(w[l] / sum, kProbFloor);
    }
    return w;
}

// Var[gamma beta] under the factorized posterior.
inline double effect_variance(double incl, double mu, double s_sq) {
    return incl * (mu * mu + s_sq) - incl * incl * mu * mu;
}

// 1/2 sum_{l in L_k} alpha_lj (log(s^2/sb^2) - (mu^2+s^2)/sb^2 + 1).
inline double slab_kl_term(double incl, double mu, double s_sq, double sigma_beta_sq) {
    return 0.5 * incl *
           (std::log(s_sq / sigma_beta_sq) - (mu * mu + s_sq) / sigma_beta_sq + 1.0);
}

// sum_l alpha_lj log(alpha_lj / alpha_l) with the 0 log 0 = 0 convention.
inline double group_kl_row(const Eigen::MatrixXd& group_post, Eigen::Index j,
                           const GroupProbs& prior) {
    double kl = 0.0;
    for (int l = 0; l < 4; ++l) {
        const double q = group_post(j, l);
        if (q > 0.0) kl += q * std::log(q / prior[l]);
    }
    return kl;
}

inline std::array<double, 4> log_group_prior(const GroupProbs& probs) {
    std::array<double, 4> lp;
    for (int l = 0; l < 4; ++l) {
        lp[l] = std::log(std::max(probs[l], kPriorClamp));
    }
    return lp;
}

inline GroupProbs clamp_and_renormalize(GroupProbs g) {
    double sum = 0.0;
    for (int l = 0; l < 4; ++l) {
        g[l] = std::clamp(g[l], kPriorClamp, 1.0);
        sum += g[l];
    }
    for (int l = 0; l < 4; ++l) g[l] /= sum;
    return g;
}

// H0 parametrization for the pleiotropy test: alpha_11 = alpha_1* alpha_*1.
inline GroupProbs independence_probs(double pi1, double pi2) {
    pi1 = std::clamp(pi1, kPriorClamp, 1.0 - kPriorClamp);
    pi2 = std::clamp(pi2, kPriorClamp, 1.0 - kPriorClamp);
    GroupProbs g;
    g.a00 = (1.0 - pi1) * (1.0 - pi2);
    g.a01 = (1.0 - pi1) * pi2;
    g.a10 = pi1 * (1.0 - pi2);
    g.a11 = pi1 * pi2;
    return g;
}

inline std::vector<int> resolve_sweep_order(const FitConfig& cfg, Eigen::Index p) {
    if (cfg.sweep_order.empty()) {
        std::vector<int> order(static_cast<std::size_t>(p));
        for (Eigen::Index j = 0; j < p; ++j) order[static_cast<std::size_t>(j)] = static_cast<int>(j);
        return order;
    }
    if (static_cast<Eigen::Index>(cfg.sweep_order.size()) != p) {
        throw UsageError("sweep_order must list every SNP index exactly once");
    }
    std::vector<bool> seen(static_cast<std::size_t>(p), false);
    for (int j : cfg.sweep_order) {
        if (j < 0 || j >= p || seen[static_cast<std::size_t>(j)]) {
            throw UsageError("sweep_order must list every SNP index exactly once");
        }
        seen[static_cast<std::size_t>(j)] = true;
    }
    return cfg.sweep_order;
}

inline bool elbo_converged(double prev, double curr, double rel_tol) {
    const double denom = std::max(std::abs(curr), 1e-12);
    return std::abs(curr - prev) / denom < rel_tol;
}

} // namespace pleiovb::detail

#endif
