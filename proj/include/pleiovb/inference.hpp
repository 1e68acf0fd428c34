#ifndef PLEIOVB_INFERENCE_HPP
#define PLEIOVB_INFERENCE_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "pleiovb/dataset.hpp"
#include "pleiovb/errors.hpp"
#include "pleiovb/math.hpp"
#include "pleiovb/types.hpp"
#include "pleiovb/vbem_binary.hpp"
#include "pleiovb/vbem_quant.hpp"

namespace pleiovb {

// lfdr_kj = 1 - sum_{l in L_k} alpha_lj.
inline double lfdr_from_group_post(const Eigen::MatrixXd& group_post, Eigen::Index j,
                                   int trait) {
    const auto& g = kIncludedGroups[trait];
    return 1.0 - group_post(j, g[0]) - group_post(j, g[1]);
}

struct SelectionResult {
    std::vector<Eigen::Index> selected;
    double zeta = 0.0;
    double estimated_fdr = 0.0;
};

// Direct posterior probability control of the global FDR: the largest lfdr
// threshold zeta whose selected set has mean lfdr at most tau. SNPs tied at
// zeta are all selected, so candidate thresholds are the distinct values.
inline SelectionResult fdr_select(const Eigen::VectorXd& lfdrs, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw UsageError("fdr_select: tau must lie in (0,1)");
    }
    const Eigen::Index p = lfdrs.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return lfdrs[a] < lfdrs[b]; });

    SelectionResult result;
    double running = 0.0;
    Eigen::Index best_count = 0;
    double best_mean = 0.0;
    double best_zeta = 0.0;
    for (Eigen::Index i = 0; i < p;) {
        const double value = lfdrs[order[static_cast<std::size_t>(i)]];
        Eigen::Index block_end = i;
        while (block_end < p && lfdrs[order[static_cast<std::size_t>(block_end)]] == value) {
            running += value;
            ++block_end;
        }
        const double mean = running / static_cast<double>(block_end);
        if (mean <= tau) {
            best_count = block_end;
            best_mean = mean;
            best_zeta = value;
        }
        i = block_end;
    }
    result.selected.assign(order.begin(), order.begin() + best_count);
    std::sort(result.selected.begin(), result.selected.end());
    result.zeta = best_count > 0 ? best_zeta : 0.0;
    result.estimated_fdr = best_mean;
    return result;
}

// y_hat = c_k0 + sum_j (x_j - c_kj) E[gamma beta]_kj for a raw genotype row.
inline double predict_quant(const Eigen::VectorXd& x_new, const FitResult& fit, int trait,
                            const Eigen::VectorXd& column_means, double phenotype_mean) {
    if (x_new.size() != fit.state.mu.cols() || column_means.size() != x_new.size()) {
        throw DataError("predict_quant: genotype length does not match the fitted model");
    }
    double value = phenotype_mean;
    for (Eigen::Index j = 0; j < x_new.size(); ++j) {
        value += (x_new[j] - column_means[j]) * fit.state.mean_effect(trait, j);
    }
    return value;
}

struct BinaryPrediction {
    double eta = 0.0;
    double prob = 0.5;
};

inline BinaryPrediction predict_binary(const Eigen::VectorXd& x_new,
                                       const Eigen::VectorXd& z_new, const FitResult& fit,
                                       int trait, const Eigen::VectorXd& column_means) {
    if (x_new.size() != fit.state.mu.cols() || column_means.size() != x_new.size()) {
        throw DataError("predict_binary: genotype length does not match the fitted model");
    }
    const Eigen::VectorXd& phi = fit.params.phi[trait];
    if (z_new.size() != phi.size()) {
        throw DataError("predict_binary: covariate length does not match the fitted model");
    }
    BinaryPrediction pred;
    pred.eta = z_new.dot(phi);
    for (Eigen::Index j = 0; j < x_new.size(); ++j) {
        pred.eta += (x_new[j] - column_means[j]) * fit.state.mean_effect(trait, j);
    }
    pred.prob = sigmoid(pred.eta);
    return pred;
}

struct PleiotropyTest {
    double lambda = 0.0;
    double p_value = 1.0;
    ModelParams alt_params;
    ModelParams null_params;
    double alt_elbo = 0.0;
    double null_elbo = 0.0;
    bool alt_converged = false;
    bool null_converged = false;
};

// LRT of H0: alpha_11 = alpha_1* alpha_*1 using the converged lower bounds
// as likelihood surrogates. The null fit is warm-started from the
// alternative's variational state. A negative statistic (possible with
// surrogates) yields p = 1.
inline PleiotropyTest pleiotropy_lrt(const GwasDataset& d1, const GwasDataset& d2,
                                     const FitConfig& cfg, TraitFamily family) {
    PleiotropyTest test;
    FitResult alt;
    FitResult null;
    if (family == TraitFamily::quant) {
        JointQuantSolver alt_solver(d1, d2, cfg, false);
        alt = alt_solver.fit();
        JointQuantSolver null_solver(d1, d2, cfg, true);
        null_solver.warm_start(alt.state, alt.params);
        null = null_solver.fit();
    } else {
        JointBinarySolver alt_solver(d1, d2, cfg, false);
        alt = alt_solver.fit();
        JointBinarySolver null_solver(d1, d2, cfg, true);
        null_solver.warm_start(alt.state, alt.params);
        null = null_solver.fit();
    }
    test.lambda = 2.0 * (alt.final_elbo() - null.final_elbo());
    test.p_value = chisq1_survival(std::max(test.lambda, 0.0));
    test.alt_params = alt.params;
    test.null_params = null.params;
    test.alt_elbo = alt.final_elbo();
    test.null_elbo = null.final_elbo();
    test.alt_converged = alt.converged;
    test.null_converged = null.converged;
    return test;
}

} // namespace pleiovb

#endif
