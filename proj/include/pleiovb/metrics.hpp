#ifndef PLEIOVB_METRICS_HPP
#define PLEIOVB_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "pleiovb/errors.hpp"
#include "pleiovb/inference.hpp"

namespace pleiovb {

// Mann-Whitney AUC with ties counted half.
inline double auc(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels) {
    if (scores.size() != labels.size()) {
        throw DataError("auc: score and label lengths differ");
    }
    const Eigen::Index n = scores.size();
    Eigen::Index n_pos = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (labels[i] != 0) ++n_pos;
    }
    const Eigen::Index n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw DataError("auc: both classes must be present");
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return scores[a] < scores[b]; });
    // Rank-sum with average ranks over tie blocks.
    double rank_sum_pos = 0.0;
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index block_end = i;
        while (block_end < n && scores[order[static_cast<std::size_t>(block_end)]] ==
                                    scores[order[static_cast<std::size_t>(i)]]) {
            ++block_end;
        }
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + block_end); // 1-based
        for (Eigen::Index t = i; t < block_end; ++t) {
            if (labels[order[static_cast<std::size_t>(t)]] != 0) rank_sum_pos += avg_rank;
        }
        i = block_end;
    }
    const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) *
                                        static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Fraction of truly associated SNPs recovered by fdr_select at tau.
// NaN when there are no true SNPs.
inline double power_at_fdr(const Eigen::VectorXd& lfdrs, const Eigen::VectorXi& truth_gamma,
                           double tau) {
    Eigen::Index n_true = 0;
    for (Eigen::Index j = 0; j < truth_gamma.size(); ++j) {
        if (truth_gamma[j] != 0) ++n_true;
    }
    if (n_true == 0) return std::numeric_limits<double>::quiet_NaN();
    const auto sel = fdr_select(lfdrs, tau);
    Eigen::Index hits = 0;
    for (auto j : sel.selected) {
        if (truth_gamma[j] != 0) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n_true);
}

// False discoveries over selections; 0 for an empty selection.
inline double empirical_fdr(const std::vector<Eigen::Index>& selected,
                            const Eigen::VectorXi& truth_gamma) {
    if (selected.empty()) return 0.0;
    Eigen::Index false_hits = 0;
    for (auto j : selected) {
        if (truth_gamma[j] == 0) ++false_hits;
    }
    return static_cast<double>(false_hits) / static_cast<double>(selected.size());
}

inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) {
        throw DataError("pearson: vector lengths differ");
    }
    const Eigen::ArrayXd da = a.array() - a.mean();
    const Eigen::ArrayXd db = b.array() - b.mean();
    const double var_a = da.square().sum();
    const double var_b = db.square().sum();
    if (!(var_a > 0.0) || !(var_b > 0.0)) {
        throw NumericalError("pearson: zero variance input");
    }
    return (da * db).sum() / std::sqrt(var_a * var_b);
}

} // namespace pleiovb

#endif
