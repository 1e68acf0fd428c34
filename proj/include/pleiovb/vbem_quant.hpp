#ifndef PLEIOVB_VBEM_QUANT_HPP
#define PLEIOVB_VBEM_QUANT_HPP

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pleiovb/dataset.hpp"
#include "pleiovb/errors.hpp"
#include "pleiovb/math.hpp"
#include "pleiovb/types.hpp"
#include "pleiovb/vbem_common.hpp"

namespace pleiovb {

namespace detail {

inline void require_centered_quant(const GwasDataset& d, const char* which) {
    if (d.family != TraitFamily::quant) {
        throw DataError(std::string(which) + ": quantitative solver needs a quantitative dataset");
    }
    if (!d.centered) {
        throw DataError(std::string(which) + ": dataset must be centered before fitting");
    }
}

inline double init_sigma_e_sq(const FitConfig& cfg, int trait, const Eigen::VectorXd& y) {
    if (std::isfinite(cfg.init_sigma_e_sq[trait])) return cfg.init_sigma_e_sq[trait];
    const double var = y.squaredNorm() / static_cast<double>(y.size());
    return std::max(var / 2.0, 1e-12);
}

} // namespace detail

// Coordinate-ascent VBEM for the joint quantitative four-groups model.
// With `independence_prior` the group-probability M-step is constrained to
// alpha_11 = alpha_1* alpha_*1, the null of the pleiotropy test.
class JointQuantSolver {
public:
    JointQuantSolver(const GwasDataset& d1, const GwasDataset& d2, FitConfig cfg,
                     bool independence_prior = false)
        : data_{&d1, &d2}, cfg_(std::move(cfg)), independence_prior_(independence_prior) {
        cfg_.validate();
        detail::require_centered_quant(d1, "fit_joint_quant");
        detail::require_centered_quant(d2, "fit_joint_quant");
        if (d1.snp_ids != d2.snp_ids) {
            throw DataError("fit_joint_quant: datasets must be aligned (same SNPs, same order)");
        }
        p_ = d1.n_snps();
        sweep_order_ = detail::resolve_sweep_order(cfg_, p_);
        for (int k = 0; k < 2; ++k) {
            xtx_[k] = data_[k]->genotypes.colwise().squaredNorm();
            xty_[k].noalias() = data_[k]->genotypes.transpose() * data_[k]->phenotype;
        }
        reset();
    }

    void reset() {
        params_.group_probs = detail::clamp_and_renormalize(cfg_.init_group_probs);
        if (independence_prior_) {
            // The null model's parameter space is the product manifold, so
            // the initial prior is projected onto it as well.
            params_.group_probs = detail::independence_probs(
                params_.group_probs.marginal(0), params_.group_probs.marginal(1));
        }
        params_.sigma_beta_sq = cfg_.init_sigma_beta_sq;
        for (int k = 0; k < 2; ++k) {
            params_.sigma_e_sq[k] = detail::init_sigma_e_sq(cfg_, k, data_[k]->phenotype);
        }
        st_.mu = Eigen::MatrixXd::Zero(2, p_);
        st_.s_sq = Eigen::MatrixXd(2, p_);
        for (int k = 0; k < 2; ++k) {
            st_.s_sq.row(k).setConstant(params_.sigma_beta_sq[k]);
        }
        st_.group_post.resize(p_, 4);
        for (Eigen::Index j = 0; j < p_; ++j) {
            for (int l = 0; l < 4; ++l) st_.group_post(j, l) = params_.group_probs[l];
        }
        for (int k = 0; k < 2; ++k) {
            st_.fitted_genetic[k] = Eigen::VectorXd::Zero(data_[k]->n_samples());
        }
        iteration_ = 0;
    }

    void warm_start(const VariationalState& state, const ModelParams& params) {
        st_ = state;
        params_ = params;
        if (independence_prior_) {
            double pi1 = 0.0;
            double pi2 = 0.0;
            for (Eigen::Index j = 0; j < p_; ++j) {
                pi1 += st_.inclusion(0, j);
                pi2 += st_.inclusion(1, j);
            }
            params_.group_probs = detail::independence_probs(pi1 / static_cast<double>(p_),
                                                             pi2 / static_cast<double>(p_));
        }
        refresh_fitted();
    }

    // One E-step pass: for each SNP, update (mu, s^2) for both traits and
    // then the joint group posterior, keeping the fitted genetic values
    // consistent along the way.
    void sweep() {
        const auto log_prior = detail::log_group_prior(params_.group_probs);
        std::array<double, 2> d;
        for (int j : sweep_order_) {
            for (int k = 0; k < 2; ++k) {
                const auto x = data_[k]->genotypes.col(j);
                st_.fitted_genetic[k].noalias() -= st_.mean_effect(k, j) * x;
                const double denom = xtx_[k][j] + params_.sigma_e_sq[k] / params_.sigma_beta_sq[k];
                st_.s_sq(k, j) = params_.sigma_e_sq[k] / denom;
                st_.mu(k, j) = (xty_[k][j] - x.dot(st_.fitted_genetic[k])) / denom;
                d[k] = detail::slab_log_odds(st_.mu(k, j), st_.s_sq(k, j),
                                             params_.sigma_beta_sq[k]);
            }
            const auto post = detail::group_posterior(log_prior, d[0], d[1], j, iteration_);
            for (int l = 0; l < 4; ++l) st_.group_post(j, l) = post[l];
            for (int k = 0; k < 2; ++k) {
                st_.fitted_genetic[k].noalias() += st_.mean_effect(k, j) * data_[k]->genotypes.col(j);
            }
        }
    }

    void m_step() {
        for (int k = 0; k < 2; ++k) {
            double var_sum = 0.0;
            double slab_mass = 0.0;
            double slab_second_moment = 0.0;
            for (Eigen::Index j = 0; j < p_; ++j) {
                const double incl = st_.inclusion(k, j);
                const double mu = st_.mu(k, j);
                const double s_sq = st_.s_sq(k, j);
                var_sum += detail::effect_variance(incl, mu, s_sq) * xtx_[k][j];
                slab_mass += incl;
                slab_second_moment += incl * (mu * mu + s_sq);
            }
            const double rss =
                (data_[k]->phenotype - st_.fitted_genetic[k]).squaredNorm();
            params_.sigma_e_sq[k] =
                (rss + var_sum) / static_cast<double>(data_[k]->n_samples());
            if (slab_mass >= detail::kPriorClamp) {
                params_.sigma_beta_sq[k] = slab_second_moment / slab_mass;
            }
        }
        GroupProbs avg;
        for (int l = 0; l < 4; ++l) {
            avg[l] = st_.group_post.col(l).mean();
        }
        if (independence_prior_) {
            params_.group_probs = detail::independence_probs(avg.a10 + avg.a11, avg.a01 + avg.a11);
        } else {
            params_.group_probs = detail::clamp_and_renormalize(avg);
        }
    }

    // Closed-form lower bound; includes the -p log(2pi) - p constant of the
    // analytic expression.
    double elbo() const {
        double value = 0.0;
        for (int k = 0; k < 2; ++k) {
            const double se = params_.sigma_e_sq[k];
            const double n_k = static_cast<double>(data_[k]->n_samples());
            double var_sum = 0.0;
            for (Eigen::Index j = 0; j < p_; ++j) {
                var_sum += detail::effect_variance(st_.inclusion(k, j), st_.mu(k, j),
                                                   st_.s_sq(k, j)) *
                           xtx_[k][j];
            }
            const double rss = (data_[k]->phenotype - st_.fitted_genetic[k]).squaredNorm();
            value += -0.5 * n_k * std::log(2.0 * std::numbers::pi * se) -
                     rss / (2.0 * se) - var_sum / (2.0 * se);
            for (Eigen::Index j = 0; j < p_; ++j) {
                value += detail::slab_kl_term(st_.inclusion(k, j), st_.mu(k, j),
                                              st_.s_sq(k, j), params_.sigma_beta_sq[k]);
            }
        }
        for (Eigen::Index j = 0; j < p_; ++j) {
            value -= detail::group_kl_row(st_.group_post, j, params_.group_probs);
        }
        value -= static_cast<double>(p_) * (std::log(2.0 * std::numbers::pi) + 1.0);
        if (!std::isfinite(value)) {
            throw NumericalError("non-finite ELBO at iteration " + std::to_string(iteration_));
        }
        return value;
    }

    FitResult fit() {
        std::vector<double> trace;
        trace.reserve(static_cast<std::size_t>(cfg_.max_iter) + 1);
        trace.push_back(elbo());
        bool converged = false;
        while (iteration_ < cfg_.max_iter) {
            ++iteration_;
            sweep();
            m_step();
            trace.push_back(elbo());
            if (detail::elbo_converged(trace[trace.size() - 2], trace.back(), cfg_.rel_tol)) {
                converged = true;
                break;
            }
        }
        FitResult r;
        r.params = params_;
        r.state = st_;
        r.elbo_trace = std::move(trace);
        r.iterations = iteration_;
        r.converged = converged;
        r.family = TraitFamily::quant;
        r.n_traits = 2;
        r.lfdr.resize(2, p_);
        for (int k = 0; k < 2; ++k) {
            for (Eigen::Index j = 0; j < p_; ++j) {
                r.lfdr(k, j) = 1.0 - st_.inclusion(k, j);
            }
        }
        return r;
    }

    const VariationalState& state() const { return st_; }
    const ModelParams& params() const { return params_; }

    // Recomputes the fitted genetic values from scratch; used after a warm
    // start and by consistency checks.
    void refresh_fitted() {
        for (int k = 0; k < 2; ++k) {
            Eigen::VectorXd m(p_);
            for (Eigen::Index j = 0; j < p_; ++j) m[j] = st_.mean_effect(k, j);
            st_.fitted_genetic[k].noalias() = data_[k]->genotypes * m;
        }
    }

private:
    std::array<const GwasDataset*, 2> data_;
    FitConfig cfg_;
    bool independence_prior_;
    Eigen::Index p_ = 0;
    std::vector<int> sweep_order_;
    std::array<Eigen::VectorXd, 2> xtx_;
    std::array<Eigen::VectorXd, 2> xty_;
    ModelParams params_;
    VariationalState st_;
    int iteration_ = 0;
};

// Two-groups reduction for a single quantitative study: gamma_j ~ Ber(alpha)
// with the same slab updates. Posteriors are embedded in the joint layout
// with the study in the trait-1 slot (groups 00/10 carry all the mass).
class SingleQuantSolver {
public:
    SingleQuantSolver(const GwasDataset& d, FitConfig cfg)
        : data_(&d), cfg_(std::move(cfg)) {
        cfg_.validate();
        detail::require_centered_quant(d, "fit_single_quant");
        p_ = d.n_snps();
        sweep_order_ = detail::resolve_sweep_order(cfg_, p_);
        xtx_ = d.genotypes.colwise().squaredNorm();
        xty_.noalias() = d.genotypes.transpose() * d.phenotype;
        reset();
    }

    void reset() {
        alpha_ = std::clamp(cfg_.init_group_probs.marginal(0), detail::kPriorClamp,
                            1.0 - detail::kPriorClamp);
        sigma_beta_sq_ = cfg_.init_sigma_beta_sq[0];
        sigma_e_sq_ = detail::init_sigma_e_sq(cfg_, 0, data_->phenotype);
        mu_ = Eigen::VectorXd::Zero(p_);
        s_sq_ = Eigen::VectorXd::Constant(p_, sigma_beta_sq_);
        incl_ = Eigen::VectorXd::Constant(p_, alpha_);
        excl_ = Eigen::VectorXd::Constant(p_, 1.0 - alpha_);
        fitted_ = Eigen::VectorXd::Zero(data_->n_samples());
        iteration_ = 0;
    }

    void sweep() {
        const double log_odds_prior = std::log(alpha_) - std::log1p(-alpha_);
        for (int j : sweep_order_) {
            const auto x = data_->genotypes.col(j);
            fitted_.noalias() -= incl_[j] * mu_[j] * x;
            const double denom = xtx_[j] + sigma_e_sq_ / sigma_beta_sq_;
            s_sq_[j] = sigma_e_sq_ / denom;
            mu_[j] = (xty_[j] - x.dot(fitted_)) / denom;
            const double odds =
                log_odds_prior + detail::slab_log_odds(mu_[j], s_sq_[j], sigma_beta_sq_);
            if (!std::isfinite(odds)) {
                throw NumericalError("non-finite inclusion log-odds at SNP " +
                                     std::to_string(j) + ", iteration " +
                                     std::to_string(iteration_));
            }
            incl_[j] = std::max(sigmoid(odds), detail::kProbFloor);
            excl_[j] = std::max(sigmoid(-odds), detail::kProbFloor);
            fitted_.noalias() += incl_[j] * mu_[j] * x;
        }
    }

    void m_step() {
        double var_sum = 0.0;
        double slab_mass = 0.0;
        double slab_second_moment = 0.0;
        for (Eigen::Index j = 0; j < p_; ++j) {
            var_sum += detail::effect_variance(incl_[j], mu_[j], s_sq_[j]) * xtx_[j];
            slab_mass += incl_[j];
            slab_second_moment += incl_[j] * (mu_[j] * mu_[j] + s_sq_[j]);
        }
        const double rss = (data_->phenotype - fitted_).squaredNorm();
        sigma_e_sq_ = (rss + var_sum) / static_cast<double>(data_->n_samples());
        if (slab_mass >= detail::kPriorClamp) {
            sigma_beta_sq_ = slab_second_moment / slab_mass;
        }
        alpha_ = std::clamp(incl_.mean(), detail::kPriorClamp, 1.0 - detail::kPriorClamp);
    }

    double elbo() const {
        const double n = static_cast<double>(data_->n_samples());
        double var_sum = 0.0;
        double kl_gamma = 0.0;
        double kl_slab = 0.0;
        for (Eigen::Index j = 0; j < p_; ++j) {
            var_sum += detail::effect_variance(incl_[j], mu_[j], s_sq_[j]) * xtx_[j];
            if (incl_[j] > 0.0) kl_gamma += incl_[j] * std::log(incl_[j] / alpha_);
            if (excl_[j] > 0.0) kl_gamma += excl_[j] * std::log(excl_[j] / (1.0 - alpha_));
            kl_slab += detail::slab_kl_term(incl_[j], mu_[j], s_sq_[j], sigma_beta_sq_);
        }
        const double rss = (data_->phenotype - fitted_).squaredNorm();
        double value = -0.5 * n * std::log(2.0 * std::numbers::pi * sigma_e_sq_) -
                       rss / (2.0 * sigma_e_sq_) - var_sum / (2.0 * sigma_e_sq_) -
                       kl_gamma + kl_slab -
                       0.5 * static_cast<double>(p_) * (std::log(2.0 * std::numbers::pi) + 1.0);
        if (!std::isfinite(value)) {
            throw NumericalError("non-finite ELBO at iteration " + std::to_string(iteration_));
        }
        return value;
    }

    FitResult fit() {
        std::vector<double> trace;
        trace.reserve(static_cast<std::size_t>(cfg_.max_iter) + 1);
        trace.push_back(elbo());
        bool converged = false;
        while (iteration_ < cfg_.max_iter) {
            ++iteration_;
            sweep();
            m_step();
            trace.push_back(elbo());
            if (detail::elbo_converged(trace[trace.size() - 2], trace.back(), cfg_.rel_tol)) {
                converged = true;
                break;
            }
        }
        return package(std::move(trace), converged);
    }

    const Eigen::VectorXd& inclusion() const { return incl_; }
    double alpha() const { return alpha_; }
    double sigma_beta_sq() const { return sigma_beta_sq_; }
    double sigma_e_sq() const { return sigma_e_sq_; }

private:
    FitResult package(std::vector<double> trace, bool converged) const {
        FitResult r;
        r.params.sigma_beta_sq = {sigma_beta_sq_, 0.0};
        r.params.sigma_e_sq = {sigma_e_sq_, 0.0};
        r.params.group_probs = {1.0 - alpha_, 0.0, alpha_, 0.0};
        r.state.mu = Eigen::MatrixXd::Zero(2, p_);
        r.state.mu.row(0) = mu_.transpose();
        r.state.s_sq = Eigen::MatrixXd::Zero(2, p_);
        r.state.s_sq.row(0) = s_sq_.transpose();
        r.state.group_post = Eigen::MatrixXd::Zero(p_, 4);
        r.state.group_post.col(kGroup00) = excl_;
        r.state.group_post.col(kGroup10) = incl_;
        r.state.fitted_genetic[0] = fitted_;
        r.elbo_trace = std::move(trace);
        r.iterations = iteration_;
        r.converged = converged;
        r.family = TraitFamily::quant;
        r.n_traits = 1;
        r.lfdr.resize(2, p_);
        for (Eigen::Index j = 0; j < p_; ++j) {
            r.lfdr(0, j) = 1.0 - incl_[j];
            r.lfdr(1, j) = 1.0;
        }
        return r;
    }

    const GwasDataset* data_;
    FitConfig cfg_;
    Eigen::Index p_ = 0;
    std::vector<int> sweep_order_;
    Eigen::VectorXd xtx_;
    Eigen::VectorXd xty_;
    double alpha_ = 0.0;
    double sigma_beta_sq_ = 1.0;
    double sigma_e_sq_ = 1.0;
    Eigen::VectorXd mu_, s_sq_, incl_, excl_, fitted_;
    int iteration_ = 0;
};

inline FitResult fit_joint_quant(const GwasDataset& d1, const GwasDataset& d2,
                                 const FitConfig& cfg = {}) {
    return JointQuantSolver(d1, d2, cfg).fit();
}

inline FitResult fit_single_quant(const GwasDataset& d, const FitConfig& cfg = {}) {
    return SingleQuantSolver(d, cfg).fit();
}

} // namespace pleiovb

#endif
