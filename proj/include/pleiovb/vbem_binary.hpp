#ifndef PLEIOVB_VBEM_BINARY_HPP
#define PLEIOVB_VBEM_BINARY_HPP

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pleiovb/dataset.hpp"
#include "pleiovb/errors.hpp"
#include "pleiovb/math.hpp"
#include "pleiovb/types.hpp"
#include "pleiovb/vbem_common.hpp"

namespace pleiovb {

// Fixed curvature of the quadratic lower bound on log-sigmoid.
inline constexpr double kBohningCurvature = 0.25;

// b(psi) = psi/4 - sigmoid(psi), c(psi) = psi^2/8 - sigmoid(psi) psi +
// log(1+e^psi). The bound -a eta^2/2 + (1+b) eta - c <= log sigmoid(eta)
// holds for all eta with equality at eta = psi.
inline std::pair<double, double> bohning_coefficients(double psi) {
    const double s = sigmoid(psi);
    const double b = kBohningCurvature * psi - s;
    const double c = 0.5 * kBohningCurvature * psi * psi - s * psi + log1pexp(psi);
    return {b, c};
}

// y*_i = (1 + b_i) y_i.
inline Eigen::VectorXd working_response(const Eigen::VectorXd& y, const Eigen::VectorXd& b) {
    if (y.size() != b.size()) {
        throw DataError("working_response: vector lengths differ");
    }
    return (1.0 + b.array()).cwiseProduct(y.array()).matrix();
}

namespace detail {

inline void require_binary(const GwasDataset& d, const char* which) {
    if (d.family != TraitFamily::binary) {
        throw DataError(std::string(which) + ": binary solver needs a case-control dataset");
    }
    if (!d.centered) {
        throw DataError(std::string(which) + ": dataset must be centered before fitting");
    }
    if (!d.covariates.has_value() || d.covariates->cols() < 1) {
        throw DataError(std::string(which) + ": binary model requires covariates (at least an intercept)");
    }
}

// Factorized Z^T Z solve for the covariate update, with a conditioning
// check at construction. Rank deficiency is reported with the offending
// column names.
class CovariateSolver {
public:
    CovariateSolver() = default;

    CovariateSolver(const Eigen::MatrixXd& z, const std::vector<std::string>& names) {
        ztz_ = z.transpose() * z;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ztz_);
        const double max_ev = eig.eigenvalues().maxCoeff();
        const double min_ev = eig.eigenvalues().minCoeff();
        if (!(min_ev > 0.0) || max_ev / min_ev > 1e12) {
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
            qr.setThreshold(1e-10);
            const Eigen::Index rank = qr.rank();
            std::string msg = "covariate matrix is rank deficient or ill-conditioned";
            if (rank < z.cols()) {
                msg += "; dependent columns:";
                const auto& perm = qr.colsPermutation().indices();
                for (Eigen::Index c = rank; c < z.cols(); ++c) {
                    const Eigen::Index col = perm[c];
                    msg += " ";
                    msg += col < static_cast<Eigen::Index>(names.size())
                               ? names[static_cast<std::size_t>(col)]
                               : ("column " + std::to_string(col));
                }
            }
            throw NumericalError(msg);
        }
        llt_.compute(ztz_);
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }
    const Eigen::MatrixXd& ztz() const { return ztz_; }

private:
    Eigen::MatrixXd ztz_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

} // namespace detail

// phi = (Z^T Z)^{-1} (a^{-1} Z^T y* - Z^T X m), with X m passed as the
// fitted genetic value vector.
inline Eigen::VectorXd update_covariates(const Eigen::MatrixXd& z,
                                         const std::vector<std::string>& names,
                                         const Eigen::VectorXd& y_star,
                                         const Eigen::VectorXd& fitted_genetic) {
    detail::CovariateSolver solver(z, names);
    const Eigen::VectorXd rhs =
        z.transpose() * (y_star / kBohningCurvature - fitted_genetic);
    return solver.solve(rhs);
}

// VBEM for the joint case-control four-groups model under the Bohning
// bound. Same group structure as the quantitative solver; the Gaussian
// likelihood is replaced by the quadratic surrogate with working response
// y* and per-study covariate fixed effects.
class JointBinarySolver {
public:
    JointBinarySolver(const GwasDataset& d1, const GwasDataset& d2, FitConfig cfg,
                      bool independence_prior = false)
        : data_{&d1, &d2}, cfg_(std::move(cfg)), independence_prior_(independence_prior) {
        cfg_.validate();
        detail::require_binary(d1, "fit_joint_binary");
        detail::require_binary(d2, "fit_joint_binary");
        if (d1.snp_ids != d2.snp_ids) {
            throw DataError("fit_joint_binary: datasets must be aligned (same SNPs, same order)");
        }
        p_ = d1.n_snps();
        sweep_order_ = detail::resolve_sweep_order(cfg_, p_);
        for (int k = 0; k < 2; ++k) {
            xtx_[k] = data_[k]->genotypes.colwise().squaredNorm();
            cov_solver_[k] =
                detail::CovariateSolver(*data_[k]->covariates, data_[k]->covariate_names);
        }
        reset();
    }

    void reset() {
        params_.group_probs = detail::clamp_and_renormalize(cfg_.init_group_probs);
        if (independence_prior_) {
            params_.group_probs = detail::independence_probs(
                params_.group_probs.marginal(0), params_.group_probs.marginal(1));
        }
        params_.sigma_beta_sq = cfg_.init_sigma_beta_sq;
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
            const Eigen::Index n = data_[k]->n_samples();
            st_.fitted_genetic[k] = Eigen::VectorXd::Zero(n);
            st_.psi[k] = Eigen::VectorXd::Zero(n);
            params_.phi[k] = Eigen::VectorXd::Zero(data_[k]->covariates->cols());
            refresh_bound(k);
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
        for (int k = 0; k < 2; ++k) {
            Eigen::VectorXd m(p_);
            for (Eigen::Index j = 0; j < p_; ++j) m[j] = st_.mean_effect(k, j);
            st_.fitted_genetic[k].noalias() = data_[k]->genotypes * m;
            refresh_bound(k);
        }
    }

    void sweep() {
        const double a = kBohningCurvature;
        const auto log_prior = detail::log_group_prior(params_.group_probs);
        // Numerator of mu: x^T y* - a x^T Z phi - a x^T X_{-j} m, with the
        // first two pieces constant over the sweep.
        std::array<Eigen::VectorXd, 2> xtu;
        for (int k = 0; k < 2; ++k) {
            const Eigen::VectorXd u =
                y_star_[k] - a * (*data_[k]->covariates * params_.phi[k]);
            xtu[k].noalias() = data_[k]->genotypes.transpose() * u;
        }
        std::array<double, 2> d;
        for (int j : sweep_order_) {
            for (int k = 0; k < 2; ++k) {
                const auto x = data_[k]->genotypes.col(j);
                st_.fitted_genetic[k].noalias() -= st_.mean_effect(k, j) * x;
                const double denom = a * xtx_[k][j] + 1.0 / params_.sigma_beta_sq[k];
                st_.s_sq(k, j) = 1.0 / denom;
                st_.mu(k, j) = (xtu[k][j] - a * x.dot(st_.fitted_genetic[k])) / denom;
                d[k] = detail::slab_log_odds(st_.mu(k, j), st_.s_sq(k, j),
                                             params_.sigma_beta_sq[k]);
            }
            const auto post = detail::group_posterior(log_prior, d[0], d[1], j, iteration_);
            for (int l = 0; l < 4; ++l) st_.group_post(j, l) = post[l];
            for (int k = 0; k < 2; ++k) {
                st_.fitted_genetic[k].noalias() +=
                    st_.mean_effect(k, j) * data_[k]->genotypes.col(j);
            }
        }
    }

    void m_step() {
        for (int k = 0; k < 2; ++k) {
            double slab_mass = 0.0;
            double slab_second_moment = 0.0;
            for (Eigen::Index j = 0; j < p_; ++j) {
                const double incl = st_.inclusion(k, j);
                slab_mass += incl;
                slab_second_moment += incl * (st_.mu(k, j) * st_.mu(k, j) + st_.s_sq(k, j));
            }
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

    void update_phi_and_psi() {
        for (int k = 0; k < 2; ++k) {
            const Eigen::MatrixXd& z = *data_[k]->covariates;
            const Eigen::VectorXd rhs =
                z.transpose() * (y_star_[k] / kBohningCurvature - st_.fitted_genetic[k]);
            params_.phi[k] = cov_solver_[k].solve(rhs);
            st_.psi[k] = data_[k]->phenotype.cwiseProduct(st_.fitted_genetic[k] +
                                                          z * params_.phi[k]);
            refresh_bound(k);
        }
    }

    // Surrogate lower bound from the analytic expression; monotone over the
    // outer iterations and the statistic used for the pleiotropy LRT.
    double elbo() const {
        const double a = kBohningCurvature;
        double value = 0.0;
        for (int k = 0; k < 2; ++k) {
            const Eigen::VectorXd z_phi = *data_[k]->covariates * params_.phi[k];
            double var_sum = 0.0;
            for (Eigen::Index j = 0; j < p_; ++j) {
                var_sum += detail::effect_variance(st_.inclusion(k, j), st_.mu(k, j),
                                                   st_.s_sq(k, j)) *
                           xtx_[k][j];
            }
            value += st_.fitted_genetic[k].dot(y_star_[k]) -
                     a * st_.fitted_genetic[k].dot(z_phi) -
                     0.5 * a * st_.fitted_genetic[k].squaredNorm() - 0.5 * a * var_sum -
                     st_.bohning_c[k].sum() + y_star_[k].dot(z_phi) -
                     0.5 * a * z_phi.squaredNorm();
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
            throw NumericalError("non-finite surrogate ELBO at iteration " +
                                 std::to_string(iteration_));
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
            update_phi_and_psi();
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
        r.family = TraitFamily::binary;
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

private:
    void refresh_bound(int k) {
        const Eigen::Index n = data_[k]->n_samples();
        st_.bohning_b[k].resize(n);
        st_.bohning_c[k].resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto [b, c] = bohning_coefficients(st_.psi[k][i]);
            st_.bohning_b[k][i] = b;
            st_.bohning_c[k][i] = c;
        }
        y_star_[k] = working_response(data_[k]->phenotype, st_.bohning_b[k]);
    }

    std::array<const GwasDataset*, 2> data_;
    FitConfig cfg_;
    bool independence_prior_;
    Eigen::Index p_ = 0;
    std::vector<int> sweep_order_;
    std::array<Eigen::VectorXd, 2> xtx_;
    std::array<detail::CovariateSolver, 2> cov_solver_;
    std::array<Eigen::VectorXd, 2> y_star_;
    ModelParams params_;
    VariationalState st_;
    int iteration_ = 0;
};

// Two-groups reduction for a single case-control study.
class SingleBinarySolver {
public:
    SingleBinarySolver(const GwasDataset& d, FitConfig cfg)
        : data_(&d), cfg_(std::move(cfg)) {
        cfg_.validate();
        detail::require_binary(d, "fit_single_binary");
        p_ = d.n_snps();
        sweep_order_ = detail::resolve_sweep_order(cfg_, p_);
        xtx_ = d.genotypes.colwise().squaredNorm();
        cov_solver_ = detail::CovariateSolver(*d.covariates, d.covariate_names);
        reset();
    }

    void reset() {
        alpha_ = std::clamp(cfg_.init_group_probs.marginal(0), detail::kPriorClamp,
                            1.0 - detail::kPriorClamp);
        sigma_beta_sq_ = cfg_.init_sigma_beta_sq[0];
        mu_ = Eigen::VectorXd::Zero(p_);
        s_sq_ = Eigen::VectorXd::Constant(p_, sigma_beta_sq_);
        incl_ = Eigen::VectorXd::Constant(p_, alpha_);
        excl_ = Eigen::VectorXd::Constant(p_, 1.0 - alpha_);
        const Eigen::Index n = data_->n_samples();
        fitted_ = Eigen::VectorXd::Zero(n);
        psi_ = Eigen::VectorXd::Zero(n);
        phi_ = Eigen::VectorXd::Zero(data_->covariates->cols());
        refresh_bound();
        iteration_ = 0;
    }

    void sweep() {
        const double a = kBohningCurvature;
        const double log_odds_prior = std::log(alpha_) - std::log1p(-alpha_);
        const Eigen::VectorXd u = y_star_ - a * (*data_->covariates * phi_);
        const Eigen::VectorXd xtu = data_->genotypes.transpose() * u;
        for (int j : sweep_order_) {
            const auto x = data_->genotypes.col(j);
            fitted_.noalias() -= incl_[j] * mu_[j] * x;
            const double denom = a * xtx_[j] + 1.0 / sigma_beta_sq_;
            s_sq_[j] = 1.0 / denom;
            mu_[j] = (xtu[j] - a * x.dot(fitted_)) / denom;
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
        double slab_mass = 0.0;
        double slab_second_moment = 0.0;
        for (Eigen::Index j = 0; j < p_; ++j) {
            slab_mass += incl_[j];
            slab_second_moment += incl_[j] * (mu_[j] * mu_[j] + s_sq_[j]);
        }
        if (slab_mass >= detail::kPriorClamp) {
            sigma_beta_sq_ = slab_second_moment / slab_mass;
        }
        alpha_ = std::clamp(incl_.mean(), detail::kPriorClamp, 1.0 - detail::kPriorClamp);
    }

    void update_phi_and_psi() {
        const Eigen::MatrixXd& z = *data_->covariates;
        const Eigen::VectorXd rhs =
            z.transpose() * (y_star_ / kBohningCurvature - fitted_);
        phi_ = cov_solver_.solve(rhs);
        psi_ = data_->phenotype.cwiseProduct(fitted_ + z * phi_);
        refresh_bound();
    }

    double elbo() const {
        const double a = kBohningCurvature;
        const Eigen::VectorXd z_phi = *data_->covariates * phi_;
        double var_sum = 0.0;
        double kl_gamma = 0.0;
        double kl_slab = 0.0;
        for (Eigen::Index j = 0; j < p_; ++j) {
            var_sum += detail::effect_variance(incl_[j], mu_[j], s_sq_[j]) * xtx_[j];
            if (incl_[j] > 0.0) kl_gamma += incl_[j] * std::log(incl_[j] / alpha_);
            if (excl_[j] > 0.0) kl_gamma += excl_[j] * std::log(excl_[j] / (1.0 - alpha_));
            kl_slab += detail::slab_kl_term(incl_[j], mu_[j], s_sq_[j], sigma_beta_sq_);
        }
        double value = fitted_.dot(y_star_) - a * fitted_.dot(z_phi) -
                       0.5 * a * fitted_.squaredNorm() - 0.5 * a * var_sum - c_.sum() +
                       y_star_.dot(z_phi) - 0.5 * a * z_phi.squaredNorm() - kl_gamma +
                       kl_slab -
                       0.5 * static_cast<double>(p_) * (std::log(2.0 * std::numbers::pi) + 1.0);
        if (!std::isfinite(value)) {
            throw NumericalError("non-finite surrogate ELBO at iteration " +
                                 std::to_string(iteration_));
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
            update_phi_and_psi();
            trace.push_back(elbo());
            if (detail::elbo_converged(trace[trace.size() - 2], trace.back(), cfg_.rel_tol)) {
                converged = true;
                break;
            }
        }
        FitResult r;
        r.params.sigma_beta_sq = {sigma_beta_sq_, 0.0};
        r.params.phi[0] = phi_;
        r.params.group_probs = {1.0 - alpha_, 0.0, alpha_, 0.0};
        r.state.mu = Eigen::MatrixXd::Zero(2, p_);
        r.state.mu.row(0) = mu_.transpose();
        r.state.s_sq = Eigen::MatrixXd::Zero(2, p_);
        r.state.s_sq.row(0) = s_sq_.transpose();
        r.state.group_post = Eigen::MatrixXd::Zero(p_, 4);
        r.state.group_post.col(kGroup00) = excl_;
        r.state.group_post.col(kGroup10) = incl_;
        r.state.fitted_genetic[0] = fitted_;
        r.state.psi[0] = psi_;
        r.state.bohning_b[0] = b_;
        r.state.bohning_c[0] = c_;
        r.elbo_trace = std::move(trace);
        r.iterations = iteration_;
        r.converged = converged;
        r.family = TraitFamily::binary;
        r.n_traits = 1;
        r.lfdr.resize(2, p_);
        for (Eigen::Index j = 0; j < p_; ++j) {
            r.lfdr(0, j) = 1.0 - incl_[j];
            r.lfdr(1, j) = 1.0;
        }
        return r;
    }

    const Eigen::VectorXd& phi() const { return phi_; }

private:
    void refresh_bound() {
        const Eigen::Index n = data_->n_samples();
        b_.resize(n);
        c_.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto [b, c] = bohning_coefficients(psi_[i]);
            b_[i] = b;
            c_[i] = c;
        }
        y_star_ = working_response(data_->phenotype, b_);
    }

    const GwasDataset* data_;
    FitConfig cfg_;
    Eigen::Index p_ = 0;
    std::vector<int> sweep_order_;
    Eigen::VectorXd xtx_;
    detail::CovariateSolver cov_solver_;
    double alpha_ = 0.0;
    double sigma_beta_sq_ = 1.0;
    Eigen::VectorXd mu_, s_sq_, incl_, excl_, fitted_, psi_, b_, c_, y_star_, phi_;
    int iteration_ = 0;
};

inline FitResult fit_joint_binary(const GwasDataset& d1, const GwasDataset& d2,
                                  const FitConfig& cfg = {}) {
    return JointBinarySolver(d1, d2, cfg).fit();
}

inline FitResult fit_single_binary(const GwasDataset& d, const FitConfig& cfg = {}) {
    return SingleBinarySolver(d, cfg).fit();
}

} // namespace pleiovb

#endif
