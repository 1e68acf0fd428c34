#include <doctest.h>

#include <cmath>

#include "pleiovb/rng.hpp"
#include "pleiovb/simulator.hpp"
#include "pleiovb/vbem_binary.hpp"

#include "oracles.hpp"

using namespace pleiovb;

namespace {

std::pair<GwasDataset, GwasDataset> random_binary_pair(int n, int p, std::uint64_t seed,
                                                       double alpha1 = 0.05,
                                                       double g = 0.5) {
    SimConfig cfg;
    cfg.family = TraitFamily::binary;
    cfg.n = n;
    cfg.n_test = 0;
    cfg.p = p;
    cfg.alpha1 = alpha1;
    cfg.g = g;
    cfg.h_sq = 0.5;
    cfg.rho = 0.3;
    cfg.seed = seed;
    auto sim = simulate_pair(cfg);
    return {oracles::wrap_dataset(sim.studies[0].train_genotypes,
                                  sim.studies[0].train_phenotype, TraitFamily::binary),
            oracles::wrap_dataset(sim.studies[1].train_genotypes,
                                  sim.studies[1].train_phenotype, TraitFamily::binary)};
}

} // namespace

TEST_CASE("bohning coefficients at the anchor and a worked point") {
    {
        const auto [b, c] = bohning_coefficients(0.0);
        CHECK(b == doctest::Approx(-0.5).epsilon(1e-15));
        CHECK(c == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    }
    {
        // Direct evaluation of the two formulas at psi = 2.
        const auto [b, c] = bohning_coefficients(2.0);
        CHECK(b == doctest::Approx(-0.3807970779778823).epsilon(1e-12));
        CHECK(c == doctest::Approx(0.8653338550872081).epsilon(1e-12));
    }
}

TEST_CASE("bohning bound properties on a grid") {
    // b stays in (psi/4 - 1, psi/4), c is nonnegative, and the quadratic
    // minorant never exceeds log sigmoid, touching it at eta = psi. Far in
    // the tails sigmoid(psi) underflows past the ulp of psi/4, so the open
    // interval closes to machine equality there.
    int cases = 0;
    for (double psi = -50.0; psi <= 50.0; psi += 0.5) {
        const auto [b, c] = bohning_coefficients(psi);
        CHECK(b >= psi / 4.0 - 1.0);
        CHECK(b <= psi / 4.0);
        if (std::abs(psi) < 30.0) {
            CHECK(b > psi / 4.0 - 1.0);
            CHECK(b < psi / 4.0);
        }
        CHECK(c >= 0.0);
        for (double eta = -50.0; eta <= 50.0; eta += 7.3) {
            const double quadratic = -0.5 * kBohningCurvature * eta * eta +
                                     (1.0 + b) * eta - c;
            const double log_sigmoid = -log1pexp(-eta);
            CHECK(quadratic <= log_sigmoid + 1e-12);
            ++cases;
        }
        const double at_anchor =
            -0.5 * kBohningCurvature * psi * psi + (1.0 + b) * psi - c;
        CHECK(at_anchor == doctest::Approx(-log1pexp(-psi)).epsilon(1e-12));
    }
    CHECK(cases >= 1000);
}

TEST_CASE("working response arithmetic") {
    Eigen::VectorXd y(3);
    y << 1, -1, 1;
    Eigen::VectorXd b(3);
    b << -0.5, -0.5, 0.0;
    const auto ystar = working_response(y, b);
    CHECK(ystar[0] == doctest::Approx(0.5));
    CHECK(ystar[1] == doctest::Approx(-0.5));
    CHECK(ystar[2] == doctest::Approx(1.0));
    Eigen::VectorXd short_b(2);
    CHECK_THROWS_AS(working_response(y, short_b), DataError);
}

TEST_CASE("binary effect posterior update on a worked example") {
    // Raw column (2,2,0,0) centers to (1,1,-1,-1); at initialization psi=0
    // so y* = y/2 = (0.5,0.5,-0.5,-0.5) and phi = 0. With sigma_beta^2 = 1:
    // s^2 = 1/(0.25*4 + 1) = 0.5, mu = (x.y*) * s^2 = 2 * 0.5 = 1.
    Eigen::MatrixXd x(4, 1);
    x << 2, 2, 0, 0;
    Eigen::VectorXd y(4);
    y << 1, 1, -1, -1;
    auto d = oracles::wrap_dataset(x, y, TraitFamily::binary);
    JointBinarySolver solver(d, d, FitConfig{});
    solver.sweep();
    CHECK(solver.state().s_sq(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(solver.state().mu(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("binary zero-information column keeps the prior variance") {
    Eigen::MatrixXd x(4, 1);
    x << 1, 1, 1, 1;
    Eigen::VectorXd y(4);
    y << 1, -1, 1, -1;
    auto d = oracles::wrap_dataset(x, y, TraitFamily::binary);
    JointBinarySolver solver(d, d, FitConfig{});
    solver.sweep();
    CHECK(solver.state().s_sq(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(solver.state().mu(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("covariate update closed forms") {
    SUBCASE("intercept-only with constant working response gives 4v") {
        const int n = 6;
        const Eigen::MatrixXd z = Eigen::MatrixXd::Ones(n, 1);
        const double v = 0.35;
        const Eigen::VectorXd y_star = Eigen::VectorXd::Constant(n, v);
        const Eigen::VectorXd fitted = Eigen::VectorXd::Zero(n);
        const auto phi = update_covariates(z, {"intercept"}, y_star, fitted);
        REQUIRE(phi.size() == 1);
        CHECK(phi[0] == doctest::Approx(4.0 * v).epsilon(1e-12));
    }
    SUBCASE("zero inputs give zero") {
        const Eigen::MatrixXd z = Eigen::MatrixXd::Ones(5, 1);
        const auto phi = update_covariates(z, {"intercept"}, Eigen::VectorXd::Zero(5),
                                           Eigen::VectorXd::Zero(5));
        CHECK(phi[0] == doctest::Approx(0.0));
    }
    SUBCASE("duplicated covariate column is rejected by name") {
        Eigen::MatrixXd z(5, 2);
        z.col(0).setOnes();
        z.col(1).setOnes();
        CHECK_THROWS_WITH_AS(update_covariates(z, {"intercept", "dup"},
                                               Eigen::VectorXd::Zero(5),
                                               Eigen::VectorXd::Zero(5)),
                             doctest::Contains("dup"), NumericalError);
    }
}

TEST_CASE("psi update is the signed linear predictor") {
    // One strong SNP; after an iteration psi must equal y .* (Xm + Z phi).
    auto [d1, d2] = random_binary_pair(120, 10, 41, 0.2);
    JointBinarySolver solver(d1, d2, FitConfig{});
    solver.sweep();
    solver.m_step();
    solver.update_phi_and_psi();
    const auto& st = solver.state();
    for (int k = 0; k < 2; ++k) {
        const GwasDataset& d = k == 0 ? d1 : d2;
        const Eigen::VectorXd eta = st.fitted_genetic[k] + *d.covariates * solver.params().phi[k];
        for (Eigen::Index i = 0; i < d.n_samples(); ++i) {
            CHECK(st.psi[k][i] == doctest::Approx(d.phenotype[i] * eta[i]).epsilon(1e-10));
        }
    }
}

TEST_CASE("initial surrogate bound matches the closed-form zero state") {
    // With m = 0, phi = 0, psi = 0 the data terms collapse to -n log 2 and
    // both KL terms vanish; what remains is the Var[gamma beta] penalty of
    // the prior state (inclusion 0.02, s^2 = sigma_beta^2) and the constant.
    auto [d1, d2] = random_binary_pair(60, 8, 43, 0.25);
    FitConfig cfg;
    JointBinarySolver solver(d1, d2, cfg);
    const double incl0 = cfg.init_group_probs.marginal(0);
    double expected = -8.0 * (std::log(2.0 * M_PI) + 1.0);
    for (int k = 0; k < 2; ++k) {
        const GwasDataset& d = k == 0 ? d1 : d2;
        expected += -static_cast<double>(d.n_samples()) * std::log(2.0);
        for (Eigen::Index j = 0; j < 8; ++j) {
            const double var = incl0 * cfg.init_sigma_beta_sq[k];
            expected += -0.5 * kBohningCurvature * var * d.genotypes.col(j).squaredNorm();
        }
    }
    CHECK(solver.elbo() == doctest::Approx(expected).epsilon(1e-10));

    // And the independently coded evaluator agrees at the same state.
    FitResult snapshot;
    snapshot.params = solver.params();
    snapshot.state = solver.state();
    snapshot.family = TraitFamily::binary;
    snapshot.n_traits = 2;
    CHECK(solver.elbo() ==
          doctest::Approx(oracles::binary_elbo_reference(snapshot, d1, &d2)).epsilon(1e-10));
}

TEST_CASE("binary elbo agrees with the independent evaluator") {
    for (std::uint64_t seed : {51u, 52u}) {
        auto [d1, d2] = random_binary_pair(100, 15, seed);
        auto fit = fit_joint_binary(d1, d2);
        CHECK(fit.final_elbo() ==
              doctest::Approx(oracles::binary_elbo_reference(fit, d1, &d2)).epsilon(1e-9));
    }
    // Single-trait reduction against the same reference.
    auto [d1, d2] = random_binary_pair(90, 12, 53);
    auto fit = fit_single_binary(d1);
    CHECK(fit.final_elbo() ==
          doctest::Approx(oracles::binary_elbo_reference(fit, d1, nullptr)).epsilon(1e-9));
}

TEST_CASE("binary surrogate trace is monotone") {
    for (std::uint64_t seed : {61u, 62u, 63u}) {
        auto [d1, d2] = random_binary_pair(150, 40, seed);
        auto fit = fit_joint_binary(d1, d2);
        for (std::size_t t = 1; t < fit.elbo_trace.size(); ++t) {
            CHECK(fit.elbo_trace[t] >=
                  fit.elbo_trace[t - 1] - 1e-8 * std::abs(fit.elbo_trace[t]));
        }
    }
}

TEST_CASE("balanced classes with no genetics leave the intercept near zero") {
    Rng rng(71);
    const int n = 400;
    const int p = 30;
    auto noise_study = [&] {
        Eigen::MatrixXd x(n, p);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j) {
                const double u = rng.uniform();
                x(i, j) = u < 0.25 ? 0.0 : (u < 0.75 ? 1.0 : 2.0);
            }
        }
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y[i] = i % 2 == 0 ? 1.0 : -1.0;
        return oracles::wrap_dataset(x, y, TraitFamily::binary);
    };
    auto d1 = noise_study();
    auto d2 = noise_study();
    auto fit = fit_joint_binary(d1, d2);
    CHECK(std::abs(fit.params.phi[0][0]) < 0.1);
    CHECK(std::abs(fit.params.phi[1][0]) < 0.1);
}

TEST_CASE("pure-noise binary data stays below confident inclusion") {
    int ok = 0;
    for (int rep = 0; rep < 20; ++rep) {
        Rng rng(5000 + rep);
        const int n = 600;
        const int p = 200;
        auto noise_study = [&] {
            Eigen::MatrixXd x(n, p);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < p; ++j) {
                    const double u = rng.uniform();
                    x(i, j) = u < 0.25 ? 0.0 : (u < 0.75 ? 1.0 : 2.0);
                }
            }
            Eigen::VectorXd y(n);
            for (int i = 0; i < n; ++i) y[i] = i % 2 == 0 ? 1.0 : -1.0;
            return oracles::wrap_dataset(x, y, TraitFamily::binary);
        };
        auto d1 = noise_study();
        auto d2 = noise_study();
        auto fit = fit_joint_binary(d1, d2);
        double max_incl = 0.0;
        for (int j = 0; j < p; ++j) {
            max_incl = std::max({max_incl, fit.state.inclusion(0, j),
                                 fit.state.inclusion(1, j)});
        }
        if (max_incl < 0.5) ++ok;
    }
    // As in the quantitative case, shrinkage occasionally concentrates on a
    // single noise SNP (measured rate ~0.85 across seeds); 70% of the fixed
    // seed set is the sustained bar.
    CHECK(ok >= 14);
}

TEST_CASE("dominant liability signal is detected") {
    SimConfig cfg;
    cfg.family = TraitFamily::binary;
    cfg.n = 500;
    cfg.n_test = 0;
    cfg.p = 30;
    cfg.alpha1 = 1.0 / 30.0 + 1e-9; // exactly one causal SNP
    cfg.g = 1.0;
    cfg.h_sq = 0.5;
    cfg.rho = 0.2;
    cfg.seed = 81;
    auto sim = simulate_pair(cfg);
    auto d1 = oracles::wrap_dataset(sim.studies[0].train_genotypes,
                                    sim.studies[0].train_phenotype, TraitFamily::binary);
    auto d2 = oracles::wrap_dataset(sim.studies[1].train_genotypes,
                                    sim.studies[1].train_phenotype, TraitFamily::binary);
    auto fit = fit_joint_binary(d1, d2);
    int causal = -1;
    for (int j = 0; j < cfg.p; ++j) {
        if (sim.truth.gamma(j, 0) != 0) causal = j;
    }
    REQUIRE(causal >= 0);
    CHECK(fit.state.inclusion(0, causal) > 0.95);
}

TEST_CASE("binary group rows are normalized and the cache is consistent") {
    auto [d1, d2] = random_binary_pair(200, 60, 91);
    auto fit = fit_joint_binary(d1, d2);
    for (Eigen::Index j = 0; j < 60; ++j) {
        CHECK(fit.state.group_post.row(j).sum() == doctest::Approx(1.0).epsilon(1e-10));
    }
    for (int k = 0; k < 2; ++k) {
        const GwasDataset& d = k == 0 ? d1 : d2;
        Eigen::VectorXd m(60);
        for (Eigen::Index j = 0; j < 60; ++j) m[j] = fit.state.mean_effect(k, j);
        const Eigen::VectorXd recomputed = d.genotypes * m;
        CHECK((fit.state.fitted_genetic[k] - recomputed).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("binary permutation equivariance with a matching sweep order") {
    auto [d1, d2] = random_binary_pair(100, 20, 101);
    FitConfig cfg;
    auto base = fit_joint_binary(d1, d2, cfg);

    std::vector<int> perm = {5,  12, 0, 19, 7, 3,  15, 1, 9,  17,
                             11, 2,  8, 14, 4, 18, 6,  13, 10, 16};
    auto permute = [&](const GwasDataset& d) {
        GwasDataset out = d;
        for (int t = 0; t < 20; ++t) {
            out.genotypes.col(t) = d.genotypes.col(perm[t]);
            out.snp_ids[t] = d.snp_ids[perm[t]];
            out.column_means[t] = d.column_means[perm[t]];
        }
        return out;
    };
    GwasDataset p1 = permute(d1);
    GwasDataset p2 = permute(d2);
    FitConfig cfg_perm = cfg;
    std::vector<int> inv(20);
    for (int t = 0; t < 20; ++t) inv[perm[t]] = t;
    cfg_perm.sweep_order = inv;
    auto permuted = fit_joint_binary(p1, p2, cfg_perm);

    CHECK(permuted.final_elbo() == doctest::Approx(base.final_elbo()).epsilon(1e-8));
    for (int t = 0; t < 20; ++t) {
        CHECK(permuted.state.inclusion(0, t) ==
              doctest::Approx(base.state.inclusion(0, perm[t])).epsilon(1e-8));
    }
}

TEST_CASE("binary solver requires covariates and binary phenotypes") {
    auto [d1, d2] = random_binary_pair(40, 5, 121, 0.4);
    GwasDataset no_cov = d1;
    no_cov.covariates.reset();
    CHECK_THROWS_AS(fit_joint_binary(no_cov, d2), DataError);

    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 2, 1;
    Eigen::VectorXd y(4);
    y << 0.5, -0.2, 1.0, 0.1;
    auto quant = oracles::wrap_dataset(x, y, TraitFamily::quant);
    CHECK_THROWS_AS(fit_single_binary(quant), DataError);
}
