// Command-line front end: simulate / fit / test-pleiotropy / predict /
// benchmark subcommands over the TSV+JSON formats described in the README.

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pleiovb/benchmark.hpp"
#include "pleiovb/dataset.hpp"
#include "pleiovb/inference.hpp"
#include "pleiovb/io.hpp"
#include "pleiovb/metrics.hpp"
#include "pleiovb/simulator.hpp"
#include "pleiovb/vbem_binary.hpp"
#include "pleiovb/vbem_quant.hpp"

using nlohmann::json;
using namespace pleiovb;

namespace {

TraitFamily parse_family(const std::string& name) {
    if (name == "quant") return TraitFamily::quant;
    if (name == "binary") return TraitFamily::binary;
    throw UsageError("unknown family '" + name + "' (expected quant or binary)");
}

json group_probs_to_json(const GroupProbs& g) {
    return json{{"a00", g.a00}, {"a01", g.a01}, {"a10", g.a10}, {"a11", g.a11}};
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << text;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    SimConfig config;
    std::string family = "quant";
    std::string out_dir;
    bool alpha1_given = false;
};

void run_simulate(const SimulateArgs& args) {
    SimConfig cfg = args.config;
    cfg.family = parse_family(args.family);
    if (!args.alpha1_given && cfg.family == TraitFamily::binary) {
        cfg.alpha1 = 0.0025;
    }
    cfg.validate();
    std::filesystem::create_directories(args.out_dir);
    const auto sim = simulate_pair(cfg);

    json manifest;
    manifest["family"] = to_string(cfg.family);
    manifest["n"] = cfg.n;
    manifest["n_test"] = cfg.n_test;
    manifest["p"] = cfg.p;
    manifest["rho"] = cfg.rho;
    manifest["maf_low"] = cfg.maf_low;
    manifest["maf_high"] = cfg.maf_high;
    manifest["alpha1"] = cfg.alpha1;
    manifest["g"] = cfg.g;
    manifest["h_sq"] = cfg.h_sq;
    if (cfg.family == TraitFamily::binary) {
        manifest["prevalence"] = cfg.prevalence;
        manifest["case_ratio"] = cfg.case_ratio;
    }
    manifest["seed"] = cfg.seed;
    manifest["sigma_e_sq"] = {sim.truth.sigma_e_sq[0], sim.truth.sigma_e_sq[1]};
    if (cfg.family == TraitFamily::binary) {
        manifest["liability_threshold"] = {sim.truth.liability_threshold[0],
                                           sim.truth.liability_threshold[1]};
    }

    const std::filesystem::path dir(args.out_dir);
    json files;
    for (int k = 0; k < 2; ++k) {
        const std::string study = "study" + std::to_string(k + 1);
        const auto& s = sim.studies[k];
        const std::string train_geno = study + ".train.geno.tsv";
        const std::string train_pheno = study + ".train.pheno.tsv";
        write_genotype_tsv(dir / train_geno, sim.train_sample_ids[k], sim.snp_ids,
                           s.train_genotypes);
        write_phenotype_tsv(dir / train_pheno, sim.train_sample_ids[k], s.train_phenotype);
        files[study]["train_genotypes"] = train_geno;
        files[study]["train_phenotype"] = train_pheno;
        if (cfg.n_test > 0) {
            const std::string test_geno = study + ".test.geno.tsv";
            const std::string test_pheno = study + ".test.pheno.tsv";
            write_genotype_tsv(dir / test_geno, sim.test_sample_ids[k], sim.snp_ids,
                               s.test_genotypes);
            write_phenotype_tsv(dir / test_pheno, sim.test_sample_ids[k], s.test_phenotype);
            files[study]["test_genotypes"] = test_geno;
            files[study]["test_phenotype"] = test_pheno;
        }
    }
    {
        std::ostringstream truth;
        truth << "snp_id\tgamma1\tgamma2\tbeta1\tbeta2\n";
        for (int j = 0; j < cfg.p; ++j) {
            truth << sim.snp_ids[static_cast<std::size_t>(j)] << '\t'
                  << sim.truth.gamma(j, 0) << '\t' << sim.truth.gamma(j, 1) << '\t'
                  << format_double(sim.truth.beta(j, 0)) << '\t'
                  << format_double(sim.truth.beta(j, 1)) << '\n';
        }
        write_text_file(dir / "truth.tsv", truth.str());
        files["truth"] = "truth.tsv";
    }
    manifest["files"] = files;
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote simulated pair to " << args.out_dir << "\n";
}

// --------------------------------------------------------------------- fit

struct StudyPaths {
    std::string geno;
    std::string pheno;
    std::string covar;
};

struct FitArgs {
    std::string family = "quant";
    std::string mode = "joint";
    StudyPaths study1;
    StudyPaths study2;
    std::string out_prefix;
    FitConfig fit;
};

std::pair<GwasDataset, GwasDataset> load_pair(const FitArgs& args, TraitFamily family) {
    if (family == TraitFamily::quant &&
        (!args.study1.covar.empty() || !args.study2.covar.empty())) {
        throw UsageError("covariates are supported for --family binary only");
    }
    auto opt = [](const std::string& s) {
        return s.empty() ? std::nullopt : std::optional<std::string>(s);
    };
    GwasDataset d1 = center(
        load_dataset(args.study1.geno, args.study1.pheno, opt(args.study1.covar), family));
    GwasDataset d2 = center(
        load_dataset(args.study2.geno, args.study2.pheno, opt(args.study2.covar), family));
    return align_pair(std::move(d1), std::move(d2));
}

json dataset_centering_json(const GwasDataset& d) {
    json out;
    out["phenotype_mean"] = d.phenotype_mean;
    std::vector<double> means(d.column_means.data(),
                              d.column_means.data() + d.column_means.size());
    out["column_means"] = means;
    return out;
}

void write_snp_table(const std::string& path, const std::vector<std::string>& snp_ids,
                     const Eigen::MatrixXd& mu, const Eigen::MatrixXd& s_sq,
                     const Eigen::MatrixXd& group_post, const Eigen::MatrixXd& lfdr) {
    std::ostringstream out;
    out << "snp_id\tmu1\tmu2\ts1_sq\ts2_sq\ta00\ta01\ta10\ta11\tlfdr1\tlfdr2\n";
    for (Eigen::Index j = 0; j < mu.cols(); ++j) {
        out << snp_ids[static_cast<std::size_t>(j)] << '\t' << format_double(mu(0, j))
            << '\t' << format_double(mu(1, j)) << '\t' << format_double(s_sq(0, j)) << '\t'
            << format_double(s_sq(1, j)) << '\t' << format_double(group_post(j, kGroup00))
            << '\t' << format_double(group_post(j, kGroup01)) << '\t'
            << format_double(group_post(j, kGroup10)) << '\t'
            << format_double(group_post(j, kGroup11)) << '\t'
            << format_double(lfdr(0, j)) << '\t' << format_double(lfdr(1, j)) << '\n';
    }
    write_text_file(path, out.str());
}

void run_fit(const FitArgs& args) {
    const TraitFamily family = parse_family(args.family);
    if (args.mode != "joint" && args.mode != "separate") {
        throw UsageError("unknown mode '" + args.mode + "' (expected joint or separate)");
    }
    auto [d1, d2] = load_pair(args, family);

    json params;
    params["family"] = to_string(family);
    params["mode"] = args.mode;
    params["snp_ids"] = d1.snp_ids;
    params["centering"] = {dataset_centering_json(d1), dataset_centering_json(d2)};

    const auto start = std::chrono::steady_clock::now();
    if (args.mode == "joint") {
        FitResult fit = family == TraitFamily::quant ? fit_joint_quant(d1, d2, args.fit)
                                                     : fit_joint_binary(d1, d2, args.fit);
        const double wall = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - start)
                                .count();
        params["sigma_beta_sq"] = {fit.params.sigma_beta_sq[0], fit.params.sigma_beta_sq[1]};
        if (family == TraitFamily::quant) {
            params["sigma_e_sq"] = {fit.params.sigma_e_sq[0], fit.params.sigma_e_sq[1]};
        } else {
            for (int k = 0; k < 2; ++k) {
                std::vector<double> phi(fit.params.phi[k].data(),
                                        fit.params.phi[k].data() + fit.params.phi[k].size());
                params["phi"].push_back(phi);
            }
        }
        params["group_probs"] = group_probs_to_json(fit.params.group_probs);
        params["elbo_trace"] = fit.elbo_trace;
        params["iterations"] = fit.iterations;
        params["converged"] = fit.converged;
        params["wall_time_sec"] = wall;
        write_snp_table(args.out_prefix + ".snps.tsv", d1.snp_ids, fit.state.mu,
                        fit.state.s_sq, fit.state.group_post, fit.lfdr);
    } else {
        std::array<FitResult, 2> fits;
        const std::array<const GwasDataset*, 2> data = {&d1, &d2};
        for (int k = 0; k < 2; ++k) {
            fits[k] = family == TraitFamily::quant ? fit_single_quant(*data[k], args.fit)
                                                   : fit_single_binary(*data[k], args.fit);
        }
        const double wall = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - start)
                                .count();
        params["sigma_beta_sq"] = {fits[0].params.sigma_beta_sq[0],
                                   fits[1].params.sigma_beta_sq[0]};
        if (family == TraitFamily::quant) {
            params["sigma_e_sq"] = {fits[0].params.sigma_e_sq[0], fits[1].params.sigma_e_sq[0]};
        } else {
            for (int k = 0; k < 2; ++k) {
                std::vector<double> phi(fits[k].params.phi[0].data(),
                                        fits[k].params.phi[0].data() +
                                            fits[k].params.phi[0].size());
                params["phi"].push_back(phi);
            }
        }
        // Independence product of the two marginal inclusion priors; the
        // separate model has no cross-trait coupling.
        const double pi1 = fits[0].params.group_probs.marginal(0);
        const double pi2 = fits[1].params.group_probs.marginal(0);
        params["group_probs"] = group_probs_to_json(detail::independence_probs(pi1, pi2));
        for (int k = 0; k < 2; ++k) {
            json study;
            study["elbo_trace"] = fits[k].elbo_trace;
            study["iterations"] = fits[k].iterations;
            study["converged"] = fits[k].converged;
            params["study" + std::to_string(k + 1)] = study;
        }
        params["converged"] = fits[0].converged && fits[1].converged;
        params["wall_time_sec"] = wall;

        const Eigen::Index p = d1.n_snps();
        Eigen::MatrixXd mu(2, p);
        Eigen::MatrixXd s_sq(2, p);
        Eigen::MatrixXd group_post(p, 4);
        Eigen::MatrixXd lfdr(2, p);
        for (Eigen::Index j = 0; j < p; ++j) {
            mu(0, j) = fits[0].state.mu(0, j);
            mu(1, j) = fits[1].state.mu(0, j);
            s_sq(0, j) = fits[0].state.s_sq(0, j);
            s_sq(1, j) = fits[1].state.s_sq(0, j);
            const double in1 = fits[0].state.inclusion(0, j);
            const double in2 = fits[1].state.inclusion(0, j);
            group_post(j, kGroup00) = (1.0 - in1) * (1.0 - in2);
            group_post(j, kGroup01) = (1.0 - in1) * in2;
            group_post(j, kGroup10) = in1 * (1.0 - in2);
            group_post(j, kGroup11) = in1 * in2;
            lfdr(0, j) = 1.0 - in1;
            lfdr(1, j) = 1.0 - in2;
        }
        write_snp_table(args.out_prefix + ".snps.tsv", d1.snp_ids, mu, s_sq, group_post,
                        lfdr);
    }
    write_text_file(args.out_prefix + ".params.json", params.dump(2) + "\n");
    std::cout << "wrote " << args.out_prefix << ".params.json and " << args.out_prefix
              << ".snps.tsv\n";
}

// --------------------------------------------------------- test-pleiotropy

struct LrtArgs {
    std::string family = "quant";
    StudyPaths study1;
    StudyPaths study2;
    std::string out;
    FitConfig fit;
};

void run_test_pleiotropy(const LrtArgs& args) {
    const TraitFamily family = parse_family(args.family);
    FitArgs loader;
    loader.study1 = args.study1;
    loader.study2 = args.study2;
    auto [d1, d2] = load_pair(loader, family);
    const PleiotropyTest test = pleiotropy_lrt(d1, d2, args.fit, family);

    json out;
    out["lambda"] = test.lambda;
    out["p_value"] = test.p_value;
    out["alpha_hat"] = group_probs_to_json(test.alt_params.group_probs);
    out["null_alpha_hat"] = group_probs_to_json(test.null_params.group_probs);
    out["alt_elbo"] = test.alt_elbo;
    out["null_elbo"] = test.null_elbo;
    out["alt_converged"] = test.alt_converged;
    out["null_converged"] = test.null_converged;
    const std::string text = out.dump(2) + "\n";
    std::cout << text;
    if (!args.out.empty()) write_text_file(args.out, text);
}

// ----------------------------------------------------------------- predict

struct PredictArgs {
    std::string params_path;
    std::string snps_path;
    std::string geno_path;
    std::string covar_path;
    int trait = 1;
    std::string out;
};

void run_predict(const PredictArgs& args) {
    std::ifstream in(args.params_path);
    if (!in) throw DataError("cannot open params file: " + args.params_path);
    json params = json::parse(in, nullptr, true);
    const TraitFamily family = parse_family(params.at("family").get<std::string>());
    if (args.trait != 1 && args.trait != 2) {
        throw UsageError("--trait must be 1 or 2");
    }
    if (family == TraitFamily::quant && !args.covar_path.empty()) {
        throw UsageError("covariates are supported for --family binary only");
    }
    const int k = args.trait - 1;

    const auto snp_ids = params.at("snp_ids").get<std::vector<std::string>>();
    const auto centering = params.at("centering").at(static_cast<std::size_t>(k));
    const double phenotype_mean = centering.at("phenotype_mean").get<double>();
    const auto mean_vec = centering.at("column_means").get<std::vector<double>>();
    if (mean_vec.size() != snp_ids.size()) {
        throw DataError("params file centering constants do not match snp_ids");
    }

    // Per-SNP posterior effects from the fit table.
    std::ifstream snps(args.snps_path);
    if (!snps) throw DataError("cannot open per-SNP fit file: " + args.snps_path);
    std::string line;
    std::getline(snps, line);
    const auto header = detail::split_tab(line);
    const std::vector<std::string> expected = {"snp_id", "mu1",  "mu2",  "s1_sq",
                                               "s2_sq",  "a00",  "a01",  "a10",
                                               "a11",    "lfdr1", "lfdr2"};
    if (header != expected) {
        throw DataError("unexpected per-SNP fit table header in " + args.snps_path);
    }
    std::vector<double> effect;
    std::vector<std::string> table_ids;
    while (std::getline(snps, line)) {
        if (line.empty()) continue;
        const auto fields = detail::split_tab(line);
        if (fields.size() != expected.size()) {
            throw DataError("malformed per-SNP fit row in " + args.snps_path);
        }
        table_ids.push_back(fields[0]);
        const double mu = detail::parse_double(fields[static_cast<std::size_t>(1 + k)],
                                               "in per-SNP fit table");
        const double a01 = detail::parse_double(fields[6], "in per-SNP fit table");
        const double a10 = detail::parse_double(fields[7], "in per-SNP fit table");
        const double a11 = detail::parse_double(fields[8], "in per-SNP fit table");
        const double incl = k == 0 ? a10 + a11 : a01 + a11;
        effect.push_back(incl * mu);
    }
    if (table_ids != snp_ids) {
        throw DataError("per-SNP fit table SNPs do not match the params file");
    }

    auto geno = detail::read_tsv_table(args.geno_path, "genotype");
    if (geno.column_names != snp_ids) {
        throw DataError("prediction genotypes must cover the fitted SNPs in order");
    }
    detail::validate_raw_genotypes(geno.values);

    std::optional<detail::TsvTable> covar;
    Eigen::VectorXd phi;
    if (family == TraitFamily::binary) {
        const auto phi_vecs = params.at("phi").get<std::vector<std::vector<double>>>();
        phi = Eigen::Map<const Eigen::VectorXd>(phi_vecs[static_cast<std::size_t>(k)].data(),
                                                static_cast<Eigen::Index>(
                                                    phi_vecs[static_cast<std::size_t>(k)].size()));
        if (!args.covar_path.empty()) {
            covar = detail::read_tsv_table(args.covar_path, "covariate");
            detail::check_sample_alignment(geno.row_ids, covar->row_ids, "covariate file");
        }
    }

    std::ostringstream out;
    out << (family == TraitFamily::quant ? "sample_id\tprediction\n"
                                         : "sample_id\teta\tprob\n");
    for (Eigen::Index i = 0; i < geno.values.rows(); ++i) {
        double eta = 0.0;
        for (Eigen::Index j = 0; j < geno.values.cols(); ++j) {
            eta += (geno.values(i, j) - mean_vec[static_cast<std::size_t>(j)]) *
                   effect[static_cast<std::size_t>(j)];
        }
        if (family == TraitFamily::quant) {
            out << geno.row_ids[static_cast<std::size_t>(i)] << '\t'
                << format_double(phenotype_mean + eta) << '\n';
        } else {
            Eigen::VectorXd z = Eigen::VectorXd::Ones(phi.size());
            if (covar.has_value()) {
                if (covar->values.cols() + 1 == phi.size()) {
                    z.tail(covar->values.cols()) = covar->values.row(i);
                } else if (covar->values.cols() == phi.size()) {
                    z = covar->values.row(i);
                } else {
                    throw DataError("covariate count does not match the fitted phi length");
                }
            } else if (phi.size() != 1) {
                throw DataError("fit used covariates; pass --covar for prediction");
            }
            eta += z.dot(phi);
            out << geno.row_ids[static_cast<std::size_t>(i)] << '\t' << format_double(eta)
                << '\t' << format_double(sigmoid(eta)) << '\n';
        }
    }
    write_text_file(args.out, out.str());
    std::cout << "wrote " << args.out << "\n";
}

// --------------------------------------------------------------- benchmark

struct BenchmarkArgs {
    BenchmarkConfig config;
    std::string family = "quant";
    std::string g_grid = "0,0.5,1";
    std::string out;
};

void run_benchmark_cmd(const BenchmarkArgs& args) {
    BenchmarkConfig cfg = args.config;
    cfg.family = parse_family(args.family);
    cfg.g_grid.clear();
    std::stringstream grid(args.g_grid);
    std::string item;
    while (std::getline(grid, item, ',')) {
        if (item.empty()) continue;
        try {
            cfg.g_grid.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw UsageError("could not parse --g-grid entry '" + item + "'");
        }
    }
    if (cfg.g_grid.empty()) throw UsageError("--g-grid must list at least one value");

    const auto rows = run_benchmark(cfg);
    std::ostringstream out;
    out << "g,replicate,method,auc,power,fdr,prediction\n";
    for (const auto& r : rows) {
        out << format_double(r.g) << ',' << r.replicate << ',' << r.method << ','
            << format_double(r.auc) << ',' << format_double(r.power) << ','
            << format_double(r.fdr) << ',' << format_double(r.prediction) << '\n';
    }
    write_text_file(args.out, out.str());
    std::cout << "wrote " << rows.size() << " rows to " << args.out << "\n";
}

void add_fit_flags(CLI::App* cmd, FitConfig& fit) {
    cmd->add_option("--max-iter", fit.max_iter, "Maximum outer iterations");
    cmd->add_option("--rel-tol", fit.rel_tol, "Relative ELBO change for convergence");
}

void add_study_flags(CLI::App* cmd, StudyPaths& s1, StudyPaths& s2) {
    cmd->add_option("--geno1", s1.geno, "Study 1 genotype TSV")->required();
    cmd->add_option("--pheno1", s1.pheno, "Study 1 phenotype TSV")->required();
    cmd->add_option("--covar1", s1.covar, "Study 1 covariate TSV");
    cmd->add_option("--geno2", s2.geno, "Study 2 genotype TSV")->required();
    cmd->add_option("--pheno2", s2.pheno, "Study 2 phenotype TSV")->required();
    cmd->add_option("--covar2", s2.covar, "Study 2 covariate TSV");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint spike-slab analysis of paired GWAS with pleiotropy inference"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic study pair");
    sim->add_option("--family", sim_args.family, "quant or binary")->required();
    sim->add_option("--n", sim_args.config.n, "Training samples per study");
    sim->add_option("--n-test", sim_args.config.n_test, "Held-out samples per study");
    sim->add_option("--p", sim_args.config.p, "Number of SNPs")->required();
    sim->add_option("--rho", sim_args.config.rho, "AR(1) latent correlation");
    sim->add_option("--maf-low", sim_args.config.maf_low, "Lower MAF bound");
    sim->add_option("--maf-high", sim_args.config.maf_high, "Upper MAF bound");
    auto* a1 = sim->add_option("--alpha1", sim_args.config.alpha1, "Non-null proportion");
    sim->add_option("--g", sim_args.config.g, "Pleiotropy level in [0,1]");
    sim->add_option("--h2", sim_args.config.h_sq, "Heritability");
    auto* prev = sim->add_option("--prevalence", sim_args.config.prevalence,
                                 "Population prevalence (binary only)");
    auto* ratio = sim->add_option("--case-ratio", sim_args.config.case_ratio,
                                  "Case fraction of samples (binary only)");
    sim->add_option("--seed", sim_args.config.seed, "RNG seed");
    sim->add_option("--out-dir", sim_args.out_dir, "Output directory")->required();
    sim->callback([&] {
        if (sim_args.family == "quant" && (prev->count() > 0 || ratio->count() > 0)) {
            throw UsageError("--prevalence/--case-ratio apply to --family binary only");
        }
        sim_args.alpha1_given = a1->count() > 0;
        run_simulate(sim_args);
    });

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "Fit the joint or separate model");
    fit->add_option("--family", fit_args.family, "quant or binary")->required();
    fit->add_option("--mode", fit_args.mode, "joint or separate")->required();
    add_study_flags(fit, fit_args.study1, fit_args.study2);
    fit->add_option("--out-prefix", fit_args.out_prefix, "Output file prefix")->required();
    add_fit_flags(fit, fit_args.fit);
    fit->callback([&] { run_fit(fit_args); });

    LrtArgs lrt_args;
    auto* lrt = app.add_subcommand("test-pleiotropy", "Likelihood-ratio test of pleiotropy");
    lrt->add_option("--family", lrt_args.family, "quant or binary")->required();
    add_study_flags(lrt, lrt_args.study1, lrt_args.study2);
    lrt->add_option("--out", lrt_args.out, "Optional JSON output path");
    add_fit_flags(lrt, lrt_args.fit);
    lrt->callback([&] { run_test_pleiotropy(lrt_args); });

    PredictArgs pred_args;
    auto* pred = app.add_subcommand("predict", "Predict phenotypes for new genotypes");
    pred->add_option("--params", pred_args.params_path, "Fit params JSON")->required();
    pred->add_option("--snps", pred_args.snps_path, "Fit per-SNP TSV")->required();
    pred->add_option("--geno", pred_args.geno_path, "New genotype TSV")->required();
    pred->add_option("--covar", pred_args.covar_path, "New covariate TSV (binary)");
    pred->add_option("--trait", pred_args.trait, "Which study's model to use (1 or 2)");
    pred->add_option("--out", pred_args.out, "Output TSV path")->required();
    pred->callback([&] { run_predict(pred_args); });

    BenchmarkArgs bench_args;
    auto* bench = app.add_subcommand("benchmark",
                                     "Simulate/fit/score across a pleiotropy grid");
    bench->add_option("--family", bench_args.family, "quant or binary")->required();
    bench->add_option("--g-grid", bench_args.g_grid, "Comma-separated pleiotropy levels");
    bench->add_option("--replicates", bench_args.config.replicates, "Replicates per g");
    bench->add_option("--n", bench_args.config.n, "Training samples per study");
    bench->add_option("--n-test", bench_args.config.n_test, "Held-out samples per study");
    bench->add_option("--p", bench_args.config.p, "Number of SNPs");
    bench->add_option("--alpha1", bench_args.config.alpha1, "Non-null proportion");
    bench->add_option("--h2", bench_args.config.h_sq, "Heritability");
    bench->add_option("--rho", bench_args.config.rho, "AR(1) latent correlation");
    bench->add_option("--tau", bench_args.config.tau, "Global FDR target");
    bench->add_option("--prevalence", bench_args.config.prevalence,
                      "Population prevalence (binary)");
    bench->add_option("--case-ratio", bench_args.config.case_ratio,
                      "Case fraction (binary)");
    bench->add_option("--seed", bench_args.config.seed, "RNG seed");
    bench->add_option("--threads", bench_args.config.threads,
                      "Worker pool width (default: PLEIOVB_THREADS or hardware)");
    bench->add_option("--rel-tol", bench_args.config.fit.rel_tol, "Solver tolerance");
    bench->add_option("--max-iter", bench_args.config.fit.max_iter, "Solver iteration cap");
    bench->add_option("--out", bench_args.out, "Output CSV path")->required();
    bench->callback([&] { run_benchmark_cmd(bench_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
