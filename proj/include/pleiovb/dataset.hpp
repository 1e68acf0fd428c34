#ifndef PLEIOVB_DATASET_HPP
#define PLEIOVB_DATASET_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pleiovb/errors.hpp"
#include "pleiovb/types.hpp"

namespace pleiovb {

// One study's data. Genotypes are raw {0,1,2} until center() is applied;
// binary phenotypes are stored as -1/+1. Covariates (binary family) carry
// an all-ones intercept as the first column.
struct GwasDataset {
    Eigen::MatrixXd genotypes; // n x p
    Eigen::VectorXd phenotype; // n
    std::optional<Eigen::MatrixXd> covariates; // n x p0
    std::vector<std::string> snp_ids;
    std::vector<std::string> sample_ids;
    std::vector<std::string> covariate_names;
    Eigen::VectorXd column_means; // c_k1..c_kp, set by center()
    double phenotype_mean = 0.0;  // c_k0
    bool centered = false;
    TraitFamily family = TraitFamily::quant;

    Eigen::Index n_samples() const { return genotypes.rows(); }
    Eigen::Index n_snps() const { return genotypes.cols(); }
};

namespace detail {

inline void validate_raw_genotypes(const Eigen::MatrixXd& g) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
            const double v = g(i, j);
            if (std::isnan(v)) {
                throw DataError("missing value in genotype matrix at row " +
                                std::to_string(i) + ", column " + std::to_string(j));
            }
            if (v != 0.0 && v != 1.0 && v != 2.0) {
                throw DataError("invalid genotype " + std::to_string(v) +
                                " at row " + std::to_string(i) + ", column " +
                                std::to_string(j) + " (expected 0, 1 or 2)");
            }
        }
    }
}

inline Eigen::VectorXd normalize_binary_phenotype(const Eigen::VectorXd& y) {
    bool zero_one = true;
    bool pm_one = true;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double v = y[i];
        if (v != 0.0 && v != 1.0) zero_one = false;
        if (v != -1.0 && v != 1.0) pm_one = false;
    }
    if (pm_one) return y;
    if (zero_one) {
        Eigen::VectorXd out(y.size());
        for (Eigen::Index i = 0; i < y.size(); ++i) out[i] = y[i] == 1.0 ? 1.0 : -1.0;
        return out;
    }
    throw DataError("binary phenotype must take values in {0,1} or {-1,+1}");
}

} // namespace detail

// Validates dimensions/value ranges and normalizes binary phenotypes to
// -1/+1. File parsing lives in io.hpp; this is the in-memory assembly step.
inline GwasDataset make_dataset(Eigen::MatrixXd genotypes, Eigen::VectorXd phenotype,
                                std::optional<Eigen::MatrixXd> covariates,
                                std::vector<std::string> snp_ids,
                                std::vector<std::string> sample_ids,
                                std::vector<std::string> covariate_names,
                                TraitFamily family) {
    const Eigen::Index n = genotypes.rows();
    if (phenotype.size() != n) {
        throw DataError("dimension mismatch: " + std::to_string(n) +
                        " genotype rows vs " + std::to_string(phenotype.size()) +
                        " phenotype entries");
    }
    if (static_cast<Eigen::Index>(snp_ids.size()) != genotypes.cols()) {
        throw DataError("dimension mismatch: snp id count does not match genotype columns");
    }
    if (static_cast<Eigen::Index>(sample_ids.size()) != n) {
        throw DataError("dimension mismatch: sample id count does not match genotype rows");
    }
    detail::validate_raw_genotypes(genotypes);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::isnan(phenotype[i])) {
            throw DataError("missing value in phenotype at row " + std::to_string(i));
        }
    }

    GwasDataset d;
    d.family = family;
    if (family == TraitFamily::binary) {
        d.phenotype = detail::normalize_binary_phenotype(phenotype);
        // The binary model always carries fixed effects; default to the
        // intercept when no covariate file is given.
        if (!covariates.has_value()) {
            covariates = Eigen::MatrixXd::Ones(n, 1);
            covariate_names = {"intercept"};
        }
    } else {
        d.phenotype = std::move(phenotype);
    }
    if (covariates.has_value()) {
        if (covariates->rows() != n) {
            throw DataError("dimension mismatch: covariate rows do not match samples");
        }
        const bool has_intercept = [&] {
            for (Eigen::Index c = 0; c < covariates->cols(); ++c) {
                if ((covariates->col(c).array() == 1.0).all()) return true;
            }
            return false;
        }();
        if (!has_intercept) {
            Eigen::MatrixXd z(n, covariates->cols() + 1);
            z.col(0).setOnes();
            z.rightCols(covariates->cols()) = *covariates;
            covariates = std::move(z);
            covariate_names.insert(covariate_names.begin(), "intercept");
        }
    }
    d.genotypes = std::move(genotypes);
    d.covariates = std::move(covariates);
    d.snp_ids = std::move(snp_ids);
    d.sample_ids = std::move(sample_ids);
    d.covariate_names = std::move(covariate_names);
    return d;
}

// Centers genotype columns (both families) and the phenotype (quantitative
// only), recording the pre-centering means for later prediction.
inline GwasDataset center(GwasDataset d) {
    if (d.centered) {
        throw DataError("dataset is already centered");
    }
    d.column_means = d.genotypes.colwise().mean();
    d.genotypes.rowwise() -= d.column_means.transpose();
    if (d.family == TraitFamily::quant) {
        d.phenotype_mean = d.phenotype.mean();
        d.phenotype.array() -= d.phenotype_mean;
    } else {
        d.phenotype_mean = 0.0;
    }
    d.centered = true;
    return d;
}

// Reorders the second dataset's SNP columns to the first's order. Both
// datasets must contain exactly the same SNP id set.
inline std::pair<GwasDataset, GwasDataset> align_pair(GwasDataset d1, GwasDataset d2) {
    if (d1.snp_ids == d2.snp_ids) {
        return {std::move(d1), std::move(d2)};
    }
    std::unordered_map<std::string, Eigen::Index> pos2;
    pos2.reserve(d2.snp_ids.size());
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d2.snp_ids.size()); ++j) {
        pos2.emplace(d2.snp_ids[j], j);
    }
    std::vector<std::string> missing_in_2;
    for (const auto& id : d1.snp_ids) {
        if (!pos2.count(id)) missing_in_2.push_back(id);
    }
    std::vector<std::string> missing_in_1;
    {
        std::unordered_map<std::string, bool> in1;
        for (const auto& id : d1.snp_ids) in1.emplace(id, true);
        for (const auto& id : d2.snp_ids) {
            if (!in1.count(id)) missing_in_1.push_back(id);
        }
    }
    if (!missing_in_1.empty() || !missing_in_2.empty() ||
        d1.snp_ids.size() != d2.snp_ids.size()) {
        std::string msg = "SNP sets differ between datasets;";
        auto append = [&msg](const char* label, const std::vector<std::string>& ids) {
            if (ids.empty()) return;
            msg += std::string(" ") + label + ":";
            for (std::size_t i = 0; i < ids.size() && i < 10; ++i) msg += " " + ids[i];
            if (ids.size() > 10) msg += " ...";
        };
        append("only in first", missing_in_2);
        append("only in second", missing_in_1);
        throw DataError(msg);
    }

    Eigen::MatrixXd geno(d2.genotypes.rows(), d2.genotypes.cols());
    Eigen::VectorXd means(d2.genotypes.cols());
    const bool has_means = d2.column_means.size() == d2.genotypes.cols();
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d1.snp_ids.size()); ++j) {
        const Eigen::Index src = pos2.at(d1.snp_ids[j]);
        geno.col(j) = d2.genotypes.col(src);
        if (has_means) means[j] = d2.column_means[src];
    }
    d2.genotypes = std::move(geno);
    if (has_means) d2.column_means = std::move(means);
    d2.snp_ids = d1.snp_ids;
    return {std::move(d1), std::move(d2)};
}

} // namespace pleiovb

#endif
