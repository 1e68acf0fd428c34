#ifndef PLEIOVB_IO_HPP
#define PLEIOVB_IO_HPP

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "pleiovb/dataset.hpp"
#include "pleiovb/errors.hpp"
#include "pleiovb/types.hpp"

namespace pleiovb {

// Shortest decimal representation that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string> split_tab(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r') {
        fields.back().pop_back();
    }
    return fields;
}

inline double parse_double(const std::string& field, const std::string& context) {
    if (field.empty() || field == "NA" || field == "nan" || field == "NaN") {
        throw DataError("missing value " + context);
    }
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        throw DataError("could not parse number '" + field + "' " + context);
    }
    return v;
}

struct TsvTable {
    std::vector<std::string> column_names; // excludes the sample_id column
    std::vector<std::string> row_ids;
    Eigen::MatrixXd values;
};

inline TsvTable read_tsv_table(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) {
        throw DataError(std::string("cannot open ") + what + " file: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(std::string("empty ") + what + " file: " + path);
    }
    auto header = split_tab(line);
    if (header.empty() || header[0] != "sample_id") {
        throw DataError(std::string(what) + " file must start with a 'sample_id' header column: " + path);
    }
    TsvTable t;
    t.column_names.assign(header.begin() + 1, header.end());
    const std::size_t ncol = t.column_names.size();
    std::vector<double> data;
    std::size_t nrow = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_tab(line);
        if (fields.size() != ncol + 1) {
            throw DataError("dimension mismatch in " + std::string(what) + " file " + path +
                            ": row " + std::to_string(nrow + 1) + " has " +
                            std::to_string(fields.size() - 1) + " values, expected " +
                            std::to_string(ncol));
        }
        t.row_ids.push_back(fields[0]);
        for (std::size_t c = 0; c < ncol; ++c) {
            data.push_back(parse_double(
                fields[c + 1], "in " + std::string(what) + " file " + path + " (sample " +
                                   fields[0] + ", column " + t.column_names[c] + ")"));
        }
        ++nrow;
    }
    if (nrow == 0) {
        throw DataError(std::string(what) + " file has no data rows: " + path);
    }
    t.values.resize(nrow, ncol);
    for (std::size_t r = 0; r < nrow; ++r) {
        for (std::size_t c = 0; c < ncol; ++c) {
            t.values(r, c) = data[r * ncol + c];
        }
    }
    return t;
}

inline void check_sample_alignment(const std::vector<std::string>& a,
                                   const std::vector<std::string>& b,
                                   const char* what_b) {
    if (a.size() != b.size()) {
        throw DataError(std::string("dimension mismatch: ") + what_b + " has " +
                        std::to_string(b.size()) + " samples, genotypes have " +
                        std::to_string(a.size()));
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) {
            throw DataError(std::string("unmatched sample id in ") + what_b + ": '" +
                            b[i] + "' at row " + std::to_string(i) +
                            " (genotype file has '" + a[i] + "')");
        }
    }
}

} // namespace detail

// Reads genotype/phenotype(/covariate) TSVs into a validated, un-centered
// dataset. Sample ids must appear in the same order in every file.
inline GwasDataset load_dataset(const std::string& genotype_path,
                                const std::string& phenotype_path,
                                const std::optional<std::string>& covariate_path,
                                TraitFamily family) {
    auto geno = detail::read_tsv_table(genotype_path, "genotype");
    auto pheno = detail::read_tsv_table(phenotype_path, "phenotype");
    if (pheno.values.cols() != 1) {
        throw DataError("phenotype file must have exactly one value column: " + phenotype_path);
    }
    detail::check_sample_alignment(geno.row_ids, pheno.row_ids, "phenotype file");

    std::optional<Eigen::MatrixXd> covariates;
    std::vector<std::string> covariate_names;
    if (covariate_path.has_value()) {
        auto cov = detail::read_tsv_table(*covariate_path, "covariate");
        detail::check_sample_alignment(geno.row_ids, cov.row_ids, "covariate file");
        covariates = std::move(cov.values);
        covariate_names = std::move(cov.column_names);
    }
    return make_dataset(std::move(geno.values), Eigen::VectorXd(pheno.values.col(0)),
                        std::move(covariates), std::move(geno.column_names),
                        std::move(geno.row_ids), std::move(covariate_names), family);
}

inline void write_genotype_tsv(const std::string& path,
                               const std::vector<std::string>& sample_ids,
                               const std::vector<std::string>& snp_ids,
                               const Eigen::MatrixXd& genotypes) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write genotype file: " + path);
    out << "sample_id";
    for (const auto& id : snp_ids) out << '\t' << id;
    out << '\n';
    for (Eigen::Index i = 0; i < genotypes.rows(); ++i) {
        out << sample_ids[i];
        for (Eigen::Index j = 0; j < genotypes.cols(); ++j) {
            out << '\t' << static_cast<int>(genotypes(i, j));
        }
        out << '\n';
    }
}

inline void write_phenotype_tsv(const std::string& path,
                                const std::vector<std::string>& sample_ids,
                                const Eigen::VectorXd& phenotype) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write phenotype file: " + path);
    out << "sample_id\tvalue\n";
    for (Eigen::Index i = 0; i < phenotype.size(); ++i) {
        out << sample_ids[i] << '\t' << format_double(phenotype[i]) << '\n';
    }
}

inline void write_covariate_tsv(const std::string& path,
                                const std::vector<std::string>& sample_ids,
                                const std::vector<std::string>& names,
                                const Eigen::MatrixXd& covariates) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write covariate file: " + path);
    out << "sample_id";
    for (const auto& name : names) out << '\t' << name;
    out << '\n';
    for (Eigen::Index i = 0; i < covariates.rows(); ++i) {
        out << sample_ids[i];
        for (Eigen::Index j = 0; j < covariates.cols(); ++j) {
            out << '\t' << format_double(covariates(i, j));
        }
        out << '\n';
    }
}

} // namespace pleiovb

#endif
