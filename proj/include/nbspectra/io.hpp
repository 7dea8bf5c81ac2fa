#pragma once

#include "nbspectra/iharabass.hpp"
#include "nbspectra/nonbacktracking.hpp"
#include "nbspectra/profile.hpp"
#include "nbspectra/spectra.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace nbspectra {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest decimal form that round-trips the double; identical bytes for
/// identical values, so emitted files are reproducible.
std::string format_double(double value);

/// Rows of already formatted cells; column order of the header is the schema.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string to_csv(const CsvTable& table);
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// Profile JSON: {"n", "m", "model_kind", "p": scalar|matrix|{row_sizes,
/// col_sizes, values}, "seed"?}. The seed is carried for provenance only.
nlohmann::json profile_to_json(const VarianceProfile& profile);
VarianceProfile profile_from_json(const nlohmann::json& doc);
VarianceProfile load_profile(const std::string& path);

/// Sparse matrix CSV "i,j,value" with exact zeros omitted.
std::string matrix_to_sparse_csv(const Eigen::MatrixXd& X);

/// Triplet CSV of the operator entries,
/// "e_from_i,e_from_j,e_to_k,e_to_l,weight", one row per nonzero B_ef.
std::string nb_operator_to_csv(const NBOperator& B);

/// Scan table CSV "beta,min_m1,smallest_eig,psd_flag" (invalid rows keep
/// their beta and min_m1; the eigenvalue cell is empty).
std::string axis_scan_to_csv(const AxisScan& scan);

nlohmann::json summary_to_json(const SpectralSummary& summary);

} // namespace nbspectra
