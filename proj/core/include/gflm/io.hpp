#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gflm/basis.hpp"
#include "gflm/curve.hpp"
#include "gflm/inference.hpp"
#include "gflm/model_select.hpp"
#include "gflm/spqr.hpp"

namespace gflm {

/// Wide CSV: id, response, then one column per grid point.
///
/// The grid comes from `grid_path` (numbers separated by commas or
/// whitespace) when given; otherwise the first row must be a header whose
/// columns 3..m+2 are the grid points. Every row must carry exactly m + 2
/// fields. Errors name the offending line (kParse).
/// Without `kind` the response kind is inferred: 0/1 binary, nonnegative
/// integers count, anything else continuous.
FunctionalDataset read_dataset_csv(const std::string& path, const std::optional<std::string>& grid_path = {},
                                   std::optional<ResponseKind> kind = {});

void write_dataset_csv(const FunctionalDataset& ds, const std::string& path);

TimeGrid read_grid_file(const std::string& path);

/// One column per basis function, one row per grid point (header t,rho_1,..).
/// Eigenvalues, when present, go to `path + ".eigenvalues"` on one line.
void write_basis_csv(const Basis& basis, const std::string& path);
Basis read_basis_csv(const std::string& path, BasisKind kind = BasisKind::kEmpirical);

/// Columns eta, g, g_prime, sigma2.
void write_link_estimate_csv(const LinkEstimate& est, const std::string& path);

/// Columns t, lower, upper (and estimate).
void write_band_csv(const Band& band, const TimeGrid& grid, const std::string& path);

/// Columns p, criterion, deviance.
void write_selection_csv(const OrderSelection& sel, const std::string& path);

void write_matrix_csv(const Eigen::MatrixXd& m, const std::string& path);

/// key = value lines; '#' starts a comment. Duplicate keys and malformed
/// lines are kConfig errors naming the line.
std::map<std::string, std::string> read_config(const std::string& path);

/// Comma-split with surrounding whitespace trimmed.
std::vector<std::string> split_fields(const std::string& line);

}  // namespace gflm
