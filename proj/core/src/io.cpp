#include "gflm/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "gflm/error.hpp"

namespace gflm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> to_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

std::string where(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line) + ": ";
}

std::ifstream open_in(const std::string& path, ErrorKind kind) {
  std::ifstream in(path);
  if (!in) fail(kind, "cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kInvalidInput, "cannot write '" + path + "'");
  out << std::setprecision(17);
  return out;
}

ResponseKind infer_kind(const Eigen::VectorXd& y) {
  bool binary = true;
  bool count = true;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) binary = false;
    if (y[i] < 0.0 || y[i] != std::floor(y[i])) count = false;
  }
  if (binary) return ResponseKind::kBinary;
  return count ? ResponseKind::kCount : ResponseKind::kContinuous;
}

}  // namespace

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

TimeGrid read_grid_file(const std::string& path) {
  std::ifstream in = open_in(path, ErrorKind::kParse);
  std::vector<double> pts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      const auto v = to_number(tok);
      if (!v) fail(ErrorKind::kParse, where(path, lineno) + "grid value '" + tok + "' is not a number");
      pts.push_back(*v);
    }
  }
  if (pts.empty()) fail(ErrorKind::kParse, path + ": empty grid file");
  return TimeGrid(pts);
}

FunctionalDataset read_dataset_csv(const std::string& path, const std::optional<std::string>& grid_path,
                                   std::optional<ResponseKind> kind) {
  std::ifstream in = open_in(path, ErrorKind::kParse);
  std::optional<TimeGrid> grid;
  if (grid_path) grid = read_grid_file(*grid_path);

  std::vector<std::string> ids;
  std::vector<double> ys;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> f = split_fields(line);
    if (first) {
      first = false;
      const bool header = f.size() >= 2 && !to_number(f[1]);
      if (header) {
        if (!grid) {
          std::vector<double> pts;
          for (std::size_t k = 2; k < f.size(); ++k) {
            const auto v = to_number(f[k]);
            if (!v) fail(ErrorKind::kParse, where(path, lineno) + "header column '" + f[k] + "' is not a grid point");
            pts.push_back(*v);
          }
          if (pts.empty()) fail(ErrorKind::kParse, where(path, lineno) + "header lists no grid points");
          grid = TimeGrid(pts);
        } else if (f.size() != grid->size() + 2) {
          fail(ErrorKind::kParse, where(path, lineno) + "header has " + std::to_string(f.size()) + " columns, expected " +
                                      std::to_string(grid->size() + 2));
        }
        continue;
      }
      if (!grid) fail(ErrorKind::kParse, where(path, lineno) + "no header row and no grid file");
    }
    const std::size_t expected = grid->size() + 2;
    if (f.size() != expected)
      fail(ErrorKind::kParse, where(path, lineno) + "found " + std::to_string(f.size()) + " columns, expected " +
                                  std::to_string(expected));
    if (f[0].empty()) fail(ErrorKind::kParse, where(path, lineno) + "missing subject id");
    const auto y = to_number(f[1]);
    if (!y || !std::isfinite(*y)) fail(ErrorKind::kParse, where(path, lineno) + "response '" + f[1] + "' is not a number");
    std::vector<double> vals(grid->size());
    for (std::size_t k = 0; k < grid->size(); ++k) {
      const auto v = to_number(f[k + 2]);
      if (!v || !std::isfinite(*v))
        fail(ErrorKind::kParse, where(path, lineno) + "column " + std::to_string(k + 3) + " value '" + f[k + 2] +
                                    "' is not a finite number");
      vals[k] = *v;
    }
    ids.push_back(f[0]);
    ys.push_back(*y);
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) fail(ErrorKind::kParse, path + ": no data rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(grid->size());
  Eigen::MatrixXd curves(n, m);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y[i] = ys[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < m; ++k) curves(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  const ResponseKind rk = kind ? *kind : infer_kind(y);
  return FunctionalDataset(*grid, WeightMeasure::uniform(grid->size()), std::move(curves), std::move(y), rk,
                           std::move(ids));
}

void write_dataset_csv(const FunctionalDataset& ds, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "id,response";
  for (std::size_t k = 0; k < ds.m(); ++k) out << ',' << ds.grid()[k];
  out << '\n';
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out << ds.ids()[i] << ',' << ds.responses()[r];
    for (Eigen::Index k = 0; k < ds.curves().cols(); ++k) out << ',' << ds.curves()(r, k);
    out << '\n';
  }
}

void write_basis_csv(const Basis& basis, const std::string& path) {
  std::ofstream out = open_out(path);
  out << 't';
  for (std::size_t j = 1; j <= basis.size(); ++j) out << ",rho_" << j;
  out << '\n';
  for (std::size_t k = 0; k < basis.grid().size(); ++k) {
    out << basis.grid()[k];
    for (Eigen::Index j = 0; j < basis.functions().cols(); ++j)
      out << ',' << basis.functions()(static_cast<Eigen::Index>(k), j);
    out << '\n';
  }
  if (basis.eigenvalues()) {
    std::ofstream ev = open_out(path + ".eigenvalues");
    const Eigen::VectorXd& l = *basis.eigenvalues();
    for (Eigen::Index j = 0; j < l.size(); ++j) ev << (j ? "," : "") << l[j];
    ev << '\n';
  }
}

Basis read_basis_csv(const std::string& path, BasisKind kind) {
  std::ifstream in = open_in(path, ErrorKind::kParse);
  std::string line;
  std::size_t lineno = 0;
  std::vector<double> t;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_fields(line);
    if (lineno == 1 && !to_number(f[0])) {
      width = f.size();
      continue;
    }
    if (width == 0) width = f.size();
    if (f.size() != width || width < 2)
      fail(ErrorKind::kParse, where(path, lineno) + "expected " + std::to_string(width) + " columns");
    std::vector<double> vals;
    for (const auto& s : f) {
      const auto v = to_number(s);
      if (!v) fail(ErrorKind::kParse, where(path, lineno) + "'" + s + "' is not a number");
      vals.push_back(*v);
    }
    t.push_back(vals[0]);
    vals.erase(vals.begin());
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) fail(ErrorKind::kParse, path + ": no basis rows");
  Eigen::MatrixXd fn(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t j = 0; j + 1 < width; ++j)
      fn(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = rows[k][j];

  std::optional<Eigen::VectorXd> eig;
  if (std::ifstream ev(path + ".eigenvalues"); ev) {
    std::getline(ev, line);
    const auto f = split_fields(line);
    Eigen::VectorXd l(static_cast<Eigen::Index>(f.size()));
    for (std::size_t j = 0; j < f.size(); ++j) {
      const auto v = to_number(f[j]);
      if (!v) fail(ErrorKind::kParse, where(path + ".eigenvalues", 1) + "'" + f[j] + "' is not a number");
      l[static_cast<Eigen::Index>(j)] = *v;
    }
    if (l.size() != fn.cols()) fail(ErrorKind::kParse, path + ".eigenvalues: count differs from basis size");
    eig = std::move(l);
  }
  TimeGrid grid(t);
  return Basis(kind, grid, WeightMeasure::uniform(grid.size()), std::move(fn), std::move(eig));
}

void write_link_estimate_csv(const LinkEstimate& est, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "eta,g,g_prime,sigma2\n";
  for (Eigen::Index k = 0; k < est.eval_grid.size(); ++k)
    out << est.eval_grid[k] << ',' << est.g_hat[k] << ',' << est.g_prime_hat[k] << ',' << est.sigma2_hat[k] << '\n';
}

void write_band_csv(const Band& band, const TimeGrid& grid, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "t,lower,upper,estimate\n";
  for (std::size_t k = 0; k < grid.size(); ++k)
    out << grid[k] << ',' << band.lower[k] << ',' << band.upper[k] << ',' << band.estimate[k] << '\n';
}

void write_selection_csv(const OrderSelection& sel, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "p," << to_string(sel.criterion) << ",deviance\n";
  for (std::size_t k = 0; k < sel.candidate_orders.size(); ++k)
    out << sel.candidate_orders[k] << ',' << sel.criterion_values[k] << ',' << sel.deviances[k] << '\n';
}

void write_matrix_csv(const Eigen::MatrixXd& m, const std::string& path) {
  std::ofstream out = open_out(path);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in = open_in(path, ErrorKind::kConfig);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::kConfig, where(path, lineno) + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(ErrorKind::kConfig, where(path, lineno) + "empty key");
    if (!kv.emplace(key, value).second) fail(ErrorKind::kConfig, where(path, lineno) + "duplicate key '" + key + "'");
  }
  return kv;
}

}  // namespace gflm
