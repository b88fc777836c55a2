#include "ivspline/datamodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ivspline/errors.hpp"

namespace ivspline {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(first, last - first + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string_view rest(line);
  while (true) {
    const auto comma = rest.find(',');
    cells.push_back(trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw InputError(ErrorKind::parse, "row " + std::to_string(row) + ", column \"" + column +
                                           "\": cannot parse \"" + cell + "\" as a finite real");
  }
  return value;
}

}  // namespace

Dataset Dataset::create(Eigen::VectorXd y, Eigen::VectorXd z, Eigen::MatrixXd w) {
  const Eigen::Index n = y.size();
  if (z.size() != n || w.rows() != n) {
    throw InputError(ErrorKind::dimension, "dataset: y, z and w must have the same number of rows");
  }
  if (w.cols() < 1) throw InputError(ErrorKind::dimension, "dataset: at least one instrument column is required");
  if (n < 3) throw InputError(ErrorKind::size, "dataset: need at least 3 observations, got " + std::to_string(n));
  if (!y.allFinite() || !z.allFinite() || !w.allFinite()) {
    throw InputError(ErrorKind::parse, "dataset: non-finite entries");
  }
  return Dataset{std::move(y), std::move(z), std::move(w)};
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  const auto m = static_cast<Eigen::Index>(rows.size());
  Dataset out{Eigen::VectorXd(m), Eigen::VectorXd(m), Eigen::MatrixXd(m, w.cols())};
  for (Eigen::Index k = 0; k < m; ++k) {
    out.y(k) = y(rows[k]);
    out.z(k) = z(rows[k]);
    out.w.row(k) = w.row(rows[k]);
  }
  return out;
}

Dataset Dataset::with_outcome(Eigen::VectorXd new_y) const {
  if (new_y.size() != y.size()) throw InputError(ErrorKind::dimension, "dataset: outcome length mismatch");
  return Dataset{std::move(new_y), z, w};
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> Dataset::duplicate_instrument_rows() const {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> dups;
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = i + 1; j < w.rows(); ++j)
      if (w.row(i) == w.row(j)) dups.emplace_back(i, j);
  return dups;
}

Dataset load_csv(const std::string& path, const ColumnMap& columns) {
  std::ifstream in(path);
  if (!in) throw InputError(ErrorKind::schema, "cannot open \"" + path + "\"");

  std::string line;
  if (!std::getline(in, line)) throw InputError(ErrorKind::schema, "\"" + path + "\" has no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_line(line);

  auto locate = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError(ErrorKind::schema, "missing column \"" + name + "\"");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t iy = locate(columns.y);
  const std::size_t iz = locate(columns.z);
  if (columns.w.empty()) throw InputError(ErrorKind::schema, "no instrument columns mapped");
  std::vector<std::size_t> iw;
  for (const auto& name : columns.w) iw.push_back(locate(name));

  std::vector<double> ys, zs, ws;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw InputError(ErrorKind::parse, "row " + std::to_string(row) + ": expected " +
                                             std::to_string(header.size()) + " fields, got " +
                                             std::to_string(cells.size()));
    }
    ys.push_back(parse_cell(cells[iy], row, columns.y));
    zs.push_back(parse_cell(cells[iz], row, columns.z));
    for (std::size_t k = 0; k < iw.size(); ++k) ws.push_back(parse_cell(cells[iw[k]], row, columns.w[k]));
  }

  const auto n = static_cast<Eigen::Index>(ys.size());
  const auto p = static_cast<Eigen::Index>(iw.size());
  if (n < 3) throw InputError(ErrorKind::size, "need at least 3 data rows, got " + std::to_string(n));
  Eigen::MatrixXd w(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < p; ++k) w(i, k) = ws[static_cast<std::size_t>(i * p + k)];
  return Dataset::create(Eigen::Map<Eigen::VectorXd>(ys.data(), n), Eigen::Map<Eigen::VectorXd>(zs.data(), n),
                         std::move(w));
}

void write_csv(const Dataset& ds, const std::string& path, const ColumnMap& columns) {
  if (static_cast<Eigen::Index>(columns.w.size()) != ds.w.cols()) {
    throw InputError(ErrorKind::dimension, "write_csv: instrument name count does not match columns");
  }
  std::ofstream out(path);
  if (!out) throw InputError(ErrorKind::schema, "cannot write \"" + path + "\"");
  out << columns.y << ',' << columns.z;
  for (const auto& name : columns.w) out << ',' << name;
  out << '\n';
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    put(ds.y(i));
    out << ',';
    put(ds.z(i));
    for (Eigen::Index k = 0; k < ds.w.cols(); ++k) {
      out << ',';
      put(ds.w(i, k));
    }
    out << '\n';
  }
}

Eigen::MatrixXd StandardizedInstruments::restore() const {
  return (w_std.array().rowwise() * scales.transpose().array()).rowwise() + centers.transpose().array();
}

StandardizedInstruments standardize_instruments(const Eigen::MatrixXd& w) {
  const Eigen::Index n = w.rows();
  if (n < 2) throw InputError(ErrorKind::size, "standardize: need at least 2 rows");
  StandardizedInstruments out{w, Eigen::VectorXd(w.cols()), Eigen::VectorXd(w.cols())};
  for (Eigen::Index k = 0; k < w.cols(); ++k) {
    const double mean = w.col(k).mean();
    const Eigen::VectorXd centered = w.col(k).array() - mean;
    const double sd = std::sqrt(centered.squaredNorm() / static_cast<double>(n - 1));
    const double magnitude = std::max(std::abs(mean), w.col(k).cwiseAbs().maxCoeff());
    if (!(sd > 1e-14 * magnitude) || sd == 0.0) {
      throw InputError(ErrorKind::degenerate_instrument,
                       "instrument column " + std::to_string(k) + " is constant; cannot standardize");
    }
    out.centers(k) = mean;
    out.scales(k) = sd;
    out.w_std.col(k) = centered / sd;
  }
  return out;
}

}  // namespace ivspline
