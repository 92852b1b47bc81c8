#include "fqa/curve_matrix.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fqa {

EvalGrid EvalGrid::uniform(Eigen::Index p) {
  if (p < 2) throw std::invalid_argument("EvalGrid: need at least 2 points");
  std::vector<double> pts(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j)
    pts[static_cast<std::size_t>(j)] =
        static_cast<double>(j) / static_cast<double>(p - 1);
  pts.front() = 0.0;
  pts.back() = 1.0;
  return EvalGrid{std::move(pts)};
}

EvalGrid EvalGrid::from_points(std::vector<double> points) {
  const std::size_t p = points.size();
  if (p < 2) throw std::invalid_argument("EvalGrid: need at least 2 points");
  if (points.front() != 0.0 || points.back() != 1.0)
    throw std::invalid_argument("EvalGrid: endpoints must be 0 and 1");
  const double step = 1.0 / static_cast<double>(p - 1);
  for (std::size_t j = 0; j < p; ++j) {
    const double expected = static_cast<double>(j) * step;
    if (std::abs(points[j] - expected) > 1e-12 * std::max(1.0, std::abs(expected)))
      throw std::invalid_argument("EvalGrid: points are not evenly spaced");
  }
  return EvalGrid{std::move(points)};
}

namespace {

std::string_view trimmed(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
  const std::string_view t = trimmed(cell);
  double v = 0.0;
  const auto* first = t.data();
  const auto* last = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || t.empty()) {
    std::ostringstream msg;
    msg << "load_csv: non-numeric cell at row " << row << ", column " << col
        << ": '" << std::string(t) << "'";
    throw std::invalid_argument(msg.str());
  }
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg << "load_csv: non-finite value at row " << row << ", column " << col;
    throw std::invalid_argument(msg.str());
  }
  return v;
}

}  // namespace

CurveMatrix load_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("load_csv: cannot open '" + path.string() + "'");

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t ncols = 0;
  bool skipped_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trimmed(line).empty()) continue;
    if (has_header && !skipped_header) {
      skipped_header = true;
      continue;
    }
    std::vector<double> row;
    std::string_view rest(line);
    std::size_t col = 0;
    while (true) {
      ++col;
      const std::size_t comma = rest.find(',');
      const std::string_view cell =
          comma == std::string_view::npos ? rest : rest.substr(0, comma);
      row.push_back(parse_cell(cell, rows.size() + 1, col));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (ncols == 0) {
      ncols = row.size();
    } else if (row.size() != ncols) {
      std::ostringstream msg;
      msg << "load_csv: ragged row " << rows.size() + 1 << " (line " << lineno
          << "): expected " << ncols << " fields, found " << row.size();
      throw std::invalid_argument(msg.str());
    }
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw std::runtime_error("load_csv: read error on '" + path.string() + "'");

  CurveMatrix m;
  m.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(ncols));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t j = 0; j < ncols; ++j)
      m.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = rows[t][j];
  validate(m);
  return m;
}

void save_csv(const CurveMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("save_csv: cannot open '" + path.string() + "'");
  char buf[64];
  for (Eigen::Index t = 0; t < m.values.rows(); ++t) {
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, m.values(t, j));
      if (j > 0) out.put(',');
      out.write(buf, ptr - buf);
    }
    out.put('\n');
  }
  if (!out) throw std::runtime_error("save_csv: write error on '" + path.string() + "'");
}

CurveMatrix log_returns(const CurveMatrix& prices) {
  const Eigen::Index T = prices.series_length();
  const Eigen::Index p = prices.grid_size();
  if (p < 2) throw std::invalid_argument("log_returns: need at least 2 grid points");
  for (Eigen::Index t = 0; t < T; ++t)
    for (Eigen::Index j = 0; j < p; ++j)
      if (!(prices.values(t, j) > 0.0)) {
        std::ostringstream msg;
        msg << "log_returns: non-positive price at row " << t + 1 << ", column "
            << j + 1;
        throw std::invalid_argument(msg.str());
      }
  CurveMatrix out;
  out.values.resize(T, p - 1);
  for (Eigen::Index t = 0; t < T; ++t)
    for (Eigen::Index j = 0; j + 1 < p; ++j)
      out.values(t, j) =
          std::log(prices.values(t, j + 1)) - std::log(prices.values(t, j));
  return out;
}

const CurveMatrix& validate(const CurveMatrix& m) {
  std::ostringstream msg;
  bool bad = false;
  if (m.series_length() < 2) {
    msg << "series too short (T = " << m.series_length() << ", need >= 2); ";
    bad = true;
  }
  if (m.grid_size() < 2) {
    msg << "grid too small (p = " << m.grid_size() << ", need >= 2); ";
    bad = true;
  }
  int reported = 0;
  for (Eigen::Index t = 0; t < m.values.rows() && reported < 8; ++t)
    for (Eigen::Index j = 0; j < m.values.cols() && reported < 8; ++j)
      if (!std::isfinite(m.values(t, j))) {
        msg << "non-finite value at (" << t + 1 << "," << j + 1 << "); ";
        bad = true;
        ++reported;
      }
  if (bad) throw std::invalid_argument("CurveMatrix invariant violations: " + msg.str());
  return m;
}

}  // namespace fqa
