#include "reachsdp/grid_file.h"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace reachsdp {

GridSpec GridSpec::Default(const Certificate& cert, int resolution) {
  if (resolution < 1) throw std::invalid_argument("grid resolution must be positive");
  const int n = cert.n_vars();
  GridSpec spec;
  spec.resolution = resolution;
  spec.axes = n == 1 ? std::vector<int>{0} : std::vector<int>{0, 1};
  const int k = static_cast<int>(spec.axes.size());
  spec.lower.resize(k);
  spec.upper.resize(k);
  for (int a = 0; a < k; ++a) {
    spec.lower[a] = cert.state_box.lower[spec.axes[a]];
    spec.upper[a] = cert.state_box.upper[spec.axes[a]];
  }
  spec.fixed = 0.5 * (cert.state_box.lower + cert.state_box.upper);
  return spec;
}

long long GridSpec::rows() const {
  long long r = 1;
  for (std::size_t a = 0; a < axes.size(); ++a) r *= resolution;
  return r;
}

bool GridInside(double v, double u, double horizon) { return v + u * horizon >= 0.0; }

void WriteGrid(std::ostream& out, const Certificate& cert, const GridSpec& spec) {
  const int n = cert.n_vars();
  const int k = static_cast<int>(spec.axes.size());
  if (k < 1 || k > 2 || spec.lower.size() != k || spec.upper.size() != k ||
      spec.fixed.size() != n) {
    throw std::invalid_argument("grid spec does not match the certificate");
  }
  for (int a : spec.axes) {
    if (a < 0 || a >= n) throw std::invalid_argument("grid axis out of range");
  }
  for (const auto& name : cert.variables) out << name << ',';
  out << "v,w,u,T,inside\n";
  const double horizon = cert.u_zero ? 0.0 : cert.horizon;
  const int res = spec.resolution;
  auto coord = [&](int a, int i) {
    if (res == 1) return 0.5 * (spec.lower[a] + spec.upper[a]);
    // Interpolation that reproduces both endpoints exactly.
    const double t = static_cast<double>(i) / (res - 1);
    return (1.0 - t) * spec.lower[a] + t * spec.upper[a];
  };
  Eigen::VectorXd x = spec.fixed;
  const int outer = k == 2 ? res : 1;
  for (int j = 0; j < outer; ++j) {
    if (k == 2) x[spec.axes[1]] = coord(1, j);
    for (int i = 0; i < res; ++i) {
      x[spec.axes[0]] = coord(0, i);
      const double v = cert.v.Evaluate(x);
      const double w = cert.w.Evaluate(x);
      for (int d = 0; d < n; ++d) out << FormatDouble(x[d]) << ',';
      out << FormatDouble(v) << ',' << FormatDouble(w) << ',' << FormatDouble(cert.u) << ','
          << FormatDouble(horizon) << ',' << (GridInside(v, cert.u, horizon) ? 1 : 0)
          << '\n';
    }
  }
}

GridData ReadGrid(std::istream& in) {
  GridData out;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("grid file is empty");
  std::stringstream hs(line);
  for (std::string col; std::getline(hs, col, ',');) out.header.push_back(col);
  const std::size_t cols = out.header.size();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(cols);
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      const char* comma = std::find(p, end, ',');
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(p, comma, v);
      if (ec != std::errc() || ptr != comma) {
        throw std::invalid_argument("malformed grid row: " + line);
      }
      row.push_back(v);
      p = comma + 1;
    }
    if (row.size() != cols) throw std::invalid_argument("grid row has wrong column count");
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace reachsdp
