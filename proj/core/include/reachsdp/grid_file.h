#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "reachsdp/relaxation.h"

namespace reachsdp {

/// Regular grid over one or two plotted axes; the other coordinates are
/// held at `fixed`.
struct GridSpec {
  std::vector<int> axes;
  Eigen::VectorXd lower, upper;  // per plotted axis
  int resolution = 100;
  Eigen::VectorXd fixed;  // full point; plotted coordinates are overwritten

  /// First two variables (or the only one) over the certificate's state
  /// box, others at the box center.
  static GridSpec Default(const Certificate& cert, int resolution);
  long long rows() const;
};

/// CSV with header `<vars>,v,w,u,T,inside` and one row per grid point, the
/// first axis varying fastest. inside = (v + u·T ≥ 0), with T = 0 for u = 0
/// certificates.
void WriteGrid(std::ostream& out, const Certificate& cert, const GridSpec& spec);

struct GridData {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;  // every column, inside as 0/1
};

/// Reads a grid written by WriteGrid. Throws std::invalid_argument.
GridData ReadGrid(std::istream& in);

/// The inside flag recomputed from the v, u and T columns of a row.
bool GridInside(double v, double u, double horizon);

}  // namespace reachsdp
