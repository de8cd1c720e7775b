#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "reachsdp/geometry.h"
#include "reachsdp/random.h"
#include "reachsdp/relaxation.h"
#include "reachsdp/sdp_solver.h"
#include "reachsdp/semialgebraic.h"

namespace reachsdp {

/// Containment margin below which a point counts as a violation.
inline constexpr double kContainmentTolerance = 1e-6;
/// |u| below this validates the horizon-free reading of the certificate.
inline constexpr double kUThreshold = 1e-5;

/// Rejection sampling found too few points; the set is (nearly) empty.
class SamplingTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// n points uniform on the set, drawn by rejection from the bounding box of
/// `hint`. Gives up with SamplingTimeout after 10⁶·n rejections.
std::vector<Eigen::VectorXd> SampleSet(const SemialgebraicSet& set,
                                       const DomainGeometry& hint, int n,
                                       std::uint64_t seed);

struct TrajectoryBatch {
  /// points[t][i] is fᵗ of initial point i, for t = 0..steps.
  std::vector<std::vector<Eigen::VectorXd>> points;
  std::uint64_t seed = 0;
  int steps() const { return static_cast<int>(points.size()) - 1; }
  /// Iterates outside the state geometry, counted over t ≥ 1.
  int excursions = 0;
  /// Trajectories that overflowed; they are frozen at their last finite
  /// value.
  int divergent = 0;
};

/// Forward iteration of every point. `state`, when given, is used to count
/// excursions; nothing is clipped.
TrajectoryBatch Simulate(const DynamicalSystem& f, std::vector<Eigen::VectorXd> initial,
                         int steps, const DomainGeometry* state = nullptr);

struct ContainmentResult {
  int points = 0;
  int violations = 0;
  double worst_margin = 0.0;  // min over points of v(x) + u·T
  bool passed() const { return worst_margin >= -kContainmentTolerance; }
};

/// Evaluates v + u·T on every point of the batch (T = `horizon`, ignored
/// for u = 0 certificates). Throws std::invalid_argument if u > 0 and the
/// batch is longer than the horizon.
ContainmentResult CheckContainment(const Certificate& cert, const TrajectoryBatch& batch,
                                   int horizon);

struct VolumeEstimate {
  double estimate = 0.0;
  double half_width = 0.0;  // 95% confidence
  int samples = 0;
};

/// vol{x ∈ geometry : v(x) + u·T ≥ 0} from n ≥ 10⁴ uniform samples.
VolumeEstimate McVolume(const Certificate& cert, const DomainGeometry& geometry, int n,
                        std::uint64_t seed);

struct CertifyOptions {
  int samples = 1000;
  int steps = 7;
  int volume_samples = 100000;
  std::uint64_t seed = kDefaultSeed;
};

struct CertReport {
  std::string problem;
  int order = 0;  // 2r
  int horizon = 100;
  bool u_zero = false;
  std::string status;
  std::string error;  // set when the solve failed
  int iterations = 0;
  double u = 0.0;
  double objective = 0.0;
  Residuals residuals;
  /// Max SOS reconstruction residual, when Gram matrices are available.
  std::optional<double> reconstruction;
  ContainmentResult containment;
  int excursions = 0;
  int divergent = 0;
  VolumeEstimate volume;
  std::optional<double> runtime_seconds;

  bool solved() const { return error.empty(); }
  bool u_validated() const { return u_zero || std::abs(u) < kUThreshold; }
};

/// Sampling, simulation, containment and volume for one certificate.
CertReport Certify(const ReachProblem& p, const Certificate& cert,
                   const CertifyOptions& opts);

struct SweepRow {
  CertReport report;
  std::optional<Certificate> certificate;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// d_r non-increasing over the solved orders, within 1e−7.
  bool monotone = true;
};

struct SweepOptions {
  CertifyOptions certify;
  SolverOptions solver;
  std::string backend = "builtin";
  bool record_runtime = false;
};

/// Solves and certifies each order (2r values, ascending). A failed order
/// is recorded and the sweep continues. Each order draws its samples from
/// DeriveSeed(seed, order).
SweepResult RunOrderSweep(const ReachProblem& p, const std::vector<int>& orders,
                          const SweepOptions& opts);

}  // namespace reachsdp
