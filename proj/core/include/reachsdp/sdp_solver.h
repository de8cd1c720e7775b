#pragma once

#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "reachsdp/conic_program.h"

namespace reachsdp {

struct SolverOptions {
  /// Relative feasibility and gap tolerance for status kOptimal.
  double tolerance = 1e-8;
  /// Relaxed tolerance accepted as kNearOptimal once progress stalls.
  double near_tolerance = 1e-6;
  int max_iterations = 200;
  /// 0 silent; 1 one line per iteration.
  int verbosity = 0;
  /// Worker threads for Schur complement formation; 0 reads
  /// REACH_SOS_THREADS, falling back to the hardware concurrency.
  int threads = 0;
  std::ostream* log = nullptr;
};

/// A conic solver. Implementations must be deterministic for identical
/// inputs and options.
class SdpBackend {
 public:
  virtual ~SdpBackend() = default;
  virtual std::string name() const = 0;
  virtual Solution Solve(const ConicProgram& p, const SolverOptions& opts) const = 0;
};

/// Primal-dual interior-point method on the homogeneous self-dual
/// embedding, with Nesterov-Todd scaling and Mehrotra predictor-corrector
/// steps. Detects primal and dual infeasibility from the embedding.
class InteriorPointSolver final : public SdpBackend {
 public:
  std::string name() const override { return "builtin"; }
  Solution Solve(const ConicProgram& p, const SolverOptions& opts) const override;
};

/// Registered backends. "builtin" is always present.
std::vector<std::string> BackendNames();
/// Throws std::invalid_argument for an unknown name.
std::unique_ptr<SdpBackend> MakeBackend(const std::string& name);
void RegisterBackend(const std::string& name,
                     std::function<std::unique_ptr<SdpBackend>()> factory);

/// Thread count from REACH_SOS_THREADS, else the hardware concurrency.
int DefaultThreadCount();

}  // namespace reachsdp
