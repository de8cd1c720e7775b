#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "reachsdp/random.h"
#include "reachsdp/semialgebraic.h"
#include "reachsdp/sdp_solver.h"

namespace reachsdp {

/// Every schema violation found in a problem file, not only the first.
class ProblemFileError : public std::invalid_argument {
 public:
  explicit ProblemFileError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct ProblemOptions {
  std::optional<int> order;  // 2r
  int horizon = 100;
  bool u_zero = false;
  double tolerance = 1e-8;
  double near_tolerance = 1e-6;
  int max_iterations = 200;
  std::uint64_t seed = kDefaultSeed;

  SolverOptions Solver() const;
};

struct LoadedProblem {
  ReachProblem problem;
  ProblemOptions options;
  /// Human-readable notes, e.g. Archimedean augmentation.
  std::vector<std::string> notes;
};

/// Parses the JSON problem format. `fallback_name` names problems without a
/// "name" field. Throws ProblemFileError.
LoadedProblem ParseProblem(std::string_view json_text, const std::string& fallback_name = "problem");

/// Reads and parses a problem file; the file stem is the fallback name.
LoadedProblem LoadProblem(const std::filesystem::path& path);

/// FNV-1a 64-bit hash of a canonical rendering of the problem data, as 16
/// hex digits.
std::string ProblemHash(const ReachProblem& p);

}  // namespace reachsdp
