#include "reachsdp/certify.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace reachsdp {

namespace {

Eigen::VectorXd UniformInBox(const Box& box, Rng& rng) {
  Eigen::VectorXd x(box.lower.size());
  for (int i = 0; i < x.size(); ++i) x[i] = rng.Uniform(box.lower[i], box.upper[i]);
  return x;
}

}  // namespace

std::vector<Eigen::VectorXd> SampleSet(const SemialgebraicSet& set,
                                       const DomainGeometry& hint, int n,
                                       std::uint64_t seed) {
  if (set.n_vars() != hint.n_vars()) {
    throw std::invalid_argument("SampleSet: set and hint disagree on n_vars");
  }
  const Box box = hint.BoundingBox();
  const double max_rejections = 1e6 * std::max(n, 1);
  Rng rng(seed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  double rejections = 0.0;
  while (static_cast<int>(out.size()) < n) {
    Eigen::VectorXd x = UniformInBox(box, rng);
    if (set.Contains(x)) {
      out.push_back(std::move(x));
    } else if (++rejections > max_rejections) {
      throw SamplingTimeout("sampling gave up after " +
                            std::to_string(static_cast<long long>(max_rejections)) +
                            " rejections; the set looks empty");
    }
  }
  return out;
}

TrajectoryBatch Simulate(const DynamicalSystem& f, std::vector<Eigen::VectorXd> initial,
                         int steps, const DomainGeometry* state) {
  if (steps < 0) throw std::invalid_argument("Simulate: steps must be nonnegative");
  TrajectoryBatch batch;
  const std::size_t n = initial.size();
  batch.points.reserve(steps + 1);
  batch.points.push_back(std::move(initial));
  std::vector<char> frozen(n, 0);
  for (int t = 1; t <= steps; ++t) {
    const auto& prev = batch.points.back();
    std::vector<Eigen::VectorXd> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (frozen[i]) {
        next[i] = prev[i];
        continue;
      }
      Eigen::VectorXd x = f.Apply(prev[i]);
      if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > 1e100) {
        frozen[i] = 1;
        ++batch.divergent;
        next[i] = prev[i];
        continue;
      }
      if (state && !state->Contains(x, 1e-12)) ++batch.excursions;
      next[i] = std::move(x);
    }
    batch.points.push_back(std::move(next));
  }
  return batch;
}

ContainmentResult CheckContainment(const Certificate& cert, const TrajectoryBatch& batch,
                                   int horizon) {
  const bool uses_u = !cert.u_zero && cert.u != 0.0;
  if (uses_u && batch.steps() > horizon) {
    throw std::invalid_argument("CheckContainment: batch has " +
                                std::to_string(batch.steps()) +
                                " steps, more than the horizon " + std::to_string(horizon));
  }
  const double offset = cert.u_zero ? 0.0 : cert.u * horizon;
  ContainmentResult out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& step : batch.points) {
    for (const auto& x : step) {
      const double margin = cert.v.Evaluate(x) + offset;
      ++out.points;
      if (margin < -kContainmentTolerance) ++out.violations;
      out.worst_margin = std::min(out.worst_margin, margin);
    }
  }
  return out;
}

VolumeEstimate McVolume(const Certificate& cert, const DomainGeometry& geometry, int n,
                        std::uint64_t seed) {
  if (n < 10000) throw std::invalid_argument("McVolume: need at least 10000 samples");
  const Box box = geometry.BoundingBox();
  Rng rng(seed);
  int inside = 0;
  for (int accepted = 0; accepted < n;) {
    const Eigen::VectorXd x = UniformInBox(box, rng);
    if (!geometry.Contains(x)) continue;
    ++accepted;
    if (cert.Margin(x) >= 0.0) ++inside;
  }
  const double frac = static_cast<double>(inside) / n;
  const double vol = geometry.Volume();
  VolumeEstimate out;
  out.samples = n;
  out.estimate = frac * vol;
  out.half_width = 1.96 * std::sqrt(frac * (1.0 - frac) / n) * vol;
  return out;
}

CertReport Certify(const ReachProblem& p, const Certificate& cert,
                   const CertifyOptions& opts) {
  CertReport rep;
  rep.problem = p.name;
  rep.order = 2 * cert.r;
  rep.horizon = cert.horizon;
  rep.u_zero = cert.u_zero;
  rep.status = "certified";
  rep.u = cert.u;
  rep.objective = cert.objective;
  if (!cert.memberships.empty()) {
    const auto res = ReconstructionResiduals(cert);
    rep.reconstruction = *std::max_element(res.begin(), res.end());
  }
  const DomainGeometry& hint = p.init_geometry ? *p.init_geometry : p.state_geometry;
  auto initial = SampleSet(p.init, hint, opts.samples, DeriveSeed(opts.seed, 1));
  const auto batch = Simulate(p.system, std::move(initial), opts.steps, &p.state_geometry);
  rep.containment = CheckContainment(cert, batch, cert.horizon);
  rep.excursions = batch.excursions;
  rep.divergent = batch.divergent;
  rep.volume = McVolume(cert, p.state_geometry, opts.volume_samples,
                        DeriveSeed(opts.seed, 2));
  return rep;
}

SweepResult RunOrderSweep(const ReachProblem& p, const std::vector<int>& orders,
                          const SweepOptions& opts) {
  if (!std::is_sorted(orders.begin(), orders.end())) {
    throw std::invalid_argument("RunOrderSweep: orders must be ascending");
  }
  const auto backend = MakeBackend(opts.backend);
  SweepResult out;
  double last = std::numeric_limits<double>::infinity();
  for (int order : orders) {
    SweepRow row;
    row.report.problem = p.name;
    row.report.order = order;
    row.report.horizon = p.horizon;
    row.report.u_zero = p.u_zero;
    const auto start = std::chrono::steady_clock::now();
    try {
      if (order % 2 != 0) throw std::invalid_argument("order must be even");
      DualResult res = SolveDual(p, order / 2, *backend, opts.solver);
      CertifyOptions co = opts.certify;
      co.seed = DeriveSeed(opts.certify.seed, static_cast<std::uint64_t>(order));
      CertReport rep = Certify(p, res.certificate, co);
      rep.status = ToString(res.solution.status);
      rep.iterations = res.solution.iterations;
      rep.residuals = res.solution.residuals;
      row.report = std::move(rep);
      row.certificate = std::move(res.certificate);
      if (row.report.objective > last + 1e-7) out.monotone = false;
      last = std::min(last, row.report.objective);
    } catch (const SolveFailure& e) {
      row.report.status = ToString(e.status());
      row.report.residuals = e.residuals();
      row.report.error = e.what();
    } catch (const std::exception& e) {
      row.report.status = "error";
      row.report.error = e.what();
    }
    if (opts.record_runtime) {
      row.report.runtime_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace reachsdp
