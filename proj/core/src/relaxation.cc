#include "reachsdp/relaxation.h"

#include <cmath>
#include <map>
#include <numbers>
#include <unordered_map>

namespace reachsdp {
namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kScaledCleanEps = 1e-14;

using Triplets = std::vector<Eigen::Triplet<double>>;

void CheckOrder(const ReachProblem& p, int r) {
  const int r_min = p.MinRelaxationOrder();
  if (r < r_min) {
    throw std::invalid_argument("relaxation order r = " + std::to_string(r) +
                                " is below r_min = " + std::to_string(r_min));
  }
}

// Generators g_0 = 1, g_1, ..., g_m with their half-degrees.
std::vector<std::pair<Polynomial, int>> Generators(const std::vector<Polynomial>& g,
                                                   int n) {
  std::vector<std::pair<Polynomial, int>> out;
  out.emplace_back(Polynomial::Constant(n, 1.0), 0);
  for (const auto& gj : g) out.emplace_back(gj, (gj.degree() + 1) / 2);
  return out;
}

std::vector<Polynomial> PullSet(const AffineFrame& frame,
                                const SemialgebraicSet& set, bool augmented,
                                double hint) {
  std::vector<Polynomial> g = set.inequalities();
  if (augmented) g.pop_back();
  std::vector<Polynomial> pulled;
  const int n = frame.n_vars();
  const Monomial s0sq = Monomial::Unit(n, 0) * Monomial::Unit(n, 0);
  for (const auto& gj : g) {
    Polynomial q = frame.PullToScaled(gj).Clean(kScaledCleanEps);
    // A ball scaled by a positive factor stays a ball after normalization.
    const double lead = q.coeff(s0sq);
    if (q.degree() == 2 && lead < 0.0 && IsBallConstraint(q * (-1.0 / lead))) {
      q = q * (-1.0 / lead);
    }
    pulled.push_back(std::move(q));
  }
  if (pulled.empty()) {
    // Only the added ball was present; rebuild it in the scaled frame.
    Polynomial ball = Polynomial::Constant(n, hint);
    for (int i = 0; i < n; ++i) {
      const auto xi = Polynomial::Variable(n, i);
      ball -= xi * xi;
    }
    return {ball};
  }
  return ValidateArchimedean(SemialgebraicSet(std::move(pulled)), hint).set.inequalities();
}

}  // namespace

LocalizingMatrixSpec::LocalizingMatrixSpec(int n_vars, int r,
                                           const Polynomial& weight)
    : basis_(n_vars, r) {
  if (weight.n_vars() != n_vars) {
    throw std::invalid_argument("LocalizingMatrixSpec: weight has wrong n_vars");
  }
  const int k = basis_.size();
  entry_.assign(k * (k + 1) / 2, -1);
  std::unordered_map<Monomial, int, MonomialHash> cache;
  for (int q = 0; q < k; ++q) {
    for (int p = q; p < k; ++p) {
      const Monomial prod = basis_[p] * basis_[q];
      auto [it, inserted] = cache.try_emplace(prod, static_cast<int>(distinct_.size()));
      if (inserted) {
        MomentFunctional fn;
        for (const auto& [a, c] : weight.terms()) fn.emplace_back(a * prod, c);
        distinct_.push_back(std::move(fn));
      }
      entry_[SvecIndex(k, p, q)] = it->second;
    }
  }
}

const MomentFunctional& LocalizingMatrixSpec::at(int i, int j) const {
  return distinct_[entry_[SvecIndex(size(), i, j)]];
}

Eigen::MatrixXd LocalizingMatrixSpec::Evaluate(const MomentSequence& y) const {
  const int k = size();
  std::vector<double> values(distinct_.size());
  for (std::size_t t = 0; t < distinct_.size(); ++t) {
    double acc = 0.0;
    for (const auto& [m, c] : distinct_[t]) acc += c * y.at(m);
    values[t] = acc;
  }
  Eigen::MatrixXd out(k, k);
  for (int q = 0; q < k; ++q) {
    for (int p = q; p < k; ++p) out(p, q) = out(q, p) = values[entry_[SvecIndex(k, p, q)]];
  }
  return out;
}

Polynomial PushforwardRow(const DynamicalSystem& f, const Monomial& beta,
                          int max_degree) {
  if (beta.n_vars() != f.n_vars()) {
    throw std::invalid_argument("PushforwardRow: dimension mismatch");
  }
  Polynomial out = Compose(Polynomial::FromMonomial(beta), f.components());
  if (out.degree() > max_degree) {
    throw std::invalid_argument("PushforwardRow: f(x)^" + ToString(beta) +
                                " has degree " + std::to_string(out.degree()) +
                                " beyond the moment degree " +
                                std::to_string(max_degree));
  }
  return out;
}

std::vector<Polynomial> PushforwardTable(std::span<const Polynomial> f,
                                         const MonomialBasis& basis) {
  const int n = basis.n_vars();
  std::vector<Polynomial> out;
  out.reserve(basis.size());
  for (int i = 0; i < basis.size(); ++i) {
    const Monomial& beta = basis[i];
    if (beta.degree() == 0) {
      out.push_back(Polynomial::Constant(n, 1.0));
      continue;
    }
    // Graded order puts β − e_j before β.
    int j = n - 1;
    while (beta[j] == 0) --j;
    const Monomial prev = beta / Monomial::Unit(n, j);
    out.push_back(out[basis.IndexOf(prev)] * f[j]);
  }
  return out;
}

ScaledProblem ScaleProblem(const ReachProblem& p) {
  p.Validate();
  ScaledProblem sp;
  sp.frame = AffineFrame::ForGeometry(p.state_geometry);
  sp.geometry = sp.frame.ScaledGeometry(p.state_geometry);
  for (auto& fi : sp.frame.ConjugateMap(p.system.components())) {
    sp.dynamics.push_back(fi.Clean(kScaledCleanEps));
  }
  sp.degree = p.system.degree();
  sp.horizon = p.horizon;
  sp.u_zero = p.u_zero;
  const double state_hint = sp.geometry.BallBoundHint();
  double init_hint = state_hint;
  if (p.init_geometry) {
    try {
      init_hint = sp.frame.ScaledGeometry(*p.init_geometry).BallBoundHint();
    } catch (const std::invalid_argument&) {
      // A box under a rotated frame is not a box; X⁰ ⊆ X keeps the state
      // hint valid.
    }
  }
  sp.init = PullSet(sp.frame, p.init, p.init_augmented, init_hint);
  sp.state = PullSet(sp.frame, p.state, p.state_augmented, state_hint);
  return sp;
}

int MomentBlock::Index(const Monomial& m) const {
  const int i = basis.IndexOf(m);
  if (i < 0) {
    throw std::out_of_range("moment block " + name + " has no entry " + ToString(m));
  }
  return offset + i;
}

MomentSequence VariableLayout::Extract(const MomentBlock& block,
                                       const Eigen::VectorXd& v) const {
  return MomentSequence(block.basis, v.segment(block.offset, block.basis.size()));
}

namespace {

void AddLocalizing(const LocalizingMatrixSpec& spec, const MomentBlock& block,
                   int column, Triplets& trips) {
  const int k = spec.size();
  for (int q = 0; q < k; ++q) {
    for (int p = q; p < k; ++p) {
      const double scale = p == q ? 1.0 : kSqrt2;
      const int col = column + SvecIndex(k, p, q);
      for (const auto& [m, c] : spec.at(p, q)) {
        trips.emplace_back(block.Index(m), col, -scale * c);
      }
    }
  }
}

ConicProgram::SparseMatrix BuildMatrix(int rows, int cols, const Triplets& trips) {
  ConicProgram::SparseMatrix a(rows, cols);
  a.setFromTriplets(trips.begin(), trips.end());
  a.prune(0.0);
  return a;
}

}  // namespace

PrimalRelaxation AssemblePrimal(const ReachProblem& p, int r) {
  CheckOrder(p, r);
  PrimalRelaxation out;
  out.r = r;
  out.scaled = ScaleProblem(p);
  const auto& sp = out.scaled;
  out.volume_scale = sp.frame.AbsDeterminant();
  const int n = sp.n_vars();
  const int rd = r * sp.degree;

  auto& L = out.layout;
  L.y0 = {"y0", MonomialBasis(n, 2 * rd), 0};
  L.y = {"y", MonomialBasis(n, 2 * r), L.y0.offset + L.y0.basis.size()};
  L.yhat = {"yhat", MonomialBasis(n, 2 * r), L.y.offset + L.y.basis.size()};
  L.z = {"z", MonomialBasis(n, 2 * rd), L.yhat.offset + L.yhat.basis.size()};
  const int m = L.size();

  const MonomialBasis& pb = L.y.basis;
  const int nb = pb.size();
  const MomentSequence lebesgue = MomentVector(sp.geometry, 2 * r);
  const auto pushforward = PushforwardTable(sp.dynamics, pb);

  auto& prog = out.program;
  Triplets trips;
  std::vector<double> c;
  prog.cones.push_back({ConeKind::kFree, 2 * nb});
  c.assign(2 * nb, 0.0);
  for (int i = 0; i < nb; ++i) {
    // Liouville: y_β + z_β − ℓ_z(f^β) − y0_β = 0.
    const Monomial& beta = pb[i];
    trips.emplace_back(L.y.Index(beta), i, 1.0);
    trips.emplace_back(L.z.Index(beta), i, 1.0);
    trips.emplace_back(L.y0.Index(beta), i, -1.0);
    for (const auto& [mono, coef] : pushforward[i].terms()) {
      trips.emplace_back(L.z.Index(mono), i, -coef);
    }
    // Domination: y_β + ŷ_β = y^X_β.
    trips.emplace_back(L.y.Index(beta), nb + i, 1.0);
    trips.emplace_back(L.yhat.Index(beta), nb + i, 1.0);
    c[nb + i] = lebesgue.values()[i];
  }
  if (!sp.u_zero) {
    // a = T·y^X_0 − z_0 ≥ 0.
    L.a_column = static_cast<int>(c.size());
    prog.cones.push_back({ConeKind::kNonneg, 1});
    trips.emplace_back(L.z.Index(Monomial(n)), L.a_column, 1.0);
    c.push_back(sp.horizon * lebesgue.values()[0]);
  }
  auto add_blocks = [&](const std::vector<Polynomial>& gens, int order,
                        const MomentBlock& block) {
    for (const auto& [g, rj] : Generators(gens, n)) {
      const LocalizingMatrixSpec spec(n, order - rj, g);
      const int column = static_cast<int>(c.size());
      prog.cones.push_back({ConeKind::kPsd, spec.size()});
      c.resize(c.size() + prog.cones.back().dim(), 0.0);
      AddLocalizing(spec, block, column, trips);
    }
  };
  add_blocks(sp.init, rd, L.y0);
  add_blocks(sp.state, r, L.y);
  add_blocks(sp.state, r, L.yhat);
  add_blocks(sp.state, rd, L.z);

  prog.c = Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<int>(c.size()));
  prog.A = BuildMatrix(m, static_cast<int>(c.size()), trips);
  prog.b = Eigen::VectorXd::Zero(m);
  prog.b[L.y.Index(Monomial(n))] = 1.0;
  prog.Validate();
  return out;
}

DualRelaxation AssembleDual(const ReachProblem& p, int r) {
  CheckOrder(p, r);
  DualRelaxation out;
  out.r = r;
  out.scaled = ScaleProblem(p);
  const auto& sp = out.scaled;
  out.volume_scale = sp.frame.AbsDeterminant();
  const int n = sp.n_vars();
  const int rd = r * sp.degree;

  out.poly_basis = MonomialBasis(n, 2 * r);
  const MonomialBasis& pb = out.poly_basis;
  const int nb = pb.size();
  out.pushforward = PushforwardTable(sp.dynamics, pb);
  const MomentSequence lebesgue = MomentVector(sp.geometry, 2 * r);

  auto& prog = out.program;
  std::vector<double> c(2 * nb, 0.0);
  prog.cones.push_back({ConeKind::kFree, 2 * nb});
  out.v_column = 0;
  out.w_column = nb;
  for (int i = 0; i < nb; ++i) c[nb + i] = lebesgue.values()[i];
  if (!sp.u_zero) {
    out.u_column = static_cast<int>(c.size());
    prog.cones.push_back({ConeKind::kNonneg, 1});
    c.push_back(sp.horizon * lebesgue.values()[0]);
  }

  struct Pending {
    std::string name;
    int order;
    const std::vector<Polynomial>* gens;
  };
  const Pending pending[] = {
      {"v in Q0", rd, &sp.init},
      {"w - 1 - v in Q", r, &sp.state},
      {"u + v o f - v in Q", rd, &sp.state},
      {"w in Q", r, &sp.state},
  };
  int rows = 0;
  for (const auto& pm : pending) {
    MembershipSpec ms;
    ms.name = pm.name;
    ms.order = pm.order;
    ms.row_offset = rows;
    ms.rows = MonomialBasis(n, 2 * pm.order);
    rows += ms.rows.size();
    for (const auto& [g, rj] : Generators(*pm.gens, n)) {
      GramBlockSpec gb{g, MonomialBasis(n, pm.order - rj), static_cast<int>(c.size())};
      prog.cones.push_back({ConeKind::kPsd, gb.basis.size()});
      c.resize(c.size() + prog.cones.back().dim(), 0.0);
      ms.grams.push_back(std::move(gb));
    }
    out.memberships.push_back(std::move(ms));
  }

  // Each row reads −Σ_j ⟨A_μ, Q_j⟩ + (linear part in u, v, w) = rhs_μ, so
  // that row multipliers are moment sequences.
  Triplets trips;
  for (const auto& ms : out.memberships) {
    for (const auto& gb : ms.grams) {
      const int k = gb.basis.size();
      for (int q = 0; q < k; ++q) {
        for (int p2 = q; p2 < k; ++p2) {
          const Monomial prod = gb.basis[p2] * gb.basis[q];
          const double scale = p2 == q ? 1.0 : kSqrt2;
          const int col = gb.column + SvecIndex(k, p2, q);
          for (const auto& [a, ga] : gb.multiplier.terms()) {
            trips.emplace_back(ms.row_offset + ms.rows.IndexOf(a * prod), col,
                               -scale * ga);
          }
        }
      }
    }
  }
  const auto& k0 = out.memberships[0];
  const auto& k1 = out.memberships[1];
  const auto& k2 = out.memberships[2];
  const auto& k3 = out.memberships[3];
  for (int i = 0; i < nb; ++i) {
    const Monomial& mu = pb[i];
    const int v = out.v_column + i, w = out.w_column + i;
    trips.emplace_back(k0.row_offset + k0.rows.IndexOf(mu), v, 1.0);
    trips.emplace_back(k1.row_offset + k1.rows.IndexOf(mu), w, 1.0);
    trips.emplace_back(k1.row_offset + k1.rows.IndexOf(mu), v, -1.0);
    trips.emplace_back(k2.row_offset + k2.rows.IndexOf(mu), v, -1.0);
    for (const auto& [mono, coef] : out.pushforward[i].terms()) {
      trips.emplace_back(k2.row_offset + k2.rows.IndexOf(mono), v, coef);
    }
    trips.emplace_back(k3.row_offset + k3.rows.IndexOf(mu), w, 1.0);
  }
  if (out.u_column >= 0) trips.emplace_back(k2.row_offset, out.u_column, 1.0);

  prog.c = Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<int>(c.size()));
  prog.A = BuildMatrix(rows, static_cast<int>(c.size()), trips);
  prog.b = Eigen::VectorXd::Zero(rows);
  prog.b[k1.row_offset] = 1.0;
  prog.Validate();
  return out;
}

double Certificate::Margin(const Eigen::VectorXd& x) const {
  return v.Evaluate(x) + (u_zero ? 0.0 : u * horizon);
}

SolveFailure::SolveFailure(SolveStatus status, Residuals residuals)
    : std::runtime_error("solver finished with status " + ToString(status) +
                         " (primal residual " + std::to_string(residuals.primal) +
                         ", dual residual " + std::to_string(residuals.dual) +
                         ", gap " + std::to_string(residuals.gap) + ")"),
      status_(status),
      residuals_(residuals) {}

namespace {

void RequireConverged(const Solution& sol) {
  if (sol.status != SolveStatus::kOptimal && sol.status != SolveStatus::kNearOptimal) {
    throw SolveFailure(sol.status, sol.residuals);
  }
}

}  // namespace

Certificate ExtractCertificate(const DualRelaxation& relax, const Solution& sol,
                               const ReachProblem& p) {
  RequireConverged(sol);
  const auto& sp = relax.scaled;
  const int nb = relax.poly_basis.size();
  const int n = sp.n_vars();
  Certificate cert;
  cert.variables = p.variables;
  cert.r = relax.r;
  cert.horizon = sp.horizon;
  cert.u_zero = sp.u_zero;
  cert.u = relax.u_column >= 0 ? sol.x[relax.u_column] : 0.0;
  const Polynomial v = FromCoefficientVector(sol.x.segment(relax.v_column, nb),
                                             relax.poly_basis)
                           .Clean();
  const Polynomial w = FromCoefficientVector(sol.x.segment(relax.w_column, nb),
                                             relax.poly_basis)
                           .Clean();
  cert.v = sp.frame.PushToOriginal(v).Clean();
  cert.w = sp.frame.PushToOriginal(w).Clean();
  cert.objective = sol.primal_objective * relax.volume_scale;
  cert.state_box = p.state_geometry.BoundingBox();
  cert.frame = sp.frame;

  const Polynomial one = Polynomial::Constant(n, 1.0);
  const Polynomial targets[] = {
      v,
      w - one - v,
      Compose(v, sp.dynamics) + Polynomial::Constant(n, cert.u) - v,
      w,
  };
  for (std::size_t k = 0; k < relax.memberships.size(); ++k) {
    const auto& ms = relax.memberships[k];
    Membership mem;
    mem.name = ms.name;
    mem.target = targets[k];
    for (const auto& gb : ms.grams) {
      const int size = gb.basis.size();
      mem.terms.push_back({gb.multiplier, gb.basis,
                           Smat(sol.x.segment(gb.column, size * (size + 1) / 2), size)});
    }
    cert.memberships.push_back(std::move(mem));
  }
  return cert;
}

std::vector<double> ReconstructionResiduals(const Certificate& cert) {
  std::vector<double> out;
  for (const auto& mem : cert.memberships) {
    std::unordered_map<Monomial, double, MonomialHash> acc;
    for (const auto& term : mem.terms) {
      const int k = term.basis.size();
      for (int q = 0; q < k; ++q) {
        for (int p = q; p < k; ++p) {
          const double qpq = (p == q ? 1.0 : 2.0) * term.gram(p, q);
          if (qpq == 0.0) continue;
          const Monomial prod = term.basis[p] * term.basis[q];
          for (const auto& [a, ga] : term.multiplier.terms()) acc[a * prod] += qpq * ga;
        }
      }
    }
    for (const auto& [m, c] : mem.target.terms()) acc[m] -= c;
    double worst = 0.0;
    for (const auto& [m, c] : acc) worst = std::max(worst, std::abs(c));
    out.push_back(worst);
  }
  return out;
}

DualResult SolveDual(const ReachProblem& p, int r, const SdpBackend& backend,
                     const SolverOptions& opts) {
  const DualRelaxation relax = AssembleDual(p, r);
  DualResult out;
  out.solution = backend.Solve(relax.program, opts);
  out.certificate = ExtractCertificate(relax, out.solution, p);
  out.objective = out.certificate.objective;
  return out;
}

PrimalResult SolvePrimal(const ReachProblem& p, int r, const SdpBackend& backend,
                         const SolverOptions& opts) {
  const PrimalRelaxation relax = AssemblePrimal(p, r);
  PrimalResult out;
  out.solution = backend.Solve(relax.program, opts);
  RequireConverged(out.solution);
  out.objective = out.solution.dual_objective * relax.volume_scale;
  return out;
}

}  // namespace reachsdp
