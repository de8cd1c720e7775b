#include "reachsdp/sdp_solver.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace reachsdp {

int DefaultThreadCount() {
  if (const char* env = std::getenv("REACH_SOS_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// handled by exactly one call, so writes keyed by i are race-free and the
// result does not depend on scheduling.
template <class Fn>
void ParallelFor(int n, int threads, Fn&& fn) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct PsdEntry {
  int p, q;  // p >= q
  double a;  // svec coefficient
};

struct RowSlice {
  int row;
  std::vector<PsdEntry> entries;
};

struct PsdData {
  int offset = 0;
  int k = 0;
  std::vector<RowSlice> slices;  // ascending row
};

struct NonnegColumn {
  int col;
  std::vector<std::pair<int, double>> entries;
};

struct PsdScaling {
  MatrixXd r;      // W = R Rᵀ
  MatrixXd r_inv;
  MatrixXd w;
  VectorXd lambda;
};

struct NonnegScaling {
  VectorXd d;  // sqrt(x / s)
  VectorXd lambda;
};

// Scaled complementarity right-hand side per cone, same layout as the
// scaled iterates: a k×k symmetric matrix per PSD block, a vector for the
// nonnegative columns.
struct ComplementarityRhs {
  std::vector<MatrixXd> psd;
  VectorXd nonneg;
  double tau_kappa = 0.0;
};

struct Direction {
  VectorXd dx, dy, ds;
  double dtau = 0.0, dkappa = 0.0;
};

class Ipm {
 public:
  Ipm(const ConicProgram& p, const SolverOptions& o) : p_(p), o_(o) {
    p_.Validate();
    threads_ = o.threads > 0 ? o.threads : DefaultThreadCount();
    Preprocess();
  }

  Solution Run();

 private:
  void Preprocess();
  bool ComputeScaling();
  bool FormAndFactor();
  VectorXd ApplyH(const VectorXd& v) const;  // zero on free columns
  void SolveAugmented(const VectorXd& r1, const VectorXd& r2, VectorXd& dy,
                      VectorXd& dxf) const;
  void SolveAugmentedOnce(const VectorXd& r1, const VectorXd& r2, VectorXd& dy,
                          VectorXd& dxf) const;
  Direction SolveLinear(const VectorXd& rp, const VectorXd& rd, double rg,
                        const VectorXd& rxs, double rtk) const;
  Direction SolveDirection(double eta, const ComplementarityRhs& xi) const;
  // Scaled direction components used by the corrector and step length.
  void ScaledParts(const Direction& d, std::vector<MatrixXd>& dxs,
                   std::vector<MatrixXd>& dss, VectorXd& dxn, VectorXd& dsn) const;
  double MaxStep(const Direction& d) const;

  ConicProgram p_;
  SolverOptions o_;
  int threads_ = 1;
  int m_ = 0, n_ = 0;
  int nu_ = 0;  // barrier degree of K

  std::vector<PsdData> psd_;
  std::vector<NonnegColumn> nonneg_;
  std::vector<int> free_cols_;
  MatrixXd a_free_;  // m × n_free, dense
  VectorXd c_free_;
  Eigen::SparseMatrix<double> at_;  // Aᵀ, column-major

  // Iterate.
  VectorXd x_, y_, s_;
  double tau_ = 1.0, kappa_ = 1.0;

  // Per-iteration factorization data.
  std::vector<PsdScaling> psd_scale_;
  NonnegScaling nn_scale_;
  MatrixXd schur_;  // lower triangle valid
  Eigen::LLT<MatrixXd> schur_llt_;
  MatrixXd g_;  // M⁻¹ A_F
  Eigen::LDLT<MatrixXd> sf_ldlt_;
  VectorXd p1_, q1_;
  VectorXd ck_;  // c with free entries zeroed
  VectorXd hc_;  // H c_K
  VectorXd r_p_, r_d_;
  double r_g_ = 0.0;
};

void Ipm::Preprocess() {
  m_ = p_.n_rows();
  n_ = p_.n_cols();
  const auto off = p_.BlockOffsets();
  // col -> (kind, block index, local index)
  std::vector<int> col_block(n_), col_local(n_);
  std::vector<int> nn_index(n_, -1);
  std::vector<std::vector<std::pair<int, int>>> pq_tables;
  for (std::size_t b = 0; b < p_.cones.size(); ++b) {
    const auto& cone = p_.cones[b];
    nu_ += cone.degree();
    for (int j = 0; j < cone.dim(); ++j) {
      col_block[off[b] + j] = static_cast<int>(b);
      col_local[off[b] + j] = j;
    }
    switch (cone.kind) {
      case ConeKind::kFree:
        for (int j = 0; j < cone.size; ++j) free_cols_.push_back(off[b] + j);
        break;
      case ConeKind::kNonneg:
        for (int j = 0; j < cone.size; ++j) {
          nn_index[off[b] + j] = static_cast<int>(nonneg_.size());
          nonneg_.push_back({off[b] + j, {}});
        }
        break;
      case ConeKind::kPsd: {
        PsdData d;
        d.offset = off[b];
        d.k = cone.size;
        psd_.push_back(std::move(d));
        std::vector<std::pair<int, int>> table;
        for (int q = 0; q < cone.size; ++q) {
          for (int pp = q; pp < cone.size; ++pp) table.emplace_back(pp, q);
        }
        pq_tables.push_back(std::move(table));
        break;
      }
    }
  }
  std::vector<int> block_to_psd(p_.cones.size(), -1);
  for (int b = 0, t = 0; b < static_cast<int>(p_.cones.size()); ++b) {
    if (p_.cones[b].kind == ConeKind::kPsd) block_to_psd[b] = t++;
  }
  std::vector<int> free_index(n_, -1);
  for (std::size_t j = 0; j < free_cols_.size(); ++j) free_index[free_cols_[j]] = static_cast<int>(j);
  a_free_ = MatrixXd::Zero(m_, static_cast<int>(free_cols_.size()));
  c_free_.resize(static_cast<int>(free_cols_.size()));
  for (std::size_t j = 0; j < free_cols_.size(); ++j) c_free_[j] = p_.c[free_cols_[j]];

  for (int i = 0; i < m_; ++i) {
    for (ConicProgram::SparseMatrix::InnerIterator it(p_.A, i); it; ++it) {
      const int col = static_cast<int>(it.col());
      const double v = it.value();
      if (v == 0.0) continue;
      const int b = col_block[col];
      switch (p_.cones[b].kind) {
        case ConeKind::kFree:
          a_free_(i, free_index[col]) = v;
          break;
        case ConeKind::kNonneg:
          nonneg_[nn_index[col]].entries.emplace_back(i, v);
          break;
        case ConeKind::kPsd: {
          auto& d = psd_[block_to_psd[b]];
          if (d.slices.empty() || d.slices.back().row != i) d.slices.push_back({i, {}});
          const auto [pp, q] = pq_tables[block_to_psd[b]][col_local[col]];
          d.slices.back().entries.push_back({pp, q, v});
          break;
        }
      }
    }
  }
  at_ = p_.A.transpose();
  ck_ = p_.c;
  for (int col : free_cols_) ck_[col] = 0.0;
}

bool Ipm::ComputeScaling() {
  psd_scale_.resize(psd_.size());
  for (std::size_t t = 0; t < psd_.size(); ++t) {
    const int k = psd_[t].k;
    const int off = psd_[t].offset;
    const MatrixXd xm = Smat(x_.segment(off, k * (k + 1) / 2), k);
    const MatrixXd sm = Smat(s_.segment(off, k * (k + 1) / 2), k);
    Eigen::LLT<MatrixXd> lx(xm), ls(sm);
    if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) return false;
    const MatrixXd l1 = lx.matrixL();
    const MatrixXd l2 = ls.matrixL();
    Eigen::JacobiSVD<MatrixXd> svd(l2.transpose() * l1,
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
    const VectorXd lam = svd.singularValues();
    if (lam.minCoeff() <= 0.0 || !lam.allFinite()) return false;
    auto& sc = psd_scale_[t];
    sc.lambda = lam;
    const VectorXd inv_sqrt = lam.cwiseSqrt().cwiseInverse();
    sc.r = l1 * svd.matrixV() * inv_sqrt.asDiagonal();
    // R⁻¹ = Λ^{1/2} Vᵀ L1⁻¹
    MatrixXd vt = svd.matrixV().transpose();
    sc.r_inv = lam.cwiseSqrt().asDiagonal() *
               l1.triangularView<Eigen::Lower>().solve<Eigen::OnTheRight>(vt);
    sc.w = sc.r * sc.r.transpose();
  }
  const int nn = static_cast<int>(nonneg_.size());
  nn_scale_.d.resize(nn);
  nn_scale_.lambda.resize(nn);
  for (int j = 0; j < nn; ++j) {
    const int col = nonneg_[j].col;
    if (!(x_[col] > 0.0) || !(s_[col] > 0.0)) return false;
    nn_scale_.d[j] = std::sqrt(x_[col] / s_[col]);
    nn_scale_.lambda[j] = std::sqrt(x_[col] * s_[col]);
  }
  return true;
}

VectorXd Ipm::ApplyH(const VectorXd& v) const {
  VectorXd out = VectorXd::Zero(n_);
  for (std::size_t t = 0; t < psd_.size(); ++t) {
    const int k = psd_[t].k;
    const int off = psd_[t].offset;
    const auto& w = psd_scale_[t].w;
    out.segment(off, k * (k + 1) / 2) =
        Svec(w * Smat(v.segment(off, k * (k + 1) / 2), k) * w);
  }
  for (std::size_t j = 0; j < nonneg_.size(); ++j) {
    const int col = nonneg_[j].col;
    out[col] = nn_scale_.d[j] * nn_scale_.d[j] * v[col];
  }
  return out;
}

bool Ipm::FormAndFactor() {
  schur_.setZero(m_, m_);
  constexpr double kSqrt2 = std::numbers::sqrt2;
  for (std::size_t t = 0; t < psd_.size(); ++t) {
    const auto& blk = psd_[t];
    const int k = blk.k;
    const MatrixXd& w = psd_scale_[t].w;
    const int ns = static_cast<int>(blk.slices.size());
    const double work = static_cast<double>(ns) * k * k;
    const int threads = work > 2e5 ? threads_ : 1;
    ParallelFor(ns, threads, [&](int j) {
      const auto& sj = blk.slices[j];
      MatrixXd bmat;
      if (static_cast<int>(sj.entries.size()) > k) {
        MatrixXd aj = MatrixXd::Zero(k, k);
        for (const auto& e : sj.entries) {
          if (e.p == e.q) {
            aj(e.p, e.p) = e.a;
          } else {
            aj(e.p, e.q) = aj(e.q, e.p) = e.a / kSqrt2;
          }
        }
        bmat = w * aj * w;
      } else {
        bmat = MatrixXd::Zero(k, k);
        auto lower = bmat.selfadjointView<Eigen::Lower>();
        for (const auto& e : sj.entries) {
          if (e.p == e.q) {
            lower.rankUpdate(w.col(e.p), e.a);
          } else {
            lower.rankUpdate(w.col(e.p), w.col(e.q), e.a / kSqrt2);
          }
        }
      }
      const int rj = sj.row;
      for (int i = j; i < ns; ++i) {
        const auto& si = blk.slices[i];
        double acc = 0.0;
        for (const auto& e : si.entries) {
          acc += e.p == e.q ? e.a * bmat(e.p, e.p) : kSqrt2 * e.a * bmat(e.p, e.q);
        }
        schur_(si.row, rj) += acc;
      }
    });
  }
  for (std::size_t j = 0; j < nonneg_.size(); ++j) {
    const double h = nn_scale_.d[j] * nn_scale_.d[j];
    const auto& ent = nonneg_[j].entries;
    for (std::size_t a = 0; a < ent.size(); ++a) {
      for (std::size_t b = 0; b <= a; ++b) {
        const int ra = std::max(ent[a].first, ent[b].first);
        const int rb = std::min(ent[a].first, ent[b].first);
        schur_(ra, rb) += h * ent[a].second * ent[b].second;
      }
    }
  }

  // Cholesky with a growing diagonal shift if the Schur complement has lost
  // definiteness numerically.
  MatrixXd work = schur_;
  double max_diag = schur_.diagonal().cwiseAbs().maxCoeff();
  if (!(max_diag > 0.0) || !std::isfinite(max_diag)) return false;
  double shift = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    schur_llt_.compute(work);
    if (schur_llt_.info() == Eigen::Success) break;
    shift = shift == 0.0 ? 1e-14 * max_diag : shift * 100.0;
    work = schur_;
    work.diagonal().array() += shift;
    if (attempt == 7) return false;
  }
  if (schur_llt_.info() != Eigen::Success) return false;

  if (!free_cols_.empty()) {
    g_ = schur_llt_.solve(a_free_);
    MatrixXd sf = a_free_.transpose() * g_;
    sf = 0.5 * (sf + sf.transpose());
    sf_ldlt_.compute(sf);
    if (sf_ldlt_.info() != Eigen::Success) return false;
  }
  return true;
}

void Ipm::SolveAugmentedOnce(const VectorXd& r1, const VectorXd& r2,
                             VectorXd& dy, VectorXd& dxf) const {
  const VectorXd u = schur_llt_.solve(r1);
  if (free_cols_.empty()) {
    dy = u;
    dxf.resize(0);
    return;
  }
  dxf = sf_ldlt_.solve(a_free_.transpose() * u - r2);
  dy = u - g_ * dxf;
}

// [M A_F; A_Fᵀ 0] [dy; dxf] = [r1; r2] with one step of iterative
// refinement against the unshifted M.
void Ipm::SolveAugmented(const VectorXd& r1, const VectorXd& r2, VectorXd& dy,
                         VectorXd& dxf) const {
  SolveAugmentedOnce(r1, r2, dy, dxf);
  VectorXd e1 = r1 - schur_.selfadjointView<Eigen::Lower>() * dy;
  VectorXd e2 = r2;
  if (!free_cols_.empty()) {
    e1 -= a_free_ * dxf;
    e2 -= a_free_.transpose() * dy;
  }
  VectorXd cy, cx;
  SolveAugmentedOnce(e1, e2, cy, cx);
  dy += cy;
  if (!free_cols_.empty()) dxf += cx;
}

// Solves the linearized embedding
//   A dx − b dτ = rp,  Aᵀdy + ds − c dτ = rd (ds_F = 0),
//   bᵀdy − cᵀdx − dκ = rg,  dx_K + H ds_K = rxs,  κ dτ + τ dκ = rtk.
Direction Ipm::SolveLinear(const VectorXd& rp, const VectorXd& rd, double rg,
                           const VectorXd& rxs, double rtk) const {
  VectorXd rdk = rd;
  for (int col : free_cols_) rdk[col] = 0.0;
  VectorXd rdf(static_cast<int>(free_cols_.size()));
  for (std::size_t j = 0; j < free_cols_.size(); ++j) rdf[j] = rd[free_cols_[j]];

  const VectorXd h_rdk = ApplyH(rdk);
  const VectorXd rhs1 = rp - p_.A * rxs + p_.A * h_rdk;
  VectorXd p2, q2;
  SolveAugmented(rhs1, rdf, p2, q2);

  const VectorXd bt = p_.b - p_.A * hc_;
  double denom = bt.dot(p1_) + ck_.dot(hc_) + kappa_ / tau_;
  double numer = rg - bt.dot(p2) + ck_.dot(rxs) - ck_.dot(h_rdk) + rtk / tau_;
  if (!free_cols_.empty()) {
    denom -= c_free_.dot(q1_);
    numer += c_free_.dot(q2);
  }

  Direction d;
  d.dtau = numer / denom;
  d.dy = p1_ * d.dtau + p2;
  d.ds = rdk + ck_ * d.dtau - at_ * d.dy;
  for (int col : free_cols_) d.ds[col] = 0.0;
  d.dx = rxs - ApplyH(d.ds);
  if (!free_cols_.empty()) {
    const VectorXd dxf = q1_ * d.dtau + q2;
    for (std::size_t j = 0; j < free_cols_.size(); ++j) d.dx[free_cols_[j]] = dxf[j];
  }
  d.dkappa = (rtk - kappa_ * d.dtau) / tau_;
  return d;
}

Direction Ipm::SolveDirection(double eta, const ComplementarityRhs& xi) const {
  // dx_K = r_xs − H ds_K, from the scaled complementarity equation.
  VectorXd rxs = VectorXd::Zero(n_);
  for (std::size_t t = 0; t < psd_.size(); ++t) {
    const int k = psd_[t].k;
    const auto& sc = psd_scale_[t];
    MatrixXd z(k, k);
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < k; ++i) {
        z(i, j) = 2.0 * xi.psd[t](i, j) / (sc.lambda[i] + sc.lambda[j]);
      }
    }
    rxs.segment(psd_[t].offset, k * (k + 1) / 2) = Svec(sc.r * z * sc.r.transpose());
  }
  for (std::size_t j = 0; j < nonneg_.size(); ++j) {
    const int col = nonneg_[j].col;
    rxs[col] = xi.nonneg[j] / s_[col];
  }
  const VectorXd rp = eta * r_p_;
  const VectorXd rd = eta * r_d_;
  const double rg = eta * r_g_;
  Direction d = SolveLinear(rp, rd, rg, rxs, xi.tau_kappa);

  // GMRES on the unreduced system, right-preconditioned by the reduced
  // solve. Plain refinement stalls once the Schur complement is badly
  // conditioned; a few Krylov steps recover the lost accuracy.
  const int nf = n_, mf = m_;
  auto pack_rhs = [&](const VectorXd& a, const VectorXd& b, double g,
                      const VectorXd& cc, double t) {
    VectorXd v(mf + 2 * nf + 2);
    v << a, b, g, cc, t;
    return v;
  };
  auto apply_k = [&](const Direction& dd) {
    VectorXd ec = dd.dx + ApplyH(dd.ds);
    for (int col : free_cols_) ec[col] = 0.0;
    return pack_rhs(p_.A * dd.dx - p_.b * dd.dtau, at_ * dd.dy + dd.ds - p_.c * dd.dtau,
                    p_.b.dot(dd.dy) - p_.c.dot(dd.dx) - dd.dkappa, ec,
                    kappa_ * dd.dtau + tau_ * dd.dkappa);
  };
  auto precondition = [&](const VectorXd& v) {
    return SolveLinear(v.segment(0, mf), v.segment(mf, nf), v[mf + nf],
                       v.segment(mf + nf + 1, nf), v[mf + 2 * nf + 1]);
  };
  auto axpy = [](Direction& dst, double a, const Direction& src) {
    dst.dx += a * src.dx;
    dst.dy += a * src.dy;
    dst.ds += a * src.ds;
    dst.dtau += a * src.dtau;
    dst.dkappa += a * src.dkappa;
  };

  VectorXd rfix = rxs;
  for (int col : free_cols_) rfix[col] = 0.0;
  // Residuals are weighted by their effect on the termination measures, so
  // a small primal residual is resolved even next to large complementarity
  // terms. Errors in the complementarity block only cost centrality.
  const double wp = 1.0 / (tau_ * (1.0 + p_.b.norm()));
  const double wd = 1.0 / (tau_ * (1.0 + p_.c.norm()));
  VectorXd weight(mf + 2 * nf + 2);
  weight.segment(0, mf).setConstant(wp);
  weight.segment(mf, nf + 1).setConstant(wd);
  weight.segment(mf + nf + 1, nf).setConstant(1e-2 * wp);
  weight[mf + 2 * nf + 1] = wd;
  const VectorXd rhs = pack_rhs(rp, rd, rg, rfix, xi.tau_kappa);
  auto weighted = [&](const VectorXd& v) { return v.cwiseProduct(weight); };
  const double target = 1e-3 * o_.tolerance;
  VectorXd r0 = weighted(rhs - apply_k(d));
  double beta = r0.norm();
  constexpr int kRestart = 12;
  for (int cycle = 0; cycle < 3 && beta > target; ++cycle) {
    std::vector<VectorXd> v{r0 / beta};
    std::vector<Direction> z;
    MatrixXd h = MatrixXd::Zero(kRestart + 1, kRestart);
    VectorXd cs(kRestart), sn(kRestart), gvec = VectorXd::Zero(kRestart + 1);
    gvec[0] = beta;
    int k = 0;
    for (; k < kRestart; ++k) {
      z.push_back(precondition(v[k].cwiseQuotient(weight)));
      VectorXd wv = weighted(apply_k(z[k]));
      for (int i = 0; i <= k; ++i) {
        h(i, k) = v[i].dot(wv);
        wv -= h(i, k) * v[i];
      }
      h(k + 1, k) = wv.norm();
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
        h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
        h(i, k) = t;
      }
      const double den = std::hypot(h(k, k), h(k + 1, k));
      if (!(den > 0.0)) break;
      cs[k] = h(k, k) / den;
      sn[k] = h(k + 1, k) / den;
      h(k, k) = den;
      h(k + 1, k) = 0.0;
      gvec[k + 1] = -sn[k] * gvec[k];
      gvec[k] *= cs[k];
      const double hk1 = std::abs(gvec[k + 1]);
      if (hk1 <= target || !(wv.norm() > 0.0)) {
        ++k;
        break;
      }
      v.push_back(wv / (wv.norm()));
    }
    if (k == 0) break;
    const VectorXd coef = h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(
        gvec.head(k));
    Direction trial = d;
    for (int i = 0; i < k; ++i) axpy(trial, coef[i], z[i]);
    VectorXd r1 = weighted(rhs - apply_k(trial));
    const double beta1 = r1.norm();
    if (!(beta1 < beta)) break;
    d = std::move(trial);
    r0 = std::move(r1);
    beta = beta1;
  }
  return d;
}

void Ipm::ScaledParts(const Direction& d, std::vector<MatrixXd>& dxs,
                      std::vector<MatrixXd>& dss, VectorXd& dxn,
                      VectorXd& dsn) const {
  dxs.resize(psd_.size());
  dss.resize(psd_.size());
  for (std::size_t t = 0; t < psd_.size(); ++t) {
    const int k = psd_[t].k;
    const int off = psd_[t].offset;
    const auto& sc = psd_scale_[t];
    dxs[t] = sc.r_inv * Smat(d.dx.segment(off, k * (k + 1) / 2), k) *
             sc.r_inv.transpose();
    dss[t] = sc.r.transpose() * Smat(d.ds.segment(off, k * (k + 1) / 2), k) * sc.r;
  }
  const int nn = static_cast<int>(nonneg_.size());
  dxn.resize(nn);
  dsn.resize(nn);
  for (int j = 0; j < nn; ++j) {
    const int col = nonneg_[j].col;
    dxn[j] = d.dx[col] / nn_scale_.d[j];
    dsn[j] = d.ds[col] * nn_scale_.d[j];
  }
}

double Ipm::MaxStep(const Direction& d) const {
  std::vector<MatrixXd> dxs, dss;
  VectorXd dxn, dsn;
  ScaledParts(d, dxs, dss, dxn, dsn);
  double alpha = std::numeric_limits<double>::infinity();
  auto limit = [&](double min_eig) {
    if (min_eig < 0.0) alpha = std::min(alpha, -1.0 / min_eig);
  };
  for (std::size_t t = 0; t < psd_.size(); ++t) {
    const VectorXd inv = psd_scale_[t].lambda.cwiseSqrt().cwiseInverse();
    for (const MatrixXd* m : {&dxs[t], &dss[t]}) {
      MatrixXd scaled = inv.asDiagonal() * (*m) * inv.asDiagonal();
      scaled = 0.5 * (scaled + scaled.transpose());
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(scaled, Eigen::EigenvaluesOnly);
      limit(es.eigenvalues()[0]);
    }
  }
  for (int j = 0; j < dxn.size(); ++j) {
    limit(dxn[j] / nn_scale_.lambda[j]);
    limit(dsn[j] / nn_scale_.lambda[j]);
  }
  if (d.dtau < 0.0) alpha = std::min(alpha, -tau_ / d.dtau);
  if (d.dkappa < 0.0) alpha = std::min(alpha, -kappa_ / d.dkappa);
  return alpha;
}

struct Measures {
  double pres, dres, gap, pobj, dobj;
  double worst() const { return std::max({pres, dres, gap}); }
};

Solution Ipm::Run() {
  const double norm_b = p_.b.norm(), norm_c = p_.c.norm();
  x_ = VectorXd::Zero(n_);
  s_ = VectorXd::Zero(n_);
  for (const auto& blk : psd_) {
    for (int i = 0; i < blk.k; ++i) {
      x_[blk.offset + SvecIndex(blk.k, i, i)] = 1.0;
      s_[blk.offset + SvecIndex(blk.k, i, i)] = 1.0;
    }
  }
  for (const auto& col : nonneg_) x_[col.col] = s_[col.col] = 1.0;
  y_ = VectorXd::Zero(m_);
  tau_ = kappa_ = 1.0;

  auto measure = [&]() {
    Measures ms;
    ms.pres = (p_.A * x_ - p_.b * tau_).norm() / tau_ / (1.0 + norm_b);
    ms.dres = (at_ * y_ + s_ - p_.c * tau_).norm() / tau_ / (1.0 + norm_c);
    ms.pobj = p_.c.dot(x_) / tau_;
    ms.dobj = p_.b.dot(y_) / tau_;
    ms.gap = std::abs(ms.pobj - ms.dobj) /
             (1.0 + std::abs(ms.pobj) + std::abs(ms.dobj));
    return ms;
  };

  Solution best;
  double best_worst = std::numeric_limits<double>::infinity();
  auto snapshot = [&](Solution& sol, int iter) {
    sol.x = x_ / tau_;
    sol.y = y_ / tau_;
    sol.s = s_ / tau_;
    sol.iterations = iter;
    sol.primal_objective = p_.c.dot(sol.x);
    sol.dual_objective = p_.b.dot(sol.y);
  };

  SolveStatus status = SolveStatus::kMaxIter;
  int iter = 0;
  int stalls = 0;
  int since_best = 0;
  bool have_final = false;
  for (; iter <= o_.max_iterations; ++iter) {
    const Measures ms = measure();
    if (ms.worst() < best_worst && std::isfinite(ms.worst())) {
      best_worst = ms.worst();
      snapshot(best, iter);
      since_best = 0;
    } else if (++since_best >= 5 && best_worst <= o_.near_tolerance) {
      break;
    }
    const double mu = (x_.dot(s_) + tau_ * kappa_) / (nu_ + 1);
    if (o_.verbosity > 0 && o_.log) {
      *o_.log << std::setw(4) << iter << std::scientific << std::setprecision(3)
              << "  pobj " << ms.pobj << "  dobj " << ms.dobj << "  pres "
              << ms.pres << "  dres " << ms.dres << "  gap " << ms.gap
              << "  mu " << mu << "  tau " << tau_ << "  kappa " << kappa_
              << '\n';
    }
    if (ms.pres <= o_.tolerance && ms.dres <= o_.tolerance &&
        ms.gap <= o_.tolerance) {
      status = SolveStatus::kOptimal;
      snapshot(best, iter);
      have_final = true;
      break;
    }
    if (tau_ < kappa_) {
      const double by = p_.b.dot(y_);
      const double cx = p_.c.dot(x_);
      if (by > 0.0 && (at_ * y_ + s_).norm() <= o_.tolerance * by) {
        status = SolveStatus::kInfeasible;
        break;
      }
      if (cx < 0.0 && (p_.A * x_).norm() <= o_.tolerance * -cx) {
        status = SolveStatus::kUnbounded;
        break;
      }
    }
    if (iter == o_.max_iterations) break;

    r_p_ = p_.b * tau_ - p_.A * x_;
    r_d_ = p_.c * tau_ - at_ * y_ - s_;
    r_g_ = kappa_ + p_.c.dot(x_) - p_.b.dot(y_);

    if (!ComputeScaling() || !FormAndFactor()) {
      status = SolveStatus::kNumericalError;
      break;
    }
    {
      hc_ = ApplyH(ck_);
      SolveAugmented(p_.b + p_.A * hc_, c_free_, p1_, q1_);
    }

    // Predictor.
    ComplementarityRhs xi;
    xi.psd.resize(psd_.size());
    for (std::size_t t = 0; t < psd_.size(); ++t) {
      const auto& lam = psd_scale_[t].lambda;
      xi.psd[t] = MatrixXd((-lam.array() * lam.array()).matrix().asDiagonal());
    }
    xi.nonneg = -(nn_scale_.lambda.array() * nn_scale_.lambda.array()).matrix();
    xi.tau_kappa = -tau_ * kappa_;
    const Direction aff = SolveDirection(1.0, xi);
    const double alpha_aff = std::min(1.0, MaxStep(aff));
    const double sigma = std::pow(1.0 - alpha_aff, 3);

    // Corrector.
    std::vector<MatrixXd> dxs, dss;
    VectorXd dxn, dsn;
    ScaledParts(aff, dxs, dss, dxn, dsn);
    for (std::size_t t = 0; t < psd_.size(); ++t) {
      const auto& lam = psd_scale_[t].lambda;
      MatrixXd corr = 0.5 * (dxs[t] * dss[t] + dss[t] * dxs[t]);
      xi.psd[t] = -corr;
      xi.psd[t].diagonal().array() += sigma * mu - lam.array() * lam.array();
    }
    xi.nonneg = (sigma * mu - nn_scale_.lambda.array() * nn_scale_.lambda.array() -
                 dxn.array() * dsn.array())
                    .matrix();
    xi.tau_kappa = sigma * mu - tau_ * kappa_ - aff.dtau * aff.dkappa;
    const Direction d = SolveDirection(1.0 - sigma, xi);
    const double alpha = std::min(1.0, 0.99 * MaxStep(d));
    if (!std::isfinite(alpha) || !d.dx.allFinite() || !d.dy.allFinite()) {
      status = SolveStatus::kNumericalError;
      break;
    }

    x_ += alpha * d.dx;
    y_ += alpha * d.dy;
    s_ += alpha * d.ds;
    tau_ += alpha * d.dtau;
    kappa_ += alpha * d.dkappa;

    stalls = alpha < 1e-8 ? stalls + 1 : 0;
    if (stalls >= 3) {
      status = SolveStatus::kNumericalError;
      ++iter;
      break;
    }
  }

  Solution out;
  if (status == SolveStatus::kInfeasible) {
    // Farkas certificate: y with bᵀy = 1.
    const double by = p_.b.dot(y_);
    out.x = VectorXd::Zero(n_);
    out.y = y_ / by;
    out.s = s_ / by;
  } else if (status == SolveStatus::kUnbounded) {
    const double cx = -p_.c.dot(x_);
    out.x = x_ / cx;
    out.y = VectorXd::Zero(m_);
    out.s = VectorXd::Zero(n_);
  } else {
    if (!have_final) {
      if (best.x.size() == 0) snapshot(best, iter);
      if (best_worst <= o_.tolerance) {
        status = SolveStatus::kOptimal;
      } else if (best_worst <= o_.near_tolerance) {
        status = SolveStatus::kNearOptimal;
      }
    }
    out = best;
  }
  out.status = status;
  out.iterations = std::min(iter, o_.max_iterations);
  out.primal_objective = p_.c.dot(out.x);
  out.dual_objective = p_.b.dot(out.y);
  out.residuals = ComputeResiduals(p_, out.x, out.y, out.s);
  return out;
}

// Removes free columns by substitution. A free column is eliminated through
// a row in which it is the only remaining free column; the row is solved for
// the free variable and the result substituted into the objective and the
// other rows. Columns without such a row stay free.
class FreePresolve {
 public:
  explicit FreePresolve(const ConicProgram& p);

  const ConicProgram& reduced() const { return reduced_; }
  double objective_offset() const { return offset_; }
  bool trivial() const { return elims_.empty(); }

  // Expands a solution of the reduced program to the original one.
  Solution Postsolve(const Solution& r) const;

 private:
  using Row = std::vector<std::pair<int, double>>;  // sorted by column

  struct Elimination {
    int col, row;
    double pivot, rhs;
    Row rest;  // row without the pivot entry, over original columns
  };

  const ConicProgram& p_;
  ConicProgram reduced_;
  std::vector<Elimination> elims_;
  std::vector<int> col_map_;  // reduced → original
  std::vector<int> row_map_;
  double offset_ = 0.0;
};

FreePresolve::FreePresolve(const ConicProgram& p) : p_(p) {
  const int m = p.n_rows(), n = p.n_cols();
  const auto off = p.BlockOffsets();
  std::vector<char> is_free(n, 0);
  for (std::size_t b = 0; b < p.cones.size(); ++b) {
    if (p.cones[b].kind != ConeKind::kFree) continue;
    for (int j = 0; j < p.cones[b].size; ++j) is_free[off[b] + j] = 1;
  }
  std::vector<Row> rows(m);
  std::vector<std::vector<int>> free_rows(n);
  std::vector<int> free_count(m, 0);
  for (int i = 0; i < m; ++i) {
    for (ConicProgram::SparseMatrix::InnerIterator it(p.A, i); it; ++it) {
      if (it.value() == 0.0) continue;
      const int col = static_cast<int>(it.col());
      rows[i].emplace_back(col, it.value());
      if (is_free[col]) {
        free_rows[col].push_back(i);
        ++free_count[i];
      }
    }
  }
  VectorXd c = p.c;
  VectorXd b = p.b;
  std::vector<char> row_gone(m, 0), col_gone(n, 0);
  auto coeff = [&](const Row& row, int col) {
    auto it = std::lower_bound(row.begin(), row.end(), std::make_pair(col, -HUGE_VAL));
    return it != row.end() && it->first == col ? it->second : 0.0;
  };

  for (int j = 0; j < n; ++j) {
    if (!is_free[j]) continue;
    // Pivot: singleton row with the largest relative pivot, then the
    // shortest row.
    int best = -1;
    double best_ratio = 0.0;
    for (int i : free_rows[j]) {
      if (row_gone[i] || free_count[i] != 1) continue;
      const double a = coeff(rows[i], j);
      if (a == 0.0) continue;
      double row_max = 0.0;
      for (const auto& [col, v] : rows[i]) row_max = std::max(row_max, std::abs(v));
      const double ratio = std::abs(a) / row_max;
      if (ratio < 1e-3) continue;
      if (best < 0 || ratio > best_ratio * 1.5 ||
          (ratio >= best_ratio / 1.5 && rows[i].size() < rows[best].size())) {
        best = i;
        best_ratio = ratio;
      }
    }
    if (best < 0) continue;
    Elimination e;
    e.col = j;
    e.row = best;
    e.pivot = coeff(rows[best], j);
    e.rhs = b[best];
    for (const auto& entry : rows[best]) {
      if (entry.first != j) e.rest.push_back(entry);
    }
    // x_j = (rhs − rest·x) / pivot.
    if (c[j] != 0.0) {
      const double f = c[j] / e.pivot;
      offset_ += f * e.rhs;
      for (const auto& [col, v] : e.rest) c[col] -= f * v;
      c[j] = 0.0;
    }
    for (int i : free_rows[j]) {
      if (i == best || row_gone[i]) continue;
      const double a = coeff(rows[i], j);
      if (a == 0.0) continue;
      const double f = a / e.pivot;
      b[i] -= f * e.rhs;
      Row merged;
      merged.reserve(rows[i].size() + e.rest.size());
      auto it = rows[i].begin();
      auto jt = e.rest.begin();
      while (it != rows[i].end() || jt != e.rest.end()) {
        if (jt == e.rest.end() || (it != rows[i].end() && it->first < jt->first)) {
          if (it->first != j) merged.push_back(*it);
          ++it;
        } else if (it == rows[i].end() || jt->first < it->first) {
          merged.emplace_back(jt->first, -f * jt->second);
          ++jt;
        } else {
          const double v = it->second - f * jt->second;
          if (v != 0.0) merged.emplace_back(it->first, v);
          ++it;
          ++jt;
        }
      }
      rows[i] = std::move(merged);
      --free_count[i];
    }
    row_gone[best] = 1;
    col_gone[j] = 1;
    elims_.push_back(std::move(e));
  }
  if (elims_.empty()) return;

  std::vector<int> new_col(n, -1), new_row(m, -1);
  for (int j = 0; j < n; ++j) {
    if (col_gone[j]) continue;
    new_col[j] = static_cast<int>(col_map_.size());
    col_map_.push_back(j);
  }
  for (int i = 0; i < m; ++i) {
    if (row_gone[i]) continue;
    new_row[i] = static_cast<int>(row_map_.size());
    row_map_.push_back(i);
  }
  for (std::size_t bl = 0; bl < p.cones.size(); ++bl) {
    ConeBlock cone = p.cones[bl];
    if (cone.kind == ConeKind::kFree) {
      int kept = 0;
      for (int j = 0; j < cone.size; ++j) kept += !col_gone[off[bl] + j];
      if (kept == 0) continue;
      cone.size = kept;
    }
    reduced_.cones.push_back(cone);
  }
  const int rn = static_cast<int>(col_map_.size());
  const int rm = static_cast<int>(row_map_.size());
  reduced_.c.resize(rn);
  for (int j = 0; j < rn; ++j) reduced_.c[j] = c[col_map_[j]];
  reduced_.b.resize(rm);
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < rm; ++i) {
    reduced_.b[i] = b[row_map_[i]];
    for (const auto& [col, v] : rows[row_map_[i]]) {
      trips.emplace_back(i, new_col[col], v);
    }
  }
  reduced_.A.resize(rm, rn);
  reduced_.A.setFromTriplets(trips.begin(), trips.end());
}

Solution FreePresolve::Postsolve(const Solution& r) const {
  Solution out = r;
  const int m = p_.n_rows(), n = p_.n_cols();
  out.x = VectorXd::Zero(n);
  out.s = VectorXd::Zero(n);
  out.y = VectorXd::Zero(m);
  for (std::size_t j = 0; j < col_map_.size(); ++j) {
    out.x[col_map_[j]] = r.x[j];
    out.s[col_map_[j]] = r.s[j];
  }
  for (std::size_t i = 0; i < row_map_.size(); ++i) out.y[row_map_[i]] = r.y[i];
  if (r.status == SolveStatus::kUnbounded) {
    // Ray: A x = 0, so the pivot rows have a zero right-hand side.
    for (const auto& e : elims_) {
      double acc = 0.0;
      for (const auto& [col, v] : e.rest) acc += v * out.x[col];
      out.x[e.col] = -acc / e.pivot;
    }
  } else if (r.status != SolveStatus::kInfeasible) {
    for (const auto& e : elims_) {
      double acc = e.rhs;
      for (const auto& [col, v] : e.rest) acc -= v * out.x[col];
      out.x[e.col] = acc / e.pivot;
    }
  }
  // Multipliers of the pivot rows from the dual equations of the eliminated
  // columns, latest elimination first.
  if (r.status != SolveStatus::kUnbounded) {
    const Eigen::SparseMatrix<double> a_cols = p_.A;
    const double c_scale = r.status == SolveStatus::kInfeasible ? 0.0 : 1.0;
    for (auto e = elims_.rbegin(); e != elims_.rend(); ++e) {
      double acc = c_scale * p_.c[e->col];
      double pivot = 0.0;
      for (Eigen::SparseMatrix<double>::InnerIterator it(a_cols, e->col); it; ++it) {
        if (it.row() == e->row) {
          pivot += it.value();
        } else {
          acc -= it.value() * out.y[it.row()];
        }
      }
      out.y[e->row] = acc / pivot;
    }
  }
  out.primal_objective = p_.c.dot(out.x);
  out.dual_objective = p_.b.dot(out.y);
  out.residuals = ComputeResiduals(p_, out.x, out.y, out.s);
  return out;
}

std::mutex& RegistryMutex() {
  static std::mutex mu;
  return mu;
}

std::map<std::string, std::function<std::unique_ptr<SdpBackend>()>>& Registry() {
  static std::map<std::string, std::function<std::unique_ptr<SdpBackend>()>> r{
      {"builtin", [] { return std::make_unique<InteriorPointSolver>(); }},
  };
  return r;
}

}  // namespace

Solution InteriorPointSolver::Solve(const ConicProgram& p,
                                    const SolverOptions& opts) const {
  FreePresolve pre(p);
  // Eliminating every row leaves nothing for the embedding to work on.
  if (pre.trivial() || pre.reduced().n_rows() == 0) return Ipm(p, opts).Run();
  return pre.Postsolve(Ipm(pre.reduced(), opts).Run());
}

std::vector<std::string> BackendNames() {
  std::lock_guard lock(RegistryMutex());
  std::vector<std::string> names;
  for (const auto& [name, _] : Registry()) names.push_back(name);
  return names;
}

std::unique_ptr<SdpBackend> MakeBackend(const std::string& name) {
  std::lock_guard lock(RegistryMutex());
  auto it = Registry().find(name);
  if (it == Registry().end()) {
    throw std::invalid_argument("unknown solver backend '" + name + "'");
  }
  return it->second();
}

void RegisterBackend(const std::string& name,
                     std::function<std::unique_ptr<SdpBackend>()> factory) {
  std::lock_guard lock(RegistryMutex());
  Registry()[name] = std::move(factory);
}

}  // namespace reachsdp
