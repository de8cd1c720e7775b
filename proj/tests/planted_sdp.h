#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "reachsdp/conic_program.h"

namespace reachsdp::test {

/// A conic program with a planted strictly complementary optimal pair.
struct PlantedSdp {
  ConicProgram program;
  Eigen::VectorXd x, y, s;
  double optimum = 0.0;
};

/// Blocks: one free block, two PSD blocks and one nonnegative block. x* has
/// rank-deficient PSD blocks and s* lives on their null spaces, so
/// ⟨x*, s*⟩ = 0. A direction D with x* + D ≻ 0 and every row of A
/// orthogonal to D gives a primal interior point; the first row is the
/// identity on all cones, so s* + t·I is a dual interior point. Both
/// problems are therefore strictly feasible and cᵀx* = bᵀy* is optimal.
inline PlantedSdp MakePlantedSdp(std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::uniform_int_distribution<int> psd_size(2, 6);
  std::uniform_int_distribution<int> free_size(0, 3);
  std::uniform_int_distribution<int> nonneg_pairs(1, 3);

  PlantedSdp out;
  auto& p = out.program;
  p.cones = {{ConeKind::kFree, free_size(gen)},
             {ConeKind::kPsd, psd_size(gen)},
             {ConeKind::kPsd, psd_size(gen)},
             {ConeKind::kNonneg, 2 * nonneg_pairs(gen)}};
  const auto offsets = p.BlockOffsets();
  const int n = offsets.back();
  out.x = Eigen::VectorXd::Zero(n);
  out.s = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd identity = Eigen::VectorXd::Zero(n);

  for (int b = 0; b < static_cast<int>(p.cones.size()); ++b) {
    const ConeBlock& cone = p.cones[b];
    const int off = offsets[b];
    if (cone.kind == ConeKind::kFree) {
      for (int i = 0; i < cone.size; ++i) out.x[off + i] = normal(gen);
    } else if (cone.kind == ConeKind::kNonneg) {
      for (int i = 0; i < cone.size; ++i) {
        identity[off + i] = 1.0;
        if (i % 2 == 0) {
          out.x[off + i] = 1.5 + uniform(gen);
          d[off + i] = -1.0;
        } else {
          out.s[off + i] = 0.5 + uniform(gen);
          d[off + i] = 1.0;
        }
      }
    } else {
      const int k = cone.size;
      const int rank = k / 2 + (k % 2) * (uniform(gen) < 0.5);
      const int null = k - rank;
      Eigen::MatrixXd g(k, k);
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) g(i, j) = normal(gen);
      }
      const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
      // Range eigenvalues exceed α so that x* − α·P_range ≻ 0.
      const double alpha = static_cast<double>(null) / rank;
      Eigen::VectorXd lx = Eigen::VectorXd::Zero(k), ls = Eigen::VectorXd::Zero(k),
                      ld(k);
      for (int i = 0; i < k; ++i) {
        if (i < rank) {
          lx[i] = alpha + 0.5 + uniform(gen);
          ld[i] = -alpha;
        } else {
          ls[i] = 0.5 + uniform(gen);
          ld[i] = 1.0;
        }
      }
      out.x.segment(off, cone.dim()) = Svec(q * lx.asDiagonal() * q.transpose());
      out.s.segment(off, cone.dim()) = Svec(q * ls.asDiagonal() * q.transpose());
      d.segment(off, cone.dim()) = Svec(q * ld.asDiagonal() * q.transpose());
      identity.segment(off, cone.dim()) = Svec(Eigen::MatrixXd::Identity(k, k));
    }
  }

  const int m = std::max(2, n / 2);
  Eigen::MatrixXd a(m, n);
  a.row(0) = identity.transpose();
  for (int i = 1; i < m; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = normal(gen);
    a.row(i) -= (a.row(i).dot(d) / d.squaredNorm()) * d.transpose();
  }
  out.y = Eigen::VectorXd(m);
  for (int i = 0; i < m; ++i) out.y[i] = normal(gen);
  p.A = a.sparseView();
  p.b = a * out.x;
  p.c = a.transpose() * out.y + out.s;
  out.optimum = p.c.dot(out.x);
  return out;
}

}  // namespace reachsdp::test
