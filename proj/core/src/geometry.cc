#include "reachsdp/geometry.h"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "reachsdp/random.h"

namespace reachsdp {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// ∫ u^α over the unit ball in ℝⁿ.
double UnitBallMoment(std::span<const int> alpha) {
  const int n = static_cast<int>(alpha.size());
  int total = 0;
  double log_num = 0.0;
  for (int a : alpha) {
    if (a % 2 != 0) return 0.0;
    total += a;
    log_num += std::lgamma((a + 1) / 2.0);
  }
  return std::exp(log_num - std::lgamma(1.0 + (n + total) / 2.0));
}

// Moments of p(u) against Lebesgue on the unit ball.
double UnitBallIntegral(const Polynomial& p) {
  double total = 0.0;
  for (const auto& [m, c] : p.terms()) total += c * UnitBallMoment(m.exponents());
  return total;
}

}  // namespace

DomainGeometry::DomainGeometry(Variant v) : v_(std::move(v)) {
  std::visit(
      Overloaded{
          [&](const Box& b) {
            if (b.lower.size() != b.upper.size() || b.lower.size() == 0) {
              throw std::invalid_argument("Box: bound vectors must match");
            }
            for (int i = 0; i < b.lower.size(); ++i) {
              if (!(b.lower[i] < b.upper[i])) {
                throw std::invalid_argument("Box: lower bound must be below "
                                            "upper bound on axis " +
                                            std::to_string(i));
              }
            }
            n_vars_ = static_cast<int>(b.lower.size());
          },
          [&](const Ball& b) {
            if (b.center.size() == 0) throw std::invalid_argument("Ball: empty");
            if (!(b.radius > 0)) {
              throw std::invalid_argument("Ball: radius must be positive");
            }
            n_vars_ = static_cast<int>(b.center.size());
          },
          [&](const Ellipsoid& e) {
            const auto n = e.center.size();
            if (n == 0 || e.shape.rows() != n || e.shape.cols() != n) {
              throw std::invalid_argument("Ellipsoid: shape must be n x n");
            }
            if ((e.shape - e.shape.transpose()).cwiseAbs().maxCoeff() >
                1e-12 * (1.0 + e.shape.cwiseAbs().maxCoeff())) {
              throw std::invalid_argument("Ellipsoid: shape not symmetric");
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
                e.shape, Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() <= 1e-10) {
              throw std::invalid_argument(
                  "Ellipsoid: shape not positive definite");
            }
            n_vars_ = static_cast<int>(n);
          },
      },
      v_);
}

DomainGeometry DomainGeometry::MakeBox(Eigen::VectorXd lower,
                                       Eigen::VectorXd upper) {
  return DomainGeometry(Box{std::move(lower), std::move(upper)});
}

DomainGeometry DomainGeometry::MakeBall(Eigen::VectorXd center, double radius) {
  return DomainGeometry(Ball{std::move(center), radius});
}

DomainGeometry DomainGeometry::MakeEllipsoid(Eigen::VectorXd center,
                                             Eigen::MatrixXd shape) {
  return DomainGeometry(Ellipsoid{std::move(center), std::move(shape)});
}

DomainGeometry DomainGeometry::UnitBall(int n) {
  return MakeBall(Eigen::VectorXd::Zero(n), 1.0);
}

bool DomainGeometry::Contains(const Eigen::VectorXd& x, double tol) const {
  return std::visit(
      Overloaded{
          [&](const Box& b) {
            return ((x - b.lower).array() >= -tol).all() &&
                   ((b.upper - x).array() >= -tol).all();
          },
          [&](const Ball& b) {
            return b.radius * b.radius - (x - b.center).squaredNorm() >= -tol;
          },
          [&](const Ellipsoid& e) {
            const Eigen::VectorXd d = x - e.center;
            return 1.0 - d.dot(e.shape * d) >= -tol;
          },
      },
      v_);
}

Box DomainGeometry::BoundingBox() const {
  return std::visit(
      Overloaded{
          [](const Box& b) { return b; },
          [](const Ball& b) {
            const auto r = Eigen::VectorXd::Constant(b.center.size(), b.radius);
            return Box{b.center - r, b.center + r};
          },
          [](const Ellipsoid& e) {
            // Half-widths are sqrt of the diagonal of shape⁻¹.
            const Eigen::VectorXd half =
                e.shape.inverse().diagonal().cwiseSqrt();
            return Box{e.center - half, e.center + half};
          },
      },
      v_);
}

double DomainGeometry::Volume() const {
  return GeometryMoment(*this, Monomial(n_vars_));
}

std::vector<Polynomial> DomainGeometry::Inequalities() const {
  const int n = n_vars_;
  return std::visit(
      Overloaded{
          [&](const Box& b) {
            std::vector<Polynomial> out;
            for (int i = 0; i < n; ++i) {
              const auto xi = Polynomial::Variable(n, i);
              out.push_back(xi - Polynomial::Constant(n, b.lower[i]));
              out.push_back(Polynomial::Constant(n, b.upper[i]) - xi);
            }
            return out;
          },
          [&](const Ball& b) {
            Polynomial g = Polynomial::Constant(n, b.radius * b.radius);
            for (int i = 0; i < n; ++i) {
              const auto d = Polynomial::Variable(n, i) -
                             Polynomial::Constant(n, b.center[i]);
              g -= d * d;
            }
            return std::vector<Polynomial>{g};
          },
          [&](const Ellipsoid& e) {
            std::vector<Polynomial> d;
            for (int i = 0; i < n; ++i) {
              d.push_back(Polynomial::Variable(n, i) -
                          Polynomial::Constant(n, e.center[i]));
            }
            Polynomial g = Polynomial::Constant(n, 1.0);
            for (int i = 0; i < n; ++i) {
              for (int j = 0; j < n; ++j) {
                if (e.shape(i, j) != 0.0) g -= e.shape(i, j) * (d[i] * d[j]);
              }
            }
            return std::vector<Polynomial>{g};
          },
      },
      v_);
}

double DomainGeometry::BallBoundHint() const {
  const Box bb = BoundingBox();
  double total = 0.0;
  for (int i = 0; i < n_vars_; ++i) {
    const double m = std::max(std::abs(bb.lower[i]), std::abs(bb.upper[i]));
    total += m * m;
  }
  return total;
}

AffineFrame::AffineFrame(Eigen::VectorXd center, Eigen::MatrixXd linear)
    : center_(std::move(center)), linear_(std::move(linear)) {
  if (linear_.rows() != center_.size() || linear_.cols() != center_.size()) {
    throw std::invalid_argument("AffineFrame: dimension mismatch");
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(linear_);
  if (!lu.isInvertible()) {
    throw std::invalid_argument("AffineFrame: singular linear part");
  }
  inverse_ = lu.inverse();
}

AffineFrame AffineFrame::Identity(int n) {
  return AffineFrame(Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, n));
}

AffineFrame AffineFrame::ForGeometry(const DomainGeometry& g) {
  return std::visit(
      Overloaded{
          [](const Box& b) {
            const Eigen::VectorXd half = 0.5 * (b.upper - b.lower);
            return AffineFrame(0.5 * (b.upper + b.lower),
                               half.asDiagonal().toDenseMatrix());
          },
          [](const Ball& b) {
            const auto n = b.center.size();
            return AffineFrame(b.center,
                               b.radius * Eigen::MatrixXd::Identity(n, n));
          },
          [](const Ellipsoid& e) {
            // shape = (L Lᵀ)⁻¹  ⇔  L Lᵀ = shape⁻¹.
            Eigen::LLT<Eigen::MatrixXd> llt(e.shape.inverse());
            return AffineFrame(e.center, llt.matrixL().toDenseMatrix());
          },
      },
      g.variant());
}

double AffineFrame::AbsDeterminant() const {
  return std::abs(linear_.determinant());
}

Eigen::VectorXd AffineFrame::ToOriginal(const Eigen::VectorXd& s) const {
  return center_ + linear_ * s;
}

Eigen::VectorXd AffineFrame::ToScaled(const Eigen::VectorXd& x) const {
  return inverse_ * (x - center_);
}

namespace {

// Component maps of s ↦ offset + M·s as polynomials.
std::vector<Polynomial> AffineMaps(const Eigen::VectorXd& offset,
                                   const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(offset.size());
  std::vector<Polynomial> maps;
  maps.reserve(n);
  for (int i = 0; i < n; ++i) {
    Polynomial p = Polynomial::Constant(n, offset[i]);
    for (int j = 0; j < n; ++j) {
      if (m(i, j) != 0.0) p += m(i, j) * Polynomial::Variable(n, j);
    }
    maps.push_back(std::move(p));
  }
  return maps;
}

}  // namespace

Polynomial AffineFrame::PullToScaled(const Polynomial& p) const {
  return Compose(p, AffineMaps(center_, linear_));
}

Polynomial AffineFrame::PushToOriginal(const Polynomial& q) const {
  return Compose(q, AffineMaps(-inverse_ * center_, inverse_));
}

std::vector<Polynomial> AffineFrame::ConjugateMap(
    std::span<const Polynomial> f) const {
  const int n = n_vars();
  if (static_cast<int>(f.size()) != n) {
    throw std::invalid_argument("ConjugateMap: map dimension mismatch");
  }
  const auto to_original = AffineMaps(center_, linear_);
  std::vector<Polynomial> shifted;
  for (int k = 0; k < n; ++k) {
    shifted.push_back(Compose(f[k], to_original) -
                      Polynomial::Constant(n, center_[k]));
  }
  std::vector<Polynomial> out;
  for (int i = 0; i < n; ++i) {
    Polynomial p(n);
    for (int k = 0; k < n; ++k) {
      if (inverse_(i, k) != 0.0) p += inverse_(i, k) * shifted[k];
    }
    out.push_back(std::move(p));
  }
  return out;
}

DomainGeometry AffineFrame::ScaledGeometry(const DomainGeometry& g) const {
  return std::visit(
      Overloaded{
          [&](const Box& b) -> DomainGeometry {
            // Only diagonal frames keep boxes axis-aligned.
            if (!linear_.isDiagonal()) {
              throw std::invalid_argument(
                  "ScaledGeometry: box under a non-diagonal frame");
            }
            Eigen::VectorXd lo = ToScaled(b.lower), hi = ToScaled(b.upper);
            for (int i = 0; i < lo.size(); ++i) {
              if (lo[i] > hi[i]) std::swap(lo[i], hi[i]);
            }
            return DomainGeometry::MakeBox(lo, hi);
          },
          [&](const Ball& b) -> DomainGeometry {
            const Eigen::MatrixXd shape =
                linear_.transpose() * linear_ / (b.radius * b.radius);
            return DomainGeometry::MakeEllipsoid(ToScaled(b.center),
                                                 0.5 * (shape + shape.transpose()));
          },
          [&](const Ellipsoid& e) -> DomainGeometry {
            const Eigen::MatrixXd shape =
                linear_.transpose() * e.shape * linear_;
            return DomainGeometry::MakeEllipsoid(ToScaled(e.center),
                                                 0.5 * (shape + shape.transpose()));
          },
      },
      g.variant());
}

MomentSequence::MomentSequence(MonomialBasis basis, Eigen::VectorXd values)
    : basis_(std::move(basis)), values_(std::move(values)) {
  if (values_.size() != basis_.size()) {
    throw std::invalid_argument("MomentSequence: incomplete sequence");
  }
}

double MomentSequence::at(const Monomial& beta) const {
  const int idx = basis_.IndexOf(beta);
  if (idx < 0) {
    throw std::out_of_range("MomentSequence: moment " + ToString(beta) +
                            " beyond degree " + std::to_string(max_degree()));
  }
  return values_[idx];
}

double MomentSequence::Apply(const Polynomial& p) const {
  double total = 0.0;
  for (const auto& [m, c] : p.terms()) total += c * at(m);
  return total;
}

double GeometryMoment(const DomainGeometry& g, const Monomial& beta) {
  if (beta.n_vars() != g.n_vars()) {
    throw std::invalid_argument("GeometryMoment: dimension mismatch");
  }
  return std::visit(
      Overloaded{
          [&](const Box& b) {
            double value = 1.0;
            for (int i = 0; i < g.n_vars(); ++i) {
              const int k = beta[i] + 1;
              value *= (std::pow(b.upper[i], k) - std::pow(b.lower[i], k)) / k;
            }
            return value;
          },
          [&](const Ball& b) {
            bool centered = b.center.isZero(0.0);
            if (centered) {
              return std::pow(b.radius, g.n_vars() + beta.degree()) *
                     UnitBallMoment(beta.exponents());
            }
            const AffineFrame frame = AffineFrame::ForGeometry(g);
            const Polynomial p =
                frame.PullToScaled(Polynomial::FromMonomial(beta));
            return frame.AbsDeterminant() * UnitBallIntegral(p);
          },
          [&](const Ellipsoid&) {
            const AffineFrame frame = AffineFrame::ForGeometry(g);
            const Polynomial p =
                frame.PullToScaled(Polynomial::FromMonomial(beta));
            return frame.AbsDeterminant() * UnitBallIntegral(p);
          },
      },
      g.variant());
}

MomentSequence MomentVector(const DomainGeometry& g, int max_degree) {
  if (max_degree < 0) throw std::invalid_argument("MomentVector: D < 0");
  MonomialBasis basis(g.n_vars(), max_degree);
  Eigen::VectorXd values(basis.size());
  for (int i = 0; i < basis.size(); ++i) values[i] = GeometryMoment(g, basis[i]);
  return MomentSequence(std::move(basis), std::move(values));
}

std::vector<MonteCarloEstimate> McMomentVector(const DomainGeometry& g,
                                               int max_degree, int n_samples,
                                               std::uint64_t seed) {
  if (n_samples < 1000) {
    throw std::invalid_argument("McMoment: need at least 1000 samples");
  }
  const int n = g.n_vars();
  const MonomialBasis basis(n, max_degree);
  const Box bb = g.BoundingBox();
  const double box_volume = (bb.upper - bb.lower).prod();
  Rng rng(seed);
  std::vector<double> sum(basis.size(), 0.0), sum_sq(basis.size(), 0.0);
  std::vector<double> powers(static_cast<std::size_t>(n) * (max_degree + 1));
  Eigen::VectorXd x(n);
  for (int s = 0; s < n_samples; ++s) {
    for (int i = 0; i < n; ++i) x[i] = rng.Uniform(bb.lower[i], bb.upper[i]);
    if (!g.Contains(x)) continue;
    for (int i = 0; i < n; ++i) {
      double* row = &powers[static_cast<std::size_t>(i) * (max_degree + 1)];
      row[0] = 1.0;
      for (int k = 1; k <= max_degree; ++k) row[k] = row[k - 1] * x[i];
    }
    for (int b = 0; b < basis.size(); ++b) {
      double v = 1.0;
      for (int i = 0; i < n; ++i) {
        v *= powers[static_cast<std::size_t>(i) * (max_degree + 1) + basis[b][i]];
      }
      sum[b] += v;
      sum_sq[b] += v * v;
    }
  }
  std::vector<MonteCarloEstimate> out(basis.size());
  for (int b = 0; b < basis.size(); ++b) {
    // Samples are box_volume·1_g(x)·x^β with x uniform on the box.
    const double mean = sum[b] / n_samples;
    const double var =
        std::max(0.0, sum_sq[b] / n_samples - mean * mean) * n_samples /
        (n_samples - 1.0);
    out[b].estimate = box_volume * mean;
    out[b].standard_error = box_volume * std::sqrt(var / n_samples);
  }
  return out;
}

MonteCarloEstimate McMoment(const DomainGeometry& g, const Monomial& beta,
                            int n_samples, std::uint64_t seed) {
  if (beta.n_vars() != g.n_vars()) {
    throw std::invalid_argument("McMoment: dimension mismatch");
  }
  if (n_samples < 1000) {
    throw std::invalid_argument("McMoment: need at least 1000 samples");
  }
  const int n = g.n_vars();
  const Box bb = g.BoundingBox();
  const double box_volume = (bb.upper - bb.lower).prod();
  Rng rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  Eigen::VectorXd x(n);
  for (int s = 0; s < n_samples; ++s) {
    for (int i = 0; i < n; ++i) x[i] = rng.Uniform(bb.lower[i], bb.upper[i]);
    if (!g.Contains(x)) continue;
    const double v = beta.Evaluate(std::span<const double>(x.data(), n));
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n_samples;
  const double var = std::max(0.0, sum_sq / n_samples - mean * mean) *
                     n_samples / (n_samples - 1.0);
  return {box_volume * mean, box_volume * std::sqrt(var / n_samples)};
}

Eigen::MatrixXd MomentMatrix(const MomentSequence& y, int r,
                             const Polynomial& weight) {
  const MonomialBasis basis(y.n_vars(), r);
  const int k = basis.size();
  Eigen::MatrixXd m(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      const Monomial mono = basis[i] * basis[j];
      double value = 0.0;
      for (const auto& [a, c] : weight.terms()) value += c * y.at(a * mono);
      m(i, j) = m(j, i) = value;
    }
  }
  return m;
}

}  // namespace reachsdp
