#include "tpl/spectral.hpp"

#include "tpl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tpl {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& raw) {
  if (raw.rows() != raw.cols()) {
    throw DimensionError("symmetric matrix requires a square array, got " + std::to_string(raw.rows()) + "x" +
                         std::to_string(raw.cols()));
  }
  if (raw.rows() == 0) throw DimensionError("symmetric matrix requires dim >= 1");
  return 0.5 * (raw + raw.transpose());
}

void require_same_dim(const SymMatrix& a, const SymMatrix& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw DimensionError(std::string(what) + ": dimension mismatch " + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
  }
}

std::string fmt_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

SymMatrix::SymMatrix() : m_(Eigen::MatrixXd::Zero(1, 1)) {}

SymMatrix::SymMatrix(const Eigen::MatrixXd& raw) : m_(symmetrized(raw)) {}

SymMatrix SymMatrix::zero(int d) {
  if (d < 1) throw DimensionError("dim must be >= 1");
  return SymMatrix(Eigen::MatrixXd::Zero(d, d));
}

SymMatrix SymMatrix::identity(int d) {
  if (d < 1) throw DimensionError("dim must be >= 1");
  return SymMatrix(Eigen::MatrixXd::Identity(d, d));
}

SymMatrix SymMatrix::diagonal(std::span<const double> diag) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(diag.size()),
                                            static_cast<Eigen::Index>(diag.size()));
  for (std::size_t i = 0; i < diag.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diag[i];
  return SymMatrix(m);
}

SymMatrix SymMatrix::squared() const { return SymMatrix(m_ * m_); }

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
  require_same_dim(*this, other, "operator+");
  m_ += other.m_;
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& other) {
  require_same_dim(*this, other, "operator-");
  m_ -= other.m_;
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  m_ *= s;
  return *this;
}

double trace_product(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a, b, "trace_product");
  return a.matrix().cwiseProduct(b.matrix()).sum();
}

double max_abs_diff(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a, b, "max_abs_diff");
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

SymMatrix symmetrize(const std::vector<std::vector<double>>& raw) {
  const auto n = static_cast<Eigen::Index>(raw.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = raw[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != n) {
      throw DimensionError("symmetrize: row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                           " entries, expected " + std::to_string(n));
    }
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  return SymMatrix(m);
}

SpectralDecomposition eigh(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.matrix());
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigh: symmetric eigensolver did not converge (dim " + std::to_string(a.dim()) +
                       ", frobenius norm " + fmt_g(a.matrix().norm()) + ", max |entry| " +
                       fmt_g(a.matrix().cwiseAbs().maxCoeff()) + ")");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

// ---------------------------------------------------------------------------
// ScalarFn

ScalarFn ScalarFn::cosh(double theta) { return {Kind::Cosh, theta, 1.0}; }
ScalarFn ScalarFn::sinh(double theta) { return {Kind::Sinh, theta, 1.0}; }
ScalarFn ScalarFn::cosh2(double theta) { return {Kind::Cosh2, theta, 2.0}; }
ScalarFn ScalarFn::sinh2(double theta) { return {Kind::Sinh2, theta, 2.0}; }

ScalarFn ScalarFn::abs_pow(double p) {
  if (!(p > 0.0)) throw DomainError("abs_pow exponent must be > 0");
  return {Kind::AbsPow, 1.0, p};
}

ScalarFn ScalarFn::signed_pow(double q) {
  if (!(q > 0.0)) throw DomainError("signed_pow exponent must be > 0");
  return {Kind::SignedPow, 1.0, q};
}

ScalarFn ScalarFn::affine(double a, double b) {
  ScalarFn fn{Kind::Affine, 1.0, 1.0};
  fn.a_ = a;
  fn.b_ = b;
  return fn;
}

ScalarFn ScalarFn::table(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() < 2 || xs.size() != ys.size()) {
    throw DomainError("table function needs >= 2 points and matching x/y lengths");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw DomainError("table function abscissae must be strictly increasing");
  }
  ScalarFn fn{Kind::Table, 1.0, 1.0};
  fn.xs_ = std::move(xs);
  fn.ys_ = std::move(ys);
  return fn;
}

ScalarFn ScalarFn::scaled(double gain) const {
  ScalarFn fn = *this;
  fn.gain_ *= gain;
  return fn;
}

double ScalarFn::operator()(double s) const {
  const double x = theta_ * s;
  double value = 0.0;
  switch (kind_) {
    case Kind::Cosh: value = std::cosh(x); break;
    case Kind::Sinh: value = std::sinh(x); break;
    case Kind::Cosh2: {
      const double c = std::cosh(x);
      value = c * c;
      break;
    }
    case Kind::Sinh2: {
      const double sh = std::sinh(x);
      value = sh * sh;
      break;
    }
    case Kind::AbsPow: value = std::pow(std::abs(x), exponent_); break;
    case Kind::SignedPow: value = std::copysign(std::pow(std::abs(x), exponent_), x); break;
    case Kind::Affine: value = a_ * x + b_; break;
    case Kind::Table: {
      // Segment index clamped to the first/last interval gives linear extrapolation.
      auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      std::size_t hi = static_cast<std::size_t>(std::distance(xs_.begin(), it));
      hi = std::clamp<std::size_t>(hi, 1, xs_.size() - 1);
      const std::size_t lo = hi - 1;
      const double t = (x - xs_[lo]) / (xs_[hi] - xs_[lo]);
      value = ys_[lo] + t * (ys_[hi] - ys_[lo]);
      break;
    }
  }
  return gain_ * value;
}

std::optional<ScalarFn> ScalarFn::squared_derivative() const {
  switch (kind_) {
    case Kind::Sinh:
      // d/ds gain sinh(theta s) = gain theta cosh(theta s)
      return cosh2(theta_).scaled(gain_ * gain_ * theta_ * theta_);
    case Kind::SignedPow:
      if (exponent_ < 1.5) return std::nullopt;
      // d/ds sgn(ts)|ts|^q = q t |ts|^(q-1); squared: q^2 t^2 |ts|^(2q-2)
      {
        ScalarFn psi = abs_pow(2.0 * (exponent_ - 1.0));
        psi.theta_ = theta_;
        return psi.scaled(gain_ * gain_ * exponent_ * exponent_ * theta_ * theta_);
      }
    case Kind::Affine: return affine(0.0, gain_ * gain_ * a_ * a_ * theta_ * theta_);
    default: return std::nullopt;
  }
}

std::string ScalarFn::describe() const {
  std::string base;
  const std::string t = fmt_g(theta_);
  switch (kind_) {
    case Kind::Cosh: base = "cosh(" + t + "*s)"; break;
    case Kind::Sinh: base = "sinh(" + t + "*s)"; break;
    case Kind::Cosh2: base = "cosh^2(" + t + "*s)"; break;
    case Kind::Sinh2: base = "sinh^2(" + t + "*s)"; break;
    case Kind::AbsPow: base = "|" + t + "*s|^" + fmt_g(exponent_); break;
    case Kind::SignedPow: base = "sgn(s)|" + t + "*s|^" + fmt_g(exponent_); break;
    case Kind::Affine: base = fmt_g(a_) + "*(" + t + "*s)+" + fmt_g(b_); break;
    case Kind::Table: base = "table[" + std::to_string(xs_.size()) + "]"; break;
  }
  if (gain_ != 1.0) base = fmt_g(gain_) + "*" + base;
  return base;
}

// ---------------------------------------------------------------------------

SymMatrix apply_spectral_fn(const SymMatrix& a, const ScalarFn& phi) {
  const SpectralDecomposition sd = eigh(a);
  Eigen::VectorXd mapped = sd.eigenvalues.unaryExpr([&](double s) { return phi(s); });
  return SymMatrix(sd.eigenvectors * mapped.asDiagonal() * sd.eigenvectors.transpose());
}

double op_norm(const SymMatrix& a) {
  const Eigen::VectorXd ev = eigh(a).eigenvalues;
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

double min_eigenvalue(const SymMatrix& a) { return eigh(a).eigenvalues(0); }

double trace_fn(const SymMatrix& a, const ScalarFn& phi, bool normalized) {
  const Eigen::VectorXd ev = eigh(a).eigenvalues;
  double total = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) total += phi(ev(i));
  return normalized ? total / static_cast<double>(a.dim()) : total;
}

bool psd_order_leq(const SymMatrix& a, const SymMatrix& b, double tol) {
  require_same_dim(a, b, "psd_order_leq");
  const SymMatrix diff = b - a;
  const Eigen::VectorXd ev = eigh(diff).eigenvalues;
  const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return ev(0) >= -tol * (1.0 + norm);
}

bool is_psd(const SymMatrix& a, double tol) {
  const Eigen::VectorXd ev = eigh(a).eigenvalues;
  const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return ev(0) >= -tol * (1.0 + norm);
}

int numerical_rank(const SymMatrix& a, double rel_threshold) {
  const Eigen::VectorXd ev = eigh(a).eigenvalues;
  const double norm = ev.cwiseAbs().maxCoeff();
  int rank = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) > rel_threshold * norm) ++rank;
  }
  return rank;
}

double intdim(const SymMatrix& a) {
  const Eigen::VectorXd ev = eigh(a).eigenvalues;
  const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  if (ev(0) < -kRelTol * (1.0 + norm)) {
    throw DomainError("intdim: matrix is not positive semidefinite (lambda_min = " + fmt_g(ev(0)) + ")");
  }
  if (norm == 0.0) return 0.0;
  return a.trace() / norm;
}

SymMatrix dilate(const Eigen::MatrixXd& h) {
  const Eigen::Index d1 = h.rows();
  const Eigen::Index d2 = h.cols();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d1 + d2, d1 + d2);
  m.topRightCorner(d1, d2) = h;
  m.bottomLeftCorner(d2, d1) = h.transpose();
  return SymMatrix(m);
}

}  // namespace tpl
