#pragma once

// Dense real symmetric matrices and spectral matrix functions.

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tpl {

/// Relative tolerance used for structural comparisons, scaled by (1 + magnitude).
inline constexpr double kRelTol = 1e-10;

/// Dense real symmetric d x d matrix. Every constructor symmetrizes its input,
/// so entries(i, j) == entries(j, i) holds bit-for-bit.
class SymMatrix {
 public:
  /// The 1 x 1 zero matrix.
  SymMatrix();
  /// Symmetrizes `raw` as (raw + raw^T) / 2. Throws DimensionError when raw is
  /// not square or is empty.
  explicit SymMatrix(const Eigen::MatrixXd& raw);

  static SymMatrix zero(int d);
  static SymMatrix identity(int d);
  static SymMatrix diagonal(std::span<const double> diag);
  static SymMatrix scalar(double value) { return diagonal(std::span<const double>(&value, 1)); }

  [[nodiscard]] int dim() const { return static_cast<int>(m_.rows()); }
  [[nodiscard]] double operator()(int i, int j) const { return m_(i, j); }
  [[nodiscard]] const Eigen::MatrixXd& matrix() const { return m_; }

  [[nodiscard]] double trace() const { return m_.trace(); }
  [[nodiscard]] SymMatrix squared() const;

  SymMatrix& operator+=(const SymMatrix& other);
  SymMatrix& operator-=(const SymMatrix& other);
  SymMatrix& operator*=(double s);

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
  friend SymMatrix operator-(SymMatrix a) { return a *= -1.0; }

 private:
  Eigen::MatrixXd m_;
};

/// tr(A B) for symmetric A, B of equal dimension.
double trace_product(const SymMatrix& a, const SymMatrix& b);

/// Largest absolute entrywise difference; throws DimensionError on mismatch.
double max_abs_diff(const SymMatrix& a, const SymMatrix& b);

/// (raw + raw^T) / 2 from a row-major nested array.
SymMatrix symmetrize(const std::vector<std::vector<double>>& raw);

struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // orthonormal columns
};

/// Symmetric eigendecomposition. Throws NumericError if the solver fails.
SpectralDecomposition eigh(const SymMatrix& a);

/// A scalar function that can be lifted to symmetric matrices through the
/// spectral resolution. `theta` scales the argument, `gain` the output:
/// value(s) = gain * base(theta * s).
class ScalarFn {
 public:
  enum class Kind { Cosh, Sinh, Cosh2, Sinh2, AbsPow, SignedPow, Affine, Table };

  static ScalarFn cosh(double theta = 1.0);
  static ScalarFn sinh(double theta = 1.0);
  static ScalarFn cosh2(double theta = 1.0);
  static ScalarFn sinh2(double theta = 1.0);
  /// |s|^p with p > 0.
  static ScalarFn abs_pow(double p);
  /// sgn(s) |s|^q with q > 0.
  static ScalarFn signed_pow(double q);
  /// a s + b.
  static ScalarFn affine(double a, double b);
  /// Piecewise-linear interpolation through (xs, ys), extended linearly past
  /// both ends. xs must be strictly increasing with at least two points.
  static ScalarFn table(std::vector<double> xs, std::vector<double> ys);

  [[nodiscard]] ScalarFn scaled(double gain) const;

  [[nodiscard]] double operator()(double s) const;

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] double theta() const { return theta_; }
  [[nodiscard]] double exponent() const { return exponent_; }
  [[nodiscard]] double gain() const { return gain_; }

  /// psi = (phi')^2 for the functions whose squared derivative is known to be
  /// convex: sinh(theta s), signed_pow(q) with q >= 1.5, and affine maps.
  /// Returns nullopt for every other kind.
  [[nodiscard]] std::optional<ScalarFn> squared_derivative() const;

  [[nodiscard]] std::string describe() const;

 private:
  ScalarFn(Kind kind, double theta, double exponent) : kind_(kind), theta_(theta), exponent_(exponent) {}

  Kind kind_;
  double theta_ = 1.0;
  double exponent_ = 1.0;
  double a_ = 1.0;
  double b_ = 0.0;
  double gain_ = 1.0;
  std::vector<double> xs_;
  std::vector<double> ys_;
};

/// phi(A) = Q phi(Lambda) Q^T.
SymMatrix apply_spectral_fn(const SymMatrix& a, const ScalarFn& phi);

/// l2 operator norm: max |eigenvalue|.
double op_norm(const SymMatrix& a);

double min_eigenvalue(const SymMatrix& a);

/// tr phi(A), divided by d when `normalized`.
double trace_fn(const SymMatrix& a, const ScalarFn& phi, bool normalized = false);

/// A <= B in the semidefinite order: lambda_min(B - A) >= -tol (1 + ||B - A||).
bool psd_order_leq(const SymMatrix& a, const SymMatrix& b, double tol = kRelTol);

/// lambda_min(A) >= -tol (1 + ||A||).
bool is_psd(const SymMatrix& a, double tol = kRelTol);

/// Number of eigenvalues with |lambda| > rel_threshold * ||A||.
int numerical_rank(const SymMatrix& a, double rel_threshold = kRelTol);

/// tr(A) / ||A|| for PSD A, and 0 for the zero matrix. Throws DomainError when
/// A is not PSD within kRelTol.
double intdim(const SymMatrix& a);

/// Hermitian dilation [[0, H], [H^T, 0]] of a d1 x d2 matrix.
SymMatrix dilate(const Eigen::MatrixXd& h);

}  // namespace tpl
