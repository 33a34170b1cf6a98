#pragma once

// Regularised least squares shared by every solver: Cholesky factorisations,
// ridge fits, elliptical bonuses sqrt(q^T A^{-1} q), log-determinants and the
// kernel (dual) forms of the same quantities.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace parted {

using Vector = std::vector<double>;

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> x);

/// V V^T for the rows of `samples`.
Matrix gram_matrix(const Matrix& samples);

/// Smallest eigenvalue of a symmetric matrix (Eigen self-adjoint solver).
double min_eigenvalue(const Matrix& symmetric);

/// Lower-triangular Cholesky factor L with L L^T = A.
class Cholesky {
 public:
  /// Throws NumericalError if `spd` is not numerically positive definite.
  explicit Cholesky(const Matrix& spd);

  std::size_t dim() const { return factor_.rows(); }
  const Matrix& factor() const { return factor_; }

  /// In place: b <- L^{-1} b.
  void solve_lower(std::span<double> b) const;
  /// In place: y <- L^{-T} y.
  void solve_upper(std::span<double> y) const;
  /// A^{-1} b.
  Vector solve(std::span<const double> b) const;

  /// log det A = 2 sum log L_ii.
  double log_det() const;

 private:
  Matrix factor_;
};

/// A = reg * I + sum_i v_i v_i^T with its factor and the moment b = sum_i v_i y_i.
class RidgeSystem {
 public:
  /// Empty system A = reg * I.
  RidgeSystem(std::size_t dim, double reg);
  /// Samples are the rows of `samples`; samples.cols() fixes the dimension.
  RidgeSystem(const Matrix& samples, double reg);

  std::size_t dim() const { return gram_.rows(); }
  double reg() const { return reg_; }
  const Matrix& gram() const { return gram_; }
  const Cholesky& chol() const { return chol_; }
  const Vector& moment() const { return moment_; }

  Vector solve(std::span<const double> rhs) const;

  /// sqrt(q^T A^{-1} q). Always within [0, |q| / sqrt(reg)].
  double bonus(std::span<const double> query) const;
  /// Same, with caller-owned scratch of length dim() (no allocation).
  double bonus(std::span<const double> query, std::span<double> scratch) const;

  /// log det(A / reg) = log det(I + reg^{-1} sum v v^T).
  double log_det_ratio() const;

 private:
  friend struct RidgeFit ridge_fit(const Matrix& samples, std::span<const double> targets, double reg);

  double reg_;
  Matrix gram_;
  Cholesky chol_;
  Vector moment_;
};

struct RidgeFit {
  RidgeSystem system;
  Vector solution;
};

/// argmin_x sum_i (<v_i, x> - y_i)^2 + reg |x|^2, solved through the Cholesky factor.
/// Rejects reg <= 0 and non-finite inputs with std::invalid_argument.
RidgeFit ridge_fit(const Matrix& samples, std::span<const double> targets, double reg);

/// sum_i v_i y_i
Vector moment(const Matrix& samples, std::span<const double> targets);

/// Dual (kernel) form: factor of K_N + reg * I for a Gram matrix K_N.
class KernelRidge {
 public:
  KernelRidge(Matrix gram, double reg);

  std::size_t size() const { return gram_.rows(); }
  double reg() const { return reg_; }
  const Matrix& gram() const { return gram_; }

  /// (K_N + reg I)^{-1} y
  Vector weights(std::span<const double> targets) const;

  /// sqrt((k(x,x) - k_N(x)^T (K_N + reg I)^{-1} k_N(x)) / reg), clamped at 0.
  double bonus(std::span<const double> cross, double self) const;

  /// log det(I + K_N / reg)
  double log_det_ratio() const;

 private:
  double reg_;
  Matrix gram_;
  Cholesky chol_;
};

/// log det(I + K / reg) for a PSD Gram matrix. Rejects eigenvalues below -1e-10.
double gram_log_det_ratio(const Matrix& gram, double reg);

struct IdentityCheck {
  double lhs;  ///< q^T (reg I + sum v v^T)^{-1} q
  double rhs;  ///< (K(q,q) - k_N^T (K_N + reg I)^{-1} k_N) / reg
};

/// Both sides of the primal/dual bonus identity, computed independently.
IdentityCheck kernel_bonus_identity_check(const Matrix& vectors, double reg, std::span<const double> query);

/// Ridge solution through the dual: V^T (V V^T + reg I)^{-1} y.
Vector ridge_solve_dual(const Matrix& samples, std::span<const double> targets, double reg);

enum class BonusPath { automatic, primal, dual };

/// Bonus evaluator over a fixed sample set that works in whichever of the
/// primal (dim x dim) or dual (N x N) spaces is requested. `automatic`
/// picks primal while dim <= dual_threshold.
class FeatureBonus {
 public:
  FeatureBonus(Matrix samples, double reg, BonusPath path = BonusPath::automatic, std::size_t dual_threshold = 4096);

  bool is_primal() const { return std::holds_alternative<RidgeSystem>(solver_); }
  std::size_t dim() const { return samples_.cols(); }
  double bonus(std::span<const double> query) const;
  double log_det_ratio() const;

 private:
  Matrix samples_;
  std::variant<RidgeSystem, KernelRidge> solver_;
};

}  // namespace parted
