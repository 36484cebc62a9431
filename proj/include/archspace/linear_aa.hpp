#pragma once

#include "archspace/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace archspace {

struct PchaConfig {
  std::size_t k = 3;
  std::size_t max_iter = 2000;
  /// Stop once |f_prev - f| / f_prev falls below this.
  double tol = 1e-6;
  /// Hull relaxation. Only 0 is supported.
  double delta = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/**
 * Result of principal convex hull analysis on an n x m data matrix X.
 *
 * X^T is approximated by X^T W H: the archetypes are W^T X, each point's
 * mixture is a column of H.
 */
struct PchaFactors {
  Matrix coeff_w;      // n x k, columns on the simplex over data points
  Matrix mixtures_h;   // k x n, columns on the simplex over archetypes
  Matrix archetypes;   // k x m
  std::vector<double> loss_trace;  // ||X - H^T A||_F^2, one entry per iteration

  std::size_t k() const { return static_cast<std::size_t>(archetypes.rows()); }
  /// Per-point mixtures as an n x k row-stochastic matrix.
  Matrix mixtures() const { return mixtures_h.transpose(); }
  double final_loss() const { return loss_trace.empty() ? 0.0 : loss_trace.back(); }
};

/// Alternating projected-gradient PCHA. H is updated before W in each
/// iteration, each step backtracking from 1.0 until the objective does not
/// increase.
PchaFactors pcha_fit(const DataMatrix& x, const PchaConfig& config);

struct SimplexLsqOptions {
  std::size_t max_iter = 20000;
  double tol = 1e-13;
};

/// Row-wise argmin over the simplex of ||x_i - w A||^2 for fixed archetypes A
/// (k x m). Accelerated projected gradient with step 1 / L.
Matrix simplex_least_squares(const Matrix& archetypes, const Matrix& x,
                             const SimplexLsqOptions& options = {});

/// Mixtures (n x k) of new points against fitted archetypes.
Matrix pcha_transform(const PchaFactors& factors, const DataMatrix& x);

enum class KernelKind { linear, rbf };

/**
 * Kernel used to build Gram-row features.
 *
 * linear: K = X X^T.
 * rbf:    K_ij = exp(-sum_f (x_if - x_jf)^2 / s_f), where s_f is `sigma` when
 *         given, otherwise the standard deviation of feature f over the
 *         training data. Features with s_f == 0 are ignored.
 */
struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  std::optional<double> sigma;
};

/// Per-feature scale vector used by the rbf kernel on training data `x`.
Vector kernel_scales(const KernelSpec& kernel, const Matrix& x);
/// Rows of `x` against rows of `reference`: |x| x |reference|.
Matrix kernel_matrix(const KernelSpec& kernel, const Matrix& x, const Matrix& reference,
                     const Vector& scales);

/// PCHA on Gram-row features; archetypes are decoded as coeff_w^T X in the
/// original input space.
PchaFactors kernel_pcha_fit(const DataMatrix& x, const PchaConfig& config,
                            const KernelSpec& kernel);

}  // namespace archspace
