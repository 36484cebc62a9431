#include "archspace/linear_aa.hpp"

#include "archspace/numerics.hpp"
#include "archspace/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace archspace {

void PchaConfig::validate() const {
  if (k < 1) throw std::invalid_argument("pcha: k must be at least 1");
  if (!(tol > 0.0)) throw std::invalid_argument("pcha: tol must be positive");
  if (delta < 0.0) throw std::invalid_argument("pcha: delta must be non-negative");
  if (delta != 0.0) {
    throw std::invalid_argument("pcha: hull relaxation (delta != 0) is not supported");
  }
  if (max_iter < 1) throw std::invalid_argument("pcha: max_iter must be positive");
}

namespace {

void project_columns(Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    project_simplex_inplace(std::span<double>(m.col(c).data(), static_cast<std::size_t>(m.rows())));
  }
}

double largest_eigenvalue_small(const Matrix& sym) {
  return std::max(symmetric_eigen(sym).values(0), 0.0);
}

// lambda_max(X^T X) by power iteration on the smaller Gram side.
double largest_gram_eigenvalue(const Matrix& x) {
  const bool tall = x.rows() >= x.cols();
  const Eigen::Index dim = tall ? x.cols() : x.rows();
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = 1.0 + 0.01 * static_cast<double>(i % 7);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vector w = tall ? Vector(x.transpose() * (x * v)) : Vector(x * (x.transpose() * v));
    const double next = v.dot(w);
    const double norm = w.norm();
    if (!(norm > 0.0)) return 0.0;
    v = w / norm;
    if (std::abs(next - lambda) <= 1e-10 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

// Furthest-sum selection: greedily pick the point with the largest summed
// distance to the current picks, then run extra rounds that retire the
// oldest pick so the random starting point does not survive.
std::vector<Eigen::Index> furthest_sum(const Matrix& x, std::size_t k, Rng& rng) {
  const Eigen::Index n = x.rows();
  std::vector<Eigen::Index> chosen{static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)))};
  std::vector<char> in_set(static_cast<std::size_t>(n), 0);
  in_set[static_cast<std::size_t>(chosen[0])] = 1;
  Vector sum_dist = Vector::Zero(n);
  auto add_distances = [&](Eigen::Index p, double sign) {
    sum_dist += sign * (x.rowwise() - x.row(p)).rowwise().norm();
  };
  add_distances(chosen[0], 1.0);

  const std::size_t extra = 10;
  for (std::size_t round = 1; round < k + extra; ++round) {
    if (round >= k && chosen.size() == k) {
      const Eigen::Index oldest = chosen.front();
      chosen.erase(chosen.begin());
      in_set[static_cast<std::size_t>(oldest)] = 0;
      add_distances(oldest, -1.0);
    }
    Eigen::Index best = -1;
    double best_val = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (in_set[static_cast<std::size_t>(i)]) continue;
      if (sum_dist(i) > best_val) {
        best_val = sum_dist(i);
        best = i;
      }
    }
    if (best < 0) break;
    chosen.push_back(best);
    in_set[static_cast<std::size_t>(best)] = 1;
    add_distances(best, 1.0);
  }
  return chosen;
}

double objective(const Matrix& x, const Matrix& a, const Matrix& h, Matrix& residual) {
  residual = x;
  residual.noalias() -= h.transpose() * a;
  return residual.squaredNorm();
}

}  // namespace

PchaFactors pcha_fit(const DataMatrix& data, const PchaConfig& config) {
  config.validate();
  const Matrix& x = data.values();
  const Eigen::Index n = x.rows();
  const Eigen::Index k = idx(config.k);
  if (config.k > data.rows()) {
    std::ostringstream os;
    os << "pcha: k (" << config.k << ") exceeds the number of observations (" << data.rows() << ")";
    throw std::invalid_argument(os.str());
  }
  data.validate();

  Rng rng(config.seed);
  Matrix w = Matrix::Zero(n, k);
  {
    const auto picks = furthest_sum(x, config.k, rng);
    for (Eigen::Index j = 0; j < k; ++j) w(picks[static_cast<std::size_t>(j)], j) = 1.0;
  }
  Matrix h = Matrix::Constant(k, n, 1.0 / static_cast<double>(k));
  Matrix a = w.transpose() * x;

  const double lipschitz_x = largest_gram_eigenvalue(x);
  Matrix residual(n, x.cols());
  double f = objective(x, a, h, residual);

  PchaFactors out;
  out.loss_trace.reserve(config.max_iter);
  constexpr int kMaxHalvings = 60;

  for (std::size_t iter = 0; iter < config.max_iter; ++iter) {
    const double f_start = f;

    // Mixtures: gradient -2 A R^T, step t / L with L = 2 lambda_max(A A^T).
    {
      const Matrix grad = -2.0 * a * residual.transpose();
      const double lip = 2.0 * largest_eigenvalue_small(a * a.transpose());
      const double base = lip > 0.0 ? 1.0 / lip : 1.0;
      double t = 1.0;
      Matrix trial_res(n, x.cols());
      for (int halving = 0; halving < kMaxHalvings; ++halving, t *= 0.5) {
        Matrix trial = h - (t * base) * grad;
        project_columns(trial);
        const double ft = objective(x, a, trial, trial_res);
        if (ft <= f) {
          h = std::move(trial);
          residual.swap(trial_res);
          f = ft;
          break;
        }
      }
    }

    // Archetype coefficients: gradient -2 X (H R)^T,
    // L = 2 lambda_max(X^T X) lambda_max(H H^T).
    {
      const Matrix grad = -2.0 * x * (h * residual).transpose();
      const double lip = 2.0 * lipschitz_x * largest_eigenvalue_small(h * h.transpose());
      const double base = lip > 0.0 ? 1.0 / lip : 1.0;
      double t = 1.0;
      Matrix trial_res(n, x.cols());
      for (int halving = 0; halving < kMaxHalvings; ++halving, t *= 0.5) {
        Matrix trial = w - (t * base) * grad;
        project_columns(trial);
        const Matrix trial_a = trial.transpose() * x;
        const double ft = objective(x, trial_a, h, trial_res);
        if (ft <= f) {
          w = std::move(trial);
          a = trial_a;
          residual.swap(trial_res);
          f = ft;
          break;
        }
      }
    }

    if (!std::isfinite(f)) throw NumericError("pcha: objective became non-finite");
    out.loss_trace.push_back(f);
    if (f == 0.0) break;
    if (std::abs(f_start - f) <= config.tol * std::abs(f_start)) break;
  }

  out.coeff_w = std::move(w);
  out.mixtures_h = std::move(h);
  out.archetypes = std::move(a);
  return out;
}

Matrix simplex_least_squares(const Matrix& archetypes, const Matrix& x,
                             const SimplexLsqOptions& options) {
  if (archetypes.cols() != x.cols()) {
    throw DataError("simplex_least_squares: feature count mismatch");
  }
  const Eigen::Index k = archetypes.rows();
  const Eigen::Index n = x.rows();
  Matrix w = Matrix::Constant(n, k, 1.0 / static_cast<double>(k));
  if (k == 1 || n == 0) return w;

  const Matrix gram = archetypes * archetypes.transpose();
  const Matrix xa = x * archetypes.transpose();
  const double lip = 2.0 * largest_eigenvalue_small(gram);
  if (!(lip > 0.0)) return w;
  const double step = 1.0 / lip;

  // FISTA with gradient-based restart, all rows at once.
  Matrix y = w;
  double momentum = 1.0;
  auto project_rows = [](Matrix& m) {
    Matrix t = m.transpose();
    project_columns(t);
    m = t.transpose();
  };
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    const Matrix grad = 2.0 * (y * gram - xa);
    Matrix next = y - step * grad;
    project_rows(next);
    const double change = (next - w).cwiseAbs().maxCoeff();
    const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    if (((y - next).array() * (next - w).array()).sum() > 0.0) {
      // Restart when momentum points uphill.
      y = next;
      momentum = 1.0;
    } else {
      y = next + ((momentum - 1.0) / next_momentum) * (next - w);
      momentum = next_momentum;
    }
    w = std::move(next);
    if (change <= options.tol) break;
  }
  return w;
}

Matrix pcha_transform(const PchaFactors& factors, const DataMatrix& x) {
  if (x.cols() != static_cast<std::size_t>(factors.archetypes.cols())) {
    std::ostringstream os;
    os << "pcha_transform: expected " << factors.archetypes.cols() << " features, got " << x.cols();
    throw DataError(os.str());
  }
  return simplex_least_squares(factors.archetypes, x.values());
}

Vector kernel_scales(const KernelSpec& kernel, const Matrix& x) {
  const Eigen::Index m = x.cols();
  if (kernel.kind == KernelKind::linear) return Vector::Ones(m);
  if (kernel.sigma) {
    if (!(*kernel.sigma > 0.0)) throw std::invalid_argument("rbf kernel: sigma must be positive");
    return Vector::Constant(m, *kernel.sigma);
  }
  const RowVector mean = x.colwise().mean();
  const double denom = x.rows() > 1 ? static_cast<double>(x.rows() - 1) : 1.0;
  return ((x.rowwise() - mean).colwise().squaredNorm() / denom).cwiseSqrt().transpose();
}

Matrix kernel_matrix(const KernelSpec& kernel, const Matrix& x, const Matrix& reference,
                     const Vector& scales) {
  if (x.cols() != reference.cols()) throw DataError("kernel_matrix: feature count mismatch");
  if (kernel.kind == KernelKind::linear) return x * reference.transpose();

  Vector inv(scales.size());
  for (Eigen::Index f = 0; f < scales.size(); ++f) inv(f) = scales(f) > 0.0 ? 1.0 / scales(f) : 0.0;
  // sum_f (a_f - b_f)^2 / s_f  ==  squared distance after scaling by 1/sqrt(s_f).
  const Vector root = inv.cwiseSqrt();
  const Matrix xs = x * root.asDiagonal();
  const Matrix rs = reference * root.asDiagonal();
  return (-pairwise_sq_distances(xs, rs)).array().exp().matrix();
}

PchaFactors kernel_pcha_fit(const DataMatrix& x, const PchaConfig& config,
                            const KernelSpec& kernel) {
  config.validate();
  x.validate();
  const Vector scales = kernel_scales(kernel, x.values());
  DataMatrix features(kernel_matrix(kernel, x.values(), x.values(), scales));
  PchaFactors factors = pcha_fit(features, config);
  factors.archetypes = factors.coeff_w.transpose() * x.values();
  return factors;
}

}  // namespace archspace
