#include "archspace/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace archspace {

namespace {

void fix_signs(Matrix& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const double a = std::abs(vectors(r, c));
      if (a > best + 1e-12) {
        best = a;
        arg = r;
      }
    }
    if (vectors(arg, c) < 0.0) vectors.col(c) *= -1.0;
  }
}

}  // namespace

SymmetricEigen symmetric_eigen(const Matrix& input, double tol, int max_sweeps) {
  if (input.rows() != input.cols()) {
    throw std::invalid_argument("symmetric_eigen: matrix must be square");
  }
  const Eigen::Index n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double norm = a.norm();

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= tol * norm || off == 0.0) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Once negligible next to both diagonal entries, zero it outright.
        const double app = a(p, p), aqq = a(q, q);
        if (sweep > 3 && std::abs(app) + 1e3 * std::abs(apq) == std::abs(app) &&
            std::abs(aqq) + 1e3 * std::abs(apq) == std::abs(aqq)) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  fix_signs(out.vectors);
  return out;
}

double PcaRecord::explained_fraction() const {
  return total_variance > 0.0 ? variances.sum() / total_variance : 0.0;
}

Matrix PcaRecord::project(const Matrix& x) const {
  if (x.cols() != mean.size()) throw DataError("pca: feature count mismatch");
  return (x.rowwise() - mean.transpose()) * components.transpose();
}

Matrix PcaRecord::reconstruct(const Matrix& projected) const {
  if (projected.cols() != components.rows()) throw DataError("pca: component count mismatch");
  return (projected * components).rowwise() + mean.transpose();
}

std::pair<DataMatrix, PcaRecord> pca_reduce(const DataMatrix& x, std::size_t dims) {
  const std::size_t limit = std::min(x.rows(), x.cols());
  if (dims < 1 || dims > limit) {
    std::ostringstream os;
    os << "pca_reduce: dims must be in [1, " << limit << "], got " << dims;
    throw std::invalid_argument(os.str());
  }
  PcaRecord rec;
  rec.mean = x.values().colwise().mean().transpose();
  const Matrix centred = x.values().rowwise() - rec.mean.transpose();
  const double denom = x.rows() > 1 ? static_cast<double>(x.rows() - 1) : 1.0;
  const Matrix cov = centred.transpose() * centred / denom;
  rec.total_variance = cov.trace();
  const double scale = x.values().squaredNorm() / static_cast<double>(x.rows());
  if (!(rec.total_variance > 1e-24 * (1.0 + scale))) {
    throw NumericError("pca_reduce: input has zero total variance");
  }
  const SymmetricEigen eig = symmetric_eigen(cov);
  rec.components = eig.vectors.leftCols(idx(dims)).transpose();
  rec.variances = eig.values.head(idx(dims)).cwiseMax(0.0);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < dims; ++i) names.push_back("PC" + std::to_string(i + 1));
  DataMatrix projected(centred * rec.components.transpose(), std::move(names));
  return {std::move(projected), std::move(rec)};
}

Matrix pairwise_sq_distances(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw DataError("pairwise distances: column count mismatch");
  const Vector an = a.rowwise().squaredNorm();
  const Vector bn = b.rowwise().squaredNorm();
  Matrix d = -2.0 * a * b.transpose();
  d.colwise() += an;
  d.rowwise() += bn.transpose();
  return d.cwiseMax(0.0);
}

DataMatrix classical_mds(const DataMatrix& points, std::size_t dims) {
  if (dims < 1) throw std::invalid_argument("classical_mds: dims must be positive");
  if (points.rows() < dims + 1) {
    std::ostringstream os;
    os << "classical_mds: need at least " << dims + 1 << " points for " << dims
       << " dimensions, got " << points.rows();
    throw std::invalid_argument(os.str());
  }
  const Eigen::Index n = idx(points.rows());
  // Exact squared distances; the GEMM expansion loses precision for nearby points.
  Matrix d2(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d2(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d2(i, j) = d2(j, i) = (points.values().row(i) - points.values().row(j)).squaredNorm();
    }
  }
  const Vector row_mean = d2.rowwise().mean();
  const double grand = row_mean.mean();
  Matrix b = d2;
  b.colwise() -= row_mean;
  b.rowwise() -= row_mean.transpose();
  b.array() += grand;
  b *= -0.5;

  const SymmetricEigen eig = symmetric_eigen(b);
  Matrix coords(n, idx(dims));
  for (std::size_t c = 0; c < dims; ++c) {
    const double lambda = std::max(eig.values(idx(c)), 0.0);
    coords.col(idx(c)) = eig.vectors.col(idx(c)) * std::sqrt(lambda);
  }
  coords.rowwise() -= coords.colwise().mean();
  std::vector<std::string> names;
  for (std::size_t i = 0; i < dims; ++i) names.push_back("MDS" + std::to_string(i + 1));
  return DataMatrix(std::move(coords), std::move(names));
}

void project_simplex_inplace(std::span<double> v) {
  if (v.empty()) throw std::invalid_argument("project_simplex: empty vector");
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double running = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    running += u[j];
    const double t = (running - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  for (double& x : v) x = std::max(x - theta, 0.0);
}

Vector project_simplex(const Vector& v) {
  Vector out = v;
  project_simplex_inplace(std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

double pooled_median_distance(const Matrix& a, const Matrix& b) {
  const Eigen::Index total = a.rows() + b.rows();
  Matrix pooled(total, a.cols());
  pooled << a, b;
  // Cap the pair count; a fixed stride keeps the estimate deterministic.
  constexpr Eigen::Index kMaxRows = 4000;
  if (total > kMaxRows) {
    const Eigen::Index stride = (total + kMaxRows - 1) / kMaxRows;
    Matrix sub((total + stride - 1) / stride, a.cols());
    for (Eigen::Index i = 0, r = 0; i < total; i += stride, ++r) sub.row(r) = pooled.row(i);
    pooled = std::move(sub);
  }
  const Matrix d2 = pairwise_sq_distances(pooled, pooled);
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(pooled.rows() * (pooled.rows() - 1) / 2));
  for (Eigen::Index i = 0; i < pooled.rows(); ++i)
    for (Eigen::Index j = i + 1; j < pooled.rows(); ++j) dists.push_back(std::sqrt(d2(i, j)));
  if (dists.empty()) return 0.0;
  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
  double med = dists[mid];
  if (dists.size() % 2 == 0) {
    const double lower = *std::max_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid));
    med = 0.5 * (med + lower);
  }
  return med;
}

namespace {

double mean_kernel(const Matrix& d2, double h) {
  double total = 0.0;
  for (double s : kMmdScales) {
    const double bw = s * h;
    total += (-d2.array() / (2.0 * bw * bw)).exp().sum();
  }
  return total / static_cast<double>(d2.size());
}

}  // namespace

double mmd(const DataMatrix& a, const DataMatrix& b) {
  if (a.rows() == 0 || b.rows() == 0) throw std::invalid_argument("mmd: empty sample");
  if (a.cols() != b.cols()) throw DataError("mmd: samples have different feature counts");
  double h = pooled_median_distance(a.values(), b.values());
  if (!(h > 0.0)) h = 1.0;  // every pooled point coincides; any bandwidth gives 0
  const double kaa = mean_kernel(pairwise_sq_distances(a.values(), a.values()), h);
  const double kbb = mean_kernel(pairwise_sq_distances(b.values(), b.values()), h);
  const double kab = mean_kernel(pairwise_sq_distances(a.values(), b.values()), h);
  return std::max(kaa + kbb - 2.0 * kab, 0.0);
}

std::vector<double> lowess(std::span<const double> x, std::span<const double> y, double frac) {
  if (x.size() != y.size()) throw std::invalid_argument("lowess: x and y lengths differ");
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("lowess: need at least 3 points");
  if (!(frac > 0.0 && frac <= 1.0)) throw std::invalid_argument("lowess: frac must be in (0, 1]");
  if (frac * static_cast<double>(n) < 2.0) {
    throw std::invalid_argument("lowess: frac * n must be at least 2");
  }
  const std::size_t r = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::ceil(frac * static_cast<double>(n) - 1e-12)));

  std::vector<double> out(n);
  std::vector<double> dist(n), sorted(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[j] = std::abs(x[j] - x[i]);
    sorted = dist;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(r - 1), sorted.end());
    const double h = sorted[r - 1];
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double wj = 0.0;
      if (h > 0.0) {
        const double u = dist[j] / h;
        if (u < 1.0) {
          const double c = 1.0 - u * u * u;
          wj = c * c * c;
        }
      } else if (dist[j] == 0.0) {
        wj = 1.0;
      }
      w[j] = wj;
      sw += wj;
      sx += wj * x[j];
      sy += wj * y[j];
    }
    const double xbar = sx / sw, ybar = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (w[j] == 0.0) continue;
      sxx += w[j] * (x[j] - xbar) * (x[j] - xbar);
      sxy += w[j] * (x[j] - xbar) * (y[j] - ybar);
    }
    if (sxx > 1e-14 * sw * (h * h + 1e-300)) {
      out[i] = ybar + (sxy / sxx) * (x[i] - xbar);
    } else {
      out[i] = ybar;
    }
  }
  return out;
}

}  // namespace archspace
