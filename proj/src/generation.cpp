#include "archspace/generation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace archspace {

SimplexSample sample_simplex_uniform(std::size_t n, std::size_t k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("sample_simplex_uniform: k must be at least 1");
  SimplexSample s{Matrix(idx(n), idx(k))};
  for (Eigen::Index r = 0; r < s.weights.rows(); ++r) {
    double total = 0.0;
    for (Eigen::Index c = 0; c < s.weights.cols(); ++c) {
      const double e = -std::log(rng.uniform_open());
      s.weights(r, c) = e;
      total += e;
    }
    s.weights.row(r) /= total;
  }
  return s;
}

bool on_simplex(const RowVector& alpha, double tol) {
  return alpha.size() > 0 && alpha.minCoeff() >= -tol && std::abs(alpha.sum() - 1.0) <= tol;
}

bool GeneratedData::any_extrapolated() const {
  for (bool e : extrapolated)
    if (e) return true;
  return false;
}

GeneratedData generate_from_mixtures(const ArchetypalModel& model, const Matrix& mixtures) {
  if (mixtures.cols() != idx(model.k())) {
    std::ostringstream os;
    os << "generate: expected " << model.k() << " mixture weights per row, got " << mixtures.cols();
    throw DataError(os.str());
  }
  GeneratedData out{model.decode(mixtures), mixtures, {}};
  out.extrapolated.reserve(static_cast<std::size_t>(mixtures.rows()));
  for (Eigen::Index r = 0; r < mixtures.rows(); ++r) out.extrapolated.push_back(!on_simplex(mixtures.row(r)));
  return out;
}

GeneratedData generate_uniform(const ArchetypalModel& model, std::size_t n, Rng& rng) {
  return generate_from_mixtures(model, sample_simplex_uniform(n, model.k(), rng).weights);
}

DataMatrix interpolate_archetypes(const ArchetypalModel& model, std::size_t i, std::size_t j,
                                  std::size_t steps) {
  const std::size_t k = model.k();
  if (i >= k || j >= k) {
    std::ostringstream os;
    os << "interpolate: archetype indices must be below " << k << ", got " << i << " and " << j;
    throw std::out_of_range(os.str());
  }
  if (i == j) throw std::invalid_argument("interpolate: archetype indices must differ");
  if (steps < 2) throw std::invalid_argument("interpolate: need at least 2 steps");
  Matrix alpha = Matrix::Zero(idx(steps), idx(k));
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) / static_cast<double>(steps - 1);
    alpha(idx(s), idx(i)) = 1.0 - t;
    alpha(idx(s), idx(j)) = t;
  }
  return model.decode(alpha);
}

GeneratedPoint generate_at(const ArchetypalModel& model, const Vector& alpha) {
  if (alpha.size() != idx(model.k())) {
    std::ostringstream os;
    os << "generate_at: expected " << model.k() << " weights, got " << alpha.size();
    throw DataError(os.str());
  }
  const Matrix row = alpha.transpose();
  GeneratedPoint p;
  p.values = model.decode(row).values().row(0).transpose();
  p.extrapolated = !on_simplex(row);
  return p;
}

}  // namespace archspace
