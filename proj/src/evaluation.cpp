#include "archspace/evaluation.hpp"

#include "archspace/log.hpp"
#include "archspace/numerics.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace archspace {

std::vector<std::size_t> hungarian_assignment(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw std::invalid_argument("hungarian: cost matrix must be square");
  const std::size_t n = static_cast<std::size_t>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  // Shortest augmenting path with potentials; 1-based internally.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(idx(i0 - 1), idx(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

ArchetypeMatch match_archetypes(const Matrix& recovered, const Matrix& truth) {
  if (recovered.rows() != truth.rows() || recovered.cols() != truth.cols()) {
    std::ostringstream os;
    os << "match_archetypes: shapes differ (" << recovered.rows() << "x" << recovered.cols() << " vs "
       << truth.rows() << "x" << truth.cols() << ")";
    throw DataError(os.str());
  }
  const std::size_t k = static_cast<std::size_t>(truth.rows());
  if (k == 0) throw DataError("match_archetypes: no archetypes");
  // cost(i, j): truth row i against recovered row j.
  Matrix cost(idx(k), idx(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      cost(idx(i), idx(j)) = (truth.row(idx(i)) - recovered.row(idx(j))).squaredNorm();

  std::vector<std::size_t> best(k);
  std::iota(best.begin(), best.end(), std::size_t{0});
  if (k <= 8) {
    std::vector<std::size_t> perm = best;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
      double c = 0.0;
      for (std::size_t i = 0; i < k; ++i) c += cost(idx(i), idx(perm[i]));
      if (c < best_cost) {
        best_cost = c;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    best = hungarian_assignment(cost);
  }

  ArchetypeMatch m;
  m.permutation = best;
  const double m_cols = static_cast<double>(truth.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double c = cost(idx(i), idx(best[i]));
    m.per_archetype_errors.push_back(c / m_cols);
    total += c;
  }
  m.mse = total / (static_cast<double>(k) * m_cols);
  return m;
}

double mixture_mse(const Matrix& recovered, const Matrix& truth,
                   const std::vector<std::size_t>& permutation) {
  if (recovered.rows() != truth.rows() || recovered.cols() != truth.cols()) {
    throw DataError("mixture_mse: shapes differ");
  }
  if (permutation.size() != static_cast<std::size_t>(truth.cols())) {
    throw DataError("mixture_mse: permutation length does not match archetype count");
  }
  std::vector<char> seen(permutation.size(), 0);
  for (std::size_t p : permutation) {
    if (p >= permutation.size() || seen[p]) throw std::invalid_argument("mixture_mse: not a permutation");
    seen[p] = 1;
  }
  double total = 0.0;
  for (Eigen::Index c = 0; c < truth.cols(); ++c) {
    total += (recovered.col(idx(permutation[static_cast<std::size_t>(c)])) - truth.col(c)).squaredNorm();
  }
  return total / static_cast<double>(truth.size());
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "archetype_mse=" << archetype_mse << '\n';
  if (mixture_mse) os << "mixture_mse=" << *mixture_mse << '\n';
  os << "permutation=";
  for (std::size_t i = 0; i < permutation.size(); ++i) os << (i ? "," : "") << permutation[i];
  os << "\nper_archetype_errors=";
  for (std::size_t i = 0; i < per_archetype_errors.size(); ++i) os << (i ? "," : "") << per_archetype_errors[i];
  os << '\n';
  return os.str();
}

EvalReport evaluate_recovery(const Matrix& recovered_archetypes, const Matrix& true_archetypes,
                             const Matrix* recovered_mixtures, const Matrix* true_mixtures) {
  const ArchetypeMatch m = match_archetypes(recovered_archetypes, true_archetypes);
  EvalReport r;
  r.archetype_mse = m.mse;
  r.permutation = m.permutation;
  r.per_archetype_errors = m.per_archetype_errors;
  if (recovered_mixtures != nullptr && true_mixtures != nullptr) {
    r.mixture_mse = mixture_mse(*recovered_mixtures, *true_mixtures, m.permutation);
  }
  return r;
}

std::size_t knee_point(const std::vector<std::size_t>& ks, const std::vector<double>& losses) {
  if (ks.size() != losses.size()) throw std::invalid_argument("knee_point: ks and losses differ in length");
  if (ks.size() < 3) throw std::invalid_argument("knee_point: need at least 3 archetype counts");
  for (std::size_t i = 1; i < ks.size(); ++i)
    if (ks[i] <= ks[i - 1]) throw std::invalid_argument("knee_point: ks must be strictly increasing");

  constexpr double kEps = 1e-12;
  std::size_t best = 1;
  double best_ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < losses.size(); ++i) {
    const double ratio = (losses[i - 1] - losses[i]) / (losses[i] - losses[i + 1] + kEps);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = i;
    }
  }
  return ks[best];
}

ElbowLoss pcha_elbow_loss(PchaConfig base) {
  return [base](const DataMatrix& x, std::size_t k, std::uint64_t seed) {
    PchaConfig cfg = base;
    cfg.k = k;
    cfg.seed = seed;
    const PchaFactors f = pcha_fit(x, cfg);
    return f.final_loss() / static_cast<double>(x.rows() * x.cols());
  };
}

ElbowLoss aanet_elbow_loss(AAnetConfig base) {
  return [base](const DataMatrix& x, std::size_t k, std::uint64_t seed) {
    if (k == 1) {
      const Normalization norm = Normalization::fit(x.values(), base.final_activation, base.shared_scale);
      const Matrix xn = norm.apply(x.values());
      return (xn.rowwise() - xn.colwise().mean()).squaredNorm() / static_cast<double>(xn.size());
    }
    AAnetConfig cfg = base;
    cfg.k = k;
    cfg.seed = seed;
    const AAnetNetwork net = train(x, cfg);
    return converged_loss(net, x).total;
  };
}

ElbowCurve elbow_analysis(const DataMatrix& x, const ElbowLoss& loss, const std::vector<std::size_t>& ks,
                          std::size_t seeds, std::uint64_t root_seed) {
  if (ks.size() < 3) throw std::invalid_argument("elbow_analysis: need at least 3 archetype counts");
  if (seeds < 1) throw std::invalid_argument("elbow_analysis: need at least one seed");
  ElbowCurve curve;
  curve.ks = ks;
  const Rng root(root_seed);
  for (std::size_t k : ks) {
    double total = 0.0;
    for (std::size_t s = 0; s < seeds; ++s) total += loss(x, k, root.derive(k * 1000003ULL + s).seed());
    curve.losses.push_back(total / static_cast<double>(seeds));
  }
  curve.knee = knee_point(curve.ks, curve.losses);
  return curve;
}

double pearson_r2(const RowVector& a, const RowVector& b, bool* degenerate) {
  if (a.size() != b.size()) throw DataError("pearson_r2: length mismatch");
  if (degenerate) *degenerate = false;
  const RowVector ca = a.array() - a.mean();
  const RowVector cb = b.array() - b.mean();
  const double saa = ca.squaredNorm(), sbb = cb.squaredNorm();
  if (!(saa > 0.0) || !(sbb > 0.0)) {
    if (degenerate) *degenerate = true;
    log_warning("pearson_r2: constant input, r^2 defined as 0");
    return 0.0;
  }
  const double r = ca.dot(cb) / std::sqrt(saa * sbb);
  return std::min(r * r, 1.0);
}

WelchTest welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_t_test: need at least 2 samples per group");
  auto stats = [](const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, ss / static_cast<double>(v.size() - 1)};
  };
  const auto [ma, va] = stats(a);
  const auto [mb, vb] = stats(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double sa = va / na, sb = vb / nb;
  WelchTest w;
  const double se2 = sa + sb;
  if (!(se2 > 0.0)) {
    w.t = ma == mb ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), ma - mb);
    w.df = na + nb - 2.0;
    w.p_value = ma == mb ? 1.0 : 0.0;
    return w;
  }
  w.t = (ma - mb) / std::sqrt(se2);
  w.df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  const boost::math::students_t dist(w.df);
  w.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(w.t)));
  return w;
}

ReproducibilityResult reproducibility_r2(const std::vector<Matrix>& runs, const DataMatrix& data, Rng& rng) {
  if (runs.size() < 2) throw std::invalid_argument("reproducibility_r2: need at least 2 runs");
  for (const Matrix& r : runs) {
    if (r.rows() != runs.front().rows() || r.cols() != runs.front().cols()) {
      throw DataError("reproducibility_r2: runs have different shapes");
    }
  }
  if (runs.front().cols() != idx(data.cols())) throw DataError("reproducibility_r2: feature count mismatch");

  ReproducibilityResult out;
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    const ArchetypeMatch m = match_archetypes(runs[i + 1], runs[i]);
    for (std::size_t a = 0; a < m.permutation.size(); ++a) {
      bool degenerate = false;
      const RowVector first = runs[i].row(idx(a));
      out.matched_r2.push_back(pearson_r2(first, runs[i + 1].row(idx(m.permutation[a])), &degenerate));
      if (degenerate) ++out.degenerate_pairs;
      const RowVector sample = data.values().row(idx(rng.index(data.rows())));
      out.random_r2.push_back(pearson_r2(first, sample, &degenerate));
      if (degenerate) ++out.degenerate_pairs;
    }
  }
  auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  out.mean_matched_r2 = mean(out.matched_r2);
  out.mean_random_r2 = mean(out.random_r2);
  if (out.matched_r2.size() >= 2) {
    const WelchTest w = welch_t_test(out.matched_r2, out.random_r2);
    out.welch_t = w.t;
    out.p_value = w.p_value;
  }
  return out;
}

std::vector<double> percentile_ranks(const Matrix& data, const RowVector& point) {
  if (point.size() != data.cols()) throw DataError("percentile_ranks: feature count mismatch");
  std::vector<double> out(static_cast<std::size_t>(data.cols()));
  const double n = static_cast<double>(data.rows());
  for (Eigen::Index f = 0; f < data.cols(); ++f) {
    const auto count = (data.col(f).array() <= point(f)).count();
    out[static_cast<std::size_t>(f)] = 100.0 * static_cast<double>(count) / n;
  }
  return out;
}

std::vector<ArchetypeSignature> archetype_signature(const ArchetypalModel& model,
                                                    const DataMatrix& data, std::size_t top) {
  if (!data.has_col_names()) throw DataError("archetype_signature: data needs column names");
  if (data.cols() != model.n_features()) throw DataError("archetype_signature: feature count mismatch");
  const Matrix arch = model.archetypes().values();
  const std::size_t keep = std::min(top, data.cols());
  std::vector<ArchetypeSignature> out;
  for (Eigen::Index a = 0; a < arch.rows(); ++a) {
    const std::vector<double> pct = percentile_ranks(data.values(), arch.row(a));
    std::vector<std::size_t> order(pct.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return pct[i] > pct[j]; });
    ArchetypeSignature sig;
    sig.archetype = static_cast<std::size_t>(a);
    for (std::size_t i = 0; i < keep; ++i) {
      const std::size_t f = order[i];
      sig.features.push_back({data.col_names()[f], f, arch(a, idx(f)), pct[f]});
    }
    out.push_back(std::move(sig));
  }
  return out;
}

std::vector<double> distance_to_archetype(const ArchetypalModel& model, const DataMatrix& data,
                                          std::size_t archetype, DistanceSpace space) {
  if (archetype >= model.k()) {
    std::ostringstream os;
    os << "distance_to_archetype: index " << archetype << " out of range for k = " << model.k();
    throw std::out_of_range(os.str());
  }
  std::vector<double> out(data.rows());
  if (space == DistanceSpace::latent) {
    const Matrix mix = model.encode(data);
    for (Eigen::Index r = 0; r < mix.rows(); ++r) {
      RowVector d = mix.row(r);
      d(idx(archetype)) -= 1.0;
      out[static_cast<std::size_t>(r)] = d.norm();
    }
  } else {
    const RowVector target = model.archetypes().values().row(idx(archetype));
    if (target.size() != idx(data.cols())) throw DataError("distance_to_archetype: feature count mismatch");
    for (Eigen::Index r = 0; r < data.values().rows(); ++r)
      out[static_cast<std::size_t>(r)] = (data.values().row(r) - target).norm();
  }
  return out;
}

DistanceTrend distance_trend(const ArchetypalModel& model, const DataMatrix& data, std::size_t archetype,
                             std::size_t feature, double frac, DistanceSpace space) {
  if (feature >= data.cols()) throw std::out_of_range("distance_trend: feature index out of range");
  const std::vector<double> dist = distance_to_archetype(model, data, archetype, space);
  std::vector<std::size_t> order(dist.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return dist[i] < dist[j]; });
  DistanceTrend t;
  for (std::size_t i : order) {
    t.distance.push_back(dist[i]);
    t.value.push_back(data(i, feature));
  }
  t.smoothed = lowess(t.distance, t.value, frac);
  return t;
}

}  // namespace archspace
