#pragma once

#include "archspace/aanet.hpp"
#include "archspace/linear_aa.hpp"
#include "archspace/model.hpp"
#include "archspace/rng.hpp"
#include "archspace/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace archspace {

/// Optimal alignment of recovered archetypes to ground truth.
/// permutation[i] is the recovered row matched to truth row i.
struct ArchetypeMatch {
  double mse = 0.0;  // over all k * m entries
  std::vector<std::size_t> permutation;
  std::vector<double> per_archetype_errors;  // mean squared error per truth row
};

/// Exhaustive search over permutations for k <= 8, Hungarian assignment
/// otherwise. Cost is squared Euclidean distance.
ArchetypeMatch match_archetypes(const Matrix& recovered, const Matrix& truth);

/// Minimum-cost assignment for a square cost matrix: result[row] = column.
std::vector<std::size_t> hungarian_assignment(const Matrix& cost);

/// MSE after reordering the recovered columns: column permutation[i] of
/// `recovered` is compared with column i of `truth`.
double mixture_mse(const Matrix& recovered, const Matrix& truth,
                   const std::vector<std::size_t>& permutation);

struct EvalReport {
  double archetype_mse = 0.0;
  std::optional<double> mixture_mse;
  std::vector<std::size_t> permutation;
  std::vector<double> per_archetype_errors;

  /// key=value lines.
  std::string to_text() const;
};

EvalReport evaluate_recovery(const Matrix& recovered_archetypes, const Matrix& true_archetypes,
                             const Matrix* recovered_mixtures = nullptr,
                             const Matrix* true_mixtures = nullptr);

struct ElbowCurve {
  std::vector<std::size_t> ks;
  std::vector<double> losses;
  std::size_t knee = 0;
};

/**
 * Knee of a loss-versus-k curve: the interior k maximising
 * (L[k-1] - L[k]) / (L[k] - L[k+1] + 1e-12), ties going to the smaller k.
 */
std::size_t knee_point(const std::vector<std::size_t>& ks, const std::vector<double>& losses);

/// Converged loss of one fit at archetype count k with the given seed.
using ElbowLoss = std::function<double(const DataMatrix&, std::size_t k, std::uint64_t seed)>;

/// PCHA residual sum of squares divided by n * m.
ElbowLoss pcha_elbow_loss(PchaConfig base);
/// Noise-free AAnet training loss. k = 1 has no free latent coordinate; its
/// loss is that of the constant decoder, i.e. the mean squared deviation of
/// the normalised data from its mean.
ElbowLoss aanet_elbow_loss(AAnetConfig base);

/// Fits every k for `seeds` seeds (seed s of k is derived from root_seed),
/// averages the losses and applies knee_point.
ElbowCurve elbow_analysis(const DataMatrix& x, const ElbowLoss& loss, const std::vector<std::size_t>& ks,
                          std::size_t seeds, std::uint64_t root_seed = 0);

/// Squared Pearson correlation. Constant inputs give 0 and set *degenerate.
double pearson_r2(const RowVector& a, const RowVector& b, bool* degenerate = nullptr);

struct WelchTest {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;  // two-sided
};

WelchTest welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct ReproducibilityResult {
  double mean_matched_r2 = 0.0;
  double mean_random_r2 = 0.0;
  double welch_t = 0.0;
  double p_value = 1.0;
  std::vector<double> matched_r2;
  std::vector<double> random_r2;
  std::size_t degenerate_pairs = 0;
};

/**
 * Archetype stability across runs. Consecutive runs are matched; each
 * matched pair contributes one r^2, and the baseline pairs the same
 * archetype with a uniformly drawn data row.
 */
ReproducibilityResult reproducibility_r2(const std::vector<Matrix>& runs, const DataMatrix& data,
                                         Rng& rng);

/// 100 * #{rows with value <= point_f} / n, per feature f.
std::vector<double> percentile_ranks(const Matrix& data, const RowVector& point);

struct FeaturePercentile {
  std::string name;
  std::size_t column = 0;
  double value = 0.0;
  double percentile = 0.0;
};

struct ArchetypeSignature {
  std::size_t archetype = 0;
  std::vector<FeaturePercentile> features;  // `top` highest percentiles, descending
};

std::vector<ArchetypeSignature> archetype_signature(const ArchetypalModel& model,
                                                    const DataMatrix& data, std::size_t top);

enum class DistanceSpace { latent, feature };

/// Euclidean distance of each point to archetype j, either between its
/// mixture and e_j or between the raw point and the decoded archetype.
std::vector<double> distance_to_archetype(const ArchetypalModel& model, const DataMatrix& data,
                                          std::size_t archetype, DistanceSpace space = DistanceSpace::latent);

/// Points sorted by distance to an archetype with one feature's values and
/// their LOWESS trend.
struct DistanceTrend {
  std::vector<double> distance;
  std::vector<double> value;
  std::vector<double> smoothed;
};

DistanceTrend distance_trend(const ArchetypalModel& model, const DataMatrix& data, std::size_t archetype,
                             std::size_t feature, double frac = 0.3,
                             DistanceSpace space = DistanceSpace::latent);

}  // namespace archspace
