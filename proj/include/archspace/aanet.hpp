#pragma once

#include "archspace/rng.hpp"
#include "archspace/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace archspace {

enum class Activation { identity, leaky_relu, tanh };
enum class FinalActivation { tanh, identity };

inline constexpr double kLeakySlope = 0.2;

struct AAnetConfig {
  std::size_t k = 3;
  std::vector<std::size_t> encoder_hidden{256, 128, 64, 32};
  /// Empty means "mirror the encoder".
  std::vector<std::size_t> decoder_hidden{};
  double sigma = 0.05;
  double lambda_sum = 1.0;
  double lambda_nonneg = 1.0;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  /// Training stops at whichever budget is reached first.
  std::size_t max_steps = 20000;
  std::size_t max_epochs = 200;
  FinalActivation final_activation = FinalActivation::tanh;
  /// One scale for all features (the largest per-feature scale) instead of
  /// one per feature. Keeps the data's shape, so a near-constant feature is
  /// not stretched to the full output range.
  bool shared_scale = true;
  std::uint64_t seed = 0;

  static std::vector<std::size_t> paper_scale_hidden() { return {1024, 512, 256, 128}; }

  std::vector<std::size_t> effective_decoder_hidden() const;
  void validate() const;
};

/**
 * Per-feature affine map fitted on training data:
 * normalized = (x - shift) / scale.
 *
 * Min-max to [-1, 1] pairs with a tanh output layer, z-scoring with an
 * identity output layer. Constant features get scale 1. With a shared
 * scale every feature is centred the same way but divided by the largest
 * per-feature scale.
 */
struct Normalization {
  enum class Kind { minmax, zscore };
  Kind kind = Kind::minmax;
  Vector shift;
  Vector scale;

  static Normalization fit(const Matrix& x, FinalActivation activation, bool shared_scale = false);
  Matrix apply(const Matrix& x) const;
  Matrix invert(const Matrix& normalized) const;
};

/// y = act(x W + b) with x as a row; weights are fan_in x fan_out.
struct DenseLayer {
  Matrix weights;
  Vector bias;
  Activation activation = Activation::identity;
};

struct ArchetypalPenalty {
  double sum_penalty = 0.0;     // max(0, sum_j |e_j| - 1)
  double nonneg_penalty = 0.0;  // sum_j max(0, -e_j)
};

/// The two soft simplex constraints on one free latent code E'(x).
ArchetypalPenalty archetypal_penalty(std::span<const double> eprime);

/**
 * Autoencoder whose latent layer holds k - 1 free coordinates E'(x) plus a
 * virtual k-th coordinate 1 - sum_j E'_j(x), so every code sums to one.
 *
 * Encoder: hidden LeakyReLU layers, then a linear map to k - 1 outputs.
 * Decoder: a linear map from the k latent coordinates into the first hidden
 * layer, further LeakyReLU layers, then the output activation.
 *
 * Inference runs row by row, so a row's output does not depend on which
 * batch it arrives in.
 */
class AAnetNetwork {
public:
  AAnetNetwork() = default;

  /// Glorot-uniform weights and zero biases drawn from `rng`.
  static AAnetNetwork initialize(const AAnetConfig& config, std::size_t n_features,
                                 Normalization normalization, Rng& rng);

  const AAnetConfig& config() const { return config_; }
  std::size_t k() const { return config_.k; }
  std::size_t n_features() const { return n_features_; }
  bool trained() const { return trained_; }
  void set_trained(bool trained) { trained_ = trained; }

  const Normalization& normalization() const { return normalization_; }
  const std::vector<DenseLayer>& encoder() const { return encoder_; }
  const std::vector<DenseLayer>& decoder() const { return decoder_; }
  std::vector<DenseLayer>& encoder() { return encoder_; }
  std::vector<DenseLayer>& decoder() { return decoder_; }
  const std::vector<double>& loss_trace() const { return loss_trace_; }
  std::vector<double>& loss_trace() { return loss_trace_; }

  /// Free codes E'(x) (n x (k-1)) of already-normalised rows.
  Matrix free_codes(const Matrix& normalized) const;
  /// Mixtures (n x k) of already-normalised rows; no trained check.
  Matrix mixtures(const Matrix& normalized) const;
  /// Decoder output in normalised units; no trained check.
  Matrix decode_normalized(const Matrix& alpha) const;

  std::size_t parameter_count() const;

  /// Assembles a network from stored parts (deserialisation).
  static AAnetNetwork assemble(AAnetConfig config, std::size_t n_features,
                               Normalization normalization, std::vector<DenseLayer> encoder,
                               std::vector<DenseLayer> decoder, std::vector<double> loss_trace,
                               bool trained);

private:
  AAnetConfig config_;
  std::size_t n_features_ = 0;
  Normalization normalization_;
  std::vector<DenseLayer> encoder_;
  std::vector<DenseLayer> decoder_;
  std::vector<double> loss_trace_;
  bool trained_ = false;
};

/// Mixtures (n x k) of raw feature rows. No latent noise.
Matrix encode(const AAnetNetwork& net, const DataMatrix& x);
/// Feature-space points for arbitrary mixtures, including ones off the
/// simplex (extrapolation).
DataMatrix decode(const AAnetNetwork& net, const Matrix& alpha);
/// Decoded one-hot codes, k x m.
DataMatrix get_archetypes(const AAnetNetwork& net);

/// Fraction of rows whose free code leaves the simplex slice
/// {e >= 0, sum e <= 1} by more than 1e-9.
double hull_violation_fraction(const AAnetNetwork& net, const DataMatrix& x);

struct LossBreakdown {
  double total = 0.0;
  double reconstruction = 0.0;  // mean over batch and features of (x - x~)^2
  double sum_penalty = 0.0;     // batch mean, unweighted
  double nonneg_penalty = 0.0;  // batch mean, unweighted
};

/// Same layout as the network's layers.
struct Gradients {
  std::vector<Matrix> encoder_weights, decoder_weights;
  std::vector<Vector> encoder_bias, decoder_bias;

  static Gradients zeros_like(const AAnetNetwork& net);
  std::vector<double> flatten() const;
};

/// Loss on an already-normalised batch; `latent_noise` (b x k) is added to
/// the latent code when given.
LossBreakdown total_loss(const AAnetNetwork& net, const Matrix& normalized_batch,
                         const Matrix* latent_noise = nullptr);
/// Loss on raw rows. With `noise_rng`, N(0, sigma) noise is drawn for every
/// latent coordinate.
LossBreakdown total_loss(const AAnetNetwork& net, const DataMatrix& batch, Rng* noise_rng = nullptr);

/// Loss and its exact gradient by backpropagation.
LossBreakdown loss_and_gradient(const AAnetNetwork& net, const Matrix& normalized_batch,
                                const Matrix* latent_noise, Gradients& grad);

/// Pointers to every trainable scalar, in Gradients::flatten order.
std::vector<double*> parameter_refs(AAnetNetwork& net);

/**
 * Adam on the reconstruction loss plus weighted archetypal penalties,
 * shuffled mini-batches, latent noise during training only.
 * Runs single-threaded; (data, config) fixes the result bit-for-bit.
 */
AAnetNetwork train(const DataMatrix& x, const AAnetConfig& config);

/// train() with both penalty weights forced to zero.
AAnetNetwork train_plain_ae(const DataMatrix& x, AAnetConfig config);

/// Noise-free loss over the whole data set.
LossBreakdown converged_loss(const AAnetNetwork& net, const DataMatrix& x);

}  // namespace archspace
