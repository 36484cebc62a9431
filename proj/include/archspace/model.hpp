#pragma once

#include "archspace/aanet.hpp"
#include "archspace/linear_aa.hpp"
#include "archspace/types.hpp"

#include <memory>
#include <string>

namespace archspace {

/**
 * Common contract of every archetypal method: points map to mixtures over k
 * archetypes and mixtures map back to feature space.
 */
class ArchetypalModel {
public:
  virtual ~ArchetypalModel() = default;

  /// Method tag as stored in model files.
  virtual std::string method() const = 0;
  virtual std::size_t k() const = 0;
  virtual std::size_t n_features() const = 0;
  /// n x k mixtures, rows on (or, for AAnet, summing to one near) the simplex.
  virtual Matrix encode(const DataMatrix& x) const = 0;
  /// Feature-space points of arbitrary mixtures, one row at a time.
  virtual DataMatrix decode(const Matrix& alpha) const = 0;
  /// Decode of the k one-hot mixtures.
  virtual DataMatrix archetypes() const;
  /// Column names of the training data, if it had any.
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  void set_feature_names(std::vector<std::string> names) { feature_names_ = std::move(names); }

protected:
  void check_alpha(const Matrix& alpha) const;
  void check_features(const DataMatrix& x) const;

private:
  std::vector<std::string> feature_names_;
};

class AAnetModel final : public ArchetypalModel {
public:
  explicit AAnetModel(AAnetNetwork net) : net_(std::move(net)) {}

  std::string method() const override { return "aanet"; }
  std::size_t k() const override { return net_.k(); }
  std::size_t n_features() const override { return net_.n_features(); }
  Matrix encode(const DataMatrix& x) const override;
  DataMatrix decode(const Matrix& alpha) const override;

  const AAnetNetwork& network() const { return net_; }

private:
  AAnetNetwork net_;
};

/// Linear PCHA: decoding is alpha * archetypes.
class PchaModel final : public ArchetypalModel {
public:
  explicit PchaModel(PchaFactors factors) : factors_(std::move(factors)) {}

  std::string method() const override { return "pcha"; }
  std::size_t k() const override { return factors_.k(); }
  std::size_t n_features() const override { return static_cast<std::size_t>(factors_.archetypes.cols()); }
  Matrix encode(const DataMatrix& x) const override;
  DataMatrix decode(const Matrix& alpha) const override;

  const PchaFactors& factors() const { return factors_; }

private:
  PchaFactors factors_;
};

/**
 * Kernel PCHA. Keeps the training rows: new points are encoded by solving
 * the simplex least-squares problem between their Gram rows and the
 * archetypes' Gram rows (coeff_w^T K).
 */
class KernelPchaModel final : public ArchetypalModel {
public:
  KernelPchaModel(PchaFactors factors, KernelSpec kernel, Vector scales, Matrix training);

  std::string method() const override { return "kernel-pcha"; }
  std::size_t k() const override { return factors_.k(); }
  std::size_t n_features() const override { return static_cast<std::size_t>(training_.cols()); }
  Matrix encode(const DataMatrix& x) const override;
  DataMatrix decode(const Matrix& alpha) const override;

  const PchaFactors& factors() const { return factors_; }
  const KernelSpec& kernel() const { return kernel_; }
  const Vector& scales() const { return scales_; }
  const Matrix& training() const { return training_; }

private:
  PchaFactors factors_;
  KernelSpec kernel_;
  Vector scales_;
  Matrix training_;
  Matrix kernel_archetypes_;  // k x n_train
};

/// Linear PCHA in the latent space of a plain autoencoder.
class PchaOnAeModel final : public ArchetypalModel {
public:
  PchaOnAeModel(AAnetNetwork ae, PchaFactors latent);

  std::string method() const override { return "pcha-ae"; }
  std::size_t k() const override { return latent_.k(); }
  std::size_t n_features() const override { return ae_.n_features(); }
  Matrix encode(const DataMatrix& x) const override;
  DataMatrix decode(const Matrix& alpha) const override;

  const AAnetNetwork& autoencoder() const { return ae_; }
  /// Factors of the PCHA fit on the autoencoder's latent codes.
  const PchaFactors& latent_factors() const { return latent_; }

private:
  AAnetNetwork ae_;
  PchaFactors latent_;
};

std::unique_ptr<ArchetypalModel> fit_kernel_pcha_model(const DataMatrix& x, const PchaConfig& config,
                                                        const KernelSpec& kernel);

/// Row-by-row alpha * archetypes, so a row's result does not depend on its batch.
Matrix mix_rows(const Matrix& alpha, const Matrix& archetypes);

}  // namespace archspace
