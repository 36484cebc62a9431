#include "archspace/model.hpp"

#include "archspace/pcha_on_ae.hpp"

#include <sstream>
#include <stdexcept>

namespace archspace {

DataMatrix ArchetypalModel::archetypes() const {
  return decode(Matrix::Identity(idx(k()), idx(k())));
}

void ArchetypalModel::check_alpha(const Matrix& alpha) const {
  if (alpha.cols() != idx(k())) {
    std::ostringstream os;
    os << method() << ": expected " << k() << " mixture columns, got " << alpha.cols();
    throw DataError(os.str());
  }
}

void ArchetypalModel::check_features(const DataMatrix& x) const {
  if (x.cols() != n_features()) {
    std::ostringstream os;
    os << method() << ": expected " << n_features() << " features, got " << x.cols();
    throw DataError(os.str());
  }
}

Matrix mix_rows(const Matrix& alpha, const Matrix& archetypes) {
  if (alpha.cols() != archetypes.rows()) throw DataError("mixture width does not match archetype count");
  Matrix out(alpha.rows(), archetypes.cols());
  for (Eigen::Index r = 0; r < alpha.rows(); ++r) {
    const RowVector row = alpha.row(r);
    out.row(r) = row * archetypes;
  }
  return out;
}

Matrix AAnetModel::encode(const DataMatrix& x) const { return archspace::encode(net_, x); }

DataMatrix AAnetModel::decode(const Matrix& alpha) const {
  DataMatrix out = archspace::decode(net_, alpha);
  out.set_col_names(feature_names());
  return out;
}

Matrix PchaModel::encode(const DataMatrix& x) const { return pcha_transform(factors_, x); }

DataMatrix PchaModel::decode(const Matrix& alpha) const {
  check_alpha(alpha);
  return DataMatrix::unchecked(mix_rows(alpha, factors_.archetypes), feature_names());
}

KernelPchaModel::KernelPchaModel(PchaFactors factors, KernelSpec kernel, Vector scales, Matrix training)
    : factors_(std::move(factors)),
      kernel_(kernel),
      scales_(std::move(scales)),
      training_(std::move(training)) {
  if (factors_.coeff_w.rows() != training_.rows()) {
    throw DataError("kernel-pcha: coefficient rows do not match the stored training data");
  }
  if (scales_.size() != training_.cols()) throw DataError("kernel-pcha: scale vector size mismatch");
  const Matrix gram = kernel_matrix(kernel_, training_, training_, scales_);
  kernel_archetypes_ = factors_.coeff_w.transpose() * gram;
}

Matrix KernelPchaModel::encode(const DataMatrix& x) const {
  check_features(x);
  return simplex_least_squares(kernel_archetypes_, kernel_matrix(kernel_, x.values(), training_, scales_));
}

DataMatrix KernelPchaModel::decode(const Matrix& alpha) const {
  check_alpha(alpha);
  return DataMatrix::unchecked(mix_rows(alpha, factors_.archetypes), feature_names());
}

std::unique_ptr<ArchetypalModel> fit_kernel_pcha_model(const DataMatrix& x, const PchaConfig& config,
                                                        const KernelSpec& kernel) {
  PchaFactors factors = kernel_pcha_fit(x, config, kernel);
  auto model = std::make_unique<KernelPchaModel>(std::move(factors), kernel,
                                                 kernel_scales(kernel, x.values()), x.values());
  model->set_feature_names(x.col_names());
  return model;
}

PchaOnAeModel::PchaOnAeModel(AAnetNetwork ae, PchaFactors latent)
    : ae_(std::move(ae)), latent_(std::move(latent)) {
  if (latent_.archetypes.cols() != idx(ae_.k())) {
    throw DataError("pcha-ae: latent archetypes do not match the autoencoder's latent width");
  }
}

Matrix PchaOnAeModel::encode(const DataMatrix& x) const {
  const Matrix codes = archspace::encode(ae_, x);
  return simplex_least_squares(latent_.archetypes, codes);
}

DataMatrix PchaOnAeModel::decode(const Matrix& alpha) const {
  check_alpha(alpha);
  DataMatrix out = archspace::decode(ae_, mix_rows(alpha, latent_.archetypes));
  out.set_col_names(feature_names());
  return out;
}

PchaOnAeResult pcha_on_ae(const DataMatrix& x, const AAnetNetwork& ae, const PchaConfig& config) {
  if (!ae.trained()) throw std::logic_error("pcha_on_ae: autoencoder is not trained");
  if (x.cols() != ae.n_features()) throw DataError("pcha_on_ae: feature count mismatch");
  PchaOnAeResult out;
  const DataMatrix codes(archspace::encode(ae, x));
  out.latent = pcha_fit(codes, config);
  out.archetypes = archspace::decode(ae, mix_rows(Matrix::Identity(idx(config.k), idx(config.k)),
                                                  out.latent.archetypes))
                       .values();
  out.mixtures = out.latent.mixtures();
  return out;
}

PchaOnAeModel make_pcha_on_ae_model(const DataMatrix& x, const AAnetNetwork& ae,
                                    const PchaConfig& config) {
  PchaOnAeResult r = pcha_on_ae(x, ae, config);
  PchaOnAeModel model(ae, std::move(r.latent));
  model.set_feature_names(x.col_names());
  return model;
}

}  // namespace archspace
