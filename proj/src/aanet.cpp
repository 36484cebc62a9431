#include "archspace/aanet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace archspace {

std::vector<std::size_t> AAnetConfig::effective_decoder_hidden() const {
  if (!decoder_hidden.empty()) return decoder_hidden;
  return {encoder_hidden.rbegin(), encoder_hidden.rend()};
}

void AAnetConfig::validate() const {
  if (k < 2) throw std::invalid_argument("aanet: k must be at least 2");
  if (!(sigma >= 0.0)) throw std::invalid_argument("aanet: sigma must be non-negative");
  if (!(lambda_sum >= 0.0) || !(lambda_nonneg >= 0.0)) {
    throw std::invalid_argument("aanet: penalty weights must be non-negative");
  }
  if (batch_size < 1) throw std::invalid_argument("aanet: batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("aanet: learning_rate must be positive");
  for (std::size_t w : encoder_hidden)
    if (w == 0) throw std::invalid_argument("aanet: hidden widths must be positive");
  for (std::size_t w : decoder_hidden)
    if (w == 0) throw std::invalid_argument("aanet: hidden widths must be positive");
  if (!encoder_hidden.empty() && k - 1 >= encoder_hidden.back()) {
    std::ostringstream os;
    os << "aanet: latent width k-1 = " << k - 1
       << " must be smaller than the last encoder hidden width " << encoder_hidden.back();
    throw std::invalid_argument(os.str());
  }
}

Normalization Normalization::fit(const Matrix& x, FinalActivation activation, bool shared_scale) {
  Normalization n;
  const Eigen::Index m = x.cols();
  n.shift.resize(m);
  n.scale.resize(m);
  if (activation == FinalActivation::tanh) {
    n.kind = Kind::minmax;
    for (Eigen::Index c = 0; c < m; ++c) {
      const double lo = x.col(c).minCoeff(), hi = x.col(c).maxCoeff();
      n.shift(c) = 0.5 * (hi + lo);
      const double half = 0.5 * (hi - lo);
      n.scale(c) = half > 0.0 ? half : 1.0;
    }
  } else {
    n.kind = Kind::zscore;
    for (Eigen::Index c = 0; c < m; ++c) {
      const double mean = x.col(c).mean();
      const double var = (x.col(c).array() - mean).square().mean();
      n.shift(c) = mean;
      n.scale(c) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
  }
  if (shared_scale && m > 0) {
    double widest = 0.0;
    for (Eigen::Index c = 0; c < m; ++c) {
      const double lo = x.col(c).minCoeff(), hi = x.col(c).maxCoeff();
      if (hi - lo > 0.0) widest = std::max(widest, n.scale(c));
    }
    n.scale.setConstant(widest > 0.0 ? widest : 1.0);
  }
  return n;
}

Matrix Normalization::apply(const Matrix& x) const {
  return (x.rowwise() - shift.transpose()).array().rowwise() / scale.transpose().array();
}

Matrix Normalization::invert(const Matrix& normalized) const {
  return (normalized.array().rowwise() * scale.transpose().array()).matrix().rowwise() +
         shift.transpose();
}

ArchetypalPenalty archetypal_penalty(std::span<const double> eprime) {
  ArchetypalPenalty p;
  double l1 = 0.0;
  for (double e : eprime) {
    l1 += std::abs(e);
    if (e < 0.0) p.nonneg_penalty += -e;
  }
  p.sum_penalty = std::max(0.0, l1 - 1.0);
  return p;
}

namespace {

template <typename Derived>
void activate(Eigen::MatrixBase<Derived>& a, Activation act) {
  switch (act) {
    case Activation::identity:
      break;
    case Activation::leaky_relu:
      a.derived() = (a.array() > 0.0).select(a, kLeakySlope * a);
      break;
    case Activation::tanh:
      a.derived() = a.array().tanh().matrix();
      break;
  }
}

// Multiply `grad` (w.r.t. layer output) by the activation derivative,
// expressed through the activation's output.
void activation_backward(Matrix& grad, const Matrix& out, Activation act) {
  switch (act) {
    case Activation::identity:
      break;
    case Activation::leaky_relu:
      grad.array() *= (out.array() > 0.0).select(Matrix::Ones(out.rows(), out.cols()).array(),
                                                 kLeakySlope);
      break;
    case Activation::tanh:
      grad.array() *= 1.0 - out.array().square();
      break;
  }
}

DenseLayer make_layer(std::size_t fan_in, std::size_t fan_out, Activation act, Rng& rng) {
  DenseLayer layer;
  layer.activation = act;
  layer.weights.resize(idx(fan_in), idx(fan_out));
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      layer.weights(r, c) = rng.uniform(-limit, limit);
  layer.bias = Vector::Zero(idx(fan_out));
  return layer;
}

Vector forward_row(const std::vector<DenseLayer>& layers, Vector v) {
  for (const DenseLayer& layer : layers) {
    Vector a = layer.weights.transpose() * v;
    a += layer.bias;
    activate(a, layer.activation);
    v = std::move(a);
  }
  return v;
}

void require_trained(const AAnetNetwork& net, const char* what) {
  if (!net.trained()) throw std::logic_error(std::string(what) + ": network is not trained");
}

}  // namespace

AAnetNetwork AAnetNetwork::initialize(const AAnetConfig& config, std::size_t n_features,
                                      Normalization normalization, Rng& rng) {
  config.validate();
  if (n_features < 1) throw std::invalid_argument("aanet: need at least one feature");
  AAnetNetwork net;
  net.config_ = config;
  net.n_features_ = n_features;
  net.normalization_ = std::move(normalization);

  std::size_t width = n_features;
  for (std::size_t h : config.encoder_hidden) {
    net.encoder_.push_back(make_layer(width, h, Activation::leaky_relu, rng));
    width = h;
  }
  net.encoder_.push_back(make_layer(width, config.k - 1, Activation::identity, rng));

  width = config.k;
  const auto dec_hidden = config.effective_decoder_hidden();
  for (std::size_t i = 0; i < dec_hidden.size(); ++i) {
    const Activation act = i == 0 ? Activation::identity : Activation::leaky_relu;
    net.decoder_.push_back(make_layer(width, dec_hidden[i], act, rng));
    width = dec_hidden[i];
  }
  const Activation out_act =
      config.final_activation == FinalActivation::tanh ? Activation::tanh : Activation::identity;
  net.decoder_.push_back(make_layer(width, n_features, out_act, rng));
  return net;
}

AAnetNetwork AAnetNetwork::assemble(AAnetConfig config, std::size_t n_features,
                                    Normalization normalization, std::vector<DenseLayer> encoder,
                                    std::vector<DenseLayer> decoder, std::vector<double> loss_trace,
                                    bool trained) {
  config.validate();
  if (encoder.empty() || decoder.empty()) throw DataError("aanet: missing layers");
  if (encoder.front().weights.rows() != idx(n_features) ||
      encoder.back().weights.cols() != idx(config.k - 1) ||
      decoder.front().weights.rows() != idx(config.k) ||
      decoder.back().weights.cols() != idx(n_features)) {
    throw DataError("aanet: layer dimensions do not match the configuration");
  }
  auto chained = [](const std::vector<DenseLayer>& layers) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (layers[i].bias.size() != layers[i].weights.cols()) return false;
      if (i > 0 && layers[i].weights.rows() != layers[i - 1].weights.cols()) return false;
    }
    return true;
  };
  if (!chained(encoder) || !chained(decoder)) throw DataError("aanet: inconsistent layer shapes");
  if (normalization.shift.size() != idx(n_features) || normalization.scale.size() != idx(n_features)) {
    throw DataError("aanet: normalisation record does not match feature count");
  }
  AAnetNetwork net;
  net.config_ = std::move(config);
  net.n_features_ = n_features;
  net.normalization_ = std::move(normalization);
  net.encoder_ = std::move(encoder);
  net.decoder_ = std::move(decoder);
  net.loss_trace_ = std::move(loss_trace);
  net.trained_ = trained;
  return net;
}

Matrix AAnetNetwork::free_codes(const Matrix& normalized) const {
  Matrix out(normalized.rows(), idx(config_.k - 1));
  for (Eigen::Index r = 0; r < normalized.rows(); ++r) {
    out.row(r) = forward_row(encoder_, normalized.row(r).transpose()).transpose();
  }
  return out;
}

Matrix AAnetNetwork::mixtures(const Matrix& normalized) const {
  const Matrix e = free_codes(normalized);
  Matrix z(e.rows(), idx(config_.k));
  z.leftCols(e.cols()) = e;
  z.col(e.cols()) = (1.0 - e.rowwise().sum().array()).matrix();
  return z;
}

Matrix AAnetNetwork::decode_normalized(const Matrix& alpha) const {
  if (alpha.cols() != idx(config_.k)) {
    std::ostringstream os;
    os << "decode: expected " << config_.k << " mixture columns, got " << alpha.cols();
    throw DataError(os.str());
  }
  Matrix out(alpha.rows(), idx(n_features_));
  for (Eigen::Index r = 0; r < alpha.rows(); ++r) {
    out.row(r) = forward_row(decoder_, alpha.row(r).transpose()).transpose();
  }
  return out;
}

std::size_t AAnetNetwork::parameter_count() const {
  std::size_t total = 0;
  for (const auto* layers : {&encoder_, &decoder_})
    for (const DenseLayer& l : *layers)
      total += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return total;
}

Matrix encode(const AAnetNetwork& net, const DataMatrix& x) {
  require_trained(net, "encode");
  if (x.cols() != net.n_features()) {
    std::ostringstream os;
    os << "encode: expected " << net.n_features() << " features, got " << x.cols();
    throw DataError(os.str());
  }
  return net.mixtures(net.normalization().apply(x.values()));
}

DataMatrix decode(const AAnetNetwork& net, const Matrix& alpha) {
  require_trained(net, "decode");
  Matrix out = net.normalization().invert(net.decode_normalized(alpha));
  return DataMatrix::unchecked(std::move(out));
}

DataMatrix get_archetypes(const AAnetNetwork& net) {
  require_trained(net, "get_archetypes");
  return decode(net, Matrix::Identity(idx(net.k()), idx(net.k())));
}

double hull_violation_fraction(const AAnetNetwork& net, const DataMatrix& x) {
  require_trained(net, "hull_violation_fraction");
  if (x.rows() == 0) return 0.0;
  if (x.cols() != net.n_features()) throw DataError("hull_violation_fraction: feature count mismatch");
  const Matrix e = net.free_codes(net.normalization().apply(x.values()));
  constexpr double kTol = 1e-9;
  std::size_t outside = 0;
  for (Eigen::Index r = 0; r < e.rows(); ++r) {
    if (e.row(r).minCoeff() < -kTol || e.row(r).sum() > 1.0 + kTol) ++outside;
  }
  return static_cast<double>(outside) / static_cast<double>(e.rows());
}

Gradients Gradients::zeros_like(const AAnetNetwork& net) {
  Gradients g;
  for (const DenseLayer& l : net.encoder()) {
    g.encoder_weights.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
    g.encoder_bias.push_back(Vector::Zero(l.bias.size()));
  }
  for (const DenseLayer& l : net.decoder()) {
    g.decoder_weights.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
    g.decoder_bias.push_back(Vector::Zero(l.bias.size()));
  }
  return g;
}

std::vector<double> Gradients::flatten() const {
  std::vector<double> out;
  auto append = [&](const auto& m) { out.insert(out.end(), m.data(), m.data() + m.size()); };
  for (std::size_t i = 0; i < encoder_weights.size(); ++i) {
    append(encoder_weights[i]);
    append(encoder_bias[i]);
  }
  for (std::size_t i = 0; i < decoder_weights.size(); ++i) {
    append(decoder_weights[i]);
    append(decoder_bias[i]);
  }
  return out;
}

std::vector<double*> parameter_refs(AAnetNetwork& net) {
  std::vector<double*> refs;
  auto append = [&](auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) refs.push_back(m.data() + i);
  };
  for (DenseLayer& l : net.encoder()) {
    append(l.weights);
    append(l.bias);
  }
  for (DenseLayer& l : net.decoder()) {
    append(l.weights);
    append(l.bias);
  }
  return refs;
}

namespace {

struct Forward {
  std::vector<Matrix> enc_out;  // activations after each encoder layer
  Matrix eprime;
  Matrix latent;                // [E', 1 - sum E'] (+ noise)
  std::vector<Matrix> dec_out;
};

Forward forward_batch(const AAnetNetwork& net, const Matrix& batch, const Matrix* noise) {
  Forward f;
  const Matrix* in = &batch;
  for (const DenseLayer& layer : net.encoder()) {
    Matrix a(in->rows(), layer.weights.cols());
    a.noalias() = *in * layer.weights;
    a.rowwise() += layer.bias.transpose();
    activate(a, layer.activation);
    f.enc_out.push_back(std::move(a));
    in = &f.enc_out.back();
  }
  f.eprime = f.enc_out.back();
  const Eigen::Index k = idx(net.k());
  f.latent.resize(batch.rows(), k);
  f.latent.leftCols(k - 1) = f.eprime;
  f.latent.col(k - 1) = (1.0 - f.eprime.rowwise().sum().array()).matrix();
  if (noise != nullptr) {
    if (noise->rows() != batch.rows() || noise->cols() != k) {
      throw std::invalid_argument("latent noise has the wrong shape");
    }
    f.latent += *noise;
  }
  in = &f.latent;
  for (const DenseLayer& layer : net.decoder()) {
    Matrix a(in->rows(), layer.weights.cols());
    a.noalias() = *in * layer.weights;
    a.rowwise() += layer.bias.transpose();
    activate(a, layer.activation);
    f.dec_out.push_back(std::move(a));
    in = &f.dec_out.back();
  }
  return f;
}

LossBreakdown loss_from_forward(const AAnetNetwork& net, const Matrix& batch, const Forward& f) {
  LossBreakdown loss;
  const double b = static_cast<double>(batch.rows());
  loss.reconstruction = (f.dec_out.back() - batch).squaredNorm() / (b * static_cast<double>(batch.cols()));
  for (Eigen::Index r = 0; r < f.eprime.rows(); ++r) {
    const Vector row = f.eprime.row(r).transpose();
    const ArchetypalPenalty p =
        archetypal_penalty(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
    loss.sum_penalty += p.sum_penalty;
    loss.nonneg_penalty += p.nonneg_penalty;
  }
  loss.sum_penalty /= b;
  loss.nonneg_penalty /= b;
  loss.total = loss.reconstruction + net.config().lambda_sum * loss.sum_penalty +
               net.config().lambda_nonneg * loss.nonneg_penalty;
  return loss;
}

void check_batch(const AAnetNetwork& net, const Matrix& batch) {
  if (batch.rows() < 1) throw std::invalid_argument("total_loss: empty batch");
  if (batch.cols() != idx(net.n_features())) throw DataError("total_loss: feature count mismatch");
}

}  // namespace

LossBreakdown total_loss(const AAnetNetwork& net, const Matrix& normalized_batch,
                         const Matrix* latent_noise) {
  check_batch(net, normalized_batch);
  return loss_from_forward(net, normalized_batch, forward_batch(net, normalized_batch, latent_noise));
}

LossBreakdown total_loss(const AAnetNetwork& net, const DataMatrix& batch, Rng* noise_rng) {
  const Matrix normalized = net.normalization().apply(batch.values());
  if (noise_rng == nullptr || net.config().sigma == 0.0) return total_loss(net, normalized, nullptr);
  Matrix noise(normalized.rows(), idx(net.k()));
  for (Eigen::Index c = 0; c < noise.cols(); ++c)
    for (Eigen::Index r = 0; r < noise.rows(); ++r) noise(r, c) = noise_rng->normal(0.0, net.config().sigma);
  return total_loss(net, normalized, &noise);
}

LossBreakdown loss_and_gradient(const AAnetNetwork& net, const Matrix& batch,
                                const Matrix* latent_noise, Gradients& grad) {
  check_batch(net, batch);
  const Forward f = forward_batch(net, batch, latent_noise);
  const LossBreakdown loss = loss_from_forward(net, batch, f);
  const double b = static_cast<double>(batch.rows());
  const auto& cfg = net.config();

  if (grad.encoder_weights.size() != net.encoder().size()) grad = Gradients::zeros_like(net);

  // Decoder, output layer first.
  Matrix delta = (2.0 / (b * static_cast<double>(batch.cols()))) * (f.dec_out.back() - batch);
  for (std::size_t li = net.decoder().size(); li-- > 0;) {
    const DenseLayer& layer = net.decoder()[li];
    activation_backward(delta, f.dec_out[li], layer.activation);
    const Matrix& in = li == 0 ? f.latent : f.dec_out[li - 1];
    grad.decoder_weights[li].noalias() = in.transpose() * delta;
    grad.decoder_bias[li] = delta.colwise().sum().transpose();
    Matrix next(delta.rows(), layer.weights.rows());
    next.noalias() = delta * layer.weights.transpose();
    delta = std::move(next);
  }

  // Virtual node: z_k = 1 - sum_j e_j, so dL/de_j = dL/dz_j - dL/dz_k.
  const Eigen::Index km1 = idx(net.k() - 1);
  Matrix de = delta.leftCols(km1);
  de.colwise() -= delta.col(km1);

  for (Eigen::Index r = 0; r < f.eprime.rows(); ++r) {
    double l1 = 0.0;
    for (Eigen::Index j = 0; j < km1; ++j) l1 += std::abs(f.eprime(r, j));
    const bool sum_active = l1 > 1.0;
    for (Eigen::Index j = 0; j < km1; ++j) {
      const double e = f.eprime(r, j);
      if (sum_active && e != 0.0) de(r, j) += cfg.lambda_sum / b * (e > 0.0 ? 1.0 : -1.0);
      if (e < 0.0) de(r, j) -= cfg.lambda_nonneg / b;
    }
  }

  delta = std::move(de);
  for (std::size_t li = net.encoder().size(); li-- > 0;) {
    const DenseLayer& layer = net.encoder()[li];
    activation_backward(delta, f.enc_out[li], layer.activation);
    const Matrix& in = li == 0 ? batch : f.enc_out[li - 1];
    grad.encoder_weights[li].noalias() = in.transpose() * delta;
    grad.encoder_bias[li] = delta.colwise().sum().transpose();
    if (li > 0) {
      Matrix next(delta.rows(), layer.weights.rows());
      next.noalias() = delta * layer.weights.transpose();
      delta = std::move(next);
    }
  }
  return loss;
}

namespace {

class Adam {
public:
  explicit Adam(const AAnetNetwork& net, double lr)
      : lr_(lr), m_(Gradients::zeros_like(net)), v_(Gradients::zeros_like(net)) {}

  void step(AAnetNetwork& net, const Gradients& g) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < net.encoder().size(); ++i) {
      update(net.encoder()[i].weights, g.encoder_weights[i], m_.encoder_weights[i], v_.encoder_weights[i], c1, c2);
      update(net.encoder()[i].bias, g.encoder_bias[i], m_.encoder_bias[i], v_.encoder_bias[i], c1, c2);
    }
    for (std::size_t i = 0; i < net.decoder().size(); ++i) {
      update(net.decoder()[i].weights, g.decoder_weights[i], m_.decoder_weights[i], v_.decoder_weights[i], c1, c2);
      update(net.decoder()[i].bias, g.decoder_bias[i], m_.decoder_bias[i], v_.decoder_bias[i], c1, c2);
    }
  }

private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  template <typename M>
  void update(M& param, const M& g, M& m, M& v, double c1, double c2) {
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v.array() = kBeta2 * v.array() + (1.0 - kBeta2) * g.array().square();
    param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
  }

  double lr_;
  std::size_t t_ = 0;
  Gradients m_, v_;
};

}  // namespace

AAnetNetwork train(const DataMatrix& x, const AAnetConfig& config) {
  config.validate();
  x.validate();
  if (x.rows() < 1) throw DataError("train: no observations");

  const Rng root(config.seed);
  Rng init_rng = root.derive("init");
  Rng shuffle_rng = root.derive("shuffle");
  Rng noise_rng = root.derive("noise");

  Normalization norm = Normalization::fit(x.values(), config.final_activation, config.shared_scale);
  const Matrix xn = norm.apply(x.values());
  AAnetNetwork net = AAnetNetwork::initialize(config, x.cols(), std::move(norm), init_rng);

  const std::size_t n = x.rows();
  const std::size_t batch = std::min(config.batch_size, n);
  const std::size_t steps_per_epoch = (n + batch - 1) / batch;
  const std::size_t total_steps = std::min(config.max_steps, config.max_epochs * steps_per_epoch);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Adam adam(net, config.learning_rate);
  Gradients grad = Gradients::zeros_like(net);
  Matrix batch_rows;
  Matrix noise;
  net.loss_trace().reserve(total_steps);

  std::size_t pos = n;
  for (std::size_t step = 0; step < total_steps; ++step) {
    if (pos >= n) {
      for (std::size_t i = n; i-- > 1;) std::swap(order[i], order[shuffle_rng.index(i + 1)]);
      pos = 0;
    }
    const std::size_t count = std::min(batch, n - pos);
    batch_rows.resize(idx(count), xn.cols());
    for (std::size_t i = 0; i < count; ++i) batch_rows.row(idx(i)) = xn.row(idx(order[pos + i]));
    pos += count;

    const Matrix* noise_ptr = nullptr;
    if (config.sigma > 0.0) {
      noise.resize(idx(count), idx(config.k));
      for (Eigen::Index c = 0; c < noise.cols(); ++c)
        for (Eigen::Index r = 0; r < noise.rows(); ++r) noise(r, c) = noise_rng.normal(0.0, config.sigma);
      noise_ptr = &noise;
    }
    const LossBreakdown loss = loss_and_gradient(net, batch_rows, noise_ptr, grad);
    if (!std::isfinite(loss.total)) throw NumericError("train: loss became non-finite");
    adam.step(net, grad);
    net.loss_trace().push_back(loss.total);
  }
  net.set_trained(true);
  return net;
}

AAnetNetwork train_plain_ae(const DataMatrix& x, AAnetConfig config) {
  config.lambda_sum = 0.0;
  config.lambda_nonneg = 0.0;
  return train(x, config);
}

LossBreakdown converged_loss(const AAnetNetwork& net, const DataMatrix& x) {
  require_trained(net, "converged_loss");
  return total_loss(net, net.normalization().apply(x.values()), nullptr);
}

}  // namespace archspace
