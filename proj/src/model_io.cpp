#include "archspace/model_io.hpp"

#include "archspace/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace archspace {

using json = nlohmann::json;

namespace {

constexpr const char* kFormat = "archspace-model";

[[noreturn]] void fail(const std::string& what) { throw DataError("model file: " + what); }

json matrix_json(const Matrix& m) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  return {{"rows", m.rows()}, {"cols", m.cols()},
          {"values", format_values(rm.data(), static_cast<std::size_t>(rm.size()))}};
}

json vector_json(const Vector& v) {
  return {{"size", v.size()}, {"values", format_values(v.data(), static_cast<std::size_t>(v.size()))}};
}

json trace_json(const std::vector<double>& t) {
  return {{"size", t.size()}, {"values", format_values(t.data(), t.size())}};
}

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) fail(std::string("missing field '") + name + "'");
  return j.at(name);
}

template <typename T>
T get(const json& j, const char* name) {
  try {
    return field(j, name).get<T>();
  } catch (const json::exception&) {
    fail(std::string("field '") + name + "' has the wrong type");
  }
}

Matrix matrix_from(const json& j) {
  const auto rows = get<std::size_t>(j, "rows");
  const auto cols = get<std::size_t>(j, "cols");
  const std::vector<double> v = parse_values(get<std::string>(j, "values"), rows * cols);
  Matrix m(idx(rows), idx(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(idx(r), idx(c)) = v[r * cols + c];
  return m;
}

Vector vector_from(const json& j) {
  const std::vector<double> v = parse_values(get<std::string>(j, "values"), get<std::size_t>(j, "size"));
  return Eigen::Map<const Vector>(v.data(), idx(v.size()));
}

std::vector<double> trace_from(const json& j) {
  return parse_values(get<std::string>(j, "values"), get<std::size_t>(j, "size"));
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::tanh: return "tanh";
  }
  return "identity";
}

Activation activation_from(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "leaky_relu") return Activation::leaky_relu;
  if (s == "tanh") return Activation::tanh;
  fail("unknown activation '" + s + "'");
}

json aanet_config_json(const AAnetConfig& c) {
  return {{"k", c.k},
          {"encoder_hidden", c.encoder_hidden},
          {"decoder_hidden", c.decoder_hidden},
          {"sigma", c.sigma},
          {"lambda_sum", c.lambda_sum},
          {"lambda_nonneg", c.lambda_nonneg},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"max_steps", c.max_steps},
          {"max_epochs", c.max_epochs},
          {"final_activation", c.final_activation == FinalActivation::tanh ? "tanh" : "identity"},
          {"shared_scale", c.shared_scale},
          {"seed", c.seed}};
}

AAnetConfig aanet_config_from(const json& j) {
  AAnetConfig c;
  c.k = get<std::size_t>(j, "k");
  c.encoder_hidden = get<std::vector<std::size_t>>(j, "encoder_hidden");
  c.decoder_hidden = get<std::vector<std::size_t>>(j, "decoder_hidden");
  c.sigma = get<double>(j, "sigma");
  c.lambda_sum = get<double>(j, "lambda_sum");
  c.lambda_nonneg = get<double>(j, "lambda_nonneg");
  c.batch_size = get<std::size_t>(j, "batch_size");
  c.learning_rate = get<double>(j, "learning_rate");
  c.max_steps = get<std::size_t>(j, "max_steps");
  c.max_epochs = get<std::size_t>(j, "max_epochs");
  const auto fa = get<std::string>(j, "final_activation");
  if (fa != "tanh" && fa != "identity") fail("unknown final_activation '" + fa + "'");
  c.final_activation = fa == "tanh" ? FinalActivation::tanh : FinalActivation::identity;
  c.shared_scale = get<bool>(j, "shared_scale");
  c.seed = get<std::uint64_t>(j, "seed");
  return c;
}

json normalization_json(const Normalization& n) {
  return {{"kind", n.kind == Normalization::Kind::minmax ? "minmax" : "zscore"},
          {"shift", vector_json(n.shift)},
          {"scale", vector_json(n.scale)}};
}

Normalization normalization_from(const json& j) {
  Normalization n;
  const auto kind = get<std::string>(j, "kind");
  if (kind != "minmax" && kind != "zscore") fail("unknown normalization kind '" + kind + "'");
  n.kind = kind == "minmax" ? Normalization::Kind::minmax : Normalization::Kind::zscore;
  n.shift = vector_from(field(j, "shift"));
  n.scale = vector_from(field(j, "scale"));
  return n;
}

json layers_json(const std::vector<DenseLayer>& layers) {
  json out = json::array();
  for (const DenseLayer& l : layers) {
    out.push_back({{"weights", matrix_json(l.weights)},
                   {"bias", vector_json(l.bias)},
                   {"activation", activation_name(l.activation)}});
  }
  return out;
}

std::vector<DenseLayer> layers_from(const json& j) {
  if (!j.is_array()) fail("layers must be an array");
  std::vector<DenseLayer> out;
  for (const json& l : j) {
    DenseLayer d;
    d.weights = matrix_from(field(l, "weights"));
    d.bias = vector_from(field(l, "bias"));
    d.activation = activation_from(get<std::string>(l, "activation"));
    out.push_back(std::move(d));
  }
  return out;
}

json network_json(const AAnetNetwork& net) {
  return {{"n_features", net.n_features()},
          {"trained", net.trained()},
          {"encoder", layers_json(net.encoder())},
          {"decoder", layers_json(net.decoder())},
          {"loss_trace", trace_json(net.loss_trace())}};
}

AAnetNetwork network_from(const json& payload, const json& config, const json& normalization) {
  return AAnetNetwork::assemble(aanet_config_from(config), get<std::size_t>(payload, "n_features"),
                                normalization_from(normalization), layers_from(field(payload, "encoder")),
                                layers_from(field(payload, "decoder")), trace_from(field(payload, "loss_trace")),
                                get<bool>(payload, "trained"));
}

json factors_json(const PchaFactors& f) {
  return {{"coeff_w", matrix_json(f.coeff_w)},
          {"mixtures_h", matrix_json(f.mixtures_h)},
          {"archetypes", matrix_json(f.archetypes)},
          {"loss_trace", trace_json(f.loss_trace)}};
}

PchaFactors factors_from(const json& j) {
  PchaFactors f;
  f.coeff_w = matrix_from(field(j, "coeff_w"));
  f.mixtures_h = matrix_from(field(j, "mixtures_h"));
  f.archetypes = matrix_from(field(j, "archetypes"));
  f.loss_trace = trace_from(field(j, "loss_trace"));
  if (f.coeff_w.cols() != f.archetypes.rows() || f.mixtures_h.rows() != f.archetypes.rows()) {
    fail("factor shapes are inconsistent");
  }
  return f;
}

std::string checksum_of(const json& body) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(body.dump())));
  return buf;
}

json document(const ArchetypalModel& model) {
  json doc;
  doc["format"] = kFormat;
  doc["schema_version"] = kModelSchemaVersion;
  doc["method"] = model.method();
  doc["feature_names"] = model.feature_names();
  doc["normalization"] = nullptr;

  if (const auto* m = dynamic_cast<const AAnetModel*>(&model)) {
    doc["config"] = aanet_config_json(m->network().config());
    doc["normalization"] = normalization_json(m->network().normalization());
    doc["payload"] = network_json(m->network());
  } else if (const auto* m = dynamic_cast<const PchaModel*>(&model)) {
    doc["config"] = {{"k", m->k()}};
    doc["payload"] = factors_json(m->factors());
  } else if (const auto* m = dynamic_cast<const KernelPchaModel*>(&model)) {
    json kernel = {{"kind", m->kernel().kind == KernelKind::rbf ? "rbf" : "linear"}};
    kernel["sigma"] = m->kernel().sigma ? json(*m->kernel().sigma) : json(nullptr);
    doc["config"] = {{"k", m->k()}, {"kernel", kernel}};
    doc["payload"] = factors_json(m->factors());
    doc["payload"]["scales"] = vector_json(m->scales());
    doc["payload"]["training"] = matrix_json(m->training());
  } else if (const auto* m = dynamic_cast<const PchaOnAeModel*>(&model)) {
    doc["config"] = {{"k", m->k()}, {"autoencoder", aanet_config_json(m->autoencoder().config())}};
    doc["normalization"] = normalization_json(m->autoencoder().normalization());
    doc["payload"] = {{"autoencoder", network_json(m->autoencoder())},
                      {"latent", factors_json(m->latent_factors())}};
  } else {
    throw std::invalid_argument("save_model: unsupported model type '" + model.method() + "'");
  }
  doc["checksum"] = checksum_of(doc);
  return doc;
}

}  // namespace

std::string format_values(const double* data, std::size_t count) {
  std::string out;
  out.reserve(count * 24);
  char buf[32];
  for (std::size_t i = 0; i < count; ++i) {
    const int len = std::snprintf(buf, sizeof buf, "%.17g", data[i]);
    if (i) out.push_back(' ');
    out.append(buf, static_cast<std::size_t>(len));
  }
  return out;
}

std::vector<double> parse_values(const std::string& text, std::size_t expected) {
  std::vector<double> out;
  out.reserve(expected);
  const char* p = text.data();
  const char* end = p + text.size();
  while (p < end) {
    while (p < end && *p == ' ') ++p;
    if (p == end) break;
    double v = 0.0;
    const auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || !std::isfinite(v)) fail("bad number near '" + std::string(p, std::min<std::size_t>(16, static_cast<std::size_t>(end - p))) + "'");
    out.push_back(v);
    p = next;
  }
  if (out.size() != expected) {
    std::ostringstream os;
    os << "expected " << expected << " values, found " << out.size();
    fail(os.str());
  }
  return out;
}

std::string serialize_model(const ArchetypalModel& model) { return document(model).dump(1) + "\n"; }

void save_model(const ArchetypalModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file '" + path.string() + "'");
  out << serialize_model(model);
  if (!out) throw DataError("failed writing model file '" + path.string() + "'");
}

std::unique_ptr<ArchetypalModel> parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("not valid JSON (") + e.what() + ")");
  }
  if (!doc.is_object() || !doc.contains("format") || doc["format"] != kFormat) fail("not an archspace model");
  const int version = get<int>(doc, "schema_version");
  if (version != kModelSchemaVersion) {
    std::ostringstream os;
    os << "unsupported schema_version " << version << " (this build reads " << kModelSchemaVersion << ")";
    fail(os.str());
  }
  const auto stored = get<std::string>(doc, "checksum");
  json body = doc;
  body.erase("checksum");
  if (checksum_of(body) != stored) fail("checksum mismatch");

  const auto method = get<std::string>(doc, "method");
  const json& config = field(doc, "config");
  const json& payload = field(doc, "payload");
  std::unique_ptr<ArchetypalModel> model;
  if (method == "aanet") {
    model = std::make_unique<AAnetModel>(network_from(payload, config, field(doc, "normalization")));
  } else if (method == "pcha") {
    model = std::make_unique<PchaModel>(factors_from(payload));
  } else if (method == "kernel-pcha") {
    const json& k = field(config, "kernel");
    KernelSpec spec;
    const auto kind = get<std::string>(k, "kind");
    if (kind != "rbf" && kind != "linear") fail("unknown kernel '" + kind + "'");
    spec.kind = kind == "rbf" ? KernelKind::rbf : KernelKind::linear;
    if (!field(k, "sigma").is_null()) spec.sigma = get<double>(k, "sigma");
    model = std::make_unique<KernelPchaModel>(factors_from(payload), spec, vector_from(field(payload, "scales")),
                                              matrix_from(field(payload, "training")));
  } else if (method == "pcha-ae") {
    model = std::make_unique<PchaOnAeModel>(
        network_from(field(payload, "autoencoder"), field(config, "autoencoder"), field(doc, "normalization")),
        factors_from(field(payload, "latent")));
  } else {
    fail("unknown method '" + method + "'");
  }
  model->set_feature_names(get<std::vector<std::string>>(doc, "feature_names"));
  return model;
}

std::unique_ptr<ArchetypalModel> load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace archspace
