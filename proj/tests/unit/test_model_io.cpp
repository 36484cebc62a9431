#include "archspace/aanet.hpp"
#include "archspace/data.hpp"
#include "archspace/linear_aa.hpp"
#include "archspace/model.hpp"
#include "archspace/model_io.hpp"
#include "archspace/pcha_on_ae.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <memory>

using namespace archspace;

namespace {

DataMatrix sample_data() {
  Rng rng(21);
  return gen_simplex_highdim(120, 3, 5, 0.5, SamplingBias::uniform, rng).points;
}

AAnetConfig tiny_config() {
  AAnetConfig c;
  c.k = 3;
  c.encoder_hidden = {12, 6};
  c.max_epochs = 5;
  return c;
}

PchaConfig pcha3() {
  PchaConfig c;
  c.k = 3;
  c.max_iter = 50;
  return c;
}

std::unique_ptr<ArchetypalModel> make(const std::string& method, const DataMatrix& x) {
  if (method == "aanet") return std::make_unique<AAnetModel>(train(x, tiny_config()));
  if (method == "pcha") return std::make_unique<PchaModel>(pcha_fit(x, pcha3()));
  if (method == "kernel-pcha") return fit_kernel_pcha_model(x, pcha3(), {KernelKind::rbf, std::nullopt});
  const AAnetNetwork ae = train_plain_ae(x, tiny_config());
  return std::make_unique<PchaOnAeModel>(make_pcha_on_ae_model(x, ae, pcha3()));
}

double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("value text round trips exactly") {
  const double values[] = {0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, -0.0, 1.0};
  const std::string text = format_values(values, 6);
  const std::vector<double> back = parse_values(text, 6);
  for (int i = 0; i < 6; ++i) CHECK(back[static_cast<std::size_t>(i)] == values[i]);
  CHECK_THROWS_AS(parse_values(text, 5), DataError);
  CHECK_THROWS_AS(parse_values("1 2 x", 3), DataError);
}

TEST_CASE("every method survives a save and load") {
  const DataMatrix x = sample_data();
  for (const std::string method : {"aanet", "pcha", "kernel-pcha", "pcha-ae"}) {
    CAPTURE(method);
    auto model = make(method, x);
    model->set_feature_names({"a", "b", "c", "d", "e"});
    const std::string text = serialize_model(*model);
    const auto back = parse_model(text);
    CHECK(back->method() == method);
    CHECK(back->k() == 3);
    CHECK(back->n_features() == 5);
    CHECK(back->feature_names() == model->feature_names());
    CHECK(max_abs(back->encode(x) - model->encode(x)) <= 1e-12);
    const Matrix mix = model->encode(x);
    CHECK(max_abs(back->decode(mix).values() - model->decode(mix).values()) <= 1e-12);
    CHECK(serialize_model(*back) == text);
  }
}

TEST_CASE("the model file on disk") {
  const DataMatrix x = sample_data();
  const auto model = make("pcha", x);
  const auto path = std::filesystem::temp_directory_path() / "archspace_model_io_test.json";
  save_model(*model, path);
  const auto back = load_model(path);
  CHECK(serialize_model(*back) == serialize_model(*model));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_model(path), DataError);
}

TEST_CASE("damaged or foreign documents are rejected") {
  const DataMatrix x = sample_data();
  const std::string text = serialize_model(*make("pcha", x));
  const nlohmann::json doc = nlohmann::json::parse(text);

  auto reseal = [](nlohmann::json d) {
    d.erase("checksum");
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(d.dump())));
    d["checksum"] = buf;
    return d.dump();
  };
  CHECK(reseal(doc) == doc.dump());

  nlohmann::json tampered = doc;
  tampered["config"]["k"] = 4;
  CHECK_THROWS_AS(parse_model(tampered.dump()), DataError);

  nlohmann::json future = doc;
  future["schema_version"] = kModelSchemaVersion + 1;
  CHECK_THROWS_AS(parse_model(reseal(future)), DataError);

  nlohmann::json unknown = doc;
  unknown["method"] = "vae";
  CHECK_THROWS_AS(parse_model(reseal(unknown)), DataError);

  CHECK_THROWS_AS(parse_model("not json"), DataError);
  CHECK_THROWS_AS(parse_model("{}"), DataError);
}
