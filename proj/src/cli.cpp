#include "archspace/cli.hpp"

#include "archspace/aanet.hpp"
#include "archspace/data.hpp"
#include "archspace/evaluation.hpp"
#include "archspace/generation.hpp"
#include "archspace/linear_aa.hpp"
#include "archspace/log.hpp"
#include "archspace/model_io.hpp"
#include "archspace/numerics.hpp"
#include "archspace/pcha_on_ae.hpp"
#include "archspace/viz.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace archspace {

namespace {

struct TrainFlags {
  std::uint64_t seed = 0;
  double sigma = 0.05;
  std::size_t epochs = 200;
  std::size_t steps = 20000;
  std::size_t batch_size = 256;
  double lr = 1e-3;
  std::string hidden;
  std::string final_activation = "tanh";
  double lambda_sum = 1.0;
  double lambda_nonneg = 1.0;
  bool per_feature_scale = false;
  std::size_t max_iter = 2000;
  double tol = 1e-6;
  std::string kernel = "rbf";
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--sigma", f.sigma, "AAnet latent noise standard deviation")->check(CLI::NonNegativeNumber);
  cmd->add_option("--epochs", f.epochs, "AAnet epoch budget")->check(CLI::PositiveNumber);
  cmd->add_option("--steps", f.steps, "AAnet step budget")->check(CLI::PositiveNumber);
  cmd->add_option("--batch-size", f.batch_size, "AAnet mini-batch size")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", f.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  cmd->add_option("--hidden", f.hidden, "Encoder widths, e.g. 256,128,64,32 (decoder mirrors)");
  cmd->add_option("--final-activation", f.final_activation, "tanh or identity")
      ->check(CLI::IsMember({"tanh", "identity"}));
  cmd->add_option("--lambda-sum", f.lambda_sum, "Weight of the L1 <= 1 penalty")->check(CLI::NonNegativeNumber);
  cmd->add_option("--lambda-nonneg", f.lambda_nonneg, "Weight of the non-negativity penalty")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--per-feature-scale", f.per_feature_scale, "Normalise each feature to its own range");
  cmd->add_option("--max-iter", f.max_iter, "PCHA iteration budget")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", f.tol, "PCHA relative tolerance")->check(CLI::NonNegativeNumber);
  cmd->add_option("--kernel", f.kernel, "Kernel for kernel-pcha: linear, rbf or rbf:<sigma>");
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

template <typename T>
T parse_number(const std::string& s, const char* what) {
  T v{};
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  const auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || b == e) {
    throw std::invalid_argument(std::string(what) + ": cannot parse '" + s + "'");
  }
  return v;
}

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> out;
  for (const std::string& s : split(text, ',')) out.push_back(parse_number<std::size_t>(s, "--hidden"));
  return out;
}

AAnetConfig aanet_config(const TrainFlags& f, std::size_t k) {
  AAnetConfig c;
  c.k = k;
  c.seed = f.seed;
  c.sigma = f.sigma;
  c.max_epochs = f.epochs;
  c.max_steps = f.steps;
  c.batch_size = f.batch_size;
  c.learning_rate = f.lr;
  if (!f.hidden.empty()) c.encoder_hidden = parse_widths(f.hidden);
  c.final_activation = f.final_activation == "tanh" ? FinalActivation::tanh : FinalActivation::identity;
  c.lambda_sum = f.lambda_sum;
  c.lambda_nonneg = f.lambda_nonneg;
  c.shared_scale = !f.per_feature_scale;
  c.validate();
  return c;
}

PchaConfig pcha_config(const TrainFlags& f, std::size_t k) {
  PchaConfig c;
  c.k = k;
  c.seed = f.seed;
  c.max_iter = f.max_iter;
  c.tol = f.tol;
  c.validate();
  return c;
}

KernelSpec kernel_spec(const std::string& text) {
  KernelSpec spec;
  if (text == "linear") {
    spec.kind = KernelKind::linear;
  } else if (text == "rbf") {
    spec.kind = KernelKind::rbf;
  } else if (text.rfind("rbf:", 0) == 0) {
    spec.kind = KernelKind::rbf;
    spec.sigma = parse_number<double>(text.substr(4), "--kernel");
    if (!(*spec.sigma > 0.0)) throw std::invalid_argument("--kernel: sigma must be positive");
  } else {
    throw std::invalid_argument("--kernel: expected linear, rbf or rbf:<sigma>, got '" + text + "'");
  }
  return spec;
}

struct Fitted {
  std::unique_ptr<ArchetypalModel> model;
  double loss = 0.0;
  std::vector<double> trace;
};

Fitted fit_model(const std::string& method, const DataMatrix& x, std::size_t k, const TrainFlags& f) {
  Fitted out;
  if (method == "aanet") {
    AAnetNetwork net = train(x, aanet_config(f, k));
    out.loss = converged_loss(net, x).total;
    out.trace = net.loss_trace();
    out.model = std::make_unique<AAnetModel>(std::move(net));
  } else if (method == "pcha") {
    PchaFactors fac = pcha_fit(x, pcha_config(f, k));
    out.loss = fac.final_loss();
    out.trace = fac.loss_trace;
    out.model = std::make_unique<PchaModel>(std::move(fac));
  } else if (method == "kernel-pcha") {
    out.model = fit_kernel_pcha_model(x, pcha_config(f, k), kernel_spec(f.kernel));
    const auto& kp = dynamic_cast<const KernelPchaModel&>(*out.model);
    out.loss = kp.factors().final_loss();
    out.trace = kp.factors().loss_trace;
  } else if (method == "pcha-ae") {
    AAnetNetwork ae = train_plain_ae(x, aanet_config(f, k));
    PchaOnAeModel m = make_pcha_on_ae_model(x, ae, pcha_config(f, k));
    out.loss = m.latent_factors().final_loss();
    out.trace = m.latent_factors().loss_trace;
    out.model = std::make_unique<PchaOnAeModel>(std::move(m));
  } else {
    throw std::invalid_argument("unknown method '" + method + "' (expected aanet, pcha, kernel-pcha or pcha-ae)");
  }
  out.model->set_feature_names(x.col_names());
  return out;
}

std::vector<std::string> archetype_names(std::size_t k) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < k; ++i) names.push_back("archetype_" + std::to_string(i));
  return names;
}

void emit_csv(const Matrix& m, const std::vector<std::string>& names, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << format_csv(m, names);
  } else {
    save_csv(m, path, names);
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write '" + path + "'");
  f << text;
}

Matrix parse_mixture(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.empty()) throw std::invalid_argument("--mixture: no weights given");
  Matrix alpha(1, idx(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) alpha(0, idx(i)) = parse_number<double>(parts[i], "--mixture");
  return alpha;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"archspace: archetypal analysis with AAnet and PCHA"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  std::string method = "aanet", input, output, model_path, log_path;
  std::size_t k = 3;
  bool no_header = false;
  TrainFlags tf;

  auto* fit = app.add_subcommand("fit", "Fit a model to a CSV matrix");
  fit->add_option("--method", method, "aanet, pcha, kernel-pcha or pcha-ae");
  fit->add_option("--k", k, "Number of archetypes")->required();
  fit->add_option("--input", input, "Input CSV")->required();
  fit->add_option("--output", output, "Model file to write")->required();
  fit->add_option("--loss-log", log_path, "Write the loss trace, one value per line");
  fit->add_flag("--no-header", no_header, "Input CSV has no header row");
  add_train_flags(fit, tf);

  auto* transform = app.add_subcommand("transform", "Mixtures of new points");
  transform->add_option("--model", model_path, "Model file")->required();
  transform->add_option("--input", input, "Input CSV")->required();
  transform->add_option("--output", output, "Mixtures CSV (default stdout)");
  transform->add_flag("--no-header", no_header, "Input CSV has no header row");

  auto* archetypes = app.add_subcommand("archetypes", "Decoded archetypes");
  archetypes->add_option("--model", model_path, "Model file")->required();
  archetypes->add_option("--output", output, "Archetypes CSV (default stdout)");

  std::size_t uniform_n = 0, steps = 10;
  std::string mixture, interpolate;
  auto* generate = app.add_subcommand("generate", "Decode mixtures into feature space");
  generate->add_option("--model", model_path, "Model file")->required();
  auto* g_uniform = generate->add_option("--uniform", uniform_n, "Decode N uniform simplex samples");
  auto* g_mixture = generate->add_option("--mixture", mixture, "Decode one mixture, e.g. 0.2,0.3,0.5");
  auto* g_interp = generate->add_option("--interpolate", interpolate, "Walk between archetypes i,j");
  generate->add_option("--steps", steps, "Points along --interpolate")->check(CLI::Range(2, 1000000));
  generate->add_option("--seed", tf.seed, "Random seed");
  generate->add_option("--output", output, "Output CSV (default stdout)");
  g_uniform->excludes(g_mixture)->excludes(g_interp);
  g_mixture->excludes(g_interp);

  std::string recovered, truth, rec_mix, true_mix;
  auto* evaluate = app.add_subcommand("evaluate", "Compare recovered archetypes with ground truth");
  evaluate->add_option("--recovered", recovered, "Recovered archetypes CSV")->required();
  evaluate->add_option("--truth", truth, "True archetypes CSV")->required();
  evaluate->add_option("--recovered-mixtures", rec_mix, "Recovered mixtures CSV");
  evaluate->add_option("--true-mixtures", true_mix, "True mixtures CSV");
  evaluate->add_option("--output", output, "Report file (default stdout)");
  evaluate->add_flag("--no-header", no_header, "CSV files have no header row");

  std::size_t k_min = 1, k_max = 8, seeds = 1;
  auto* elbow = app.add_subcommand("elbow", "Loss versus number of archetypes and its knee");
  elbow->add_option("--input", input, "Input CSV")->required();
  elbow->add_option("--method", method, "aanet or pcha");
  elbow->add_option("--k-min", k_min, "Smallest k")->check(CLI::PositiveNumber);
  elbow->add_option("--k-max", k_max, "Largest k")->check(CLI::PositiveNumber);
  elbow->add_option("--seeds", seeds, "Fits averaged per k")->check(CLI::PositiveNumber);
  elbow->add_flag("--no-header", no_header, "Input CSV has no header row");
  add_train_flags(elbow, tf);

  std::string path_a, path_b;
  auto* mmd_cmd = app.add_subcommand("mmd", "Multiscale MMD between two samples");
  mmd_cmd->add_option("--a", path_a, "First sample CSV")->required();
  mmd_cmd->add_option("--b", path_b, "Second sample CSV")->required();
  mmd_cmd->add_flag("--no-header", no_header, "CSV files have no header row");

  std::string generator = "triangle", bias = "uniform";
  std::size_t n = 2000, dim = 100;
  double radius = 1.0, curvature = 0.0;
  auto* synth = app.add_subcommand("synth", "Write a synthetic data set");
  synth->add_option("--generator", generator, "triangle or simplex")->check(CLI::IsMember({"triangle", "simplex"}));
  synth->add_option("--n", n, "Number of points")->check(CLI::PositiveNumber);
  synth->add_option("--radius", radius, "Sphere radius (triangle)")->check(CLI::PositiveNumber);
  synth->add_option("--k", k, "Archetypes (simplex)");
  synth->add_option("--dim", dim, "Ambient dimension (simplex)")->check(CLI::PositiveNumber);
  synth->add_option("--curvature", curvature, "Warp strength (simplex)")->check(CLI::NonNegativeNumber);
  synth->add_option("--bias", bias, "uniform or center (simplex)")->check(CLI::IsMember({"uniform", "center"}));
  synth->add_option("--seed", tf.seed, "Random seed");
  synth->add_option("--output", output, "Prefix for _points/_archetypes/_mixtures.csv")->required();

  std::size_t dims = 2;
  std::string svg;
  auto* viz = app.add_subcommand("viz", "MDS coordinates of archetypes and points");
  viz->add_option("--model", model_path, "Model file")->required();
  viz->add_option("--input", input, "Input CSV")->required();
  viz->add_option("--output", output, "Prefix for _archetype_coords.csv and _point_coords.csv")->required();
  viz->add_option("--dims", dims, "2 or 3")->check(CLI::IsMember({2, 3}));
  viz->add_option("--svg", svg, "Also write a scatter plot");
  viz->add_flag("--no-header", no_header, "Input CSV has no header row");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fit->parsed()) {
      const DataMatrix x = load_csv(input, !no_header);
      const auto t0 = std::chrono::steady_clock::now();
      const Fitted f = fit_model(method, x, k, tf);
      const double wall = seconds_since(t0);
      save_model(*f.model, output);
      if (!log_path.empty()) {
        std::ostringstream os;
        os.precision(17);
        for (double v : f.trace) os << v << '\n';
        write_text(log_path, os.str());
      }
      out.precision(10);
      out << "method=" << method << "\nk=" << k << "\nloss=" << f.loss << "\nwall_time_s=" << wall << '\n';
    } else if (transform->parsed()) {
      const auto model = load_model(model_path);
      const Matrix mix = model->encode(load_csv(input, !no_header));
      emit_csv(mix, archetype_names(model->k()), output, out);
    } else if (archetypes->parsed()) {
      const auto model = load_model(model_path);
      const DataMatrix a = model->archetypes();
      emit_csv(a.values(), model->feature_names(), output, out);
    } else if (generate->parsed()) {
      const auto model = load_model(model_path);
      Matrix points;
      if (g_uniform->count() > 0) {
        Rng rng(tf.seed);
        points = generate_uniform(*model, uniform_n, rng).points.values();
      } else if (g_mixture->count() > 0) {
        const GeneratedData g = generate_from_mixtures(*model, parse_mixture(mixture));
        if (g.any_extrapolated()) log_warning("generate: mixture is off the simplex; output is an extrapolation");
        points = g.points.values();
      } else if (g_interp->count() > 0) {
        const auto ij = split(interpolate, ',');
        if (ij.size() != 2) throw std::invalid_argument("--interpolate: expected i,j");
        points = interpolate_archetypes(*model, parse_number<std::size_t>(ij[0], "--interpolate"),
                                        parse_number<std::size_t>(ij[1], "--interpolate"), steps)
                     .values();
      } else {
        throw std::invalid_argument("generate: give one of --uniform, --mixture or --interpolate");
      }
      emit_csv(points, model->feature_names(), output, out);
    } else if (evaluate->parsed()) {
      const DataMatrix rec = load_csv(recovered, !no_header);
      const DataMatrix tru = load_csv(truth, !no_header);
      if (rec_mix.empty() != true_mix.empty()) {
        throw std::invalid_argument("evaluate: give both --recovered-mixtures and --true-mixtures or neither");
      }
      EvalReport report;
      if (rec_mix.empty()) {
        report = evaluate_recovery(rec.values(), tru.values());
      } else {
        const DataMatrix rm = load_csv(rec_mix, !no_header);
        const DataMatrix tm = load_csv(true_mix, !no_header);
        report = evaluate_recovery(rec.values(), tru.values(), &rm.values(), &tm.values());
      }
      if (output.empty() || output == "-") {
        out << report.to_text();
      } else {
        write_text(output, report.to_text());
      }
    } else if (elbow->parsed()) {
      if (k_max < k_min + 2) throw std::invalid_argument("elbow: need at least 3 values of k");
      const DataMatrix x = load_csv(input, !no_header);
      std::vector<std::size_t> ks;
      for (std::size_t kk = k_min; kk <= k_max; ++kk) ks.push_back(kk);
      ElbowLoss loss;
      if (method == "aanet") {
        loss = aanet_elbow_loss(aanet_config(tf, std::max<std::size_t>(k_max, 2)));
      } else if (method == "pcha") {
        loss = pcha_elbow_loss(pcha_config(tf, k_min));
      } else {
        throw std::invalid_argument("elbow: method must be aanet or pcha");
      }
      const ElbowCurve curve = elbow_analysis(x, loss, ks, seeds, tf.seed);
      out.precision(10);
      for (std::size_t i = 0; i < curve.ks.size(); ++i) out << "k=" << curve.ks[i] << " loss=" << curve.losses[i] << '\n';
      out << "knee=" << curve.knee << '\n';
    } else if (mmd_cmd->parsed()) {
      out.precision(17);
      out << "mmd=" << mmd(load_csv(path_a, !no_header), load_csv(path_b, !no_header)) << '\n';
    } else if (synth->parsed()) {
      Rng rng(tf.seed);
      SyntheticDataset ds;
      if (generator == "triangle") {
        ds = gen_triangle_on_sphere(n, radius, rng);
      } else {
        ds = gen_simplex_highdim(n, k, dim, curvature,
                                 bias == "center" ? SamplingBias::center_biased : SamplingBias::uniform, rng);
      }
      save_synthetic(ds, output);
    } else if (viz->parsed()) {
      const auto model = load_model(model_path);
      const VizCoords v = viz_coords(*model, load_csv(input, !no_header), dims);
      std::vector<std::string> names{"x", "y", "z"};
      names.resize(dims);
      save_csv(v.archetype_coords, output + "_archetype_coords.csv", names);
      save_csv(v.point_coords, output + "_point_coords.csv", names);
      if (!svg.empty()) write_text(svg, scatter_svg(v));
    }
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace archspace
