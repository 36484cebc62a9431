#include "archspace/aanet.hpp"
#include "archspace/data.hpp"
#include "archspace/evaluation.hpp"
#include "archspace/generation.hpp"
#include "archspace/linear_aa.hpp"
#include "archspace/log.hpp"
#include "archspace/model.hpp"
#include "archspace/numerics.hpp"
#include "archspace/pcha_on_ae.hpp"
#include "archspace/viz.hpp"

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace archspace;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string join(const std::vector<double>& v, const char* f = "%.3g") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(f, v[i]);
  return s;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

AAnetConfig aanet_k(std::size_t k, std::uint64_t seed) {
  AAnetConfig c;
  c.k = k;
  c.seed = seed;
  return c;
}

PchaConfig pcha_k(std::size_t k, std::uint64_t seed) {
  PchaConfig c;
  c.k = k;
  c.seed = seed;
  return c;
}

// 1. Flat regime.
Outcome flat_regime() {
  constexpr double kBound = 0.01;
  constexpr double kTimeLimit = 120.0;
  bool pass = true;
  std::vector<double> aa, pc, worst_time;
  for (std::uint64_t s = 0; s < 5; ++s) {
    Rng rng(100 + s);
    const SyntheticDataset ds = gen_triangle_on_sphere(2000, 1000.0, rng);

    auto t0 = Clock::now();
    const PchaFactors f = pcha_fit(ds.points, pcha_k(3, s));
    const double tp = seconds_since(t0);
    t0 = Clock::now();
    const AAnetNetwork net = train(ds.points, aanet_k(3, s));
    const double ta = seconds_since(t0);

    pc.push_back(match_archetypes(f.archetypes, ds.true_archetypes).mse);
    aa.push_back(match_archetypes(get_archetypes(net).values(), ds.true_archetypes).mse);
    worst_time.push_back(std::max(tp, ta));
    pass = pass && pc.back() < kBound && aa.back() < kBound && tp < kTimeLimit && ta < kTimeLimit;
  }
  return {pass, "archetype MSE aanet=[" + join(aa) + "] pcha=[" + join(pc) + "] (bound 0.01); slowest run per seed [" +
                    join(worst_time, "%.1f") + "] s (bound 120 s)"};
}

// 2. Curved regime ordering.
Outcome curved_regime() {
  int wins = 0;
  std::vector<double> aa, pc, kp;
  for (std::uint64_t s = 0; s < 5; ++s) {
    Rng rng(200 + s);
    const SyntheticDataset ds = gen_triangle_on_sphere(2000, 0.75, rng);
    const AAnetModel model(train(ds.points, aanet_k(3, s)));
    const Matrix a_mix = model.encode(ds.points);
    const PchaFactors f = pcha_fit(ds.points, pcha_k(3, s));
    const PchaFactors kf = kernel_pcha_fit(ds.points, pcha_k(3, s), {KernelKind::rbf, std::nullopt});

    const Matrix a_mixtures = a_mix;
    const Matrix p_mixtures = f.mixtures();
    const Matrix k_mixtures = kf.mixtures();
    aa.push_back(*evaluate_recovery(model.archetypes().values(), ds.true_archetypes, &a_mixtures, &ds.true_mixtures)
                      .mixture_mse);
    pc.push_back(*evaluate_recovery(f.archetypes, ds.true_archetypes, &p_mixtures, &ds.true_mixtures).mixture_mse);
    kp.push_back(*evaluate_recovery(kf.archetypes, ds.true_archetypes, &k_mixtures, &ds.true_mixtures).mixture_mse);
    if (aa.back() < pc.back() && aa.back() < kp.back()) ++wins;
  }
  return {wins >= 4, "mixture MSE aanet=[" + join(aa) + "] pcha=[" + join(pc) + "] kernel-pcha(rbf)=[" + join(kp) +
                         "]; aanet best in " + std::to_string(wins) + "/5 (need 4)"};
}

// 3. Gradient oracle.
Outcome gradient_oracle() {
  AAnetConfig c;
  c.k = 4;
  c.encoder_hidden = {16, 8};
  c.sigma = 0.0;
  Normalization norm;
  norm.shift = Vector::Zero(8);
  norm.scale = Vector::Ones(8);
  Rng rng(300);
  AAnetNetwork net = AAnetNetwork::initialize(c, 8, norm, rng);
  net.set_trained(true);
  Matrix batch(64, 8);
  for (Eigen::Index r = 0; r < batch.rows(); ++r)
    for (Eigen::Index f = 0; f < 8; ++f) batch(r, f) = rng.normal(0.0, 2.0);

  Gradients g = Gradients::zeros_like(net);
  const LossBreakdown at = loss_and_gradient(net, batch, nullptr, g);
  const bool active = at.sum_penalty > 0.0 && at.nonneg_penalty > 0.0;
  const std::vector<double> analytic = g.flatten();
  std::vector<double*> params = parameter_refs(net);

  const double h = 1e-6;
  double worst = 0.0;
  for (int probe = 0; probe < 200; ++probe) {
    const std::size_t i = rng.index(params.size());
    const double saved = *params[i];
    *params[i] = saved + h;
    const double up = total_loss(net, batch).total;
    *params[i] = saved - h;
    const double down = total_loss(net, batch).total;
    *params[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(numeric - analytic[i]) /
                                std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6}));
  }
  return {active && worst < 1e-4, "[8->16->8->3] network, 200 probes, worst relative error " + fmt("%.2e", worst) +
                                      " (bound 1e-4); penalties active: " + (active ? "yes" : "no")};
}

// 4. Elbow.
Outcome elbow() {
  AAnetConfig base;
  base.encoder_hidden = {64, 32};
  base.max_steps = 1500;
  base.max_epochs = 100000;
  const std::vector<std::size_t> ks{1, 2, 3, 4, 5, 6, 7, 8};
  const auto t0 = Clock::now();
  bool pass = true;
  std::string detail;
  for (std::size_t kstar = 2; kstar <= 5; ++kstar) {
    int hits = 0;
    std::vector<double> knees;
    for (std::uint64_t s = 0; s < 5; ++s) {
      Rng rng(400 + 10 * kstar + s);
      const SyntheticDataset ds = gen_simplex_highdim(1000, kstar, 20, 0.0, SamplingBias::uniform, rng);
      const ElbowCurve curve = elbow_analysis(ds.points, aanet_elbow_loss(base), ks, 2, s);
      knees.push_back(static_cast<double>(curve.knee));
      if (curve.knee == kstar) ++hits;
    }
    pass = pass && hits >= 4;
    detail += "k*=" + std::to_string(kstar) + " knees [" + join(knees, "%.0f") + "] " + std::to_string(hits) + "/5; ";
  }
  const double wall = seconds_since(t0);
  pass = pass && wall < 1800.0;
  return {pass, detail + "need 4/5 each; sweep " + fmt("%.0f", wall) + " s (bound 1800 s)"};
}

// 5. Reproducibility.
Outcome reproducibility() {
  Rng rng(500);
  const SyntheticDataset ds = gen_simplex_highdim(1000, 4, 50, 0.5, SamplingBias::uniform, rng);
  std::vector<Matrix> runs;
  for (std::uint64_t s = 0; s < 10; ++s) runs.push_back(get_archetypes(train(ds.points, aanet_k(4, s))).values());
  Rng pick(501);
  const ReproducibilityResult r = reproducibility_r2(runs, ds.points, pick);
  const bool pass = r.mean_matched_r2 > r.mean_random_r2 && r.p_value < 0.01;
  return {pass, "10 runs: mean matched r2 " + fmt("%.4f", r.mean_matched_r2) + ", random-row r2 " +
                    fmt("%.4f", r.mean_random_r2) + ", Welch p " + fmt("%.2e", r.p_value) + " (bound 0.01)"};
}

// 6. Geometry generation.
Outcome geometry_generation() {
  int wins = 0;
  std::vector<double> gen, tr;
  for (std::uint64_t s = 0; s < 5; ++s) {
    Rng rng(600 + s);
    const SyntheticDataset ds = gen_simplex_highdim(1000, 4, 100, 1.0, SamplingBias::center_biased, rng);
    Rng ref_rng = rng.derive("reference");
    const DataMatrix reference(ds.params.geometry->embed(sample_mixtures(1000, 4, SamplingBias::uniform, ref_rng)));
    AAnetConfig cfg = aanet_k(4, s);
    cfg.sigma = 0.0;
    const AAnetModel model(train(ds.points, cfg));
    Rng gen_rng = rng.derive("generate");
    const GeneratedData g = generate_uniform(model, 1000, gen_rng);
    gen.push_back(mmd(g.points, reference));
    tr.push_back(mmd(ds.points, reference));
    if (gen.back() < tr.back()) ++wins;
  }
  return {wins >= 4, "sigma 0; MMD to uniform reference: generated [" + join(gen) + "] training [" + join(tr) + "]; " +
                         std::to_string(wins) + "/5 (need 4)"};
}

// 7. Dirichlet sampler.
Outcome dirichlet() {
  const std::size_t n = 10000;
  Rng rng(700);
  const SimplexSample s = sample_simplex_uniform(n, 4, rng);
  const double row_err = (s.weights.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double se = std::sqrt(3.0 / 80.0 / static_cast<double>(n));
  const double critical = std::sqrt(-0.5 * std::log(0.01 / 2.0)) / std::sqrt(static_cast<double>(n));
  bool pass = row_err <= 1e-12;
  std::vector<double> z, ks;
  for (Eigen::Index c = 0; c < 4; ++c) {
    std::vector<double> col(s.weights.col(c).data(), s.weights.col(c).data() + n);
    z.push_back((s.weights.col(c).mean() - 0.25) / se);
    std::sort(col.begin(), col.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = 1.0 - std::pow(1.0 - col[i], 3);
      d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    ks.push_back(d);
    pass = pass && std::abs(z.back()) < 3.0 && d < critical;
  }
  return {pass, "max row-sum error " + fmt("%.1e", row_err) + " (bound 1e-12); column z [" + join(z, "%.2f") +
                    "] (bound 3); KS D [" + join(ks, "%.4f") + "] vs critical " + fmt("%.4f", critical)};
}

// Shared by 8 and 11: networks trained at three noise levels on three seeds.
struct NoiseSweep {
  std::vector<double> sigmas{0.0, 0.05, 0.2};
  std::vector<std::vector<double>> distance;   // [sigma][seed]
  std::vector<std::vector<double>> violation;  // [sigma][seed]
};

const NoiseSweep& noise_sweep() {
  static const NoiseSweep sweep = [] {
    NoiseSweep out;
    out.distance.resize(3);
    out.violation.resize(3);
    for (std::uint64_t s = 0; s < 3; ++s) {
      Rng rng(800 + s);
      const SyntheticDataset ds = gen_triangle_on_sphere(2000, 1000.0, rng);
      for (std::size_t i = 0; i < 3; ++i) {
        AAnetConfig c = aanet_k(3, s);
        c.sigma = out.sigmas[i];
        const AAnetNetwork net = train(ds.points, c);
        const Matrix d = pairwise_sq_distances(get_archetypes(net).values(), ds.points.values());
        out.distance[i].push_back(d.rowwise().minCoeff().cwiseSqrt().mean());
        out.violation[i].push_back(hull_violation_fraction(net, ds.points));
      }
    }
    return out;
  }();
  return sweep;
}

// 8. Latent-noise tightness.
Outcome noise_tightness() {
  const NoiseSweep& sw = noise_sweep();
  std::vector<double> med;
  for (const auto& d : sw.distance) med.push_back(median(d));
  const bool pass = med[1] <= med[0] && med[2] <= med[1];
  return {pass, "median archetype-to-nearest-point distance at sigma 0, 0.05, 0.2: [" + join(med, "%.4f") +
                    "] (must be non-increasing)"};
}

// 9. MDS interpolation.
Outcome mds_interpolation() {
  Rng rng(900);
  const SyntheticDataset ds = gen_simplex_highdim(10, 5, 20, 0.0, SamplingBias::uniform, rng);
  const Matrix w = sample_simplex_uniform(15000, 5, rng).weights;
  const auto path = std::filesystem::temp_directory_path() / "archspace_acceptance_viz";
  const auto t0 = Clock::now();
  const VizCoords v = viz_coords(ds.true_archetypes, w, 2);
  save_csv(v.archetype_coords, path.string() + "_archetype_coords.csv", {"x", "y"});
  save_csv(v.point_coords, path.string() + "_point_coords.csv", {"x", "y"});
  const double wall = seconds_since(t0);
  std::filesystem::remove(path.string() + "_archetype_coords.csv");
  std::filesystem::remove(path.string() + "_point_coords.csv");

  Matrix naive = Matrix::Zero(w.rows(), 2);
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index d = 0; d < 2; ++d)
      for (Eigen::Index j = 0; j < w.cols(); ++j) naive(i, d) += w(i, j) * v.archetype_coords(j, d);
  const double diff = (v.point_coords - naive).cwiseAbs().maxCoeff();
  const double blas = (v.point_coords - w * v.archetype_coords).cwiseAbs().maxCoeff();
  return {diff <= 1e-12 && blas <= 1e-12 && wall < 1.0,
          "max |coords - naive W.A| " + fmt("%.1e", diff) + ", vs blocked product " + fmt("%.1e", blas) +
              " (bound 1e-12); 15000-point export " + fmt("%.3f", wall) + " s (bound 1 s)"};
}

// 10. Runtime scaling.
Outcome runtime_scaling() {
  std::vector<double> ta, tp;
  for (std::size_t n : {std::size_t{10000}, std::size_t{100000}}) {
    Rng rng(1000 + n);
    const SyntheticDataset ds = gen_simplex_highdim(n, 10, 100, 0.0, SamplingBias::uniform, rng);
    AAnetConfig c = aanet_k(10, 1);
    c.max_steps = 300;
    c.max_epochs = 100000;
    auto t0 = Clock::now();
    train(ds.points, c);
    ta.push_back(seconds_since(t0));
    PchaConfig p = pcha_k(10, 1);
    p.max_iter = 20;
    p.tol = 1e-300;
    t0 = Clock::now();
    pcha_fit(ds.points, p);
    tp.push_back(seconds_since(t0));
  }
  const double ra = ta[1] / ta[0], rp = tp[1] / tp[0];
  return {ra < 2.0 && rp > 4.0, "n 10k -> 100k: aanet (300 steps) " + fmt("%.2f", ta[0]) + " -> " + fmt("%.2f", ta[1]) +
                                    " s, x" + fmt("%.2f", ra) + " (bound < 2); pcha (20 iterations) " +
                                    fmt("%.2f", tp[0]) + " -> " + fmt("%.2f", tp[1]) + " s, x" + fmt("%.2f", rp) +
                                    " (bound > 4)"};
}

// 11. Oracle equivalence.
struct Checks {
  std::vector<std::string> failed;
  int total = 0;
  void expect(bool ok, const std::string& name) {
    ++total;
    if (!ok) failed.push_back(name);
  }
};

double brute_force_mmd(const Matrix& a, const Matrix& b) {
  const Matrix all = (Matrix(a.rows() + b.rows(), a.cols()) << a, b).finished();
  std::vector<double> d;
  for (Eigen::Index i = 0; i < all.rows(); ++i)
    for (Eigen::Index j = i + 1; j < all.rows(); ++j) d.push_back((all.row(i) - all.row(j)).norm());
  const double med = median(d);
  auto mean_k = [](const Matrix& x, const Matrix& y, double bw) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < y.rows(); ++j)
        s += std::exp(-(x.row(i) - y.row(j)).squaredNorm() / (2.0 * bw * bw));
    return s / static_cast<double>(x.rows() * y.rows());
  };
  double total = 0.0;
  for (double scale : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const double bw = scale * med;
    total += mean_k(a, a, bw) + mean_k(b, b, bw) - 2.0 * mean_k(a, b, bw);
  }
  return total;
}

Outcome oracle_suite() {
  Checks c;

  {  // barycentric solve
    Rng rng(1100);
    Matrix v(4, 3);
    v << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1;
    PchaFactors f;
    f.archetypes = v;
    const Matrix w = sample_simplex_uniform(200, 4, rng).weights;
    const Matrix mix = pcha_transform(f, DataMatrix(w * v));
    Matrix sys(4, 4);
    sys.topRows(3) = v.transpose();
    sys.row(3).setOnes();
    const Eigen::PartialPivLU<Matrix> lu(sys);
    double worst = 0.0;
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      Vector rhs(4);
      rhs << (w.row(r) * v).transpose(), 1.0;
      worst = std::max(worst, (lu.solve(rhs).transpose() - mix.row(r)).cwiseAbs().maxCoeff());
    }
    c.expect(worst < 1e-3, "barycentric solve");
  }
  {  // brute-force MMD
    Rng rng(1101);
    Matrix a(60, 1), b(60, 1), b0(60, 1);
    for (Eigen::Index i = 0; i < 60; ++i) {
      a(i, 0) = rng.normal();
      b(i, 0) = rng.normal(5.0, 1.0);
      b0(i, 0) = rng.normal();
    }
    const double shifted = mmd(DataMatrix(a), DataMatrix(b));
    const double same = mmd(DataMatrix(a), DataMatrix(b0));
    c.expect(std::abs(shifted - brute_force_mmd(a, b)) < 1e-10, "brute-force MMD (shifted)");
    c.expect(std::abs(same - brute_force_mmd(a, b0)) < 1e-10, "brute-force MMD (same mean)");
    c.expect(shifted > same, "MMD ordering");
  }
  {  // percentile counting
    Rng rng(1102);
    Matrix data(300, 6);
    for (Eigen::Index i = 0; i < data.size(); ++i) data.data()[i] = rng.normal();
    bool ok = true;
    for (int trial = 0; trial < 20; ++trial) {
      RowVector p(6);
      for (Eigen::Index f = 0; f < 6; ++f) p(f) = rng.normal();
      const auto ranks = percentile_ranks(data, p);
      for (Eigen::Index f = 0; f < 6; ++f) {
        int count = 0;
        for (Eigen::Index r = 0; r < 300; ++r) count += data(r, f) <= p(f);
        ok = ok && ranks[static_cast<std::size_t>(f)] == 100.0 * count / 300.0;
      }
    }
    c.expect(ok, "percentile counting");
  }
  {  // naive W.A
    Rng rng(1103);
    Matrix arch(4, 7);
    for (Eigen::Index i = 0; i < arch.size(); ++i) arch.data()[i] = rng.normal();
    const Matrix w = sample_simplex_uniform(500, 4, rng).weights;
    const VizCoords v = viz_coords(arch, w, 3);
    Matrix naive = Matrix::Zero(500, 3);
    for (Eigen::Index i = 0; i < 500; ++i)
      for (Eigen::Index d = 0; d < 3; ++d)
        for (Eigen::Index j = 0; j < 4; ++j) naive(i, d) += w(i, j) * v.archetype_coords(j, d);
    c.expect(v.point_coords == naive, "naive W.A");
  }
  {  // mixture_mse naive double loop
    Rng rng(1104);
    Matrix a(40, 3), b(40, 3);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a.data()[i] = rng.uniform();
      b.data()[i] = rng.uniform();
    }
    double s = 0.0;
    for (Eigen::Index r = 0; r < 40; ++r)
      for (Eigen::Index k = 0; k < 3; ++k) s += (a(r, k) - b(r, k)) * (a(r, k) - b(r, k));
    c.expect(std::abs(mixture_mse(a, b, {0, 1, 2}) - s / 120.0) < 1e-15, "mixture MSE naive loop");
  }
  {  // PCA explained variance via covariance eigensolve
    Rng rng(1105);
    Matrix x(100, 3);
    for (Eigen::Index r = 0; r < 100; ++r) x.row(r) << 2.0 * rng.normal(), rng.normal(), 0.1 * rng.normal();
    const auto [reduced, rec] = pca_reduce(DataMatrix(x), 2);
    const Matrix centered = x.rowwise() - x.colwise().mean();
    const Eigen::SelfAdjointEigenSolver<Matrix> es(centered.transpose() * centered / 99.0);
    const double frac = es.eigenvalues().tail(2).sum() / es.eigenvalues().sum();
    c.expect(std::abs(rec.explained_fraction() - frac) < 1e-10, "PCA covariance eigensolve");
  }
  {  // triangle projection recomputation
    Rng rng(1106);
    const SyntheticDataset ds = gen_triangle_on_sphere(500, 0.75, rng);
    const Matrix planar = ds.true_mixtures * canonical_triangle();
    double worst = 0.0;
    for (Eigen::Index r = 0; r < planar.rows(); ++r) {
      const double px = planar(r, 0), py = planar(r, 1);
      const double norm = std::sqrt(px * px + py * py + 0.75 * 0.75);
      const double ex = 0.75 * px / norm, ey = 0.75 * py / norm, ez = 0.75 - 0.75 * 0.75 / norm;
      worst = std::max({worst, std::abs(ds.points(r, 0) - ex), std::abs(ds.points(r, 1) - ey),
                        std::abs(ds.points(r, 2) - ez)});
    }
    c.expect(worst < 1e-12, "sphere projection recomputation");
  }
  {  // distances naive loop
    Rng rng(1107);
    const SyntheticDataset ds = gen_simplex_highdim(100, 3, 4, 0.0, SamplingBias::uniform, rng);
    const PchaModel model(pcha_fit(ds.points, pcha_k(3, 0)));
    const Matrix mix = model.encode(ds.points);
    const auto d = distance_to_archetype(model, ds.points, 2);
    double worst = 0.0;
    for (Eigen::Index r = 0; r < 100; ++r) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < 3; ++j) s += std::pow(mix(r, j) - (j == 2), 2);
      worst = std::max(worst, std::abs(d[static_cast<std::size_t>(r)] - std::sqrt(s)));
    }
    c.expect(worst < 1e-12, "distance naive loop");
  }
  {  // trained triangle model consistency
    Rng rng(1108);
    const SyntheticDataset ds = gen_triangle_on_sphere(2000, 1000.0, rng);
    const AAnetNetwork net = train(ds.points, aanet_k(3, 0));
    const Matrix arch = get_archetypes(net).values();
    const Matrix round = encode(net, DataMatrix(arch));
    c.expect((round - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.05, "one-hot round trip");
    bool mids = true, sides = true;
    const double side = std::sqrt(3.0);
    for (Eigen::Index i = 0; i < 3; ++i)
      for (Eigen::Index j = i + 1; j < 3; ++j) {
        Matrix mid = Matrix::Zero(1, 3);
        mid(0, i) = mid(0, j) = 0.5;
        const Matrix back = encode(net, decode(net, mid));
        mids = mids && (back - mid).cwiseAbs().maxCoeff() < 0.1;
        sides = sides && std::abs((arch.row(i) - arch.row(j)).norm() - side) < 0.1 * side;
      }
    c.expect(mids, "midpoint round trip");
    c.expect(sides, "archetype side lengths");

    const AAnetNetwork plain = train_plain_ae(ds.points, aanet_k(3, 0));
    c.expect(converged_loss(plain, ds.points).reconstruction <= 1.05 * converged_loss(net, ds.points).reconstruction,
             "plain autoencoder reconstruction");
  }
  {  // PCHA on an identity-like autoencoder
    Rng rng(1109);
    Matrix tri(3, 2);
    tri << 0.0, 1.0, -0.8660254037844386, -0.5, 0.8660254037844386, -0.5;
    const DataMatrix x(sample_mixtures(1000, 3, SamplingBias::uniform, rng) * tri);
    AAnetConfig cfg = aanet_k(3, 0);
    cfg.sigma = 0.0;
    const AAnetNetwork ae = train_plain_ae(x, cfg);
    const PchaOnAeResult r = pcha_on_ae(x, ae, pcha_k(3, 0));
    const PchaFactors direct = pcha_fit(x, pcha_k(3, 0));
    c.expect(match_archetypes(r.archetypes, direct.archetypes).mse < 0.05, "pcha on autoencoder");
  }
  {  // hull violation trend
    const NoiseSweep& sw = noise_sweep();
    std::vector<double> med;
    for (const auto& v : sw.violation) med.push_back(median(v));
    c.expect(med[1] <= med[0] && med[2] <= med[1], "hull violation trend [" + join(med) + "]");
  }

  std::string detail = std::to_string(c.total - static_cast<int>(c.failed.size())) + "/" + std::to_string(c.total) +
                       " oracle checks";
  if (!c.failed.empty()) {
    detail += "; failed:";
    for (const auto& f : c.failed) detail += " " + f + ";";
  }
  return {c.failed.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"archspace acceptance suite"};
  std::vector<int> only;
  app.add_option("criteria", only, "Run only these criteria (default: all)");
  CLI11_PARSE(app, argc, argv);

  set_warnings_enabled(false);
  const std::vector<Criterion> criteria{
      {1, "flat regime recovery", flat_regime},
      {2, "curved regime ordering", curved_regime},
      {3, "gradient oracle", gradient_oracle},
      {4, "elbow knee", elbow},
      {5, "reproducibility", reproducibility},
      {6, "geometry generation", geometry_generation},
      {7, "dirichlet sampler", dirichlet},
      {8, "latent noise tightness", noise_tightness},
      {9, "mds interpolation", mds_interpolation},
      {10, "runtime scaling", runtime_scaling},
      {11, "oracle equivalence", oracle_suite},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail << " ["
              << fmt("%.1f", seconds_since(t0)) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
