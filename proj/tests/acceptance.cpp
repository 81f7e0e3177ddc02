// Acceptance checks 1-8. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Criteria 4, 5 and 7 run the matching oracle test
// cases (linked in from the unit suites) through doctest.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "skewmix/diagnostics.hpp"
#include "skewmix/pipeline.hpp"
#include "skewmix/run_config.hpp"
#include "skewmix/simulate.hpp"
#include "skewmix/tabular.hpp"
#include "stats.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

using namespace skewmix;
namespace fs = std::filesystem;

namespace {

// Chosen before any acceptance run.
constexpr std::uint64_t kDataSeed = 7;
constexpr std::uint64_t kSamplerSeed = 3;
constexpr int kIters = 2000;
constexpr int kBurn = 1000;

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

int run_oracles(const char* filter) {
  doctest::Context ctx;
  ctx.setOption("test-case", filter);
  ctx.setOption("no-intro", true);
  ctx.setOption("no-version", true);
  return ctx.run();
}

int workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 8u));
}

struct Fit {
  FitResult result;
  double seconds = 0.0;
};

Fit fit(const Dataset& data, double zeta) {
  Hyper h = Hyper::defaults_for(data);
  h.K = 150;
  h.M = 20;
  h.zeta = zeta;
  SamplerConfig c;
  c.n_iter = kIters;
  c.n_burn = kBurn;
  c.seed = kSamplerSeed;
  c.workers = workers();
  const auto t0 = std::chrono::steady_clock::now();
  Fit f{fit_and_calibrate(data, h, c), 0.0};
  f.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("  fit zeta=%g: %.1f s, active %s, merges %ld\n", zeta, f.seconds,
              join(active_clusters(data, f.result.labels, 0.01)).c_str(), f.result.chain.merges);
  std::fflush(stdout);
  return f;
}

// Estimated label -> true label by majority over its members.
std::vector<int> map_to_truth(const std::vector<int>& est, const std::vector<int>& truth) {
  std::map<int, std::map<int, int>> votes;
  for (std::size_t i = 0; i < est.size(); ++i) ++votes[est[i]][truth[i]];
  std::map<int, int> best;
  for (const auto& [e, row] : votes) {
    int arg = -1, top = -1;
    for (const auto& [t, c] : row) {
      if (c > top) top = c, arg = t;
    }
    best[e] = arg;
  }
  std::vector<int> out;
  for (int e : est) out.push_back(best[e]);
  return out;
}

void criteria_1_to_3() {
  const SimSpec ideal_spec = SimSpec::replica(1000, false);
  Rng rng_ideal(kDataSeed);
  const SimResult ideal = generate(ideal_spec, rng_ideal);
  const SimSpec dist_spec = SimSpec::replica(1000, true);
  Rng rng_dist(kDataSeed);
  const SimResult distorted = generate(dist_spec, rng_dist);

  const Fit i02 = fit(ideal.data, 0.2);
  const Fit i1 = fit(ideal.data, 1.0);
  const double ari02 = adjusted_rand_index(i02.result.labels, ideal.labels);
  const double ari1 = adjusted_rand_index(i1.result.labels, ideal.labels);
  const auto act02 = active_clusters(ideal.data, i02.result.labels, 0.01);
  const bool three = std::all_of(act02.begin(), act02.end(), [](int a) { return a == 3; });
  const double slowest = std::max(i02.seconds, i1.seconds);
  report(1, ari02 >= 0.9 && ari1 >= 0.9 && three && slowest <= 900.0,
         "ARI(zeta=0.2)=" + fmt("%.4f", ari02) + " ARI(zeta=1)=" + fmt("%.4f", ari1) + " active(zeta=0.2)=" +
             join(act02) + " slowest run " + fmt("%.0f", slowest) + " s");

  const Fit d02 = fit(distorted.data, 0.2);
  const Fit d1 = fit(distorted.data, 1.0);
  const auto dact02 = active_clusters(distorted.data, d02.result.labels, 0.01);
  const auto dact1 = active_clusters(distorted.data, d1.result.labels, 0.01);
  bool more = false;
  for (std::size_t j = 0; j < dact1.size(); ++j) more = more || dact1[j] > dact02[j];
  const bool dthree = std::all_of(dact02.begin(), dact02.end(), [](int a) { return a == 3; });
  report(2, dthree && more, "active(zeta=0.2)=" + join(dact02) + " active(zeta=1)=" + join(dact1));

  // Criterion 3 on the zeta = 0.2 ideal fit.
  const Dataset& d = ideal.data;
  const double align = alignment_score(d, i02.result.calibrated.y_tilde, i02.result.labels);
  const RowMat centered = d.y.rowwise() - d.y.colwise().mean();
  const double pooled_sd = std::sqrt((centered.array().square().sum()) / (d.n() - 1));
  const auto mapped = map_to_truth(i02.result.labels, ideal.labels);
  int correct = 0, within = 0;
  double worst = 0.0, worst_centered = 0.0;
  for (int i = 0; i < d.n(); ++i) {
    const int k = ideal.labels[static_cast<std::size_t>(i)];
    if (mapped[static_cast<std::size_t>(i)] != k) continue;
    ++correct;
    const int j = d.sample_of[static_cast<std::size_t>(i)];
    const Vec oracle = (ideal.xi[static_cast<std::size_t>(k)].row(j) - ideal.xi0.row(k)).transpose();
    const Vec shift = i02.result.calibrated.shift.row(i).transpose();
    const double err = (shift - oracle).norm();
    worst = std::max(worst, err);
    within += err <= 0.15 * pooled_sd;
    // Same comparison against the sample-average location, which is what the
    // data can identify.
    const Vec xbar = ideal.xi[static_cast<std::size_t>(k)].colwise().mean().transpose();
    const Vec oracle_c = (ideal.xi[static_cast<std::size_t>(k)].row(j).transpose() - xbar);
    worst_centered = std::max(worst_centered, (shift - oracle_c).norm());
  }
  report(3, align < 0.2 && within == correct && correct > 0,
         "alignment=" + fmt("%.4f", align) + " shifts within 0.15 pooled SD (" + fmt("%.3f", 0.15 * pooled_sd) +
             "): " + std::to_string(within) + "/" + std::to_string(correct) + " max error " + fmt("%.3f", worst) +
             " (vs sample-average location: " + fmt("%.3f", worst_centered) + ")");
}

void criterion_6() {
  Hyper h;
  h.K = 5;
  h.M = 20;
  h.zeta = 1.0;
  h.a_eta = 2.0;
  h.b_eta = 1.0;
  h.b0 = (Vec(2) << 1.0, -2.0).finished();
  h.B0 = (Mat(2, 2) << 4.0, 1.0, 1.0, 2.0).finished();
  h.m = 5.0;
  h.Lambda = Mat::Identity(2, 2);
  h.nu0 = 5.0;
  h.E0 = Mat::Identity(2, 2);
  const Dataset empty = Dataset::empty(2, 2);
  SamplerConfig c;
  c.n_burn = 2000;
  c.thin = 50;
  c.n_iter = c.n_burn + 10000 * c.thin;
  c.seed = 61;
  const Chain chain = run(empty, h, c);

  std::vector<double> eta, x0, x1;
  for (const auto& s : chain.snapshots) {
    eta.push_back(s.eta);
    x0.push_back(s.xi0(0, 0));
    x1.push_back(s.xi0(0, 1));
  }
  using namespace testing_stats;
  const double p_eta = ks_pvalue(ks_statistic(eta, [&](double x) { return gamma_p(h.a_eta, h.b_eta * x); }), eta.size());
  const double p_x0 = ks_pvalue(
      ks_statistic(x0, [&](double x) { return std_normal_cdf((x - h.b0[0]) / std::sqrt(h.B0(0, 0))); }), x0.size());
  const double p_x1 = ks_pvalue(
      ks_statistic(x1, [&](double x) { return std_normal_cdf((x - h.b0[1]) / std::sqrt(h.B0(1, 1))); }), x1.size());
  report(6, p_eta > 0.01 && p_x0 > 0.01 && p_x1 > 0.01,
         std::to_string(eta.size()) + " draws, KS p: eta=" + fmt("%.3f", p_eta) + " xi0[0]=" + fmt("%.3f", p_x0) +
             " xi0[1]=" + fmt("%.3f", p_x1));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void criterion_8() {
  const fs::path dir = fs::temp_directory_path() / "skewmix_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir);
  Rng rng(kDataSeed);
  write_dataset_csv((dir / "in.csv").string(), generate(SimSpec::replica(300), rng).data);
  RunConfig c;
  c.input = (dir / "in.csv").string();
  c.K = 30;
  c.iters = 200;
  c.burn = 100;
  c.seed = kSamplerSeed;
  c.write_chain = false;
  const int counts[] = {1, 1, 3};
  std::vector<std::string> labels, calibrated;
  for (int r = 0; r < 3; ++r) {
    c.out = (dir / ("run" + std::to_string(r))).string();
    c.workers = counts[r];
    run_pipeline(c);
    labels.push_back(slurp(fs::path(c.out) / "labels.csv"));
    calibrated.push_back(slurp(fs::path(c.out) / "calibrated.csv"));
  }
  const bool same = labels[0] == labels[1] && labels[0] == labels[2] && calibrated[0] == calibrated[1] &&
                    calibrated[0] == calibrated[2] && !labels[0].empty();
  report(8, same, "labels.csv and calibrated.csv identical over 2 runs at 1 worker and 1 run at 3 workers");
  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  for (int i = 1; i < argc; ++i) quick = quick || std::string(argv[i]) == "--skip-fits";

  report(4, run_oracles("parametrization round trip*,sample mean matches*,alpha = 0 density*,1-d density integrates*") == 0,
         "round trip, sample mean, alpha = 0, 1-d integral");
  report(5, run_oracles("update_T probabilities*,z particles follow*,zeta = 1 conditionals*") == 0,
         "update_T vs brute force, z histogram vs grid, zeta = 1 conditionals");
  report(7, run_oracles("matching equals exhaustive*,calibrate: shifts and bitwise*") == 0,
         "Hungarian vs exhaustive search, calibrate permutation invariance");
  try {
    criterion_6();
  } catch (const std::exception& e) {
    report(6, false, e.what());
  }
  try {
    criterion_8();
  } catch (const std::exception& e) {
    report(8, false, e.what());
  }
  if (!quick) {
    try {
      criteria_1_to_3();
    } catch (const std::exception& e) {
      report(1, false, e.what());
    }
  }
  std::printf("%s\n", failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED");
  return failures == 0 ? 0 : 1;
}
