#pragma once

#include "skewmix/diagnostics.hpp"
#include "skewmix/model_state.hpp"
#include "skewmix/sampler.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace skewmix {

// Everything that determines a run. Hyperparameters left unset take their
// data-scaled defaults (Hyper::defaults_for).
struct RunConfig {
  std::string input;
  std::string out;

  int K = 150;
  double zeta = 0.2;
  double a_eta = 1.0;
  double b_eta = 1.0;
  double merge_threshold = 0.25;
  int particles = 20;
  std::optional<Vec> b0;
  std::optional<Mat> B0;
  std::optional<double> m;
  std::optional<Mat> Lambda;
  std::optional<double> nu0;
  std::optional<Mat> E0;

  int iters = 2000;
  int burn = 1000;
  int thin = 1;
  std::uint64_t seed = 1;
  double mh_adapt_target = 0.35;
  int merge_check_every = 10;
  int workers = 0;  // 0: default_workers()
  bool check_invariants = false;

  bool write_chain = true;
  int marginal_bins = 50;     // 0 disables marginals.csv
  double min_weight = 0.01;   // share cutoff of the second active-cluster count

  std::vector<double> zetas;  // sweep mode when non-empty

  Hyper resolve_hyper(const Dataset& data) const;
  SamplerConfig sampler_config() const;
  void validate() const;
};

// Accepts either a bare config object or a run manifest (uses its "config").
// Unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_config(const std::string& path);

struct RunSummary {
  std::vector<int> labels;
  std::vector<int> active;             // min_weight 0
  std::vector<int> active_min_weight;  // config min_weight
  double alignment = 0.0;
  long merges = 0;
  std::vector<std::string> warnings;
};

// Ingest, fit, relabel, classify, calibrate and write chain.bin, labels.csv,
// calibrated.csv, diagnostics.csv, marginals.csv, progress.log and
// run_manifest.json into config.out. On failure a FAILED file holding the
// message is written and the exception is rethrown.
RunSummary run_pipeline(const RunConfig& config, const ProgressCallback& progress = {});

// One run_pipeline per config.zetas entry in out/zeta_<z>/, plus out/sweep.csv.
std::vector<SweepRow> run_sweep(const RunConfig& config, const ProgressCallback& progress = {});

}  // namespace skewmix
