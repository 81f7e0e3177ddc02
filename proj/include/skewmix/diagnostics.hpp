#pragma once

#include "skewmix/model_state.hpp"
#include "skewmix/sampler.hpp"

#include <string>
#include <vector>

namespace skewmix {

// Per sample, the number of labels whose share of that sample's observations
// exceeds min_weight.
std::vector<int> active_clusters(const Dataset& data, const std::vector<int>& labels,
                                 double min_weight = 0.0);

bool constant_count(const std::vector<int>& counts);

// Mean over clusters of the mean over samples of ||sample-cluster mean -
// cluster mean||, on `calibrated` divided by the same on data.y. Absent
// (sample, cluster) pairs are skipped. Returns 1 when both are zero.
double alignment_score(const Dataset& data, const RowMat& calibrated, const std::vector<int>& labels);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

// Shared-edge histograms per marker; the range is the pooled min / max.
struct MarginalTable {
  int bins = 0;
  std::vector<Vec> edges;                  // per marker, bins + 1 entries
  std::vector<std::vector<Vec>> density;   // [marker][sample], bins entries
};

MarginalTable marginal_export(const RowMat& y, const std::vector<int>& sample_of, int J, int bins);

struct SweepRow {
  double zeta = 0.0;
  std::vector<int> active;  // per sample, at the sweep's min_weight
  double alignment = 0.0;
  bool constant_count = false;
  std::string error;        // non-empty when the run failed
};

// Runs the full pipeline once per zeta. A failing run is recorded in its row
// and the sweep continues.
std::vector<SweepRow> zeta_sweep(const Dataset& data, const Hyper& hyper_template,
                                 const std::vector<double>& zetas, const SamplerConfig& config,
                                 double min_weight = 0.0);

}  // namespace skewmix
