#pragma once

#include "skewmix/model_state.hpp"
#include "skewmix/random.hpp"

#include <vector>

namespace skewmix {

// Median-anchored asymmetric contraction: within each (sample, cluster) and
// coordinate, points below the median move toward it by factor_low, points
// above by factor_high.
struct Distortion {
  bool enabled = false;
  double factor_low = 0.5;
  double factor_high = 0.9;
};

struct SimSpec {
  int J = 0;
  int p = 0;
  int K_true = 0;
  Mat weights_true;             // J x K_true
  Mat xi0_true;                 // K_true x p
  std::vector<Mat> E_true;      // K_true entries
  std::vector<Mat> Sigma_true;  // K_true entries
  Mat alpha_true;               // K_true x p
  std::vector<int> n_j;         // J entries
  Distortion distortion;

  void validate() const;

  // Three bivariate skew-normal clusters observed in three samples of
  // `n_per_sample` points each.
  static SimSpec replica(int n_per_sample = 1000, bool distorted = false);
};

struct SimResult {
  Dataset data;
  std::vector<int> labels;  // 0-based true cluster of each observation
  std::vector<Mat> xi;      // K_true entries, each J x p
  Mat xi0;                  // K_true x p
};

// Draws xi_{j,k} ~ N(xi0_k, E_k), labels from each sample's weights and
// observations from SN(xi_{j,k}, Sigma_k, alpha_k). Applies the SimSpec's
// distortion when enabled.
SimResult generate(const SimSpec& spec, Rng& rng);

Dataset distort(const Dataset& data, const std::vector<int>& labels, const Distortion& d);

}  // namespace skewmix
