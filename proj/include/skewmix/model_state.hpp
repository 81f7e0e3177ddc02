#pragma once

#include "skewmix/linalg.hpp"
#include "skewmix/random.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace skewmix {

// n observations in p dimensions, each tagged with a 0-based sample index.
struct Dataset {
  RowMat y;                    // n x p
  std::vector<int> sample_of;  // n entries in [0, J)
  int num_samples = 0;         // J
  std::vector<std::string> sample_names;
  std::vector<std::string> marker_names;

  int n() const { return static_cast<int>(y.rows()); }
  int p() const { return static_cast<int>(y.cols()); }
  int J() const { return num_samples; }
  std::vector<int> sample_counts() const;

  // Throws InvalidParameter unless sum_j n_j = n, every sample occurs at least
  // once (when n > 0) and every entry is finite.
  void validate() const;

  static Dataset make(RowMat y, std::vector<int> sample_of, int num_samples);
  // A dataset with no observations; used for prior-only runs.
  static Dataset empty(int p, int num_samples);
};

// Fixed hyperparameters and coarsening level.
struct Hyper {
  int K = 150;             // truncation level
  double zeta = 0.2;       // coarsening exponent in (0, 1]
  double a_eta = 1.0;      // Gamma shape for eta
  double b_eta = 1.0;      // Gamma rate for eta
  Vec b0;                  // prior mean of grand locations
  Mat B0;                  // prior covariance of grand locations
  double m = 0.0;          // inverse-Wishart dof for Sigma_k
  Mat Lambda;              // inverse-Wishart scale for Sigma_k
  double nu0 = 0.0;        // inverse-Wishart dof for E_k
  Mat E0;                  // inverse-Wishart scale for E_k
  double merge_threshold = 0.25;  // symmetrized KL below which clusters merge
  int M = 20;              // particles per cluster

  // Data-scaled defaults: b0 = pooled mean, B0 = 100 cov, m = nu0 = p + 2,
  // Lambda = cov (m - p - 1), E0 = 0.1 cov.
  static Hyper defaults_for(const Dataset& data);
  void validate(int p) const;
};

// Complete latent state of one sampler iteration. Cluster parameters are the
// particle-cloud summaries in the augmented (xi, G, psi) parametrization.
struct ChainState {
  Mat log_weights;          // J x K, each row log-normalized
  std::vector<int> T;       // n assignments in [0, K)
  std::vector<Mat> xi;      // K entries, each J x p (sample-specific locations)
  Mat xi0;                  // K x p grand locations
  std::vector<Mat> G;       // K entries, p x p
  Mat psi;                  // K x p
  std::vector<Mat> E;       // K entries, p x p
  double eta = 1.0;
  Vec z;                    // n, mean |z| over particles

  int K() const { return static_cast<int>(xi0.rows()); }
  int p() const { return static_cast<int>(xi0.cols()); }
  int J() const { return static_cast<int>(log_weights.rows()); }
  int n() const { return static_cast<int>(T.size()); }

  Mat weights() const;
  // n_{j,k} as a J x K table.
  Eigen::MatrixXi counts(const Dataset& data) const;

  // Old label b becomes new_label[b]; every cluster-indexed field moves with
  // its label. new_label must be a permutation of [0, K).
  void relabel(const std::vector<int>& new_label);
};

// Throws InvalidParameter if a ChainState invariant fails: weight rows on the
// simplex (1e-12), G_k and E_k symmetric PD, labels in range.
void check_invariants(const ChainState& state);

// M particles for one cluster's skew-normal block.
struct ParticleCloud {
  std::vector<Mat> xi;  // M entries, J x p
  Mat xi0;              // M x p
  std::vector<Mat> G;   // M entries
  Mat psi;              // M x p
  std::vector<Mat> E;   // M entries
  Mat z;                // M x n_k, |z| for the cluster's current members
  Vec log_weights;      // M normalized log importance weights

  int size() const { return static_cast<int>(xi0.rows()); }
};

struct InitialState {
  ChainState state;
  std::vector<ParticleCloud> clouds;  // one per cluster
  bool fewer_points_than_clusters = false;
};

// Deterministic in `seed`: k-means++ seeding of K centers on the pooled data,
// nearest-center assignment, G_k = pooled covariance, psi_k = 0,
// E_k = E0 / (nu0 - p - 1) (or E0 when undefined), uniform weights,
// eta = a_eta / b_eta, half-normal z.
InitialState init_state(const Dataset& data, const Hyper& hyper, std::uint64_t seed);

// zeta times the mixture log-likelihood of the data with T marginalized.
double power_loglik(const ChainState& state, const Dataset& data, const Hyper& hyper);

}  // namespace skewmix
