#pragma once

#include "skewmix/conditionals.hpp"
#include "skewmix/model_state.hpp"
#include "skewmix/random.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace skewmix {

struct SamplerConfig {
  int n_iter = 2000;        // total sweeps, burn-in included
  int n_burn = 1000;
  int thin = 1;
  std::uint64_t seed = 1;
  double mh_adapt_target = 0.35;
  int merge_check_every = 10;
  int workers = 1;
  bool check_invariants = false;  // validate ChainState after every sweep

  void validate() const;
};

// Proposal-tuning state of the Metropolis-Hastings update for eta. The
// proposal is Gamma(eta^2 a0, eta a0): mean eta, variance eta / a0.
struct EtaAdaptation {
  double log_a0 = 0.0;
  long proposed = 0;
  long accepted = 0;
  long window_proposed = 0;
  long window_accepted = 0;

  double a0() const;
  double acceptance_rate() const;
};

// Log-density of the eta target: Gamma(a_eta, b_eta) prior times the
// symmetric Dirichlet(eta / K) density of every weight row.
double eta_log_target(double eta, const Mat& log_weights, const Hyper& hyper,
                      bool include_likelihood = true);

// Log acceptance ratio of moving eta to `proposal` under the Gamma proposal
// with tuning a0, Hastings correction included.
double eta_acceptance_log_ratio(double eta, double proposal, const Mat& log_weights,
                                const Hyper& hyper, double a0, bool include_likelihood = true);

// One MH step for eta. When `adapt` is set, log a0 moves by Robbins-Monro
// toward the acceptance target.
double update_eta(double eta, const Mat& log_weights, const Hyper& hyper, Rng& rng,
                  EtaAdaptation& adaptation, bool adapt, double target_rate,
                  bool include_likelihood = true);

// Draws each sample's weight row from Dirichlet(zeta n_jk + eta / K).
Mat update_weights(const Eigen::MatrixXi& counts, double eta, const Hyper& hyper, Rng& rng);

// Log assignment probabilities (unnormalized) of observation i over all K
// clusters, from the state's cluster summaries.
std::vector<double> assignment_log_probs(const ChainState& state, const Dataset& data, int i);

// Draws every T_i from its categorical conditional. Observation i uses the
// stream (seed, iteration, i), so the result does not depend on `workers`.
void update_T(ChainState& state, const Dataset& data, std::uint64_t seed, std::uint64_t iteration,
              int workers);

// Draws the cloud's |z| particles for the current members; returns per-particle
// log proposal densities.
Vec update_z_particles(ParticleCloud& cloud, const ClusterView& view, double zeta, Rng& rng);

// Multinomial resampling: M indices drawn with probabilities exp(log_weights).
std::vector<int> resample_indices(Rng& rng, const Vec& log_weights, int count);

struct ClusterSummary {
  Mat xi;   // J x p
  Vec xi0;
  Mat G;
  Vec psi;
  Mat E;
  Vec z;    // mean |z| of each member
  int distinct_resampled = 0;
  bool single_valid_particle = false;
};

// Log target of one particle (power likelihood, half-normal z density and all
// block priors including the skew prior and Jacobian).
double particle_log_target(const ClusterView& view, const Mat& xi, const Vec& xi0, const Mat& g,
                           const Vec& psi, const Mat& e, const Eigen::Ref<const Vec>& absz,
                           const Hyper& hyper);

// One PMC sweep of a non-empty cluster: z, then xi / G / psi / xi0 / E in a
// random order, importance weights, multinomial resampling, particle means.
// Throws DegenerateCloud when every weight is zero.
ClusterSummary pmc_sweep_cluster(ParticleCloud& cloud, const ClusterView& view, const Hyper& hyper,
                                 int cluster, Rng& rng);

// Redraws every particle of an empty cluster from the priors. The summary is
// the first particle, which is itself a prior draw.
ClusterSummary refresh_from_prior(ParticleCloud& cloud, int J, const Hyper& hyper, Rng& rng);

// Refreshes every cluster with no members from the priors. Returns the number
// of clusters refreshed.
int update_empty_clusters(ChainState& state, std::vector<ParticleCloud>& clouds, const Dataset& data,
                          const Hyper& hyper, std::uint64_t seed, std::uint64_t iteration,
                          int workers = 1);

// Symmetrized KL between the moment-matched Gaussians of two clusters.
double cluster_symmetric_kl(const ChainState& state, int a, int b);
double gaussian_symmetric_kl(const Vec& mean_a, const Mat& cov_a, const Vec& mean_b,
                             const Mat& cov_b);

// Merges every connected component of the "KL <= threshold" graph over
// non-empty clusters into its member with the largest count. Returns the
// number of clusters absorbed.
int merge_clusters(ChainState& state, const Dataset& data, const Hyper& hyper);

struct ProgressRecord {
  int iteration = 0;
  double power_loglik = 0.0;
  int active_clusters = 0;
  double mh_acceptance = 0.0;
};

struct Chain {
  std::vector<ChainState> snapshots;
  std::vector<int> iterations;      // 1-based sweep index of each snapshot
  std::vector<ProgressRecord> progress;
  std::vector<std::string> warnings;
  long merges = 0;
};

using ProgressCallback = std::function<void(const ProgressRecord&)>;

class Sampler {
 public:
  Sampler(const Dataset& data, Hyper hyper, SamplerConfig config);

  // One full sweep: eta, weights, per-cluster z / PMC, T, merge.
  void sweep();
  Chain run(const ProgressCallback& progress = {});

  const ChainState& state() const { return state_; }
  const std::vector<ParticleCloud>& clouds() const { return clouds_; }
  const EtaAdaptation& eta_adaptation() const { return adapt_; }
  int iteration() const { return iteration_; }
  const Hyper& hyper() const { return hyper_; }
  // Disables the Dirichlet term in the eta target (prior-recovery checks).
  void set_eta_likelihood(bool on) { eta_likelihood_ = on; }

 private:
  void update_clusters();
  bool merge_due() const;

  const Dataset& data_;
  Hyper hyper_;
  SamplerConfig config_;
  ChainState state_;
  std::vector<ParticleCloud> clouds_;
  EtaAdaptation adapt_;
  int iteration_ = 0;
  bool eta_likelihood_ = true;
  long merges_ = 0;
  std::vector<std::string> warnings_;
};

// Convenience wrapper: construct, run, return the stored snapshots.
Chain run(const Dataset& data, const Hyper& hyper, const SamplerConfig& config,
          const ProgressCallback& progress = {});

// Default worker count: SKEWMIX_WORKERS if set and positive, else 1.
int default_workers();

}  // namespace skewmix
