#include "skewmix/sampler.hpp"

#include "skewmix/error.hpp"
#include "skewmix/parallel.hpp"
#include "skewmix/sn_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>

namespace skewmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Floor applied to log weights inside the eta target; merged-away clusters
// carry weight exactly zero.
constexpr double kMinLogWeight = -745.0;

enum StreamTag : std::uint64_t {
  kTagEta = 1,
  kTagWeights = 2,
  kTagCluster = 3,
  kTagAssign = 4,
};

double log_gamma_pdf(double x, double shape, double rate) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

}  // namespace

void SamplerConfig::validate() const {
  if (n_iter < 1) throw InvalidParameter("n_iter must be positive");
  if (n_burn < 0 || n_burn >= n_iter) throw InvalidParameter("n_burn must satisfy 0 <= n_burn < n_iter");
  if (thin < 1) throw InvalidParameter("thin must be >= 1");
  if (merge_check_every < 1) throw InvalidParameter("merge_check_every must be >= 1");
  if (!(mh_adapt_target > 0.0 && mh_adapt_target < 1.0)) {
    throw InvalidParameter("mh_adapt_target must lie in (0, 1)");
  }
  if (workers < 1) throw InvalidParameter("workers must be >= 1");
}

double EtaAdaptation::a0() const { return std::exp(log_a0); }

double EtaAdaptation::acceptance_rate() const {
  return proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
}

// ---------------------------------------------------------------------------
// eta and weights

double eta_log_target(double eta, const Mat& log_weights, const Hyper& hyper,
                      bool include_likelihood) {
  if (!(eta > 0.0)) return kNegInf;
  double lp = log_gamma_pdf(eta, hyper.a_eta, hyper.b_eta);
  if (!include_likelihood) return lp;
  const double K = static_cast<double>(log_weights.cols());
  const double a = eta / K;
  const double norm = std::lgamma(eta) - K * std::lgamma(a);
  for (Eigen::Index j = 0; j < log_weights.rows(); ++j) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < log_weights.cols(); ++k) {
      s += std::max(log_weights(j, k), kMinLogWeight);
    }
    lp += norm + (a - 1.0) * s;
  }
  return lp;
}

double eta_acceptance_log_ratio(double eta, double proposal, const Mat& log_weights,
                                const Hyper& hyper, double a0, bool include_likelihood) {
  if (proposal == eta) return 0.0;
  return eta_log_target(proposal, log_weights, hyper, include_likelihood) -
         eta_log_target(eta, log_weights, hyper, include_likelihood) +
         log_gamma_pdf(eta, proposal * proposal * a0, proposal * a0) -
         log_gamma_pdf(proposal, eta * eta * a0, eta * a0);
}

double update_eta(double eta, const Mat& log_weights, const Hyper& hyper, Rng& rng,
                  EtaAdaptation& adaptation, bool adapt, double target_rate,
                  bool include_likelihood) {
  const double a0 = adaptation.a0();
  const double proposal = rng.gamma(eta * eta * a0, eta * a0);
  const double log_ratio =
      eta_acceptance_log_ratio(eta, proposal, log_weights, hyper, a0, include_likelihood);
  const bool accept = std::isfinite(proposal) && proposal > 0.0 &&
                      std::log(rng.uniform_pos()) < log_ratio;
  ++adaptation.proposed;
  ++adaptation.window_proposed;
  if (accept) {
    ++adaptation.accepted;
    ++adaptation.window_accepted;
  }
  if (adapt) {
    // A high acceptance rate widens the proposal by lowering a0.
    const double step = 1.0 / std::pow(static_cast<double>(adaptation.proposed) + 1.0, 0.6);
    adaptation.log_a0 -= step * ((accept ? 1.0 : 0.0) - target_rate);
    adaptation.log_a0 = std::clamp(adaptation.log_a0, -20.0, 20.0);
  }
  return accept ? proposal : eta;
}

Mat update_weights(const Eigen::MatrixXi& counts, double eta, const Hyper& hyper, Rng& rng) {
  Mat lw(counts.rows(), counts.cols());
  for (Eigen::Index j = 0; j < counts.rows(); ++j) {
    const Eigen::VectorXi row = counts.row(j).transpose();
    const auto alpha = weight_dirichlet_params(row, eta, hyper.zeta);
    lw.row(j) = sample_log_dirichlet(rng, alpha).transpose();
  }
  return lw;
}

// ---------------------------------------------------------------------------
// assignments

namespace {

struct AssignmentModel {
  std::vector<SnEvaluator> eval;
  std::vector<double> xi;  // [k][j][c] contiguous
  int J = 0;
  int p = 0;

  AssignmentModel(const ChainState& s) : J(s.J()), p(s.p()) {
    const int K = s.K();
    eval.reserve(static_cast<std::size_t>(K));
    xi.resize(static_cast<std::size_t>(K * J * p));
    for (int k = 0; k < K; ++k) {
      eval.emplace_back(SnParamsAugmented{s.xi0.row(k).transpose(),
                                          s.G[static_cast<std::size_t>(k)],
                                          s.psi.row(k).transpose()});
      for (int j = 0; j < J; ++j) {
        for (int c = 0; c < p; ++c) {
          xi[static_cast<std::size_t>((k * J + j) * p + c)] = s.xi[static_cast<std::size_t>(k)](j, c);
        }
      }
    }
  }

  void log_probs(const ChainState& s, const double* y, int j, double* out, double* scratch) const {
    const int K = static_cast<int>(eval.size());
    for (int k = 0; k < K; ++k) {
      const double lw = s.log_weights(j, k);
      if (!std::isfinite(lw)) {
        out[k] = kNegInf;
        continue;
      }
      out[k] = lw + eval[static_cast<std::size_t>(k)].log_density(
                        y, &xi[static_cast<std::size_t>((k * J + j) * p)], scratch);
    }
  }
};

}  // namespace

std::vector<double> assignment_log_probs(const ChainState& state, const Dataset& data, int i) {
  const AssignmentModel model(state);
  std::vector<double> out(static_cast<std::size_t>(state.K()));
  std::vector<double> scratch(static_cast<std::size_t>(2 * data.p()));
  const Vec y = data.y.row(i).transpose();
  model.log_probs(state, y.data(), data.sample_of[static_cast<std::size_t>(i)], out.data(),
                  scratch.data());
  return out;
}

void update_T(ChainState& state, const Dataset& data, std::uint64_t seed, std::uint64_t iteration,
              int workers) {
  const int n = data.n();
  if (n == 0) return;
  const AssignmentModel model(state);
  const int K = state.K();
  const int p = data.p();
  constexpr int kChunk = 256;
  const int chunks = (n + kChunk - 1) / kChunk;
  parallel_for(workers, chunks, [&](int c) {
    std::vector<double> lp(static_cast<std::size_t>(K));
    std::vector<double> scratch(static_cast<std::size_t>(2 * p));
    std::vector<double> y(static_cast<std::size_t>(p));
    const int end = std::min(n, (c + 1) * kChunk);
    for (int i = c * kChunk; i < end; ++i) {
      for (int d = 0; d < p; ++d) y[static_cast<std::size_t>(d)] = data.y(i, d);
      const int j = data.sample_of[static_cast<std::size_t>(i)];
      model.log_probs(state, y.data(), j, lp.data(), scratch.data());
      Rng rng = Rng::stream(seed, iteration, kTagAssign, static_cast<std::uint64_t>(i));
      const int k = sample_categorical_log(rng, lp);
      if (k < 0) {
        throw NumericalFailure("assignment of observation " + std::to_string(i + 1) +
                               ": every cluster probability is zero");
      }
      state.T[static_cast<std::size_t>(i)] = k;
    }
  });
}

// ---------------------------------------------------------------------------
// particle clouds

Vec update_z_particles(ParticleCloud& cloud, const ClusterView& view, double zeta, Rng& rng) {
  const int M = cloud.size();
  const int nk = view.n();
  cloud.z.resize(M, nk);
  Vec log_q = Vec::Zero(M);
  for (int m = 0; m < M; ++m) {
    const Vec psi = cloud.psi.row(m).transpose();
    const ZConditional zc =
        z_conditional(view, cloud.xi[static_cast<std::size_t>(m)], cloud.G[static_cast<std::size_t>(m)],
                      psi, zeta);
    const double sd = std::sqrt(zc.variance);
    double lq = 0.0;
    for (int i = 0; i < nk; ++i) {
      const double z = sample_truncated_normal_positive(rng, zc.mean[i], sd);
      cloud.z(m, i) = z;
      lq += log_truncated_normal_positive(z, zc.mean[i], sd);
    }
    log_q[m] = lq;
  }
  return log_q;
}

std::vector<int> resample_indices(Rng& rng, const Vec& log_weights, int count) {
  std::vector<double> lw(log_weights.data(), log_weights.data() + log_weights.size());
  std::vector<int> idx(static_cast<std::size_t>(count));
  for (int m = 0; m < count; ++m) {
    const int k = sample_categorical_log(rng, lw);
    if (k < 0) throw NumericalFailure("resampling: all weights are zero");
    idx[static_cast<std::size_t>(m)] = k;
  }
  return idx;
}

double particle_log_target(const ClusterView& view, const Mat& xi, const Vec& xi0, const Mat& g,
                           const Vec& psi, const Mat& e, const Eigen::Ref<const Vec>& absz,
                           const Hyper& hyper) {
  const int p = view.p();
  const int J = static_cast<int>(xi.rows());
  const SpdFactor gf(g, "G");

  // Power likelihood of the augmented model plus the half-normal z density.
  double quad = 0.0;
  double z_term = 0.0;
  std::vector<double> r(static_cast<std::size_t>(p)), scratch(static_cast<std::size_t>(p));
  for (int i = 0; i < view.n(); ++i) {
    const int j = view.sample_of[static_cast<std::size_t>(i)];
    for (int c = 0; c < p; ++c) {
      r[static_cast<std::size_t>(c)] = view.y(i, c) - xi(j, c) - psi[c] * absz[i];
    }
    quad += gf.quad_form(r.data(), scratch.data());
    z_term += std::log(2.0) + log_normal_pdf(absz[i]);
  }
  const double nk = view.n();
  const double loglik = -0.5 * (nk * (p * kLog2Pi + gf.log_det()) + quad);
  double lp = hyper.zeta * loglik + z_term;

  const SpdFactor ef(e, "E");
  for (int j = 0; j < J; ++j) lp += log_mvn_density(xi.row(j).transpose(), xi0, ef);
  lp += log_mvn_density(xi0, hyper.b0, SpdFactor(hyper.B0, "B0"));
  lp += log_inverse_wishart_density(ef, hyper.nu0, SpdFactor(hyper.E0, "E0"), hyper.E0);

  const SnParamsAugmented aug{xi0, g, psi};
  const SnParamsDelta del = to_delta(aug);
  lp += log_inverse_wishart_density(SpdFactor(del.sigma, "Sigma"), hyper.m,
                                    SpdFactor(hyper.Lambda, "Lambda"), hyper.Lambda);
  lp += skew_prior_logdensity(del);
  lp += jacobian_log(aug);
  return lp;
}

namespace {

enum class Block { kXi = 0, kG = 1, kPsi = 2, kXi0 = 3, kE = 4 };

double draw_gaussian(Rng& rng, const GaussianParams& gp, Vec& out) {
  const SpdFactor f(gp.cov, "proposal covariance");
  out = sample_mvn(rng, gp.mean, f);
  return log_mvn_density(out, gp.mean, f);
}

double draw_inverse_wishart(Rng& rng, const InverseWishartParams& ip, Mat& out) {
  const SpdFactor sf(ip.scale, "inverse-Wishart scale");
  out = sample_inverse_wishart(rng, ip.dof, sf);
  return log_inverse_wishart_density(SpdFactor(out, "inverse-Wishart draw"), ip.dof, sf, ip.scale);
}

ClusterSummary summarize(const ParticleCloud& cloud) {
  const int M = cloud.size();
  ClusterSummary s;
  s.xi = Mat::Zero(cloud.xi[0].rows(), cloud.xi[0].cols());
  s.G = Mat::Zero(cloud.G[0].rows(), cloud.G[0].cols());
  s.E = Mat::Zero(cloud.E[0].rows(), cloud.E[0].cols());
  for (int m = 0; m < M; ++m) {
    s.xi += cloud.xi[static_cast<std::size_t>(m)];
    s.G += cloud.G[static_cast<std::size_t>(m)];
    s.E += cloud.E[static_cast<std::size_t>(m)];
  }
  s.xi /= M;
  s.G = symmetrize(s.G / M);
  s.E = symmetrize(s.E / M);
  s.xi0 = cloud.xi0.colwise().mean().transpose();
  s.psi = cloud.psi.colwise().mean().transpose();
  s.z = cloud.z.cols() > 0 ? Vec(cloud.z.colwise().mean().transpose()) : Vec();
  return s;
}

}  // namespace

ClusterSummary pmc_sweep_cluster(ParticleCloud& cloud, const ClusterView& view, const Hyper& hyper,
                                 int cluster, Rng& rng) {
  const int M = cloud.size();
  const int J = view.J();
  const double zeta = hyper.zeta;
  Vec log_q = update_z_particles(cloud, view, zeta, rng);

  std::vector<Block> order{Block::kXi, Block::kG, Block::kPsi, Block::kXi0, Block::kE};
  shuffle(rng, order);

  Vec log_w(M);
  Vec absz(view.n());
  Vec draw;
  for (int m = 0; m < M; ++m) {
    auto& xi = cloud.xi[static_cast<std::size_t>(m)];
    auto& g = cloud.G[static_cast<std::size_t>(m)];
    auto& e = cloud.E[static_cast<std::size_t>(m)];
    absz = cloud.z.row(m).transpose();
    Vec psi = cloud.psi.row(m).transpose();
    Vec xi0 = cloud.xi0.row(m).transpose();
    double lq = log_q[m];
    try {
      for (Block b : order) {
        switch (b) {
          case Block::kXi:
            for (int j = 0; j < J; ++j) {
              lq += draw_gaussian(rng, xi_conditional(view, j, absz, g, psi, xi0, e, zeta), draw);
              xi.row(j) = draw.transpose();
            }
            break;
          case Block::kG:
            lq += draw_inverse_wishart(rng, g_proposal(view, absz, xi, psi, hyper), g);
            break;
          case Block::kPsi:
            lq += draw_gaussian(rng, psi_proposal(view, absz, xi, g, zeta), psi);
            break;
          case Block::kXi0:
            lq += draw_gaussian(rng, xi0_conditional(xi, e, hyper), xi0);
            break;
          case Block::kE:
            lq += draw_inverse_wishart(rng, e_conditional(xi, xi0, hyper), e);
            break;
        }
      }
      cloud.psi.row(m) = psi.transpose();
      cloud.xi0.row(m) = xi0.transpose();
      const double lt = particle_log_target(view, xi, xi0, g, psi, e, absz, hyper);
      log_w[m] = lt - lq;
      if (!std::isfinite(log_w[m])) log_w[m] = kNegInf;
    } catch (const InvalidParameter&) {
      // A particle that left the parameter space carries no weight.
      cloud.psi.row(m) = psi.transpose();
      cloud.xi0.row(m) = xi0.transpose();
      log_w[m] = kNegInf;
    }
  }

  const double norm = log_sum_exp(std::span<const double>(log_w.data(), static_cast<std::size_t>(M)));
  if (!std::isfinite(norm)) {
    throw DegenerateCloud(cluster, "cluster " + std::to_string(cluster + 1) +
                                       ": every importance weight is zero");
  }
  log_w.array() -= norm;
  int valid = 0;
  for (int m = 0; m < M; ++m) valid += std::isfinite(log_w[m]) ? 1 : 0;

  const std::vector<int> idx = resample_indices(rng, log_w, M);
  ParticleCloud next;
  next.xi.resize(static_cast<std::size_t>(M));
  next.G.resize(static_cast<std::size_t>(M));
  next.E.resize(static_cast<std::size_t>(M));
  next.xi0.resize(M, cloud.xi0.cols());
  next.psi.resize(M, cloud.psi.cols());
  next.z.resize(M, cloud.z.cols());
  for (int m = 0; m < M; ++m) {
    const auto src = static_cast<std::size_t>(idx[static_cast<std::size_t>(m)]);
    next.xi[static_cast<std::size_t>(m)] = cloud.xi[src];
    next.G[static_cast<std::size_t>(m)] = cloud.G[src];
    next.E[static_cast<std::size_t>(m)] = cloud.E[src];
    next.xi0.row(m) = cloud.xi0.row(static_cast<Eigen::Index>(src));
    next.psi.row(m) = cloud.psi.row(static_cast<Eigen::Index>(src));
    next.z.row(m) = cloud.z.row(static_cast<Eigen::Index>(src));
  }
  next.log_weights = log_w;
  cloud = std::move(next);

  ClusterSummary s = summarize(cloud);
  std::vector<int> distinct = idx;
  std::sort(distinct.begin(), distinct.end());
  s.distinct_resampled =
      static_cast<int>(std::unique(distinct.begin(), distinct.end()) - distinct.begin());
  s.single_valid_particle = valid == 1;
  return s;
}

ClusterSummary refresh_from_prior(ParticleCloud& cloud, int J, const Hyper& hyper, Rng& rng) {
  const int M = hyper.M;
  const int p = static_cast<int>(hyper.b0.size());
  const SpdFactor lambda(hyper.Lambda, "Lambda");
  const SpdFactor e0(hyper.E0, "E0");
  const SpdFactor b0(hyper.B0, "B0");
  cloud.xi.assign(static_cast<std::size_t>(M), Mat(J, p));
  cloud.G.assign(static_cast<std::size_t>(M), Mat(p, p));
  cloud.E.assign(static_cast<std::size_t>(M), Mat(p, p));
  cloud.xi0.resize(M, p);
  cloud.psi.resize(M, p);
  cloud.z.resize(M, 0);
  for (int m = 0; m < M; ++m) {
    // Sigma ~ W^{-1}(m, Lambda), delta uniform on its ellipsoid, then map to
    // (G, psi). Boundary draws that leave G numerically singular are redrawn.
    for (int attempt = 0;; ++attempt) {
      const Mat sigma = sample_inverse_wishart(rng, hyper.m, lambda);
      const SpdFactor omega(correlation_of(sigma), "Omega");
      const Vec delta = sample_uniform_ellipsoid(rng, omega);
      const Vec psi = marginal_scales(sigma).cwiseProduct(delta);
      const Mat g = symmetrize(sigma - psi * psi.transpose());
      if (is_spd(g) || attempt > 100) {
        cloud.G[static_cast<std::size_t>(m)] = g;
        cloud.psi.row(m) = psi.transpose();
        break;
      }
    }
    const Vec xi0 = sample_mvn(rng, hyper.b0, b0);
    cloud.xi0.row(m) = xi0.transpose();
    const Mat e = sample_inverse_wishart(rng, hyper.nu0, e0);
    cloud.E[static_cast<std::size_t>(m)] = e;
    const SpdFactor ef(e, "E");
    for (int j = 0; j < J; ++j) {
      cloud.xi[static_cast<std::size_t>(m)].row(j) = sample_mvn(rng, xi0, ef).transpose();
    }
  }
  cloud.log_weights = Vec::Constant(M, -std::log(static_cast<double>(M)));

  ClusterSummary s;
  s.xi = cloud.xi[0];
  s.xi0 = cloud.xi0.row(0).transpose();
  s.G = cloud.G[0];
  s.psi = cloud.psi.row(0).transpose();
  s.E = cloud.E[0];
  s.distinct_resampled = M;
  return s;
}

namespace {

void apply_summary(ChainState& state, int k, const ClusterSummary& s, const ClusterView& view) {
  state.xi[static_cast<std::size_t>(k)] = s.xi;
  state.xi0.row(k) = s.xi0.transpose();
  state.G[static_cast<std::size_t>(k)] = s.G;
  state.psi.row(k) = s.psi.transpose();
  state.E[static_cast<std::size_t>(k)] = s.E;
  for (int r = 0; r < view.n(); ++r) {
    state.z[view.members[static_cast<std::size_t>(r)]] = s.z[r];
  }
}

std::vector<std::vector<int>> members_by_cluster(const std::vector<int>& T, int K) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(K));
  for (int i = 0; i < static_cast<int>(T.size()); ++i) {
    out[static_cast<std::size_t>(T[static_cast<std::size_t>(i)])].push_back(i);
  }
  return out;
}

}  // namespace

int update_empty_clusters(ChainState& state, std::vector<ParticleCloud>& clouds, const Dataset& data,
                          const Hyper& hyper, std::uint64_t seed, std::uint64_t iteration,
                          int workers) {
  const int K = state.K();
  const auto members = members_by_cluster(state.T, K);
  std::vector<int> empty;
  for (int k = 0; k < K; ++k) {
    if (members[static_cast<std::size_t>(k)].empty()) empty.push_back(k);
  }
  std::vector<ClusterSummary> summaries(empty.size());
  parallel_for(workers, static_cast<int>(empty.size()), [&](int e) {
    const int k = empty[static_cast<std::size_t>(e)];
    Rng rng = Rng::stream(seed, iteration, kTagCluster, static_cast<std::uint64_t>(k));
    summaries[static_cast<std::size_t>(e)] =
        refresh_from_prior(clouds[static_cast<std::size_t>(k)], data.J(), hyper, rng);
  });
  const ClusterView none;
  for (std::size_t e = 0; e < empty.size(); ++e) apply_summary(state, empty[e], summaries[e], none);
  return static_cast<int>(empty.size());
}

// ---------------------------------------------------------------------------
// merging

double gaussian_symmetric_kl(const Vec& mean_a, const Mat& cov_a, const Vec& mean_b,
                             const Mat& cov_b) {
  const SpdFactor fa(cov_a, "covariance");
  const SpdFactor fb(cov_b, "covariance");
  const Vec d = mean_a - mean_b;
  const double p = static_cast<double>(mean_a.size());
  const double tr = fb.solve(cov_a).trace() + fa.solve(cov_b).trace();
  return 0.5 * (tr + fa.quad_form(d) + fb.quad_form(d) - 2.0 * p);
}

namespace {

void moment_matched(const ChainState& s, int k, Vec& mean, Mat& cov) {
  const Vec psi = s.psi.row(k).transpose();
  mean = s.xi0.row(k).transpose() + kSqrt2OverPi * psi;
  cov = symmetrize(s.G[static_cast<std::size_t>(k)] + (1.0 - 2.0 / M_PI) * psi * psi.transpose());
}

int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

}  // namespace

double cluster_symmetric_kl(const ChainState& state, int a, int b) {
  Vec ma, mb;
  Mat ca, cb;
  moment_matched(state, a, ma, ca);
  moment_matched(state, b, mb, cb);
  return gaussian_symmetric_kl(ma, ca, mb, cb);
}

int merge_clusters(ChainState& state, const Dataset& data, const Hyper& hyper) {
  const int K = state.K();
  std::vector<int> total(static_cast<std::size_t>(K), 0);
  for (int t : state.T) ++total[static_cast<std::size_t>(t)];
  std::vector<int> active;
  for (int k = 0; k < K; ++k) {
    if (total[static_cast<std::size_t>(k)] > 0) active.push_back(k);
  }
  std::vector<Vec> means(active.size());
  std::vector<SpdFactor> factors(active.size());
  std::vector<Mat> covs(active.size());
  for (std::size_t a = 0; a < active.size(); ++a) {
    moment_matched(state, active[a], means[a], covs[a]);
    factors[a] = SpdFactor(covs[a], "moment-matched covariance");
  }
  std::vector<int> parent(static_cast<std::size_t>(K));
  std::iota(parent.begin(), parent.end(), 0);
  const double p = static_cast<double>(state.p());
  for (std::size_t a = 0; a < active.size(); ++a) {
    for (std::size_t b = a + 1; b < active.size(); ++b) {
      const Vec d = means[a] - means[b];
      const double tr = factors[b].solve(covs[a]).trace() + factors[a].solve(covs[b]).trace();
      const double kl = 0.5 * (tr + factors[a].quad_form(d) + factors[b].quad_form(d) - 2.0 * p);
      if (kl <= hyper.merge_threshold) {
        const int ra = find_root(parent, active[a]);
        const int rb = find_root(parent, active[b]);
        if (ra != rb) parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
      }
    }
  }
  // Representative of each component: largest count, ties to the smaller label.
  std::vector<int> rep(static_cast<std::size_t>(K), -1);
  for (int k : active) {
    const int r = find_root(parent, k);
    int& cur = rep[static_cast<std::size_t>(r)];
    if (cur < 0 || total[static_cast<std::size_t>(k)] > total[static_cast<std::size_t>(cur)]) cur = k;
  }
  std::vector<int> target(static_cast<std::size_t>(K));
  std::iota(target.begin(), target.end(), 0);
  int absorbed = 0;
  for (int k : active) {
    const int r = rep[static_cast<std::size_t>(find_root(parent, k))];
    if (r != k) {
      target[static_cast<std::size_t>(k)] = r;
      ++absorbed;
    }
  }
  if (absorbed == 0) return 0;
  (void)data;
  for (int& t : state.T) t = target[static_cast<std::size_t>(t)];
  for (int j = 0; j < state.J(); ++j) {
    for (int k : active) {
      const int r = target[static_cast<std::size_t>(k)];
      if (r == k) continue;
      const double a = state.log_weights(j, r);
      const double b = state.log_weights(j, k);
      const double mx = std::max(a, b);
      state.log_weights(j, r) =
          std::isfinite(mx) ? mx + std::log(std::exp(a - mx) + std::exp(b - mx)) : mx;
      state.log_weights(j, k) = kNegInf;
    }
  }
  return absorbed;
}

// ---------------------------------------------------------------------------
// driver

int default_workers() {
  if (const char* env = std::getenv("SKEWMIX_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return 1;
}

Sampler::Sampler(const Dataset& data, Hyper hyper, SamplerConfig config)
    : data_(data), hyper_(std::move(hyper)), config_(config) {
  config_.validate();
  InitialState init = init_state(data_, hyper_, config_.seed);
  state_ = std::move(init.state);
  clouds_ = std::move(init.clouds);
  if (init.fewer_points_than_clusters && data_.n() > 0) {
    warnings_.push_back("fewer observations (" + std::to_string(data_.n()) + ") than clusters (" +
                        std::to_string(hyper_.K) + "); some clusters start empty");
  }
}

void Sampler::update_clusters() {
  const int K = state_.K();
  const auto members = members_by_cluster(state_.T, K);
  std::vector<ClusterSummary> summaries(static_cast<std::size_t>(K));
  std::vector<ClusterView> views(static_cast<std::size_t>(K));
  const auto it = static_cast<std::uint64_t>(iteration_);
  parallel_for(config_.workers, K, [&](int k) {
    const auto uk = static_cast<std::size_t>(k);
    Rng rng = Rng::stream(config_.seed, it, kTagCluster, static_cast<std::uint64_t>(k));
    if (members[uk].empty()) {
      summaries[uk] = refresh_from_prior(clouds_[uk], data_.J(), hyper_, rng);
    } else {
      views[uk] = ClusterView::gather(data_, members[uk]);
      summaries[uk] = pmc_sweep_cluster(clouds_[uk], views[uk], hyper_, k, rng);
    }
  });
  for (int k = 0; k < K; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    apply_summary(state_, k, summaries[uk], views[uk]);
    if (summaries[uk].single_valid_particle) {
      warnings_.push_back("iteration " + std::to_string(iteration_) + ", cluster " +
                          std::to_string(k + 1) + ": resampling collapsed to one valid particle");
    }
  }
}

bool Sampler::merge_due() const {
  return iteration_ % config_.merge_check_every == 0;
}

void Sampler::sweep() {
  ++iteration_;
  const auto it = static_cast<std::uint64_t>(iteration_);
  try {
    const Eigen::MatrixXi counts = state_.counts(data_);
    Rng eta_rng = Rng::stream(config_.seed, it, kTagEta);
    state_.eta = update_eta(state_.eta, state_.log_weights, hyper_, eta_rng, adapt_,
                            iteration_ <= config_.n_burn, config_.mh_adapt_target, eta_likelihood_);
    Rng w_rng = Rng::stream(config_.seed, it, kTagWeights);
    state_.log_weights = update_weights(counts, state_.eta, hyper_, w_rng);
    update_clusters();
    update_T(state_, data_, config_.seed, it, config_.workers);
    if (config_.check_invariants) check_invariants(state_);
  } catch (const DegenerateCloud& e) {
    throw DegenerateCloud(e.cluster(), "iteration " + std::to_string(iteration_) + ": " + e.what());
  } catch (const NumericalFailure& e) {
    throw NumericalFailure("iteration " + std::to_string(iteration_) + ": " + e.what());
  } catch (const InvalidParameter& e) {
    throw InvalidParameter("iteration " + std::to_string(iteration_) + ": " + e.what());
  }
}

Chain Sampler::run(const ProgressCallback& progress) {
  Chain chain;
  for (int t = 0; t < config_.n_iter; ++t) {
    sweep();
    if (iteration_ > config_.n_burn && (iteration_ - config_.n_burn) % config_.thin == 0) {
      chain.snapshots.push_back(state_);
      chain.iterations.push_back(iteration_);
    }
    if (merge_due()) {
      const int absorbed = merge_clusters(state_, data_, hyper_);
      merges_ += absorbed;
      if (absorbed > 0 && config_.check_invariants) check_invariants(state_);
    }
    if (iteration_ % 100 == 0 || iteration_ == config_.n_iter) {
      ProgressRecord rec;
      rec.iteration = iteration_;
      rec.power_loglik = power_loglik(state_, data_, hyper_);
      std::vector<char> used(static_cast<std::size_t>(state_.K()), 0);
      for (int k : state_.T) used[static_cast<std::size_t>(k)] = 1;
      rec.active_clusters = static_cast<int>(std::count(used.begin(), used.end(), 1));
      rec.mh_acceptance = adapt_.acceptance_rate();
      chain.progress.push_back(rec);
      if (progress) progress(rec);
    }
  }
  chain.warnings = warnings_;
  chain.merges = merges_;
  return chain;
}

Chain run(const Dataset& data, const Hyper& hyper, const SamplerConfig& config,
          const ProgressCallback& progress) {
  Sampler s(data, hyper, config);
  return s.run(progress);
}

}  // namespace skewmix
