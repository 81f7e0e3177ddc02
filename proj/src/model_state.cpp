#include "skewmix/model_state.hpp"

#include "skewmix/error.hpp"
#include "skewmix/sn_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace skewmix {

std::vector<int> Dataset::sample_counts() const {
  std::vector<int> c(static_cast<std::size_t>(num_samples), 0);
  for (int j : sample_of) {
    if (j >= 0 && j < num_samples) ++c[static_cast<std::size_t>(j)];
  }
  return c;
}

void Dataset::validate() const {
  if (p() < 1) throw InvalidParameter("dataset needs at least one marker column");
  if (num_samples < 1) throw InvalidParameter("dataset needs at least one sample");
  if (static_cast<int>(sample_of.size()) != n()) {
    throw InvalidParameter("sample index vector length differs from observation count");
  }
  for (int i = 0; i < n(); ++i) {
    const int j = sample_of[static_cast<std::size_t>(i)];
    if (j < 0 || j >= num_samples) {
      throw InvalidParameter("observation " + std::to_string(i + 1) + " has sample index out of range");
    }
    for (int c = 0; c < p(); ++c) {
      if (!std::isfinite(y(i, c))) {
        throw InvalidParameter("observation " + std::to_string(i + 1) + " has a non-finite value");
      }
    }
  }
  if (n() > 0) {
    const auto counts = sample_counts();
    for (int j = 0; j < num_samples; ++j) {
      if (counts[static_cast<std::size_t>(j)] == 0) {
        throw InvalidParameter("sample " + std::to_string(j + 1) + " has no observations");
      }
    }
  }
}

Dataset Dataset::make(RowMat y, std::vector<int> sample_of, int num_samples) {
  Dataset d;
  d.y = std::move(y);
  d.sample_of = std::move(sample_of);
  d.num_samples = num_samples;
  for (int j = 0; j < num_samples; ++j) d.sample_names.push_back("s" + std::to_string(j + 1));
  for (int c = 0; c < d.p(); ++c) d.marker_names.push_back("m" + std::to_string(c + 1));
  d.validate();
  return d;
}

Dataset Dataset::empty(int p, int num_samples) {
  return make(RowMat(0, p), {}, num_samples);
}

namespace {

Mat pooled_covariance(const Dataset& data, Vec& mean_out) {
  const int p = data.p();
  const int n = data.n();
  mean_out = n > 0 ? Vec(data.y.colwise().mean().transpose()) : Vec::Zero(p);
  if (n <= p) return Mat::Identity(p, p);
  const RowMat centered = data.y.rowwise() - mean_out.transpose();
  Mat cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  cov = symmetrize(cov);
  if (!is_spd(cov)) return Mat::Identity(p, p);
  return cov;
}

}  // namespace

Hyper Hyper::defaults_for(const Dataset& data) {
  Hyper h;
  const int p = data.p();
  Vec mean;
  const Mat cov = pooled_covariance(data, mean);
  h.b0 = mean;
  h.B0 = 100.0 * cov;
  h.m = p + 2.0;
  h.Lambda = cov * (h.m - p - 1.0);
  h.nu0 = p + 2.0;
  h.E0 = 0.1 * cov;
  return h;
}

void Hyper::validate(int p) const {
  if (K < 1) throw InvalidParameter("K must be >= 1");
  if (!(zeta > 0.0 && zeta <= 1.0)) throw InvalidParameter("zeta must lie in (0, 1]");
  if (!(a_eta > 0.0) || !(b_eta > 0.0)) throw InvalidParameter("a_eta and b_eta must be > 0");
  if (b0.size() != p) throw InvalidParameter("b0 has the wrong dimension");
  if (!(m > p - 1)) throw InvalidParameter("m must exceed p - 1");
  if (!(nu0 > p - 1)) throw InvalidParameter("nu0 must exceed p - 1");
  if (B0.rows() != p || !is_spd(B0)) throw InvalidParameter("B0 must be p x p symmetric PD");
  if (Lambda.rows() != p || !is_spd(Lambda)) throw InvalidParameter("Lambda must be p x p symmetric PD");
  if (E0.rows() != p || !is_spd(E0)) throw InvalidParameter("E0 must be p x p symmetric PD");
  if (!(merge_threshold >= 0.0)) throw InvalidParameter("merge_threshold must be >= 0");
  if (M < 2) throw InvalidParameter("M (particles) must be >= 2");
}

Mat ChainState::weights() const { return log_weights.array().exp().matrix(); }

Eigen::MatrixXi ChainState::counts(const Dataset& data) const {
  Eigen::MatrixXi c = Eigen::MatrixXi::Zero(J(), K());
  for (int i = 0; i < n(); ++i) {
    c(data.sample_of[static_cast<std::size_t>(i)], T[static_cast<std::size_t>(i)])++;
  }
  return c;
}

void ChainState::relabel(const std::vector<int>& new_label) {
  const int k_total = K();
  if (static_cast<int>(new_label.size()) != k_total) {
    throw InvalidParameter("relabel: permutation has the wrong length");
  }
  std::vector<char> seen(static_cast<std::size_t>(k_total), 0);
  for (int b : new_label) {
    if (b < 0 || b >= k_total || seen[static_cast<std::size_t>(b)]) {
      throw InvalidParameter("relabel: not a permutation");
    }
    seen[static_cast<std::size_t>(b)] = 1;
  }
  Mat lw(log_weights.rows(), log_weights.cols());
  std::vector<Mat> nxi(xi.size()), ng(G.size()), ne(E.size());
  Mat nxi0(xi0.rows(), xi0.cols()), npsi(psi.rows(), psi.cols());
  for (int b = 0; b < k_total; ++b) {
    const int a = new_label[static_cast<std::size_t>(b)];
    lw.col(a) = log_weights.col(b);
    nxi[static_cast<std::size_t>(a)] = std::move(xi[static_cast<std::size_t>(b)]);
    ng[static_cast<std::size_t>(a)] = std::move(G[static_cast<std::size_t>(b)]);
    ne[static_cast<std::size_t>(a)] = std::move(E[static_cast<std::size_t>(b)]);
    nxi0.row(a) = xi0.row(b);
    npsi.row(a) = psi.row(b);
  }
  log_weights = std::move(lw);
  xi = std::move(nxi);
  G = std::move(ng);
  E = std::move(ne);
  xi0 = std::move(nxi0);
  psi = std::move(npsi);
  for (int& t : T) t = new_label[static_cast<std::size_t>(t)];
}

void check_invariants(const ChainState& state) {
  for (int j = 0; j < state.J(); ++j) {
    double s = 0.0;
    for (int k = 0; k < state.K(); ++k) s += std::exp(state.log_weights(j, k));
    if (!(std::abs(s - 1.0) <= 1e-12)) {
      throw InvalidParameter("weights row " + std::to_string(j + 1) + " sums to " + std::to_string(s));
    }
  }
  for (int k = 0; k < state.K(); ++k) {
    if (!is_spd(state.G[static_cast<std::size_t>(k)])) {
      throw InvalidParameter("G of cluster " + std::to_string(k + 1) + " is not symmetric PD");
    }
    if (!is_spd(state.E[static_cast<std::size_t>(k)])) {
      throw InvalidParameter("E of cluster " + std::to_string(k + 1) + " is not symmetric PD");
    }
  }
  for (int t : state.T) {
    if (t < 0 || t >= state.K()) throw InvalidParameter("assignment label out of range");
  }
}

namespace {

// k-means++ seeding; returns K centers as rows.
Mat kmeanspp_centers(const Dataset& data, int K, const Vec& fallback, Rng& rng) {
  const int n = data.n();
  const int p = data.p();
  Mat centers(K, p);
  if (n == 0) {
    for (int k = 0; k < K; ++k) centers.row(k) = fallback.transpose();
    return centers;
  }
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  int chosen = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n)));
  for (int k = 0; k < K; ++k) {
    if (k > 0) {
      double total = 0.0;
      for (double v : d2) total += v;
      if (total > 0.0) {
        double u = rng.uniform() * total;
        chosen = n - 1;
        for (int i = 0; i < n; ++i) {
          u -= d2[static_cast<std::size_t>(i)];
          if (u < 0.0) {
            chosen = i;
            break;
          }
        }
      } else {
        chosen = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n)));
      }
    }
    centers.row(k) = data.y.row(chosen);
    for (int i = 0; i < n; ++i) {
      const double d = (data.y.row(i) - centers.row(k)).squaredNorm();
      d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], d);
    }
  }
  return centers;
}

}  // namespace

InitialState init_state(const Dataset& data, const Hyper& hyper, std::uint64_t seed) {
  data.validate();
  const int p = data.p();
  hyper.validate(p);
  const int n = data.n();
  const int J = data.J();
  const int K = hyper.K;
  Rng rng = Rng::stream(seed, 0xA11CE);

  InitialState init;
  init.fewer_points_than_clusters = n < K;
  ChainState& s = init.state;

  const Mat centers = kmeanspp_centers(data, K, hyper.b0, rng);
  s.T.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      const double d = (data.y.row(i) - centers.row(k)).squaredNorm();
      if (d < best) {
        best = d;
        s.T[static_cast<std::size_t>(i)] = k;
      }
    }
  }

  Vec mean;
  const Mat cov = pooled_covariance(data, mean);
  const Mat e_init = hyper.nu0 > p + 1.0 ? Mat(hyper.E0 / (hyper.nu0 - p - 1.0)) : hyper.E0;

  s.log_weights = Mat::Constant(J, K, -std::log(static_cast<double>(K)));
  s.xi.resize(static_cast<std::size_t>(K));
  s.G.assign(static_cast<std::size_t>(K), cov);
  s.E.assign(static_cast<std::size_t>(K), e_init);
  s.xi0 = centers;
  s.psi = Mat::Zero(K, p);
  for (int k = 0; k < K; ++k) {
    s.xi[static_cast<std::size_t>(k)] = centers.row(k).replicate(J, 1);
  }
  s.eta = hyper.a_eta / hyper.b_eta;
  s.z.resize(n);
  for (int i = 0; i < n; ++i) s.z[i] = std::abs(rng.normal());

  init.clouds.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    ParticleCloud& c = init.clouds[static_cast<std::size_t>(k)];
    c.xi.assign(static_cast<std::size_t>(hyper.M), s.xi[static_cast<std::size_t>(k)]);
    c.xi0 = s.xi0.row(k).replicate(hyper.M, 1);
    c.G.assign(static_cast<std::size_t>(hyper.M), cov);
    c.psi = Mat::Zero(hyper.M, p);
    c.E.assign(static_cast<std::size_t>(hyper.M), e_init);
    c.z = Mat(hyper.M, 0);
    c.log_weights = Vec::Constant(hyper.M, -std::log(static_cast<double>(hyper.M)));
  }
  return init;
}

double power_loglik(const ChainState& state, const Dataset& data, const Hyper& hyper) {
  const int K = state.K();
  const int n = data.n();
  const int p = data.p();
  std::vector<SnEvaluator> eval;
  eval.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    eval.emplace_back(SnParamsAugmented{state.xi0.row(k).transpose(),
                                        state.G[static_cast<std::size_t>(k)],
                                        state.psi.row(k).transpose()});
  }
  std::vector<double> terms(static_cast<std::size_t>(K));
  std::vector<double> scratch(static_cast<std::size_t>(2 * p));
  Vec y(p), xi(p);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const int j = data.sample_of[static_cast<std::size_t>(i)];
    y = data.y.row(i).transpose();
    for (int k = 0; k < K; ++k) {
      const double lw = state.log_weights(j, k);
      if (!std::isfinite(lw)) {
        terms[static_cast<std::size_t>(k)] = -std::numeric_limits<double>::infinity();
        continue;
      }
      xi = state.xi[static_cast<std::size_t>(k)].row(j).transpose();
      terms[static_cast<std::size_t>(k)] =
          lw + eval[static_cast<std::size_t>(k)].log_density(y.data(), xi.data(), scratch.data());
    }
    total += log_sum_exp(terms);
  }
  return hyper.zeta * total;
}

}  // namespace skewmix
