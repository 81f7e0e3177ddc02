#include "skewmix/simulate.hpp"

#include "skewmix/error.hpp"
#include "skewmix/sn_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace skewmix {

void SimSpec::validate() const {
  if (J < 1 || p < 1 || K_true < 1) throw InvalidParameter("SimSpec: J, p and K_true must be positive");
  if (weights_true.rows() != J || weights_true.cols() != K_true) {
    throw InvalidParameter("SimSpec: weights_true must be J x K_true");
  }
  for (int j = 0; j < J; ++j) {
    if ((weights_true.row(j).array() < 0.0).any() ||
        std::abs(weights_true.row(j).sum() - 1.0) > 1e-12) {
      throw InvalidParameter("SimSpec: weight row " + std::to_string(j + 1) + " is not on the simplex");
    }
  }
  if (xi0_true.rows() != K_true || xi0_true.cols() != p || alpha_true.rows() != K_true ||
      alpha_true.cols() != p) {
    throw InvalidParameter("SimSpec: xi0_true and alpha_true must be K_true x p");
  }
  if (static_cast<int>(E_true.size()) != K_true || static_cast<int>(Sigma_true.size()) != K_true) {
    throw InvalidParameter("SimSpec: need one E and one Sigma per cluster");
  }
  for (int k = 0; k < K_true; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    if (E_true[uk].rows() != p || !is_spd(E_true[uk])) throw InvalidParameter("SimSpec: E_true not PD");
    if (Sigma_true[uk].rows() != p || !is_spd(Sigma_true[uk])) {
      throw InvalidParameter("SimSpec: Sigma_true not PD");
    }
  }
  if (static_cast<int>(n_j.size()) != J) throw InvalidParameter("SimSpec: n_j must have J entries");
  for (int n : n_j) {
    if (n < 1) throw InvalidParameter("SimSpec: every sample needs at least one observation");
  }
  if (distortion.enabled && !(distortion.factor_low > 0.0 && distortion.factor_high > 0.0)) {
    throw InvalidParameter("SimSpec: distortion factors must be positive");
  }
}

SimSpec SimSpec::replica(int n_per_sample, bool distorted) {
  SimSpec s;
  s.J = 3;
  s.p = 2;
  s.K_true = 3;
  s.weights_true.resize(3, 3);
  s.weights_true << 0.5, 0.3, 0.2,
                    0.3, 0.4, 0.3,
                    0.2, 0.3, 0.5;
  s.xi0_true.resize(3, 2);
  s.xi0_true << 0.0, 0.0,
                8.0, 0.0,
                4.0, 7.0;
  // Pairwise distances are about 8, so a cross-sample location SD of 20% of
  // that (Euclidean) gives 1.6^2 / 2 = 1.28 per coordinate.
  const Mat e = 1.28 * Mat::Identity(2, 2);
  s.E_true = {e, e, e};
  Mat s1(2, 2), s2(2, 2), s3(2, 2);
  s1 << 1.0, 0.3, 0.3, 1.0;
  s2 << 1.5, -0.4, -0.4, 0.8;
  s3 << 0.8, 0.2, 0.2, 1.2;
  s.Sigma_true = {s1, s2, s3};
  s.alpha_true.resize(3, 2);
  s.alpha_true << 4.0, -2.0,
                  -6.0, 3.0,
                  2.0, 6.0;
  s.n_j.assign(3, n_per_sample);
  s.distortion.enabled = distorted;
  return s;
}

SimResult generate(const SimSpec& spec, Rng& rng) {
  spec.validate();
  const int J = spec.J, p = spec.p, K = spec.K_true;
  SimResult out;
  out.xi0 = spec.xi0_true;
  out.xi.assign(static_cast<std::size_t>(K), Mat(J, p));
  for (int k = 0; k < K; ++k) {
    const SpdFactor ef(spec.E_true[static_cast<std::size_t>(k)], "E_true");
    for (int j = 0; j < J; ++j) {
      out.xi[static_cast<std::size_t>(k)].row(j) =
          sample_mvn(rng, spec.xi0_true.row(k).transpose(), ef).transpose();
    }
  }
  int n = 0;
  for (int nj : spec.n_j) n += nj;
  RowMat y(n, p);
  std::vector<int> sample_of(static_cast<std::size_t>(n));
  out.labels.resize(static_cast<std::size_t>(n));
  int i = 0;
  for (int j = 0; j < J; ++j) {
    std::vector<double> lw(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) lw[static_cast<std::size_t>(k)] = std::log(spec.weights_true(j, k));
    std::vector<int> lab(static_cast<std::size_t>(spec.n_j[static_cast<std::size_t>(j)]));
    std::vector<int> per_k(static_cast<std::size_t>(K), 0);
    for (auto& l : lab) {
      l = sample_categorical_log(rng, lw);
      ++per_k[static_cast<std::size_t>(l)];
    }
    std::vector<RowMat> draws(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      const SnParamsDirect sn{out.xi[static_cast<std::size_t>(k)].row(j).transpose(),
                              spec.Sigma_true[static_cast<std::size_t>(k)],
                              spec.alpha_true.row(k).transpose()};
      draws[static_cast<std::size_t>(k)] = sample(sn, rng, per_k[static_cast<std::size_t>(k)]);
    }
    std::vector<int> used(static_cast<std::size_t>(K), 0);
    for (int l : lab) {
      y.row(i) = draws[static_cast<std::size_t>(l)].row(used[static_cast<std::size_t>(l)]++);
      sample_of[static_cast<std::size_t>(i)] = j;
      out.labels[static_cast<std::size_t>(i)] = l;
      ++i;
    }
  }
  out.data = Dataset::make(std::move(y), std::move(sample_of), J);
  if (spec.distortion.enabled) out.data = distort(out.data, out.labels, spec.distortion);
  return out;
}

namespace {

// Order statistic v_(floor(n/2)) (0-based). Being a data point, it is a fixed
// point of the contraction, so the distorted group keeps the same median.
double median_of(std::vector<double> v) {
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
  return v[h];
}

}  // namespace

Dataset distort(const Dataset& data, const std::vector<int>& labels, const Distortion& d) {
  if (static_cast<int>(labels.size()) != data.n()) {
    throw InvalidParameter("distort: labels do not match the dataset");
  }
  Dataset out = data;
  std::map<std::pair<int, int>, std::vector<int>> groups;
  for (int i = 0; i < data.n(); ++i) {
    groups[{data.sample_of[static_cast<std::size_t>(i)], labels[static_cast<std::size_t>(i)]}].push_back(i);
  }
  for (const auto& [key, rows] : groups) {
    for (int c = 0; c < data.p(); ++c) {
      std::vector<double> v;
      v.reserve(rows.size());
      for (int i : rows) v.push_back(data.y(i, c));
      const double med = median_of(v);
      for (int i : rows) {
        const double dev = data.y(i, c) - med;
        const double f = dev < 0.0 ? d.factor_low : d.factor_high;
        if (f != 1.0) out.y(i, c) = med + f * dev;
      }
    }
  }
  return out;
}

}  // namespace skewmix
