#include "skewmix/random.hpp"

#include "skewmix/error.hpp"

#include <cmath>

namespace skewmix {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& w : s_) w = splitmix64(sm);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = seed;
  std::uint64_t k = splitmix64(h);
  h = k ^ (a * 0xd1b54a32d192ed03ULL);
  k = splitmix64(h);
  h = k ^ (b * 0x8cb92ba72f3d8dd7ULL);
  k = splitmix64(h);
  h = k ^ (c * 0xabc98388fb8fac03ULL);
  k = splitmix64(h);
  return Rng(k);
}

Rng::result_type Rng::operator()() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double Rng::uniform_pos() {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

std::size_t Rng::uniform_index(std::size_t n) {
  return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

double Rng::normal() { return normal_(*this); }

double Rng::exponential() { return -std::log(uniform_pos()); }

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw InvalidParameter("gamma: shape and rate must be > 0");
  std::gamma_distribution<double> g(shape, 1.0);
  return g(*this) / rate;
}

double Rng::log_gamma_variate(double shape) {
  if (!(shape > 0.0)) throw InvalidParameter("gamma: shape must be > 0");
  if (shape >= 1.0) return std::log(gamma(shape));
  // G(a) = G(a + 1) * U^{1/a}
  return std::log(gamma(shape + 1.0)) + std::log(uniform_pos()) / shape;
}

double Rng::chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

double sample_truncated_normal_positive(Rng& rng, double mean, double sd) {
  const double a = -mean / sd;  // standardized lower bound
  if (a < 0.5) {
    for (;;) {
      const double x = rng.normal();
      if (x >= a) return mean + sd * x;
    }
  }
  // Robert (1995) exponential proposal for the far tail.
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double x = a + rng.exponential() / rate;
    const double d = x - rate;
    if (rng.uniform_pos() <= std::exp(-0.5 * d * d)) return mean + sd * x;
  }
}

double log_truncated_normal_positive(double x, double mean, double sd) {
  if (x < 0.0) return -std::numeric_limits<double>::infinity();
  const double u = (x - mean) / sd;
  return log_normal_pdf(u) - std::log(sd) - log_normal_cdf(mean / sd);
}

Vec sample_mvn(Rng& rng, const Vec& mean, const SpdFactor& cov) {
  Vec z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + cov.lower().triangularView<Eigen::Lower>() * z;
}

Mat sample_inverse_wishart(Rng& rng, double dof, const SpdFactor& scale) {
  const int p = scale.dim();
  if (!(dof > p - 1)) throw InvalidParameter("inverse-Wishart: dof must exceed p - 1");
  // Bartlett factor A of a Wishart(dof, I) draw; X = L A^{-T} A^{-1} L^T.
  Mat a = Mat::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    a(i, i) = std::sqrt(rng.chi_square(dof - i));
    for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Mat a_inv_t = a.triangularView<Eigen::Lower>()
                          .solve(Mat::Identity(p, p))
                          .transpose();
  const Mat u = scale.lower().triangularView<Eigen::Lower>() * a_inv_t;
  Mat x = u * u.transpose();
  return symmetrize(x);
}

Vec sample_log_dirichlet(Rng& rng, std::span<const double> alpha) {
  Vec lw(static_cast<Eigen::Index>(alpha.size()));
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    lw[static_cast<Eigen::Index>(k)] = rng.log_gamma_variate(alpha[k]);
  }
  const double norm = log_sum_exp(std::span<const double>(lw.data(), alpha.size()));
  lw.array() -= norm;
  return lw;
}

int sample_categorical_log(Rng& rng, std::span<const double> log_p) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : log_p) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return -1;
  double total = 0.0;
  for (double v : log_p) total += std::exp(v - mx);
  double u = rng.uniform() * total;
  int last = -1;
  for (std::size_t k = 0; k < log_p.size(); ++k) {
    const double w = std::exp(log_p[k] - mx);
    if (w <= 0.0) continue;
    last = static_cast<int>(k);
    if (u < w) return last;
    u -= w;
  }
  return last;
}

Vec sample_uniform_ellipsoid(Rng& rng, const SpdFactor& a) {
  const int p = a.dim();
  Vec x(p);
  for (int i = 0; i < p; ++i) x[i] = rng.normal();
  const double r = std::pow(rng.uniform_pos(), 1.0 / p) / x.norm();
  return a.lower().triangularView<Eigen::Lower>() * (r * x);
}

}  // namespace skewmix
