#pragma once

#include "skewmix/linalg.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace skewmix {

// xoshiro256** generator. Streams are derived from a seed plus up to three
// counters (e.g. iteration, cluster, particle), so any work item can build
// its own generator without touching shared state. That is what makes results
// independent of the worker count.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0x5eed);

  static Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                    std::uint64_t c = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Uniform on [0, 1).
  double uniform();
  // Uniform on (0, 1), safe to take the log of.
  double uniform_pos();
  std::size_t uniform_index(std::size_t n);
  double normal();
  double exponential();
  double gamma(double shape, double rate = 1.0);
  // log of a Gamma(shape, 1) draw; stays finite for tiny shapes where the
  // draw itself underflows.
  double log_gamma_variate(double shape);
  double chi_square(double dof);

 private:
  std::array<std::uint64_t, 4> s_{};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t& state);

// N(mean, sd^2) truncated to [0, inf).
double sample_truncated_normal_positive(Rng& rng, double mean, double sd);
// log density of the above at x >= 0.
double log_truncated_normal_positive(double x, double mean, double sd);

// mean + L z, L the lower Cholesky factor of the covariance.
Vec sample_mvn(Rng& rng, const Vec& mean, const SpdFactor& cov);

// Draw from W^{-1}(dof, scale); requires dof > p - 1.
Mat sample_inverse_wishart(Rng& rng, double dof, const SpdFactor& scale);

// Normalized log weights of a Dirichlet(alpha) draw.
Vec sample_log_dirichlet(Rng& rng, std::span<const double> alpha);

// Index drawn with probability proportional to exp(log_p); returns -1 when
// every entry is -inf.
int sample_categorical_log(Rng& rng, std::span<const double> log_p);

// Uniform on the ellipsoid {x : x^T A^{-1} x <= 1}.
Vec sample_uniform_ellipsoid(Rng& rng, const SpdFactor& a);

template <typename T>
void shuffle(Rng& rng, std::vector<T>& v) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.uniform_index(i)]);
  }
}

}  // namespace skewmix
