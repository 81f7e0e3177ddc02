#pragma once

// Multivariate skew-normal kernel in three equivalent parametrizations:
//
//   direct     (xi, Sigma, alpha)  density 2 phi_p(y; xi, Sigma) Phi(alpha' w^{-1} (y - xi))
//   delta      (xi, Sigma, delta)  delta = Omega alpha / sqrt(1 + alpha' Omega alpha)
//   augmented  (xi, G, psi)        psi = w delta, G = Sigma - psi psi'
//
// where w = diag(sqrt(Sigma_ii)) and Omega = w^{-1} Sigma w^{-1}. Sampler state
// is always kept in the augmented form.

#include "skewmix/linalg.hpp"
#include "skewmix/random.hpp"

namespace skewmix {

struct SnParamsDirect {
  Vec xi;
  Mat sigma;
  Vec alpha;
};

struct SnParamsDelta {
  Vec xi;
  Mat sigma;
  Vec delta;
};

struct SnParamsAugmented {
  Vec xi;
  Mat g;
  Vec psi;
};

// Marginal scales sqrt(Sigma_ii).
Vec marginal_scales(const Mat& sigma);
// Correlation matrix Omega of a scale matrix.
Mat correlation_of(const Mat& sigma);

SnParamsDelta to_delta(const SnParamsDirect& params);
SnParamsDirect to_direct(const SnParamsDelta& params);
SnParamsAugmented to_augmented(const SnParamsDelta& params);
SnParamsDelta to_delta(const SnParamsAugmented& params);
SnParamsAugmented to_augmented(const SnParamsDirect& params);
SnParamsDirect to_direct(const SnParamsAugmented& params);

double log_density(const SnParamsDirect& params, const Vec& y);
double density(const SnParamsDirect& params, const Vec& y);

// E[Y] = xi + w delta sqrt(2/pi) = xi + psi sqrt(2/pi).
Vec mean(const SnParamsDirect& params);

// Draws `count` rows through the (Z, W) latent construction.
RowMat sample(const SnParamsDirect& params, Rng& rng, int count);

// log |J| of (xi, Sigma, delta) -> (xi, G, psi): -1/2 sum_j log(G_jj + psi_j^2).
double jacobian_log(const SnParamsAugmented& params);

// log p(delta | Sigma): uniform on {delta : delta' Omega^{-1} delta < 1}, -inf
// outside.
double skew_prior_logdensity(const SnParamsDelta& params);

// Precomputed log-density for one (Sigma, alpha) pair and any location.
// log f(y) = c - q(y - xi)/2 + log Phi(a'(y - xi)).
class SnEvaluator {
 public:
  SnEvaluator() = default;
  explicit SnEvaluator(const SnParamsAugmented& shape);
  explicit SnEvaluator(const SnParamsDirect& shape);

  int dim() const { return factor_.dim(); }
  // `scratch` must hold 2 * dim() doubles.
  double log_density(const double* y, const double* xi, double* scratch) const;
  double log_density(const Vec& y, const Vec& xi) const;

 private:
  void init(const Mat& sigma);

  SpdFactor factor_;
  Vec slant_;
  double constant_ = 0.0;
};

}  // namespace skewmix
