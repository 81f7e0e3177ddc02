#include "skewmix/sn_kernel.hpp"

#include "skewmix/error.hpp"

#include <cmath>
#include <limits>

namespace skewmix {

namespace {

void check_dims(const Vec& xi, const Mat& m, const Vec& v, const char* what) {
  if (xi.size() == 0 || m.rows() != xi.size() || m.cols() != xi.size() || v.size() != xi.size()) {
    throw InvalidParameter(std::string(what) + ": inconsistent dimensions");
  }
  if (!xi.allFinite() || !v.allFinite()) {
    throw InvalidParameter(std::string(what) + ": non-finite entries");
  }
}

}  // namespace

Vec marginal_scales(const Mat& sigma) { return sigma.diagonal().array().sqrt(); }

Mat correlation_of(const Mat& sigma) {
  const Vec inv_w = marginal_scales(sigma).cwiseInverse();
  Mat omega = inv_w.asDiagonal() * sigma * inv_w.asDiagonal();
  omega.diagonal().setOnes();
  return symmetrize(omega);
}

SnParamsDelta to_delta(const SnParamsDirect& params) {
  check_dims(params.xi, params.sigma, params.alpha, "skew-normal (direct)");
  SpdFactor(params.sigma, "Sigma");
  const Mat omega = correlation_of(params.sigma);
  const Vec oa = omega * params.alpha;
  const double q = params.alpha.dot(oa);
  return {params.xi, params.sigma, oa / std::sqrt(1.0 + q)};
}

SnParamsDirect to_direct(const SnParamsDelta& params) {
  check_dims(params.xi, params.sigma, params.delta, "skew-normal (delta)");
  const SpdFactor omega(correlation_of(params.sigma), "Omega");
  const Vec oinv_delta = omega.solve(params.delta);
  const double q = params.delta.dot(oinv_delta);
  if (!(q < 1.0)) throw InvalidParameter("delta outside the unit ellipsoid of Omega");
  return {params.xi, params.sigma, oinv_delta / std::sqrt(1.0 - q)};
}

SnParamsAugmented to_augmented(const SnParamsDelta& params) {
  check_dims(params.xi, params.sigma, params.delta, "skew-normal (delta)");
  if ((params.delta.array().abs() >= 1.0).any()) {
    throw InvalidParameter("delta has a component with |delta_j| >= 1");
  }
  const Vec psi = marginal_scales(params.sigma).cwiseProduct(params.delta);
  Mat g = symmetrize(params.sigma - psi * psi.transpose());
  SpdFactor(g, "G");
  return {params.xi, std::move(g), psi};
}

SnParamsDelta to_delta(const SnParamsAugmented& params) {
  check_dims(params.xi, params.g, params.psi, "skew-normal (augmented)");
  SpdFactor(params.g, "G");
  Mat sigma = symmetrize(params.g + params.psi * params.psi.transpose());
  Vec delta = params.psi.cwiseQuotient(marginal_scales(sigma));
  return {params.xi, std::move(sigma), std::move(delta)};
}

SnParamsAugmented to_augmented(const SnParamsDirect& params) {
  return to_augmented(to_delta(params));
}

SnParamsDirect to_direct(const SnParamsAugmented& params) {
  return to_direct(to_delta(params));
}

double log_density(const SnParamsDirect& params, const Vec& y) {
  check_dims(params.xi, params.sigma, params.alpha, "skew-normal (direct)");
  if (y.size() != params.xi.size()) throw InvalidParameter("density: dimension mismatch");
  return SnEvaluator(params).log_density(y, params.xi);
}

double density(const SnParamsDirect& params, const Vec& y) {
  return std::exp(log_density(params, y));
}

Vec mean(const SnParamsDirect& params) {
  const SnParamsAugmented aug = to_augmented(params);
  return aug.xi + kSqrt2OverPi * aug.psi;
}

RowMat sample(const SnParamsDirect& params, Rng& rng, int count) {
  const SnParamsDelta d = to_delta(params);
  const int p = static_cast<int>(d.xi.size());
  Mat joint(p + 1, p + 1);
  joint(0, 0) = 1.0;
  joint.block(1, 0, p, 1) = d.delta;
  joint.block(0, 1, 1, p) = d.delta.transpose();
  joint.block(1, 1, p, p) = correlation_of(d.sigma);
  const SpdFactor factor(joint, "latent (Z, W) covariance");
  const Vec w = marginal_scales(d.sigma);
  const Vec zero = Vec::Zero(p + 1);
  RowMat out(count, p);
  for (int r = 0; r < count; ++r) {
    const Vec zw = sample_mvn(rng, zero, factor);
    const double sign = zw[0] >= 0.0 ? 1.0 : -1.0;
    for (int j = 0; j < p; ++j) out(r, j) = d.xi[j] + w[j] * sign * zw[j + 1];
  }
  return out;
}

double jacobian_log(const SnParamsAugmented& params) {
  check_dims(params.xi, params.g, params.psi, "skew-normal (augmented)");
  double s = 0.0;
  for (Eigen::Index j = 0; j < params.psi.size(); ++j) {
    s += std::log(params.g(j, j) + params.psi[j] * params.psi[j]);
  }
  return -0.5 * s;
}

double skew_prior_logdensity(const SnParamsDelta& params) {
  check_dims(params.xi, params.sigma, params.delta, "skew-normal (delta)");
  const int p = static_cast<int>(params.delta.size());
  const SpdFactor omega(correlation_of(params.sigma), "Omega");
  const double q = omega.quad_form(params.delta);
  if (!(q < 1.0)) return -std::numeric_limits<double>::infinity();
  const double log_unit_ball = 0.5 * p * std::log(M_PI) - std::lgamma(0.5 * p + 1.0);
  return -(log_unit_ball + 0.5 * omega.log_det());
}

SnEvaluator::SnEvaluator(const SnParamsAugmented& shape) {
  const Mat sigma = symmetrize(shape.g + shape.psi * shape.psi.transpose());
  init(sigma);
  // alpha' w^{-1} = psi' Sigma^{-1} / sqrt(1 - psi' Sigma^{-1} psi)
  const Vec sinv_psi = factor_.solve(shape.psi);
  const double q = shape.psi.dot(sinv_psi);
  if (!(q < 1.0)) throw InvalidParameter("augmented skew-normal: psi' Sigma^{-1} psi >= 1");
  slant_ = sinv_psi / std::sqrt(1.0 - q);
}

SnEvaluator::SnEvaluator(const SnParamsDirect& shape) {
  init(shape.sigma);
  slant_ = shape.alpha.cwiseQuotient(marginal_scales(shape.sigma));
}

void SnEvaluator::init(const Mat& sigma) {
  factor_ = SpdFactor(sigma, "Sigma");
  constant_ = std::log(2.0) - 0.5 * (factor_.dim() * kLog2Pi + factor_.log_det());
}

double SnEvaluator::log_density(const double* y, const double* xi, double* scratch) const {
  const int p = dim();
  double* d = scratch + p;
  double s = 0.0;
  for (int j = 0; j < p; ++j) {
    d[j] = y[j] - xi[j];
    s += slant_[j] * d[j];
  }
  return constant_ - 0.5 * factor_.quad_form(d, scratch) + log_normal_cdf(s);
}

double SnEvaluator::log_density(const Vec& y, const Vec& xi) const {
  Vec scratch(2 * dim());
  return log_density(y.data(), xi.data(), scratch.data());
}

}  // namespace skewmix
