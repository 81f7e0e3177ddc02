#include "skewmix/linalg.hpp"

#include "skewmix/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace skewmix {

namespace {

bool try_llt(const Mat& a, Mat& lower) {
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success) return false;
  lower = llt.matrixL();
  for (int i = 0; i < lower.rows(); ++i) {
    if (!(lower(i, i) > 0.0) || !std::isfinite(lower(i, i))) return false;
  }
  return true;
}

}  // namespace

SpdFactor::SpdFactor(const Mat& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw InvalidParameter(std::string(what) + ": expected a non-empty square matrix");
  }
  if (!a.allFinite()) throw InvalidParameter(std::string(what) + ": non-finite entries");
  const Mat sym = 0.5 * (a + a.transpose());
  if (!try_llt(sym, l_)) {
    const double p = static_cast<double>(sym.rows());
    const double scale = std::max(std::abs(sym.trace()) / p, std::numeric_limits<double>::min());
    Eigen::SelfAdjointEigenSolver<Mat> eig(sym, Eigen::EigenvaluesOnly);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig < -1e-10 * std::max(1.0, scale)) {
      throw InvalidParameter(std::string(what) + ": not positive-definite (min eigenvalue " +
                             std::to_string(min_eig) + ")");
    }
    Mat jittered = sym;
    jittered.diagonal().array() += 1e-9 * scale;
    if (!try_llt(jittered, l_)) {
      throw InvalidParameter(std::string(what) + ": not positive-definite after jitter");
    }
    repaired_ = true;
  }
  log_det_ = 2.0 * l_.diagonal().array().log().sum();
}

Vec SpdFactor::solve(const Vec& b) const {
  Vec x = l_.triangularView<Eigen::Lower>().solve(b);
  l_.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Mat SpdFactor::solve(const Mat& b) const {
  Mat x = l_.triangularView<Eigen::Lower>().solve(b);
  l_.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Mat SpdFactor::inverse() const {
  return solve(Mat(Mat::Identity(l_.rows(), l_.cols())));
}

double SpdFactor::quad_form(const double* x, double* scratch) const {
  const int p = dim();
  const double* l = l_.data();  // column-major
  double acc = 0.0;
  for (int i = 0; i < p; ++i) {
    double s = x[i];
    for (int j = 0; j < i; ++j) s -= l[i + j * p] * scratch[j];
    s /= l[i + i * p];
    scratch[i] = s;
    acc += s * s;
  }
  return acc;
}

double SpdFactor::quad_form(const Vec& x) const {
  Vec scratch(x.size());
  return quad_form(x.data(), scratch.data());
}

bool is_spd(const Mat& a) {
  if (a.rows() != a.cols() || a.rows() == 0 || !a.allFinite()) return false;
  if (!(a - a.transpose()).isZero(1e-9 * std::max(1.0, a.cwiseAbs().maxCoeff()))) return false;
  Mat l;
  return try_llt(a, l);
}

Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

double log_mvn_density(const Vec& x, const Vec& mean, const SpdFactor& factor) {
  const Vec d = x - mean;
  const double q = factor.quad_form(d);
  return -0.5 * (static_cast<double>(d.size()) * kLog2Pi + factor.log_det() + q);
}

double log_normal_pdf(double x) { return -0.5 * (kLog2Pi + x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double log_normal_cdf(double x) {
  if (x < -8.0) {
    // Phi(x) = phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - ...)
    const double r = 1.0 / (x * x);
    const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
    return log_normal_pdf(x) - std::log(-x) + std::log(series);
  }
  if (x > 5.0) return std::log1p(-0.5 * std::erfc(x / std::sqrt(2.0)));
  return std::log(normal_cdf(x));
}

double log_multigamma(int p, double a) {
  double r = 0.25 * p * (p - 1) * std::log(M_PI);
  for (int j = 0; j < p; ++j) r += std::lgamma(a - 0.5 * j);
  return r;
}

double log_inverse_wishart_density(const SpdFactor& x, double dof, const SpdFactor& scale,
                                   const Mat& scale_matrix) {
  const int p = x.dim();
  const double trace_term = x.solve(scale_matrix).trace();
  return 0.5 * dof * scale.log_det() - 0.5 * dof * p * std::log(2.0) -
         log_multigamma(p, 0.5 * dof) - 0.5 * (dof + p + 1.0) * x.log_det() -
         0.5 * trace_term;
}

double log_inverse_wishart_density(const Mat& x, double dof, const Mat& scale) {
  return log_inverse_wishart_density(SpdFactor(x, "inverse-Wishart argument"), dof,
                                     SpdFactor(scale, "inverse-Wishart scale"), scale);
}

double log_sum_exp(std::span<const double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace skewmix
