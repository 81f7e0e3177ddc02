#pragma once

#include <Eigen/Dense>

#include <span>

namespace skewmix {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kLog2Pi = 1.8378770664093454836;
inline constexpr double kSqrt2OverPi = 0.79788456080286535588;

// Lower Cholesky factor of a symmetric positive-definite matrix.
//
// A matrix that fails the factorization but whose smallest eigenvalue is
// within 1e-10 (relative to its trace) of zero is repaired by adding
// 1e-9 * trace / p to the diagonal; anything else throws InvalidParameter.
class SpdFactor {
 public:
  SpdFactor() = default;
  explicit SpdFactor(const Mat& a, const char* what = "matrix");

  int dim() const { return static_cast<int>(l_.rows()); }
  const Mat& lower() const { return l_; }
  double log_det() const { return log_det_; }
  // True when jitter was needed.
  bool repaired() const { return repaired_; }

  // A^{-1} b
  Vec solve(const Vec& b) const;
  Mat solve(const Mat& b) const;
  Mat inverse() const;
  // ||L^{-1} x||^2 = x^T A^{-1} x, written without temporaries.
  double quad_form(const double* x, double* scratch) const;
  double quad_form(const Vec& x) const;

 private:
  Mat l_;
  double log_det_ = 0.0;
  bool repaired_ = false;
};

bool is_spd(const Mat& a);

Mat symmetrize(const Mat& a);

// log N(x; mean, A) where `factor` factors A.
double log_mvn_density(const Vec& x, const Vec& mean, const SpdFactor& factor);

// log of the standard normal CDF. Uses an asymptotic series below -8 so the
// result stays finite far into the lower tail.
double log_normal_cdf(double x);
double normal_cdf(double x);
double log_normal_pdf(double x);

// log of the multivariate gamma function Gamma_p(a).
double log_multigamma(int p, double a);

// log density of the inverse-Wishart W^{-1}(dof, scale) at x. E[x] =
// scale / (dof - p - 1).
double log_inverse_wishart_density(const Mat& x, double dof, const Mat& scale);
double log_inverse_wishart_density(const SpdFactor& x, double dof, const SpdFactor& scale,
                                   const Mat& scale_matrix);

double log_sum_exp(std::span<const double> v);

}  // namespace skewmix
