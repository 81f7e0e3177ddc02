#pragma once

// Coarsened full conditionals and proposal distributions of the cluster-level
// parameters. Every function is pure: it returns the parameters of the
// distribution, never a draw, so tests can compare them against hand-written
// uncoarsened forms.

#include "skewmix/linalg.hpp"
#include "skewmix/model_state.hpp"

#include <vector>

namespace skewmix {

// The observations currently assigned to one cluster.
struct ClusterView {
  std::vector<int> members;     // observation indices into the dataset
  std::vector<int> sample_of;   // sample index of each member
  RowMat y;                     // members' rows, n_k x p
  std::vector<int> n_j;         // members per sample (length J)
  Mat y_sum;                    // per-sample column sums of y, J x p

  int n() const { return static_cast<int>(members.size()); }
  int p() const { return static_cast<int>(y.cols()); }
  int J() const { return static_cast<int>(n_j.size()); }

  static ClusterView gather(const Dataset& data, const std::vector<int>& T, int k);
  static ClusterView gather(const Dataset& data, std::vector<int> members);
};

struct GaussianParams {
  Vec mean;
  Mat cov;
};

struct InverseWishartParams {
  double dof = 0.0;
  Mat scale;
};

// Half-normal-augmentation conditional of |z_i|: N(mean_i, variance)
// truncated to [0, inf).
struct ZConditional {
  double variance = 1.0;   // v = (1 + zeta psi' G^{-1} psi)^{-1}
  Vec mean;                // m_i = v zeta (y_i - xi_{j(i)})' G^{-1} psi
};

ZConditional z_conditional(const ClusterView& view, const Mat& xi, const Mat& g, const Vec& psi,
                           double zeta);

// xi_{j,k} | ... for a sample with n_{j,k} > 0:
//   cov  = (E^{-1} + zeta n_jk G^{-1})^{-1}
//   mean = cov (E^{-1} xi0 + zeta n_jk G^{-1} (ybar_jk - psi mean|z|_jk))
// For n_{j,k} = 0 this collapses to N(xi0, E).
GaussianParams xi_conditional(const ClusterView& view, int j, const Vec& absz, const Mat& g,
                              const Vec& psi, const Vec& xi0, const Mat& e, double zeta);

// Inverse-Wishart proposal for G_k: dof zeta n_k + m, scale
// Lambda + zeta sum_i (y_i - psi |z_i| - xi_j)(...)'.
InverseWishartParams g_proposal(const ClusterView& view, const Vec& absz, const Mat& xi,
                                const Vec& psi, const Hyper& hyper);

// Normal proposal for psi_k: mean sum|z_i|(y_i - xi_j) / sum z_i^2,
// cov G / (zeta sum z_i^2).
GaussianParams psi_proposal(const ClusterView& view, const Vec& absz, const Mat& xi, const Mat& g,
                            double zeta);

// xi_{0,k} | ...: cov B* = (B0^{-1} + zeta J E^{-1})^{-1},
// mean B* (B0^{-1} b0 + zeta J E^{-1} xibar).
GaussianParams xi0_conditional(const Mat& xi, const Mat& e, const Hyper& hyper);

// E_k | ...: W^{-1}(nu0 + J, E0 + sum_j (xi_j - xi0)(xi_j - xi0)').
InverseWishartParams e_conditional(const Mat& xi, const Vec& xi0, const Hyper& hyper);

// Dirichlet parameters of one sample's weight row: zeta n_jk + eta / K.
std::vector<double> weight_dirichlet_params(const Eigen::VectorXi& counts_row, double eta,
                                            double zeta);

}  // namespace skewmix
