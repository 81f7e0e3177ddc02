#include "skewmix/conditionals.hpp"

#include "skewmix/error.hpp"

namespace skewmix {

ClusterView ClusterView::gather(const Dataset& data, const std::vector<int>& T, int k) {
  std::vector<int> members;
  for (int i = 0; i < static_cast<int>(T.size()); ++i) {
    if (T[static_cast<std::size_t>(i)] == k) members.push_back(i);
  }
  return gather(data, std::move(members));
}

ClusterView ClusterView::gather(const Dataset& data, std::vector<int> members) {
  ClusterView v;
  v.members = std::move(members);
  v.y.resize(static_cast<Eigen::Index>(v.members.size()), data.p());
  v.sample_of.resize(v.members.size());
  v.n_j.assign(static_cast<std::size_t>(data.J()), 0);
  v.y_sum = Mat::Zero(data.J(), data.p());
  for (std::size_t r = 0; r < v.members.size(); ++r) {
    const int i = v.members[r];
    v.y.row(static_cast<Eigen::Index>(r)) = data.y.row(i);
    const int j = data.sample_of[static_cast<std::size_t>(i)];
    v.sample_of[r] = j;
    ++v.n_j[static_cast<std::size_t>(j)];
    v.y_sum.row(j) += data.y.row(i);
  }
  return v;
}

ZConditional z_conditional(const ClusterView& view, const Mat& xi, const Mat& g, const Vec& psi,
                           double zeta) {
  const SpdFactor gf(g, "G");
  const Vec ginv_psi = gf.solve(psi);
  ZConditional out;
  out.variance = 1.0 / (1.0 + zeta * psi.dot(ginv_psi));
  out.mean.resize(view.n());
  for (int r = 0; r < view.n(); ++r) {
    const int j = view.sample_of[static_cast<std::size_t>(r)];
    const double proj = (view.y.row(r) - xi.row(j)).dot(ginv_psi.transpose());
    out.mean[r] = out.variance * zeta * proj;
  }
  return out;
}

GaussianParams xi_conditional(const ClusterView& view, int j, const Vec& absz, const Mat& g,
                              const Vec& psi, const Vec& xi0, const Mat& e, double zeta) {
  const int njk = view.n_j[static_cast<std::size_t>(j)];
  if (njk == 0) return {xi0, e};
  double zbar = 0.0;
  for (int r = 0; r < view.n(); ++r) {
    if (view.sample_of[static_cast<std::size_t>(r)] == j) zbar += absz[r];
  }
  const Vec ybar = view.y_sum.row(j).transpose() / njk;
  zbar /= njk;
  const SpdFactor ef(e, "E");
  const SpdFactor gf(g, "G");
  const Mat e_inv = ef.inverse();
  const Mat g_inv = gf.inverse();
  const Mat precision = symmetrize(e_inv + zeta * njk * g_inv);
  const SpdFactor pf(precision, "xi precision");
  const Vec rhs = e_inv * xi0 + zeta * njk * (g_inv * (ybar - psi * zbar));
  return {pf.solve(rhs), symmetrize(pf.inverse())};
}

InverseWishartParams g_proposal(const ClusterView& view, const Vec& absz, const Mat& xi,
                                const Vec& psi, const Hyper& hyper) {
  const int p = view.p();
  Mat scatter = Mat::Zero(p, p);
  Vec r(p);
  for (int i = 0; i < view.n(); ++i) {
    const int j = view.sample_of[static_cast<std::size_t>(i)];
    r = view.y.row(i).transpose() - psi * absz[i] - xi.row(j).transpose();
    scatter.noalias() += r * r.transpose();
  }
  return {hyper.zeta * view.n() + hyper.m, symmetrize(hyper.Lambda + hyper.zeta * scatter)};
}

GaussianParams psi_proposal(const ClusterView& view, const Vec& absz, const Mat& xi, const Mat& g,
                            double zeta) {
  const int p = view.p();
  Vec num = Vec::Zero(p);
  double z2 = 0.0;
  for (int i = 0; i < view.n(); ++i) {
    const int j = view.sample_of[static_cast<std::size_t>(i)];
    num += absz[i] * (view.y.row(i) - xi.row(j)).transpose();
    z2 += absz[i] * absz[i];
  }
  if (!(z2 > 0.0)) throw NumericalFailure("psi proposal: sum of z^2 is zero");
  return {num / z2, g / (zeta * z2)};
}

GaussianParams xi0_conditional(const Mat& xi, const Mat& e, const Hyper& hyper) {
  const int J = static_cast<int>(xi.rows());
  const Vec xibar = xi.colwise().mean().transpose();
  const Mat e_inv = SpdFactor(e, "E").inverse();
  const SpdFactor bf(hyper.B0, "B0");
  const Mat b_inv = bf.inverse();
  const Mat precision = symmetrize(b_inv + hyper.zeta * J * e_inv);
  const SpdFactor pf(precision, "xi0 precision");
  const Vec rhs = b_inv * hyper.b0 + hyper.zeta * J * (e_inv * xibar);
  return {pf.solve(rhs), symmetrize(pf.inverse())};
}

InverseWishartParams e_conditional(const Mat& xi, const Vec& xi0, const Hyper& hyper) {
  const int J = static_cast<int>(xi.rows());
  Mat s = hyper.E0;
  for (int j = 0; j < J; ++j) {
    const Vec d = xi.row(j).transpose() - xi0;
    s.noalias() += d * d.transpose();
  }
  return {hyper.nu0 + J, symmetrize(s)};
}

std::vector<double> weight_dirichlet_params(const Eigen::VectorXi& counts_row, double eta,
                                            double zeta) {
  const auto K = static_cast<std::size_t>(counts_row.size());
  std::vector<double> a(K);
  for (std::size_t k = 0; k < K; ++k) {
    a[k] = zeta * counts_row[static_cast<Eigen::Index>(k)] + eta / static_cast<double>(K);
  }
  return a;
}

}  // namespace skewmix
