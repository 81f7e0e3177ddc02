#include "skewmix/chain_io.hpp"
#include "skewmix/error.hpp"
#include "skewmix/model_state.hpp"
#include "skewmix/random.hpp"
#include "skewmix/sn_kernel.hpp"
#include "stats.hpp"

#include <doctest.h>

#include <fstream>

#include <filesystem>
#include <numeric>

using namespace skewmix;

namespace {

Dataset small_dataset(int n_per, int J, int p, std::uint64_t seed) {
  Rng rng(seed);
  RowMat y(n_per * J, p);
  std::vector<int> s;
  for (int j = 0; j < J; ++j)
    for (int i = 0; i < n_per; ++i) {
      for (int c = 0; c < p; ++c) y(j * n_per + i, c) = rng.normal() + 3.0 * (i % 2);
      s.push_back(j);
    }
  return Dataset::make(y, s, J);
}

}  // namespace

TEST_CASE("dataset validation") {
  RowMat y(3, 1);
  y << 1, 2, 3;
  CHECK_NOTHROW(Dataset::make(y, {0, 1, 1}, 2));
  CHECK_THROWS_AS(Dataset::make(y, {0, 0, 0}, 2), InvalidParameter);  // sample 2 empty
  CHECK_THROWS_AS(Dataset::make(y, {0, 2, 1}, 2), InvalidParameter);  // index out of range
  y(1, 0) = std::nan("");
  CHECK_THROWS_AS(Dataset::make(y, {0, 1, 1}, 2), InvalidParameter);
  CHECK(Dataset::empty(2, 3).n() == 0);
}

TEST_CASE("init_state is deterministic and satisfies the invariants") {
  const Dataset d = small_dataset(40, 3, 2, 1);
  Hyper h = Hyper::defaults_for(d);
  h.K = 10;
  const InitialState a = init_state(d, h, 5);
  const InitialState b = init_state(d, h, 5);
  CHECK(a.state.T == b.state.T);
  CHECK(a.state.xi0 == b.state.xi0);
  CHECK_NOTHROW(check_invariants(a.state));
  CHECK(a.state.eta == doctest::Approx(h.a_eta / h.b_eta));
  CHECK(static_cast<int>(a.clouds.size()) == h.K);
  CHECK(a.clouds[0].size() == h.M);
  CHECK_FALSE(a.fewer_points_than_clusters);
  h.K = 200;
  CHECK(init_state(d, h, 5).fewer_points_than_clusters);
}

TEST_CASE("relabel moves every cluster-indexed field with its label") {
  const Dataset d = small_dataset(10, 2, 2, 2);
  Hyper h = Hyper::defaults_for(d);
  h.K = 4;
  ChainState s = init_state(d, h, 1).state;
  s.psi.setRandom();
  for (int k = 0; k < 4; ++k) s.G[static_cast<std::size_t>(k)] *= (k + 1);
  const ChainState before = s;
  const std::vector<int> perm{2, 0, 3, 1};
  s.relabel(perm);
  for (int b = 0; b < 4; ++b) {
    const int a = perm[static_cast<std::size_t>(b)];
    CHECK(s.psi.row(a) == before.psi.row(b));
    CHECK(s.xi0.row(a) == before.xi0.row(b));
    CHECK(s.G[static_cast<std::size_t>(a)] == before.G[static_cast<std::size_t>(b)]);
    CHECK(s.log_weights.col(a) == before.log_weights.col(b));
  }
  for (int i = 0; i < s.n(); ++i) CHECK(s.T[static_cast<std::size_t>(i)] == perm[static_cast<std::size_t>(before.T[static_cast<std::size_t>(i)])]);
  CHECK_THROWS_AS(s.relabel({0, 0, 1, 2}), InvalidParameter);
}

TEST_CASE("check_invariants rejects broken states") {
  const Dataset d = small_dataset(10, 2, 2, 3);
  Hyper h = Hyper::defaults_for(d);
  h.K = 3;
  ChainState s = init_state(d, h, 1).state;
  ChainState bad = s;
  bad.log_weights(0, 0) += 0.1;
  CHECK_THROWS_AS(check_invariants(bad), InvalidParameter);
  bad = s;
  bad.G[1](0, 0) = -1.0;
  CHECK_THROWS_AS(check_invariants(bad), InvalidParameter);
  bad = s;
  bad.T[0] = 3;
  CHECK_THROWS_AS(check_invariants(bad), InvalidParameter);
}

TEST_CASE("power_loglik matches a direct mixture computation") {
  const Dataset d = small_dataset(15, 2, 2, 4);
  Hyper h = Hyper::defaults_for(d);
  h.K = 3;
  h.zeta = 0.3;
  ChainState s = init_state(d, h, 2).state;
  s.psi(1, 0) = 0.7;
  double total = 0.0;
  for (int i = 0; i < d.n(); ++i) {
    const int j = d.sample_of[static_cast<std::size_t>(i)];
    double mix = 0.0;
    for (int k = 0; k < 3; ++k) {
      const SnParamsDirect dir = to_direct(SnParamsAugmented{s.xi[static_cast<std::size_t>(k)].row(j).transpose(),
                                                             s.G[static_cast<std::size_t>(k)], s.psi.row(k).transpose()});
      mix += std::exp(s.log_weights(j, k)) * density(dir, d.y.row(i).transpose());
    }
    total += std::log(mix);
  }
  CHECK(power_loglik(s, d, h) == doctest::Approx(0.3 * total).epsilon(1e-12));
}

TEST_CASE("chain file round trip") {
  const Dataset d = small_dataset(8, 2, 3, 5);
  Hyper h = Hyper::defaults_for(d);
  h.K = 4;
  std::vector<ChainState> snaps;
  std::vector<int> its;
  Rng rng(9);
  for (int r = 0; r < 3; ++r) {
    ChainState s = init_state(d, h, 10 + r).state;
    s.psi.setRandom();
    s.eta = 0.1 * (r + 1);
    s.log_weights(0, 0) = -std::numeric_limits<double>::infinity();
    snaps.push_back(s);
    its.push_back(100 + r);
  }
  const auto path = (std::filesystem::temp_directory_path() / "skewmix_chain_test.bin").string();
  write_chain(path, snaps, its);
  const ChainFile cf = read_chain(path);
  CHECK(cf.n == d.n());
  CHECK(cf.p == 3);
  CHECK(cf.J == 2);
  CHECK(cf.K == 4);
  CHECK(cf.iterations == its);
  REQUIRE(cf.snapshots.size() == 3);
  for (std::size_t r = 0; r < 3; ++r) {
    const ChainState& a = snaps[r];
    const ChainState& b = cf.snapshots[r];
    CHECK(a.T == b.T);
    CHECK(a.log_weights == b.log_weights);
    CHECK(a.xi0 == b.xi0);
    CHECK(a.psi == b.psi);
    CHECK(a.eta == b.eta);
    CHECK(a.z == b.z);
    for (int k = 0; k < 4; ++k) {
      CHECK(a.xi[static_cast<std::size_t>(k)] == b.xi[static_cast<std::size_t>(k)]);
      CHECK(a.G[static_cast<std::size_t>(k)] == b.G[static_cast<std::size_t>(k)]);
      CHECK(a.E[static_cast<std::size_t>(k)] == b.E[static_cast<std::size_t>(k)]);
    }
  }
  {
    std::ofstream junk(path, std::ios::binary);
    junk << "NOTACHAINFILE";
  }
  CHECK_THROWS_AS(read_chain(path), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("random streams are independent of call order") {
  Rng a = Rng::stream(1, 2, 3, 4);
  Rng b = Rng::stream(1, 2, 3, 4);
  Rng c = Rng::stream(1, 2, 3, 5);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
}

TEST_CASE("truncated normal sampler matches its cdf") {
  Rng rng(31);
  for (double mean : {-3.0, -0.2, 0.0, 1.5, 6.0}) {
    const double sd = 0.8;
    std::vector<double> x(20000);
    for (auto& v : x) v = sample_truncated_normal_positive(rng, mean, sd);
    const double z0 = testing_stats::std_normal_cdf(-mean / sd);
    const double d = testing_stats::ks_statistic(x, [&](double t) {
      return (testing_stats::std_normal_cdf((t - mean) / sd) - z0) / (1.0 - z0);
    });
    INFO("mean = " << mean);
    CHECK(testing_stats::ks_pvalue(d, x.size()) > 0.001);
  }
}

TEST_CASE("truncated normal log density integrates to one") {
  for (double mean : {-4.0, 0.3, 2.0}) {
    const double total = testing_stats::simpson(
        [&](double t) { return std::exp(log_truncated_normal_positive(t, mean, 0.6)); }, 0.0, 12.0, 20000);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("inverse-Wishart draws have the right mean") {
  Rng rng(7);
  Mat scale(2, 2);
  scale << 2.0, 0.5, 0.5, 1.0;
  const double dof = 7.0;
  const SpdFactor f(scale);
  Mat acc = Mat::Zero(2, 2);
  const int n = 40000;
  for (int r = 0; r < n; ++r) acc += sample_inverse_wishart(rng, dof, f);
  const Mat expected = scale / (dof - 2 - 1);
  CHECK((acc / n - expected).norm() < 0.02);
}

TEST_CASE("log inverse-Wishart density matches the 1-d inverse-gamma form") {
  // W^{-1}(nu, s) in 1-d is InvGamma(nu / 2, s / 2).
  const double nu = 5.0, s = 3.0, x = 1.7;
  const double a = nu / 2, b = s / 2;
  const double expected = a * std::log(b) - std::lgamma(a) - (a + 1) * std::log(x) - b / x;
  CHECK(log_inverse_wishart_density(Mat::Constant(1, 1, x), nu, Mat::Constant(1, 1, s)) ==
        doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("log Dirichlet draws: simplex and moments, small shapes included") {
  Rng rng(13);
  const std::vector<double> alpha{0.01, 0.5, 3.0, 0.002};
  const double a0 = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  Vec mean = Vec::Zero(4);
  const int n = 100000;
  for (int r = 0; r < n; ++r) {
    const Vec lw = sample_log_dirichlet(rng, alpha);
    const Vec w = lw.array().exp();
    CHECK(std::abs(w.sum() - 1.0) < 1e-12);
    mean += w;
  }
  mean /= n;
  for (int k = 0; k < 4; ++k) {
    const double m = alpha[static_cast<std::size_t>(k)] / a0;
    const double se = std::sqrt(m * (1 - m) / (a0 + 1) / n);
    CHECK(std::abs(mean[k] - m) < 3.0 * se + 1e-12);
  }
}

TEST_CASE("uniform ellipsoid draws stay inside and are uniform in radius") {
  Rng rng(19);
  Mat a(2, 2);
  a << 1.0, 0.6, 0.6, 1.0;
  const SpdFactor f(a);
  std::vector<double> r2;
  for (int i = 0; i < 20000; ++i) {
    const Vec v = sample_uniform_ellipsoid(rng, f);
    const double q = f.quad_form(v);
    REQUIRE(q < 1.0);
    r2.push_back(q);  // uniform on [0, 1] in 2-d
  }
  const double d = testing_stats::ks_statistic(r2, [](double t) { return t; });
  CHECK(testing_stats::ks_pvalue(d, r2.size()) > 0.001);
}

TEST_CASE("SpdFactor repairs tiny negative eigenvalues only") {
  Mat a(2, 2);
  a << 1.0, 1.0, 1.0, 1.0;
  CHECK_NOTHROW(SpdFactor(a, "A"));
  CHECK(SpdFactor(a, "A").repaired());
  a(1, 1) = 0.5;
  CHECK_THROWS_AS(SpdFactor(a, "A"), InvalidParameter);
}
