#include "skewmix/error.hpp"
#include "skewmix/simulate.hpp"
#include "skewmix/sn_kernel.hpp"

#include <doctest.h>

#include <algorithm>

using namespace skewmix;

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  return v[static_cast<std::size_t>(q * (v.size() - 1))];
}

std::vector<double> column(const Dataset& d, const std::vector<int>& rows, int c) {
  std::vector<double> out;
  for (int i : rows) out.push_back(d.y(i, c));
  return out;
}

double median_stat(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("replica spec is valid and generation is deterministic") {
  const SimSpec spec = SimSpec::replica(200);
  CHECK_NOTHROW(spec.validate());
  Rng a(5), b(5);
  const SimResult r1 = generate(spec, a);
  const SimResult r2 = generate(spec, b);
  CHECK(r1.data.y == r2.data.y);
  CHECK(r1.labels == r2.labels);
  CHECK(r1.data.n() == 600);
  CHECK(r1.data.J() == 3);
  for (int k = 0; k < 3; ++k) {
    for (int c = 0; c < 2; ++c) {
      CHECK(std::abs(spec.alpha_true(k, c)) <= 6.0);
    }
  }
}

TEST_CASE("vanishing E puts every xi_j on xi0") {
  SimSpec spec = SimSpec::replica(20);
  for (auto& e : spec.E_true) e = 1e-12 * Mat::Identity(2, 2);
  Rng rng(1);
  const SimResult r = generate(spec, rng);
  for (int k = 0; k < 3; ++k) {
    for (int j = 0; j < 3; ++j) CHECK((r.xi[static_cast<std::size_t>(k)].row(j) - spec.xi0_true.row(k)).norm() < 1e-5);
  }
}

TEST_CASE("label frequencies follow the sample weights") {
  SimSpec spec = SimSpec::replica(10000);
  Rng rng(2);
  const SimResult r = generate(spec, rng);
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      int count = 0;
      for (int i = 0; i < r.data.n(); ++i) {
        count += r.data.sample_of[static_cast<std::size_t>(i)] == j && r.labels[static_cast<std::size_t>(i)] == k;
      }
      const double w = spec.weights_true(j, k);
      const double se = std::sqrt(w * (1 - w) / 10000);
      CHECK(std::abs(count / 10000.0 - w) < 3 * se);
    }
  }
}

TEST_CASE("cluster sample means match xi_j + omega delta sqrt(2/pi)") {
  SimSpec spec = SimSpec::replica(10000);
  Rng rng(3);
  const SimResult r = generate(spec, rng);
  for (int k = 0; k < 3; ++k) {
    const SnParamsDirect dir{Vec::Zero(2), spec.Sigma_true[static_cast<std::size_t>(k)],
                             spec.alpha_true.row(k).transpose()};
    const Vec offset = mean(dir);
    std::vector<int> rows;
    for (int i = 0; i < r.data.n(); ++i) {
      if (r.data.sample_of[static_cast<std::size_t>(i)] == 0 && r.labels[static_cast<std::size_t>(i)] == k) rows.push_back(i);
    }
    for (int c = 0; c < 2; ++c) {
      const auto v = column(r.data, rows, c);
      double m = 0, s2 = 0;
      for (double x : v) m += x;
      m /= v.size();
      for (double x : v) s2 += (x - m) * (x - m);
      const double se = std::sqrt(s2 / (v.size() - 1) / v.size());
      CHECK(std::abs(m - (r.xi[static_cast<std::size_t>(k)](0, c) + offset[c])) < 3 * se);
    }
  }
}

TEST_CASE("distortion") {
  SimSpec spec = SimSpec::replica(500);
  Rng rng(4);
  const SimResult r = generate(spec, rng);
  SUBCASE("unit factors are the identity") {
    const Dataset same = distort(r.data, r.labels, Distortion{true, 1.0, 1.0});
    CHECK(same.y == r.data.y);
  }
  SUBCASE("medians kept, IQR shrinks, structure preserved") {
    const Dataset dd = distort(r.data, r.labels, Distortion{true, 0.5, 0.9});
    CHECK(dd.n() == r.data.n());
    CHECK(dd.sample_of == r.data.sample_of);
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        std::vector<int> rows;
        for (int i = 0; i < r.data.n(); ++i) {
          if (r.data.sample_of[static_cast<std::size_t>(i)] == j && r.labels[static_cast<std::size_t>(i)] == k) rows.push_back(i);
        }
        for (int c = 0; c < 2; ++c) {
          const auto before = column(r.data, rows, c);
          const auto after = column(dd, rows, c);
          CHECK(median_stat(after) == median_stat(before));
          CHECK(quantile(after, 0.75) - quantile(after, 0.25) < quantile(before, 0.75) - quantile(before, 0.25));
        }
      }
    }
  }
}

TEST_CASE("invalid specs are rejected") {
  SimSpec spec = SimSpec::replica(10);
  spec.weights_true(0, 0) = 0.9;
  CHECK_THROWS_AS(spec.validate(), InvalidParameter);
  spec = SimSpec::replica(10);
  spec.Sigma_true[0](0, 0) = -1;
  CHECK_THROWS_AS(spec.validate(), InvalidParameter);
}
