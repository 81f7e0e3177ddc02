#include "skewmix/diagnostics.hpp"
#include "skewmix/error.hpp"
#include "skewmix/pipeline.hpp"
#include "skewmix/simulate.hpp"

#include <doctest.h>

using namespace skewmix;

TEST_CASE("active cluster counts") {
  RowMat y = RowMat::Zero(6, 1);
  const Dataset d = Dataset::make(y, {0, 0, 0, 1, 1, 1}, 2);
  CHECK((active_clusters(d, {4, 4, 4, 4, 4, 4}) == std::vector<int>{1, 1}));
  CHECK((active_clusters(d, {0, 0, 1, 2, 2, 2}) == std::vector<int>{2, 1}));
  CHECK((active_clusters(d, {0, 0, 1, 2, 2, 2}, 0.4) == std::vector<int>{1, 1}));
  // Invariant under a consistent relabeling.
  CHECK((active_clusters(d, {7, 7, 3, 5, 5, 5}) == active_clusters(d, {0, 0, 1, 2, 2, 2})));
  CHECK((constant_count({3, 3, 3})));
  CHECK_FALSE((constant_count({3, 4, 3})));
  CHECK((constant_count({2})));
}

TEST_CASE("alignment score") {
  RowMat y(6, 1);
  y << 0, 1, 10, 2, 3, 12;
  const Dataset d = Dataset::make(y, {0, 0, 0, 1, 1, 1}, 2);
  const std::vector<int> lab{0, 0, 1, 0, 0, 1};
  CHECK(alignment_score(d, y, lab) == 1.0);
  RowMat aligned = y;
  aligned.bottomRows(3).array() -= 2.0;
  CHECK(alignment_score(d, aligned, lab) == 0.0);
  // Translation invariance.
  RowMat shifted = y.array() + 5.0;
  Dataset ds = d;
  ds.y = shifted;
  RowMat half = y;
  half.bottomRows(3).array() -= 1.0;
  CHECK(alignment_score(ds, half.array() + 5.0, lab) == doctest::Approx(alignment_score(d, half, lab)));
}

TEST_CASE("adjusted Rand index") {
  CHECK((adjusted_rand_index({0, 0, 1, 1}, {5, 5, 2, 2}) == 1.0));
  // Reference value from the contingency-table formula.
  const double ari = adjusted_rand_index({0, 0, 0, 1, 1, 1}, {0, 0, 1, 1, 2, 2});
  CHECK(ari == doctest::Approx(0.24242424242424243));
}

TEST_CASE("marginal histograms") {
  RowMat y(5, 2);
  y << 0, 1, 1, 1, 2, 1, 3, 1, 4, 1;
  const std::vector<int> s{0, 0, 1, 1, 1};
  const MarginalTable t = marginal_export(y, s, 2, 4);
  for (int c = 0; c < 2; ++c) {
    const double w = t.edges[static_cast<std::size_t>(c)][1] - t.edges[static_cast<std::size_t>(c)][0];
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(t.density[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)].sum() * w - 1.0) < 1e-12);
    }
  }
  // Marker 2 is constant: all mass in one bin of density 1 / width.
  const double w2 = t.edges[1][1] - t.edges[1][0];
  CHECK(t.density[1][0].maxCoeff() == doctest::Approx(1.0 / w2));
  CHECK_THROWS_AS(marginal_export(y, s, 2, 1), InvalidParameter);

  // Shifting a sample by c moves its mass by floor(c / width) bins when the
  // shared range does not change.
  RowMat z(4, 1);
  z << 0.0, 10.0, 1.1, 3.0;
  const std::vector<int> s2{0, 0, 1, 1};
  const MarginalTable a = marginal_export(z, s2, 2, 10);  // width 1
  RowMat zs = z;
  zs(2, 0) += 4.3;
  const MarginalTable b = marginal_export(zs, s2, 2, 10);
  const Vec& da = a.density[0][1];
  const Vec& db = b.density[0][1];
  CHECK(db[1 + 4] == da[1]);
}

TEST_CASE("zeta sweep") {
  const SimSpec spec = SimSpec::replica(60);
  Rng rng(8);
  const SimResult sim = generate(spec, rng);
  Hyper h = Hyper::defaults_for(sim.data);
  h.K = 10;
  SamplerConfig c;
  c.n_iter = 30;
  c.n_burn = 20;
  c.seed = 3;
  const auto rows = zeta_sweep(sim.data, h, {0.5}, c);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].error.empty());
  CHECK(rows[0].constant_count == constant_count(rows[0].active));
  Hyper h5 = h;
  h5.zeta = 0.5;
  const FitResult direct = fit_and_calibrate(sim.data, h5, c);
  CHECK(rows[0].active == active_clusters(sim.data, direct.labels));
  CHECK(rows[0].alignment == alignment_score(sim.data, direct.calibrated.y_tilde, direct.labels));
  // A failing run is recorded and the sweep continues.
  const auto bad = zeta_sweep(sim.data, h, {2.0, 0.5}, c);
  CHECK_FALSE(bad[0].error.empty());
  CHECK(bad[1].error.empty());
}
