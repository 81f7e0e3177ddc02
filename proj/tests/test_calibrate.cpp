#include "skewmix/calibrate.hpp"
#include "skewmix/error.hpp"
#include "skewmix/hungarian.hpp"
#include "skewmix/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace skewmix;

namespace {

// Fewest disagreements over every permutation of the labels 0..K-1.
int brute_force_best(const std::vector<int>& ref, const std::vector<int>& lab, int K) {
  std::vector<int> perm(static_cast<std::size_t>(K));
  std::iota(perm.begin(), perm.end(), 0);
  int best = std::numeric_limits<int>::max();
  do {
    int d = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) d += ref[i] != perm[static_cast<std::size_t>(lab[i])];
    best = std::min(best, d);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<int> permute_labels(const std::vector<int>& perm, const std::vector<int>& lab) {
  std::vector<int> out;
  for (int l : lab) out.push_back(perm[static_cast<std::size_t>(l)]);
  return out;
}

ChainState toy_state(const std::vector<int>& T, int K, int J, int p, Rng& rng) {
  ChainState s;
  s.T = T;
  s.log_weights = Mat::Constant(J, K, -std::log(static_cast<double>(K)));
  s.xi0 = Mat::Zero(K, p);
  s.psi = Mat::Zero(K, p);
  for (int k = 0; k < K; ++k) {
    Mat xi(J, p);
    for (int j = 0; j < J; ++j)
      for (int c = 0; c < p; ++c) xi(j, c) = rng.normal();
    s.xi.push_back(xi);
    for (int c = 0; c < p; ++c) s.xi0(k, c) = rng.normal();
    s.G.push_back(Mat::Identity(p, p));
    s.E.push_back(Mat::Identity(p, p));
  }
  s.z = Vec::Zero(static_cast<Eigen::Index>(T.size()));
  return s;
}

}  // namespace

TEST_CASE("hungarian solves small assignment problems exactly") {
  Mat c(3, 3);
  c << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  const auto col = hungarian(c);
  double total = 0.0;
  for (int r = 0; r < 3; ++r) total += c(r, col[static_cast<std::size_t>(r)]);
  CHECK(total == 5.0);
  CHECK_THROWS_AS(hungarian(Mat::Zero(2, 3)), InvalidParameter);
  CHECK(hungarian(Mat(0, 0)).empty());
}

TEST_CASE("identical snapshot gives the identity permutation") {
  const std::vector<int> ref{0, 0, 1, 2, 2, 1};
  const auto perm = match_labels(ref, ref, 5);
  for (int k = 0; k < 5; ++k) CHECK(perm[static_cast<std::size_t>(k)] == k);
}

TEST_CASE("cyclically permuted labels are recovered") {
  const std::vector<int> ref{0, 0, 1, 1, 2, 2};
  const std::vector<int> lab{1, 1, 2, 2, 0, 0};
  const auto perm = match_labels(ref, lab, 3);
  CHECK(perm[1] == 0);
  CHECK(perm[2] == 1);
  CHECK(perm[0] == 2);
  CHECK(disagreements(ref, permute_labels(perm, lab)) == 0);
}

TEST_CASE("matching equals exhaustive search for K <= 7") {
  Rng rng(2024);
  for (int rep = 0; rep < 200; ++rep) {
    const int K = 2 + static_cast<int>(rng.uniform_index(6));
    const int n = 5 + static_cast<int>(rng.uniform_index(40));
    std::vector<int> ref(static_cast<std::size_t>(n)), lab(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      ref[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(K)));
      lab[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(K)));
    }
    const auto perm = match_labels(ref, lab, K);
    std::vector<int> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (int k = 0; k < K; ++k) REQUIRE(sorted[static_cast<std::size_t>(k)] == k);
    CHECK(disagreements(ref, permute_labels(perm, lab)) == brute_force_best(ref, lab, K));
    CHECK(disagreements(ref, permute_labels(perm, lab)) <= disagreements(ref, lab));
  }
}

TEST_CASE("classify: majority vote with ties to the smaller label") {
  Rng rng(1);
  std::vector<ChainState> chain{toy_state({0, 0}, 3, 1, 1, rng), toy_state({0, 1}, 3, 1, 1, rng),
                                toy_state({1, 1}, 3, 1, 1, rng)};
  CHECK((classify(chain) == std::vector<int>{0, 1}));
  chain.pop_back();
  CHECK((classify(chain) == std::vector<int>{0, 0}));  // tie 0 vs 1 on the second observation
  chain.pop_back();
  CHECK((classify(chain) == std::vector<int>{0, 0}));
}

TEST_CASE("relabel then classify recovers a permuted fixed clustering") {
  Rng rng(3);
  const std::vector<int> truth{0, 0, 1, 1, 2, 2, 3, 3, 3};
  std::vector<ChainState> chain;
  for (int s = 0; s < 6; ++s) {
    std::vector<int> perm{0, 1, 2, 3, 4};
    shuffle(rng, perm);
    chain.push_back(toy_state(permute_labels(perm, truth), 5, 1, 1, rng));
  }
  const std::vector<int> reference = chain.back().T;
  relabel(chain);
  for (const auto& s : chain) CHECK(s.T == reference);
  CHECK(classify(chain) == reference);
}

TEST_CASE("calibrate: shifts and bitwise label-permutation invariance") {
  RowMat y(4, 2);
  y << 1, 2, 3, 4, 5, 6, 7, 8;
  const Dataset d = Dataset::make(y, {0, 0, 1, 1}, 2);
  Rng rng(5);

  SUBCASE("xi = xi0 gives zero shift") {
    ChainState s = toy_state({0, 1, 0, 1}, 2, 2, 2, rng);
    for (int k = 0; k < 2; ++k) s.xi[static_cast<std::size_t>(k)] = s.xi0.row(k).replicate(2, 1);
    const CalibratedDataset c = calibrate({s}, d);
    CHECK(c.shift.isZero(0.0));
    CHECK(c.y_tilde == y);
  }
  SUBCASE("single snapshot, single cluster") {
    ChainState s = toy_state({0, 0, 0, 0}, 1, 2, 2, rng);
    s.xi0.row(0) << 0.5, 0.5;
    s.xi[0].row(0) << 1.5, -1.5;
    s.xi[0].row(1) << 0.5, 0.5;
    const CalibratedDataset c = calibrate({s}, d);
    CHECK(c.y_tilde.row(0) == (RowMat(1, 2) << 0, 4).finished());
    CHECK(c.y_tilde.row(1) == (RowMat(1, 2) << 2, 6).finished());
    CHECK(c.y_tilde.bottomRows(2) == y.bottomRows(2));
    CHECK(c.shift.row(0) == (RowMat(1, 2) << 1, -2).finished());
  }
  SUBCASE("invariance") {
    std::vector<ChainState> chain;
    for (int s = 0; s < 5; ++s) {
      std::vector<int> T(4);
      for (auto& t : T) t = static_cast<int>(rng.uniform_index(4));
      chain.push_back(toy_state(T, 4, 2, 2, rng));
    }
    const CalibratedDataset base = calibrate(chain, d);
    for (auto& s : chain) {
      std::vector<int> perm{0, 1, 2, 3};
      shuffle(rng, perm);
      s.relabel(perm);
    }
    const CalibratedDataset permuted = calibrate(chain, d);
    CHECK(permuted.y_tilde == base.y_tilde);
    CHECK(permuted.shift == base.shift);
  }
  CHECK_THROWS_AS(calibrate({}, d), InvalidParameter);
}
