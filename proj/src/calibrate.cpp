#include "skewmix/calibrate.hpp"

#include "skewmix/error.hpp"
#include "skewmix/hungarian.hpp"
#include "skewmix/parallel.hpp"

#include <algorithm>
#include <numeric>

namespace skewmix {

std::vector<int> match_labels(const std::vector<int>& reference, const std::vector<int>& labels,
                              int K) {
  if (reference.size() != labels.size()) {
    throw InvalidParameter("match_labels: label vectors differ in length");
  }
  std::vector<int> slot(static_cast<std::size_t>(K), -1);
  std::vector<int> used;
  for (const auto* v : {&reference, &labels}) {
    for (int l : *v) {
      if (l < 0 || l >= K) throw InvalidParameter("match_labels: label out of range");
      if (slot[static_cast<std::size_t>(l)] < 0) {
        slot[static_cast<std::size_t>(l)] = static_cast<int>(used.size());
        used.push_back(l);
      }
    }
  }
  const int m = static_cast<int>(used.size());
  // cost(a, b): observations with reference label a whose label would differ
  // from a if snapshot label b became a.
  Mat agree = Mat::Zero(m, m);
  Vec ref_count = Vec::Zero(m);
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const int a = slot[static_cast<std::size_t>(reference[i])];
    const int b = slot[static_cast<std::size_t>(labels[i])];
    agree(a, b) += 1.0;
    ref_count[a] += 1.0;
  }
  const Mat cost = ref_count.replicate(1, m) - agree;
  const std::vector<int> col_of_row = hungarian(cost);

  std::vector<int> new_label(static_cast<std::size_t>(K));
  std::iota(new_label.begin(), new_label.end(), 0);
  for (int a = 0; a < m; ++a) {
    new_label[static_cast<std::size_t>(used[static_cast<std::size_t>(col_of_row[static_cast<std::size_t>(a)])])] =
        used[static_cast<std::size_t>(a)];
  }
  return new_label;
}

int disagreements(const std::vector<int>& reference, const std::vector<int>& labels) {
  int d = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) d += reference[i] != labels[i] ? 1 : 0;
  return d;
}

void relabel(std::vector<ChainState>& chain, int workers) {
  if (chain.size() < 2) return;
  const std::vector<int> reference = chain.back().T;
  const int K = chain.back().K();
  parallel_for(workers, static_cast<int>(chain.size()) - 1, [&](int s) {
    ChainState& st = chain[static_cast<std::size_t>(s)];
    st.relabel(match_labels(reference, st.T, K));
  });
}

std::vector<int> classify(const std::vector<ChainState>& chain) {
  if (chain.empty()) throw InvalidParameter("classify: empty chain");
  const int n = chain[0].n();
  const int K = chain[0].K();
  std::vector<int> out(static_cast<std::size_t>(n));
  std::vector<int> votes(static_cast<std::size_t>(K));
  for (int i = 0; i < n; ++i) {
    std::fill(votes.begin(), votes.end(), 0);
    for (const auto& st : chain) ++votes[static_cast<std::size_t>(st.T[static_cast<std::size_t>(i)])];
    out[static_cast<std::size_t>(i)] =
        static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }
  return out;
}

CalibratedDataset calibrate(const std::vector<ChainState>& chain, const Dataset& data) {
  if (chain.empty()) throw InvalidParameter("calibrate: empty chain");
  const int n = data.n();
  const int p = data.p();
  for (const auto& st : chain) {
    if (st.n() != n || st.p() != p || st.J() != data.J()) {
      throw InvalidParameter("calibrate: chain does not match the dataset");
    }
  }
  CalibratedDataset out;
  out.shift = RowMat::Zero(n, p);
  for (int i = 0; i < n; ++i) {
    const int j = data.sample_of[static_cast<std::size_t>(i)];
    for (const auto& st : chain) {
      const int k = st.T[static_cast<std::size_t>(i)];
      out.shift.row(i) += st.xi[static_cast<std::size_t>(k)].row(j) - st.xi0.row(k);
    }
  }
  out.shift /= static_cast<double>(chain.size());
  out.y_tilde = data.y - out.shift;
  out.labels = classify(chain);
  return out;
}

}  // namespace skewmix
