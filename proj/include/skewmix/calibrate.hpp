#pragma once

#include "skewmix/model_state.hpp"

#include <vector>

namespace skewmix {

struct CalibratedDataset {
  RowMat y_tilde;           // n x p, y - shift
  std::vector<int> labels;  // n final labels, 0-based
  RowMat shift;             // n x p
};

// Permutation that best matches `labels` to `reference`: new_label[b] is the
// label that snapshot label b becomes. Only labels used by either vector take
// part in the matching; all others map to themselves.
std::vector<int> match_labels(const std::vector<int>& reference, const std::vector<int>& labels,
                              int K);

// Number of observations whose label differs from the reference.
int disagreements(const std::vector<int>& reference, const std::vector<int>& labels);

// Relabels every snapshot against the last one, in place. Snapshots are
// processed in parallel.
void relabel(std::vector<ChainState>& chain, int workers = 1);

// Per-observation majority vote over the snapshots; ties go to the smaller
// label.
std::vector<int> classify(const std::vector<ChainState>& chain);

// shift_i = mean over snapshots of xi_{j(i), T_i} - xi0_{T_i}. Labels come
// from classify().
CalibratedDataset calibrate(const std::vector<ChainState>& chain, const Dataset& data);

}  // namespace skewmix
