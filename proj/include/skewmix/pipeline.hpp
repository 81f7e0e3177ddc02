#pragma once

#include "skewmix/calibrate.hpp"
#include "skewmix/sampler.hpp"

#include <vector>

namespace skewmix {

// In-memory result of fit -> relabel -> classify -> calibrate.
struct FitResult {
  Chain chain;  // snapshots relabeled against the last one
  CalibratedDataset calibrated;
  std::vector<int> labels;  // 0-based final classification
};

FitResult fit_and_calibrate(const Dataset& data, const Hyper& hyper, const SamplerConfig& config,
                            const ProgressCallback& progress = {});

}  // namespace skewmix
