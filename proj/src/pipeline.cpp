#include "skewmix/pipeline.hpp"

#include "skewmix/error.hpp"

namespace skewmix {

FitResult fit_and_calibrate(const Dataset& data, const Hyper& hyper, const SamplerConfig& config,
                            const ProgressCallback& progress) {
  FitResult r;
  r.chain = run(data, hyper, config, progress);
  if (r.chain.snapshots.empty()) throw InvalidParameter("no snapshots were stored (check n_burn and thin)");
  relabel(r.chain.snapshots, config.workers);
  r.calibrated = calibrate(r.chain.snapshots, data);
  r.labels = r.calibrated.labels;
  return r;
}

}  // namespace skewmix
