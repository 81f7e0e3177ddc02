#include "skewmix/skewmix.h"

#include "skewmix/error.hpp"
#include "skewmix/run_config.hpp"
#include "skewmix/simulate.hpp"
#include "skewmix/tabular.hpp"

#include <cstring>
#include <new>
#include <string>

struct skm_dataset {
  skewmix::Dataset data;
  std::vector<int> truth;
};

namespace {

thread_local std::string last_error;

skm_status fail(skm_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <typename F>
skm_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return SKM_OK;
  } catch (const skewmix::DegenerateCloud& e) {
    return fail(SKM_ERR_DEGENERATE, e.what());
  } catch (const skewmix::InvalidParameter& e) {
    return fail(SKM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const skewmix::ParseError& e) {
    return fail(SKM_ERR_PARSE, e.what());
  } catch (const skewmix::IoError& e) {
    return fail(SKM_ERR_IO, e.what());
  } catch (const skewmix::NumericalFailure& e) {
    return fail(SKM_ERR_NUMERICAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SKM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SKM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SKM_ERR_INTERNAL, "unknown error");
  }
}

skm_status null_arg(const char* what) {
  return fail(SKM_ERR_INVALID_ARGUMENT, std::string(what) + " is NULL");
}

}  // namespace

extern "C" {

const char* skm_version(void) { return SKEWMIX_VERSION; }

const char* skm_last_error(void) { return last_error.c_str(); }

const char* skm_status_name(skm_status status) {
  switch (status) {
    case SKM_OK: return "ok";
    case SKM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SKM_ERR_PARSE: return "parse error";
    case SKM_ERR_IO: return "i/o error";
    case SKM_ERR_NUMERICAL: return "numerical failure";
    case SKM_ERR_DEGENERATE: return "degenerate particle cloud";
    case SKM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

skm_status skm_dataset_read_csv(const char* path, skm_dataset** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto* d = new skm_dataset{skewmix::read_dataset_csv(path), {}};
    *out = d;
  });
}

skm_status skm_dataset_write_csv(const skm_dataset* data, const char* path) {
  if (!data) return null_arg("data");
  if (!path) return null_arg("path");
  return guarded([&] { skewmix::write_dataset_csv(std::string(path), data->data); });
}

skm_status skm_dataset_shape(const skm_dataset* data, int64_t* n, int32_t* p, int32_t* J) {
  if (!data) return null_arg("data");
  if (n) *n = data->data.n();
  if (p) *p = data->data.p();
  if (J) *J = data->data.J();
  last_error.clear();
  return SKM_OK;
}

skm_status skm_dataset_values(const skm_dataset* data, double* out, size_t len) {
  if (!data) return null_arg("data");
  if (!out) return null_arg("out");
  const auto need = static_cast<size_t>(data->data.y.size());
  if (len < need) return fail(SKM_ERR_INVALID_ARGUMENT, "buffer too small: need " + std::to_string(need));
  std::memcpy(out, data->data.y.data(), need * sizeof(double));
  last_error.clear();
  return SKM_OK;
}

skm_status skm_dataset_samples(const skm_dataset* data, int32_t* out, size_t len) {
  if (!data) return null_arg("data");
  if (!out) return null_arg("out");
  const auto& s = data->data.sample_of;
  if (len < s.size()) return fail(SKM_ERR_INVALID_ARGUMENT, "buffer too small: need " + std::to_string(s.size()));
  for (size_t i = 0; i < s.size(); ++i) out[i] = s[i];
  last_error.clear();
  return SKM_OK;
}

skm_status skm_dataset_truth(const skm_dataset* data, int32_t* out, size_t len) {
  if (!data) return null_arg("data");
  if (!out) return null_arg("out");
  if (data->truth.empty()) return fail(SKM_ERR_INVALID_ARGUMENT, "dataset carries no true labels");
  const auto& t = data->truth;
  if (len < t.size()) return fail(SKM_ERR_INVALID_ARGUMENT, "buffer too small: need " + std::to_string(t.size()));
  for (size_t i = 0; i < t.size(); ++i) out[i] = t[i] + 1;
  last_error.clear();
  return SKM_OK;
}

void skm_dataset_free(skm_dataset* data) { delete data; }

skm_status skm_simulate_replica(int32_t n_per_sample, int32_t distorted, uint64_t seed, skm_dataset** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    if (n_per_sample < 1) throw skewmix::InvalidParameter("n_per_sample must be positive");
    skewmix::Rng rng(seed);
    auto sim = skewmix::generate(skewmix::SimSpec::replica(n_per_sample, distorted != 0), rng);
    *out = new skm_dataset{std::move(sim.data), std::move(sim.labels)};
  });
}

skm_status skm_run(const char* config_json, skm_progress_fn progress, void* user) {
  if (!config_json) return null_arg("config_json");
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw skewmix::ParseError(std::string("config: ") + e.what());
    }
    const skewmix::RunConfig config = skewmix::config_from_json(j);
    skewmix::ProgressCallback cb;
    if (progress) {
      cb = [progress, user](const skewmix::ProgressRecord& r) {
        progress(r.iteration, r.power_loglik, r.active_clusters, r.mh_acceptance, user);
      };
    }
    if (config.zetas.empty()) {
      skewmix::run_pipeline(config, cb);
    } else {
      const auto rows = skewmix::run_sweep(config, cb);
      int failed = 0;
      for (const auto& r : rows) failed += r.error.empty() ? 0 : 1;
      if (failed > 0) {
        throw skewmix::Error("sweep: " + std::to_string(failed) + " of " + std::to_string(rows.size()) +
                             " runs failed (see sweep.csv)");
      }
    }
  });
}

}  // extern "C"
