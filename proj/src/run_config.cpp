#include "skewmix/run_config.hpp"

#include "skewmix/chain_io.hpp"
#include "skewmix/error.hpp"
#include "skewmix/pipeline.hpp"
#include "skewmix/tabular.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>

namespace skewmix {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Vec json_vec(const json& j, const char* key) {
  if (!j.is_array()) throw ParseError(std::string("config: '") + key + "' must be an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(std::string("config: '") + key + "' must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Mat json_mat(const json& j, const char* key) {
  const std::string msg = std::string("config: '") + key + "' must be a square array of rows";
  if (!j.is_array() || j.empty()) throw ParseError(msg);
  const auto n = static_cast<Eigen::Index>(j.size());
  Mat m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Vec row = json_vec(j[static_cast<std::size_t>(r)], key);
    if (row.size() != n) throw ParseError(msg);
    m.row(r) = row.transpose();
  }
  return m;
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("config: '") + key + "' has the wrong type");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::string zeta_dir_name(double z) { return "zeta_" + format_double(z); }

}  // namespace

Hyper RunConfig::resolve_hyper(const Dataset& data) const {
  Hyper h = Hyper::defaults_for(data);
  h.K = K;
  h.zeta = zeta;
  h.a_eta = a_eta;
  h.b_eta = b_eta;
  h.merge_threshold = merge_threshold;
  h.M = particles;
  if (b0) h.b0 = *b0;
  if (B0) h.B0 = *B0;
  if (m) h.m = *m;
  if (Lambda) h.Lambda = *Lambda;
  if (nu0) h.nu0 = *nu0;
  if (E0) h.E0 = *E0;
  h.validate(data.p());
  return h;
}

SamplerConfig RunConfig::sampler_config() const {
  SamplerConfig s;
  s.n_iter = iters;
  s.n_burn = burn;
  s.thin = thin;
  s.seed = seed;
  s.mh_adapt_target = mh_adapt_target;
  s.merge_check_every = merge_check_every;
  s.workers = workers > 0 ? workers : default_workers();
  s.check_invariants = check_invariants;
  return s;
}

void RunConfig::validate() const {
  if (K < 1) throw InvalidParameter("K must be >= 1");
  if (!(zeta > 0.0 && zeta <= 1.0)) throw InvalidParameter("zeta must lie in (0, 1]");
  if (!(a_eta > 0.0 && b_eta > 0.0)) throw InvalidParameter("a_eta and b_eta must be positive");
  if (!(merge_threshold >= 0.0)) throw InvalidParameter("merge_threshold must be >= 0");
  if (particles < 1) throw InvalidParameter("particles must be >= 1");
  if (workers < 0) throw InvalidParameter("workers must be >= 0");
  if (marginal_bins != 0 && marginal_bins < 2) throw InvalidParameter("marginal_bins must be 0 or >= 2");
  if (!(min_weight >= 0.0 && min_weight < 1.0)) throw InvalidParameter("min_weight must lie in [0, 1)");
  for (double z : zetas) {
    if (!(z > 0.0 && z <= 1.0)) throw InvalidParameter("sweep zetas must lie in (0, 1]");
  }
  sampler_config().validate();
}

RunConfig config_from_json(const json& root) {
  if (!root.is_object()) throw ParseError("config: expected a JSON object");
  const json& j = root.contains("config") && root["config"].is_object() ? root["config"] : root;
  static const std::set<std::string> known = {
      "input", "out", "K", "zeta", "a_eta", "b_eta", "merge_threshold", "particles", "b0", "B0",
      "m", "Lambda", "nu0", "E0", "iters", "burn", "thin", "seed", "mh_adapt_target",
      "merge_check_every", "workers", "check_invariants", "write_chain", "marginal_bins",
      "min_weight", "zetas"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw InvalidParameter("config: unknown key '" + item.key() + "'");
  }
  RunConfig c;
  read_field(j, "input", c.input);
  read_field(j, "out", c.out);
  read_field(j, "K", c.K);
  read_field(j, "zeta", c.zeta);
  read_field(j, "a_eta", c.a_eta);
  read_field(j, "b_eta", c.b_eta);
  read_field(j, "merge_threshold", c.merge_threshold);
  read_field(j, "particles", c.particles);
  if (j.contains("b0") && !j["b0"].is_null()) c.b0 = json_vec(j["b0"], "b0");
  if (j.contains("B0") && !j["B0"].is_null()) c.B0 = json_mat(j["B0"], "B0");
  if (j.contains("m") && !j["m"].is_null()) c.m = j["m"].get<double>();
  if (j.contains("Lambda") && !j["Lambda"].is_null()) c.Lambda = json_mat(j["Lambda"], "Lambda");
  if (j.contains("nu0") && !j["nu0"].is_null()) c.nu0 = j["nu0"].get<double>();
  if (j.contains("E0") && !j["E0"].is_null()) c.E0 = json_mat(j["E0"], "E0");
  read_field(j, "iters", c.iters);
  read_field(j, "burn", c.burn);
  read_field(j, "thin", c.thin);
  read_field(j, "seed", c.seed);
  read_field(j, "mh_adapt_target", c.mh_adapt_target);
  read_field(j, "merge_check_every", c.merge_check_every);
  read_field(j, "workers", c.workers);
  read_field(j, "check_invariants", c.check_invariants);
  read_field(j, "write_chain", c.write_chain);
  read_field(j, "marginal_bins", c.marginal_bins);
  read_field(j, "min_weight", c.min_weight);
  read_field(j, "zetas", c.zetas);
  return c;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["input"] = c.input;
  j["out"] = c.out;
  j["K"] = c.K;
  j["zeta"] = c.zeta;
  j["a_eta"] = c.a_eta;
  j["b_eta"] = c.b_eta;
  j["merge_threshold"] = c.merge_threshold;
  j["particles"] = c.particles;
  j["b0"] = c.b0 ? vec_json(*c.b0) : json(nullptr);
  j["B0"] = c.B0 ? mat_json(*c.B0) : json(nullptr);
  j["m"] = c.m ? json(*c.m) : json(nullptr);
  j["Lambda"] = c.Lambda ? mat_json(*c.Lambda) : json(nullptr);
  j["nu0"] = c.nu0 ? json(*c.nu0) : json(nullptr);
  j["E0"] = c.E0 ? mat_json(*c.E0) : json(nullptr);
  j["iters"] = c.iters;
  j["burn"] = c.burn;
  j["thin"] = c.thin;
  j["seed"] = c.seed;
  j["mh_adapt_target"] = c.mh_adapt_target;
  j["merge_check_every"] = c.merge_check_every;
  j["workers"] = c.workers;
  j["check_invariants"] = c.check_invariants;
  j["write_chain"] = c.write_chain;
  j["marginal_bins"] = c.marginal_bins;
  j["min_weight"] = c.min_weight;
  j["zetas"] = c.zetas;
  return j;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ParseError("config '" + path + "': " + e.what());
  }
}

namespace {

void write_labels(const fs::path& path, const Dataset& data, const std::vector<int>& labels) {
  auto out = open_out(path);
  out << "sample_id,label\n";
  for (int i = 0; i < data.n(); ++i) {
    out << data.sample_names[static_cast<std::size_t>(data.sample_of[static_cast<std::size_t>(i)])] << ','
        << labels[static_cast<std::size_t>(i)] + 1 << '\n';
  }
  close_out(out, path);
}

void write_calibrated(const fs::path& path, const Dataset& data, const CalibratedDataset& cal) {
  auto out = open_out(path);
  out << "sample_id";
  for (const auto& m : data.marker_names) out << ',' << m;
  out << ",label\n";
  for (int i = 0; i < data.n(); ++i) {
    out << data.sample_names[static_cast<std::size_t>(data.sample_of[static_cast<std::size_t>(i)])];
    for (int c = 0; c < data.p(); ++c) out << ',' << format_double(cal.y_tilde(i, c));
    out << ',' << cal.labels[static_cast<std::size_t>(i)] + 1 << '\n';
  }
  close_out(out, path);
}

void write_marginals(const fs::path& path, const Dataset& data, const RowMat& calibrated, int bins) {
  auto out = open_out(path);
  out << "stage,marker,sample_id,bin,left,right,density\n";
  const std::pair<const char*, const RowMat*> stages[] = {{"raw", &data.y}, {"calibrated", &calibrated}};
  for (const auto& [stage, y] : stages) {
    const MarginalTable t = marginal_export(*y, data.sample_of, data.J(), bins);
    for (int c = 0; c < data.p(); ++c) {
      const Vec& e = t.edges[static_cast<std::size_t>(c)];
      for (int j = 0; j < data.J(); ++j) {
        const Vec& d = t.density[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
        for (int b = 0; b < bins; ++b) {
          out << stage << ',' << data.marker_names[static_cast<std::size_t>(c)] << ','
              << data.sample_names[static_cast<std::size_t>(j)] << ',' << b + 1 << ','
              << format_double(e[b]) << ',' << format_double(e[b + 1]) << ',' << format_double(d[b]) << '\n';
        }
      }
    }
  }
  close_out(out, path);
}

json resolved_config_json(const RunConfig& config, const Hyper& h) {
  RunConfig r = config;
  r.b0 = h.b0;
  r.B0 = h.B0;
  r.m = h.m;
  r.Lambda = h.Lambda;
  r.nu0 = h.nu0;
  r.E0 = h.E0;
  r.zetas.clear();
  return config_to_json(r);
}

}  // namespace

RunSummary run_pipeline(const RunConfig& config, const ProgressCallback& progress) {
  if (config.out.empty()) throw InvalidParameter("no output directory given");
  const fs::path out(config.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory '" + config.out + "': " + ec.message());
  fs::remove(out / "FAILED", ec);

  const auto started = std::chrono::steady_clock::now();
  std::vector<std::string> artifacts;
  try {
    config.validate();
    if (config.input.empty()) throw InvalidParameter("no input file given");
    const Dataset data = read_dataset_csv(config.input);
    const Hyper hyper = config.resolve_hyper(data);
    const SamplerConfig sc = config.sampler_config();

    auto log = open_out(out / "progress.log");
    artifacts.push_back("progress.log");
    const auto on_progress = [&](const ProgressRecord& r) {
      log << "iteration " << r.iteration << " power_loglik " << format_double(r.power_loglik)
          << " active_clusters " << r.active_clusters << " eta_acceptance "
          << format_double(r.mh_acceptance) << '\n';
      log.flush();
      if (progress) progress(r);
    };
    const FitResult fit = fit_and_calibrate(data, hyper, sc, on_progress);
    close_out(log, out / "progress.log");

    if (config.write_chain) {
      write_chain((out / "chain.bin").string(), fit.chain.snapshots, fit.chain.iterations);
      artifacts.push_back("chain.bin");
    }
    write_labels(out / "labels.csv", data, fit.labels);
    artifacts.push_back("labels.csv");
    write_calibrated(out / "calibrated.csv", data, fit.calibrated);
    artifacts.push_back("calibrated.csv");

    RunSummary s;
    s.labels = fit.labels;
    s.active = active_clusters(data, fit.labels, 0.0);
    s.active_min_weight = active_clusters(data, fit.labels, config.min_weight);
    s.alignment = alignment_score(data, fit.calibrated.y_tilde, fit.labels);
    s.merges = fit.chain.merges;
    s.warnings = fit.chain.warnings;

    {
      const fs::path p = out / "diagnostics.csv";
      auto d = open_out(p);
      d << "metric,sample_id,value\n";
      for (int j = 0; j < data.J(); ++j) {
        d << "active_clusters," << data.sample_names[static_cast<std::size_t>(j)] << ','
          << s.active[static_cast<std::size_t>(j)] << '\n';
      }
      for (int j = 0; j < data.J(); ++j) {
        d << "active_clusters_min_weight," << data.sample_names[static_cast<std::size_t>(j)] << ','
          << s.active_min_weight[static_cast<std::size_t>(j)] << '\n';
      }
      d << "min_weight,," << format_double(config.min_weight) << '\n';
      d << "constant_count,," << (constant_count(s.active_min_weight) ? 1 : 0) << '\n';
      d << "alignment_score,," << format_double(s.alignment) << '\n';
      d << "merges,," << s.merges << '\n';
      d << "snapshots,," << fit.chain.snapshots.size() << '\n';
      d << "final_eta,," << format_double(fit.chain.snapshots.back().eta) << '\n';
      close_out(d, p);
      artifacts.push_back("diagnostics.csv");
    }
    if (config.marginal_bins > 0) {
      write_marginals(out / "marginals.csv", data, fit.calibrated.y_tilde, config.marginal_bins);
      artifacts.push_back("marginals.csv");
    }

    json manifest;
    manifest["tool"] = "skewmix";
    manifest["version"] = SKEWMIX_VERSION;
    manifest["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                "." + std::to_string(EIGEN_MINOR_VERSION);
    manifest["compiler"] = __VERSION__;
    manifest["chain_format_version"] = kChainFormatVersion;
    manifest["config"] = resolved_config_json(config, hyper);
    manifest["dataset"] = {{"n", data.n()}, {"p", data.p()}, {"J", data.J()},
                           {"samples", data.sample_names}, {"markers", data.marker_names}};
    manifest["warnings"] = s.warnings;
    manifest["artifacts"] = artifacts;
    manifest["elapsed_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    manifest["status"] = "ok";
    write_text(out / "run_manifest.json", manifest.dump(2) + "\n");
    return s;
  } catch (const std::exception& e) {
    std::ofstream failed(out / "FAILED");
    failed << e.what() << '\n';
    throw;
  }
}

std::vector<SweepRow> run_sweep(const RunConfig& config, const ProgressCallback& progress) {
  if (config.zetas.empty()) throw InvalidParameter("sweep mode needs at least one zeta");
  config.validate();
  const fs::path out(config.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory '" + config.out + "': " + ec.message());

  std::vector<SweepRow> rows;
  std::vector<std::string> samples;
  for (double z : config.zetas) {
    RunConfig c = config;
    c.zeta = z;
    c.zetas.clear();
    c.out = (out / zeta_dir_name(z)).string();
    SweepRow row;
    row.zeta = z;
    try {
      const RunSummary s = run_pipeline(c, progress);
      row.active = s.active_min_weight;
      row.alignment = s.alignment;
      row.constant_count = constant_count(row.active);
      if (samples.empty()) samples = read_dataset_csv(c.input).sample_names;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }

  const fs::path p = out / "sweep.csv";
  auto t = open_out(p);
  t << "zeta,directory";
  for (const auto& s : samples) t << ",active_" << s;
  t << ",alignment_score,constant_count,error\n";
  for (const auto& r : rows) {
    t << format_double(r.zeta) << ',' << zeta_dir_name(r.zeta);
    for (std::size_t j = 0; j < samples.size(); ++j) {
      t << ',';
      if (j < r.active.size()) t << r.active[j];
    }
    std::string err = r.error;
    for (char& ch : err) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    t << ',' << (r.error.empty() ? format_double(r.alignment) : "") << ',' << (r.constant_count ? 1 : 0)
      << ',' << err << '\n';
  }
  close_out(t, p);
  return rows;
}

}  // namespace skewmix
