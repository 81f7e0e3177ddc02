#include "skewmix/diagnostics.hpp"

#include "skewmix/error.hpp"
#include "skewmix/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

namespace skewmix {

std::vector<int> active_clusters(const Dataset& data, const std::vector<int>& labels, double min_weight) {
  if (static_cast<int>(labels.size()) != data.n()) {
    throw InvalidParameter("active_clusters: labels do not match the dataset");
  }
  if (!(min_weight >= 0.0 && min_weight < 1.0)) {
    throw InvalidParameter("active_clusters: min_weight must lie in [0, 1)");
  }
  std::vector<std::map<int, int>> freq(static_cast<std::size_t>(data.J()));
  for (int i = 0; i < data.n(); ++i) {
    ++freq[static_cast<std::size_t>(data.sample_of[static_cast<std::size_t>(i)])][labels[static_cast<std::size_t>(i)]];
  }
  const auto nj = data.sample_counts();
  std::vector<int> out(static_cast<std::size_t>(data.J()), 0);
  for (int j = 0; j < data.J(); ++j) {
    for (const auto& [label, count] : freq[static_cast<std::size_t>(j)]) {
      if (static_cast<double>(count) / nj[static_cast<std::size_t>(j)] > min_weight) {
        ++out[static_cast<std::size_t>(j)];
      }
    }
  }
  return out;
}

bool constant_count(const std::vector<int>& counts) {
  return std::adjacent_find(counts.begin(), counts.end(), std::not_equal_to<>()) == counts.end();
}

namespace {

double misalignment(const RowMat& y, const std::vector<int>& sample_of, int J,
                    const std::vector<int>& labels) {
  std::map<int, std::pair<Vec, int>> grand;
  std::map<std::pair<int, int>, std::pair<Vec, int>> local;
  const int p = static_cast<int>(y.cols());
  for (int i = 0; i < static_cast<int>(y.rows()); ++i) {
    const int k = labels[static_cast<std::size_t>(i)];
    const int j = sample_of[static_cast<std::size_t>(i)];
    auto& g = grand.try_emplace(k, Vec::Zero(p), 0).first->second;
    g.first += y.row(i).transpose();
    ++g.second;
    auto& l = local.try_emplace(std::make_pair(k, j), Vec::Zero(p), 0).first->second;
    l.first += y.row(i).transpose();
    ++l.second;
  }
  double total = 0.0;
  for (const auto& [k, g] : grand) {
    const Vec gm = g.first / g.second;
    double sum = 0.0;
    int used = 0;
    for (int j = 0; j < J; ++j) {
      const auto it = local.find({k, j});
      if (it == local.end()) continue;
      sum += (it->second.first / it->second.second - gm).norm();
      ++used;
    }
    total += sum / used;
  }
  return grand.empty() ? 0.0 : total / static_cast<double>(grand.size());
}

}  // namespace

double alignment_score(const Dataset& data, const RowMat& calibrated, const std::vector<int>& labels) {
  if (calibrated.rows() != data.y.rows() || calibrated.cols() != data.y.cols() ||
      static_cast<int>(labels.size()) != data.n()) {
    throw InvalidParameter("alignment_score: inconsistent shapes");
  }
  const double raw = misalignment(data.y, data.sample_of, data.J(), labels);
  const double cal = misalignment(calibrated, data.sample_of, data.J(), labels);
  if (raw == 0.0) return cal == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return cal / raw;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw InvalidParameter("adjusted_rand_index: length mismatch");
  const auto choose2 = [](double x) { return 0.5 * x * (x - 1.0); };
  std::map<std::pair<int, int>, long> table;
  std::map<int, long> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++table[{a[i], b[i]}];
    ++ra[a[i]];
    ++rb[b[i]];
  }
  double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, c] : table) sum_ij += choose2(static_cast<double>(c));
  for (const auto& [key, c] : ra) sum_a += choose2(static_cast<double>(c));
  for (const auto& [key, c] : rb) sum_b += choose2(static_cast<double>(c));
  const double expected = sum_a * sum_b / choose2(static_cast<double>(a.size()));
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (sum_ij - expected) / (max_index - expected);
}

MarginalTable marginal_export(const RowMat& y, const std::vector<int>& sample_of, int J, int bins) {
  if (bins < 2) throw InvalidParameter("marginal_export: bins must be >= 2");
  if (static_cast<Eigen::Index>(sample_of.size()) != y.rows()) {
    throw InvalidParameter("marginal_export: sample indices do not match the data");
  }
  const int p = static_cast<int>(y.cols());
  MarginalTable t;
  t.bins = bins;
  std::vector<int> nj(static_cast<std::size_t>(J), 0);
  for (int j : sample_of) ++nj[static_cast<std::size_t>(j)];
  for (int c = 0; c < p; ++c) {
    double lo = y.rows() > 0 ? y.col(c).minCoeff() : 0.0;
    double hi = y.rows() > 0 ? y.col(c).maxCoeff() : 1.0;
    if (hi <= lo) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double width = (hi - lo) / bins;
    t.edges.push_back(Vec::LinSpaced(bins + 1, lo, hi));
    std::vector<Vec> dens(static_cast<std::size_t>(J), Vec::Zero(bins));
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const int b = std::clamp(static_cast<int>(std::floor((y(i, c) - lo) / width)), 0, bins - 1);
      dens[static_cast<std::size_t>(sample_of[static_cast<std::size_t>(i)])][b] += 1.0;
    }
    for (int j = 0; j < J; ++j) {
      if (nj[static_cast<std::size_t>(j)] > 0) dens[static_cast<std::size_t>(j)] /= nj[static_cast<std::size_t>(j)] * width;
    }
    t.density.push_back(std::move(dens));
  }
  return t;
}

std::vector<SweepRow> zeta_sweep(const Dataset& data, const Hyper& hyper_template,
                                 const std::vector<double>& zetas, const SamplerConfig& config,
                                 double min_weight) {
  std::vector<SweepRow> rows;
  for (double zeta : zetas) {
    SweepRow row;
    row.zeta = zeta;
    try {
      Hyper h = hyper_template;
      h.zeta = zeta;
      const FitResult fit = fit_and_calibrate(data, h, config);
      row.active = active_clusters(data, fit.labels, min_weight);
      row.alignment = alignment_score(data, fit.calibrated.y_tilde, fit.labels);
      row.constant_count = constant_count(row.active);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace skewmix
