#include "flowscope/flow_view.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include "flowscope/error.hpp"

namespace flowscope::flow_view {

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::time_on_task:
      return "time_on_task";
    case Metric::interaction_count:
      return "interaction_count";
    case Metric::glance_count:
      return "glance_count";
  }
  return "time_on_task";
}

Metric parse_metric(std::string_view text) {
  for (Metric m : {Metric::time_on_task, Metric::interaction_count, Metric::glance_count}) {
    if (text == to_string(m)) return m;
  }
  throw ConfigError("unknown metric '" + std::string(text) +
                    "' (supported: time_on_task, interaction_count, glance_count)");
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DomainError("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Stats summary_stats(std::span<const double> samples) {
  if (samples.empty()) throw DomainError("summary_stats of empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  Stats s;
  s.min = sorted.front();
  s.max = sorted.back();
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  return s;
}

namespace {

// Callers pass sorted data so the floating-point sums do not depend on input order.
double sample_sd(std::span<const double> samples) {
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) throw DomainError("bandwidth needs at least two samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = sample_sd(sorted);
  const Stats st = summary_stats(samples);
  const double iqr_scale = (st.q3 - st.q1) / 1.34;
  const double spread = iqr_scale > 0.0 ? std::min(sd, iqr_scale) : sd;
  return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

std::vector<DensityPoint> density_curve(std::span<const double> samples, std::size_t grid_size) {
  if (grid_size < 2) throw ConfigError("density grid needs at least 2 points");
  if (samples.size() < kMinDensitySamples) {
    throw DomainError("density needs at least " + std::to_string(kMinDensitySamples) + " samples");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double min = sorted.front();
  const double max = sorted.back();
  if (!(max > min)) throw DomainError("degenerate distribution");

  const double h = silverman_bandwidth(sorted);
  const double norm = 1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  std::vector<DensityPoint> curve(grid_size);
  for (std::size_t k = 0; k < grid_size; ++k) {
    // Endpoints are pinned exactly so the support is [min, max].
    const double x = k + 1 == grid_size ? max : min + (max - min) * static_cast<double>(k) / (grid_size - 1);
    double acc = 0.0;
    for (double xi : sorted) {
      const double u = (x - xi) / h;
      acc += std::exp(-0.5 * u * u);
    }
    curve[k] = {x, acc * norm};
  }
  return curve;
}

std::string flow_label(const std::vector<std::string>& labels) {
  std::string out;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (k > 0) out += " > ";
    out += labels[k];
  }
  return out;
}

double metric_value(const Sequence& sequence, Metric metric, const FlowViewOptions& options,
                    const SessionStore* store) {
  switch (metric) {
    case Metric::time_on_task:
      return static_cast<double>(extraction::time_on_task(sequence));
    case Metric::interaction_count:
      return static_cast<double>(sequence.events.size());
    case Metric::glance_count: {
      if (store == nullptr) throw ConfigError("metric glance_count requires glance data");
      if (sequence.events.empty()) return 0.0;
      const Millis first = sequence.events.front().ts;
      const Millis last = sequence.events.back().ts;
      const auto& glances = store->at(sequence.session_id).glances;
      return static_cast<double>(std::count_if(glances.begin(), glances.end(), [&](const GlanceRecord& g) {
        return g.region_id == options.display_region && g.start <= last && g.end > first;
      }));
    }
  }
  return 0.0;
}

FlowView flow_distributions(const extraction::FlowTable& flows, std::span<const Sequence> sequences, Metric metric,
                            const FlowViewOptions& options, const SessionStore* store) {
  if (!(options.p_min >= 0.0 && options.p_min <= 1.0)) throw ConfigError("p_min must lie in [0,1]");
  if (metric == Metric::glance_count && store == nullptr) {
    throw ConfigError("metric glance_count requires glance data");
  }
  std::unordered_map<std::string_view, const Sequence*> by_id;
  for (const auto& s : sequences) by_id.emplace(s.sequence_id, &s);

  FlowView view{flows.task_id, metric, options, {}};
  for (const auto& flow : flows.flows) {
    if (!(flow.relative_frequency > options.p_min)) continue;
    FlowDistribution dist;
    dist.flow_id = flow.flow_id;
    dist.label = flow_label(flow.labels);
    for (const auto& id : flow.sequence_ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw NotFoundError("flow " + flow.flow_id + " references unknown sequence " + id);
      dist.samples.push_back(metric_value(*it->second, metric, options, store));
    }
    dist.sample_count = dist.samples.size();
    if (dist.samples.empty()) continue;
    dist.stats = summary_stats(dist.samples);
    if (dist.sample_count < kMinDensitySamples) {
      dist.low_sample = true;
    } else if (!(dist.stats.max > dist.stats.min)) {
      dist.degenerate = true;
    } else {
      dist.density = density_curve(dist.samples, options.grid_size);
    }
    view.flows.push_back(std::move(dist));
  }
  return view;
}

}  // namespace flowscope::flow_view
