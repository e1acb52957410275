#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowscope/extraction.hpp"

namespace flowscope::flow_view {

enum class Metric { time_on_task, interaction_count, glance_count };

std::string_view to_string(Metric m);
/// Throws ConfigError naming the supported metrics.
Metric parse_metric(std::string_view text);

struct Stats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

/// Type-7 quantiles (linear interpolation between closest ranks), arithmetic mean.
/// Throws DomainError for empty input.
Stats summary_stats(std::span<const double> samples);

/// Type-7 quantile of already sorted data, p in [0,1].
double quantile_sorted(std::span<const double> sorted, double p);

/// Silverman's rule of thumb: 0.9 * min(sd, IQR/1.34) * n^(-1/5), falling back to sd when IQR is 0.
double silverman_bandwidth(std::span<const double> samples);

struct DensityPoint {
  double value = 0.0;
  double density = 0.0;
};

inline constexpr std::size_t kMinDensitySamples = 5;
inline constexpr std::size_t kDefaultGridSize = 64;

/// Gaussian KDE evaluated on grid_size evenly spaced points over [min, max].
/// Throws DomainError with fewer than kMinDensitySamples samples or zero spread,
/// ConfigError when grid_size < 2.
std::vector<DensityPoint> density_curve(std::span<const double> samples, std::size_t grid_size = kDefaultGridSize);

struct FlowDistribution {
  std::string flow_id;
  std::string label;
  std::vector<double> samples;
  Stats stats;
  std::vector<DensityPoint> density;
  std::size_t sample_count = 0;
  /// Fewer than kMinDensitySamples samples; no density curve.
  bool low_sample = false;
  /// Enough samples but zero spread; no density curve.
  bool degenerate = false;
};

struct FlowViewOptions {
  double p_min = 0.0;
  std::size_t grid_size = kDefaultGridSize;
  /// Guideline reference, echoed in the output only.
  std::optional<double> target_ms;
  /// Region counted by the glance_count metric.
  std::string display_region = "CENTER_DISPLAY";
};

struct FlowView {
  std::string task_id;
  Metric metric = Metric::time_on_task;
  FlowViewOptions options;
  std::vector<FlowDistribution> flows;
};

/// Shortened flow label: group labels joined by " > ".
std::string flow_label(const std::vector<std::string>& labels);

/// Metric value of one sequence. glance_count needs `store`; throws ConfigError otherwise.
double metric_value(const Sequence& sequence, Metric metric, const FlowViewOptions& options,
                    const SessionStore* store);

/// One distribution per flow passing p_min, in flow-table order.
FlowView flow_distributions(const extraction::FlowTable& flows, std::span<const Sequence> sequences, Metric metric,
                            const FlowViewOptions& options = {}, const SessionStore* store = nullptr);

}  // namespace flowscope::flow_view
