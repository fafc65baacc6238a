#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "jointmap/dataset.hpp"
#include "jointmap/mcmc.hpp"
#include "jointmap/model.hpp"

namespace jointmap {

// Median with a central 95% interval; quantiles interpolate linearly between
// order statistics at position (n - 1) p.
struct PosteriorSummary {
  double median = 0.0;
  double lower = 0.0;  // 2.5%
  double upper = 0.0;  // 97.5%
  double mean = 0.0;
  std::size_t n = 0;

  // Credible interval excludes `value`.
  bool excludes(double value) const noexcept { return value < lower || value > upper; }
};

struct DicResult {
  double d_bar = 0.0;
  double p_d = 0.0;
  double dic = 0.0;
};

double quantile_sorted(std::span<const double> sorted, double p);
PosteriorSummary summarize(std::span<const double> draws);

// Mean computed as x0 + sum(x - x0) / n, which is exact for constant input.
double stable_mean(std::span<const double> values);

// Potential scale reduction factor sqrt(((n-1)/n W + B/n) / W) for m >= 2
// chains of equal length n >= 2.
double gelman_rubin(std::span<const std::vector<double>> chains);

// D-bar from the stored per-draw deviances; plug-in deviance at the posterior
// mean of each cell's log relative risk. Draws of all chains are pooled.
DicResult dic(const CancerDataset& data, const ModelSpec& spec, std::span<const ChainOutput> chains);

enum class WeightMode { spatial, temporal };

// Entry (r, c) summarizes exp(log_w[l][col] - log_w[l][row]) over draws, for
// rows and columns running over the component's diseases.
struct WeightRatioTable {
  std::size_t component = 0;
  WeightMode mode = WeightMode::spatial;
  std::vector<std::size_t> diseases;
  std::vector<PosteriorSummary> entries;  // row-major, diseases.size()^2

  const PosteriorSummary& at(std::size_t row_disease, std::size_t col_disease) const;
};

std::vector<double> weight_ratio_draws(std::span<const ChainOutput> chains, std::size_t component,
                                       WeightMode mode, std::size_t row_disease, std::size_t col_disease);

WeightRatioTable weight_ratio_table(std::span<const ChainOutput> chains, const ModelSpec& spec,
                                    std::size_t component, WeightMode mode);

// exp(phi_lj) per period.
std::vector<PosteriorSummary> temporal_rr_table(std::span<const ChainOutput> chains, const ModelSpec& spec,
                                                std::size_t component);

// exp(lambda_li) per area.
std::vector<PosteriorSummary> spatial_component_table(std::span<const ChainOutput> chains, const ModelSpec& spec,
                                                      std::size_t component);

// Relative risk summaries for every cell, in Dims::index order.
std::vector<PosteriorSummary> area_rr_map_data(std::span<const ChainOutput> chains, const ModelSpec& spec);

struct PsrfEntry {
  std::string parameter;
  double psrf = 0.0;
};

// PSRF for the intercepts, every within-component weight ratio (upper
// triangle, spatial and temporal), the precisions and the deviance.
std::vector<PsrfEntry> psrf_report(std::span<const ChainOutput> chains, const ModelSpec& spec);

}  // namespace jointmap
