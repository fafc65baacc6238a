#include "jointmap/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "jointmap/error.hpp"

namespace jointmap {

namespace {

Eigen::Index ix(std::size_t v) { return static_cast<Eigen::Index>(v); }

std::size_t total_draws(std::span<const ChainOutput> chains) {
  std::size_t n = 0;
  for (const auto& c : chains) n += c.draws.size();
  return n;
}

template <typename F>
std::vector<double> pooled(std::span<const ChainOutput> chains, F&& f) {
  std::vector<double> out;
  out.reserve(total_draws(chains));
  for (const auto& c : chains)
    for (const auto& s : c.draws) out.push_back(f(s));
  return out;
}

template <typename F>
std::vector<std::vector<double>> per_chain(std::span<const ChainOutput> chains, F&& f) {
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) {
    auto& v = out.emplace_back();
    v.reserve(c.draws.size());
    for (const auto& s : c.draws) v.push_back(f(s));
  }
  return out;
}

const Eigen::MatrixXd& weights_of(const ParameterState& s, WeightMode mode) {
  return mode == WeightMode::spatial ? s.log_delta : s.log_psi;
}

double sample_variance(std::span<const double> x, double mean) {
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size() - 1);
}

}  // namespace

double stable_mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::empty_input, "mean of no values");
  const double x0 = values.front();
  double acc = 0.0;
  for (double v : values) acc += v - x0;
  return x0 + acc / static_cast<double>(values.size());
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::empty_input, "quantile of no draws");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::domain, "quantile level outside [0, 1]");
  const double pos = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

PosteriorSummary summarize(std::span<const double> draws) {
  if (draws.empty()) throw Error(ErrorCode::empty_input, "cannot summarize an empty set of draws");
  std::vector<double> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  PosteriorSummary s;
  s.median = quantile_sorted(sorted, 0.5);
  s.lower = quantile_sorted(sorted, 0.025);
  s.upper = quantile_sorted(sorted, 0.975);
  s.mean = stable_mean(draws);
  s.n = draws.size();
  return s;
}

double gelman_rubin(std::span<const std::vector<double>> chains) {
  if (chains.size() < 2) throw Error(ErrorCode::domain, "Gelman-Rubin needs at least two chains");
  const auto n = chains.front().size();
  if (n < 2) throw Error(ErrorCode::domain, "Gelman-Rubin needs at least two draws per chain");
  for (const auto& c : chains) {
    if (c.size() != n) throw Error(ErrorCode::domain, "Gelman-Rubin chains must have equal length");
  }
  const auto m = static_cast<double>(chains.size());
  const auto nd = static_cast<double>(n);
  std::vector<double> means;
  double w = 0.0;
  for (const auto& c : chains) {
    const double mean = stable_mean(c);
    means.push_back(mean);
    w += sample_variance(c, mean);
  }
  w /= m;
  if (!(w > 0.0)) throw Error(ErrorCode::degenerate_chains, "Gelman-Rubin: zero within-chain variance");
  const double grand = stable_mean(means);
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= nd / (m - 1.0);
  return std::sqrt(((nd - 1.0) / nd * w + b / nd) / w);
}

DicResult dic(const CancerDataset& data, const ModelSpec& spec, std::span<const ChainOutput> chains) {
  std::vector<double> deviances;
  for (const auto& c : chains) {
    if (c.deviance.size() != c.draws.size()) {
      throw Error(ErrorCode::dimension_mismatch, "chain has mismatched draw and deviance counts");
    }
    deviances.insert(deviances.end(), c.deviance.begin(), c.deviance.end());
  }
  if (deviances.empty()) throw Error(ErrorCode::empty_input, "DIC needs at least one retained draw");

  const auto cells = spec.dims().cells();
  const auto& first = chains.front().draws.empty() ? chains.back().draws.front() : chains.front().draws.front();
  const auto ref = log_relative_risks(first, spec);
  std::vector<double> acc(cells, 0.0);
  for (const auto& c : chains)
    for (const auto& s : c.draws) {
      const auto lr = log_relative_risks(s, spec);
      for (std::size_t q = 0; q < cells; ++q) acc[q] += lr[q] - ref[q];
    }
  const auto nd = static_cast<double>(deviances.size());
  std::vector<double> mean_lr(cells);
  for (std::size_t q = 0; q < cells; ++q) mean_lr[q] = ref[q] + acc[q] / nd;

  DicResult r;
  r.d_bar = stable_mean(deviances);
  r.p_d = r.d_bar - deviance(data, mean_lr);
  r.dic = r.d_bar + r.p_d;
  return r;
}

const PosteriorSummary& WeightRatioTable::at(std::size_t row_disease, std::size_t col_disease) const {
  const auto r = std::find(diseases.begin(), diseases.end(), row_disease);
  const auto c = std::find(diseases.begin(), diseases.end(), col_disease);
  if (r == diseases.end() || c == diseases.end()) {
    throw Error(ErrorCode::not_in_component, "disease is not part of component " + std::to_string(component));
  }
  return entries[static_cast<std::size_t>(r - diseases.begin()) * diseases.size() +
                 static_cast<std::size_t>(c - diseases.begin())];
}

std::vector<double> weight_ratio_draws(std::span<const ChainOutput> chains, std::size_t component,
                                       WeightMode mode, std::size_t row_disease, std::size_t col_disease) {
  return pooled(chains, [&](const ParameterState& s) {
    if (row_disease == col_disease) return 1.0;
    const auto& w = weights_of(s, mode);
    return std::exp(w(ix(component), ix(col_disease)) - w(ix(component), ix(row_disease)));
  });
}

WeightRatioTable weight_ratio_table(std::span<const ChainOutput> chains, const ModelSpec& spec,
                                    std::size_t component, WeightMode mode) {
  if (component >= spec.n_components()) throw Error(ErrorCode::domain, "component index out of range");
  const auto& members = spec.components().members(component);
  if (members.size() < 2) {
    throw Error(ErrorCode::not_in_component, "component needs at least two diseases for weight ratios");
  }
  WeightRatioTable t;
  t.component = component;
  t.mode = mode;
  t.diseases = members;
  for (auto row : members)
    for (auto col : members) t.entries.push_back(summarize(weight_ratio_draws(chains, component, mode, row, col)));
  return t;
}

std::vector<PosteriorSummary> temporal_rr_table(std::span<const ChainOutput> chains, const ModelSpec& spec,
                                                std::size_t component) {
  if (component >= spec.n_components()) throw Error(ErrorCode::domain, "component index out of range");
  std::vector<PosteriorSummary> out;
  for (std::size_t j = 0; j < spec.dims().periods; ++j) {
    out.push_back(summarize(pooled(chains, [&](const ParameterState& s) {
      return std::exp(s.phi(ix(component), ix(j)));
    })));
  }
  return out;
}

std::vector<PosteriorSummary> spatial_component_table(std::span<const ChainOutput> chains, const ModelSpec& spec,
                                                      std::size_t component) {
  if (component >= spec.n_components()) throw Error(ErrorCode::domain, "component index out of range");
  std::vector<PosteriorSummary> out;
  for (std::size_t i = 0; i < spec.dims().areas; ++i) {
    out.push_back(summarize(pooled(chains, [&](const ParameterState& s) {
      return std::exp(s.lambda(ix(component), ix(i)));
    })));
  }
  return out;
}

std::vector<PosteriorSummary> area_rr_map_data(std::span<const ChainOutput> chains, const ModelSpec& spec) {
  const auto cells = spec.dims().cells();
  const auto n = total_draws(chains);
  if (n == 0) throw Error(ErrorCode::empty_input, "no draws to summarize");
  // cell-major copy so each cell's draws are contiguous
  std::vector<double> theta(cells * n);
  std::size_t draw = 0;
  for (const auto& c : chains)
    for (const auto& s : c.draws) {
      const auto lr = log_relative_risks(s, spec);
      for (std::size_t q = 0; q < cells; ++q) theta[q * n + draw] = std::exp(lr[q]);
      ++draw;
    }
  std::vector<PosteriorSummary> out;
  out.reserve(cells);
  for (std::size_t q = 0; q < cells; ++q) out.push_back(summarize(std::span(theta).subspan(q * n, n)));
  return out;
}

namespace {

double psrf_or_nan(const std::vector<std::vector<double>>& traces) {
  try {
    return gelman_rubin(traces);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::degenerate_chains) throw;
    return std::nan("");
  }
}

}  // namespace

std::vector<PsrfEntry> psrf_report(std::span<const ChainOutput> chains, const ModelSpec& spec) {
  std::vector<PsrfEntry> out;
  auto add = [&](std::string name, auto&& f) {
    out.push_back({std::move(name), psrf_or_nan(per_chain(chains, f))});
  };
  const auto& d = spec.dims();
  const auto& cm = spec.components();
  for (std::size_t k = 0; k < d.diseases; ++k) {
    add("alpha[" + std::to_string(k) + "]", [&](const ParameterState& s) { return s.alpha(ix(k)); });
  }
  for (auto mode : {WeightMode::spatial, WeightMode::temporal}) {
    const std::string prefix = mode == WeightMode::spatial ? "delta_ratio" : "psi_ratio";
    for (std::size_t l = 0; l < cm.n_components(); ++l) {
      const auto& members = cm.members(l);
      for (std::size_t a = 0; a < members.size(); ++a)
        for (std::size_t b = a + 1; b < members.size(); ++b) {
          const auto row = members[a], col = members[b];
          add(prefix + "[" + std::to_string(l) + "][" + std::to_string(row) + "][" + std::to_string(col) + "]",
              [&](const ParameterState& s) {
                const auto& w = weights_of(s, mode);
                return std::exp(w(ix(l), ix(col)) - w(ix(l), ix(row)));
              });
        }
    }
  }
  for (std::size_t l = 0; l < cm.n_components(); ++l) {
    add("tau_lambda[" + std::to_string(l) + "]", [&](const ParameterState& s) { return s.tau_lambda(ix(l)); });
    add("tau_phi[" + std::to_string(l) + "]", [&](const ParameterState& s) { return s.tau_phi(ix(l)); });
  }
  if (spec.has_interaction()) add("tau_eta", [](const ParameterState& s) { return *s.tau_eta; });
  {
    std::vector<std::vector<double>> traces;
    for (const auto& c : chains) traces.push_back(c.deviance);
    out.push_back({"deviance", psrf_or_nan(traces)});
  }
  return out;
}

}  // namespace jointmap
