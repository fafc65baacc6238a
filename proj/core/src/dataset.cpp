#include "jointmap/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "jointmap/error.hpp"
#include "jointmap/text.hpp"

namespace jointmap {

namespace {

std::string cell_name(std::string_view a, std::string_view p, std::string_view d) {
  return "(" + std::string(a) + ", " + std::string(p) + ", " + std::string(d) + ")";
}

double parse_real(std::string_view field, const char* what, std::size_t line) {
  field = text::trim(field);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::value, std::string("line ") + std::to_string(line) + ": invalid " + what +
                                      " '" + std::string(field) + "'");
  }
  return v;
}

std::int64_t parse_count(std::string_view field, std::size_t line) {
  field = text::trim(field);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::value, "line " + std::to_string(line) + ": count '" + std::string(field) +
                                      "' is not an integer");
  }
  if (v < 0) {
    throw Error(ErrorCode::value, "line " + std::to_string(line) + ": negative count " + std::to_string(v));
  }
  return v;
}

// Label -> index using an explicit order or sorted unique labels.
std::vector<std::string> resolve_order(const std::set<std::string>& seen,
                                       const std::optional<std::vector<std::string>>& explicit_order,
                                       const char* what) {
  if (!explicit_order) return {seen.begin(), seen.end()};
  std::set<std::string> listed;
  for (const auto& label : *explicit_order) {
    if (!listed.insert(label).second) {
      throw Error(ErrorCode::duplicate, std::string(what) + " order lists '" + label + "' twice");
    }
  }
  for (const auto& label : seen) {
    if (!listed.count(label)) {
      throw Error(ErrorCode::unknown_label, std::string(what) + " '" + label + "' missing from explicit order");
    }
  }
  return *explicit_order;
}

std::unordered_map<std::string, std::size_t> index_of(const std::vector<std::string>& labels) {
  std::unordered_map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out.emplace(labels[i], i);
  return out;
}

}  // namespace

CancerDataset::CancerDataset(Counts observed, Expected expected, std::vector<std::string> area_labels,
                             std::vector<std::string> period_labels,
                             std::vector<std::string> disease_labels)
    : observed_{std::move(observed)},
      expected_{std::move(expected)},
      area_labels_{std::move(area_labels)},
      period_labels_{std::move(period_labels)},
      disease_labels_{std::move(disease_labels)} {
  const auto& d = observed_.dims();
  if (d.areas == 0 || d.periods == 0 || d.diseases == 0) {
    throw Error(ErrorCode::dimension_mismatch, "dataset extents must be positive");
  }
  if (!(expected_.dims() == d) || area_labels_.size() != d.areas || period_labels_.size() != d.periods ||
      disease_labels_.size() != d.diseases) {
    throw Error(ErrorCode::dimension_mismatch, "dataset tensors and labels disagree in shape");
  }
  for (std::size_t c = 0; c < d.cells(); ++c) {
    if (observed_[c] < 0) throw Error(ErrorCode::value, "negative observed count");
    if (!(expected_[c] > 0.0) || !std::isfinite(expected_[c])) {
      throw Error(ErrorCode::value, "expected counts must be finite and strictly positive");
    }
  }
}

ComponentMap::ComponentMap(std::vector<std::string> labels, std::vector<std::vector<bool>> include)
    : labels_{std::move(labels)}, include_{std::move(include)} {
  if (labels_.empty() || include_.size() != labels_.size()) {
    throw Error(ErrorCode::dimension_mismatch, "component map needs one include row per component label");
  }
  n_diseases_ = include_.front().size();
  if (n_diseases_ == 0) throw Error(ErrorCode::dimension_mismatch, "component map has no diseases");
  std::vector<std::size_t> per_disease(n_diseases_, 0);
  members_.resize(labels_.size());
  for (std::size_t l = 0; l < labels_.size(); ++l) {
    if (include_[l].size() != n_diseases_) {
      throw Error(ErrorCode::dimension_mismatch, "component map rows differ in length");
    }
    for (std::size_t k = 0; k < n_diseases_; ++k) {
      if (include_[l][k]) {
        members_[l].push_back(k);
        ++per_disease[k];
      }
    }
    if (members_[l].size() < 2) {
      throw Error(ErrorCode::value, "component '" + labels_[l] + "' must be shared by at least two diseases");
    }
    n_loadings_ += members_[l].size();
  }
  for (std::size_t k = 0; k < n_diseases_; ++k) {
    if (per_disease[k] == 0) {
      throw Error(ErrorCode::value, "disease " + std::to_string(k) + " belongs to no component");
    }
  }
}

std::optional<std::size_t> ComponentMap::slot(std::size_t component, std::size_t disease) const {
  const auto& m = members_.at(component);
  const auto it = std::lower_bound(m.begin(), m.end(), disease);
  if (it == m.end() || *it != disease) return std::nullopt;
  return static_cast<std::size_t>(it - m.begin());
}

CountTable load_counts(std::string_view csv, const LabelOrder& order) {
  const auto rows = text::lines(csv);
  if (rows.empty()) throw Error(ErrorCode::format, "counts CSV is empty");

  const auto header = text::split(rows.front(), ',');
  std::map<std::string, std::size_t> col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!col.emplace(std::string(text::trim(header[c])), c).second) {
      throw Error(ErrorCode::format, "counts CSV repeats column '" + std::string(text::trim(header[c])) + "'");
    }
  }
  for (const char* required : {"area", "period", "disease", "count"}) {
    if (!col.count(required)) {
      throw Error(ErrorCode::format, std::string("counts CSV is missing column '") + required + "'");
    }
  }
  const auto c_area = col["area"], c_period = col["period"], c_disease = col["disease"], c_count = col["count"];
  const bool has_expected = col.count("expected") > 0;
  const bool has_population = col.count("population") > 0;

  struct Row {
    std::string area, period, disease;
    std::int64_t count;
    double expected, population;
    std::size_t line;
  };
  std::vector<Row> parsed;
  std::set<std::string> areas, periods, diseases;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto line_no = r + 1;
    if (text::trim(rows[r]).empty()) continue;
    const auto fields = text::split(rows[r], ',');
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::format, "line " + std::to_string(line_no) + ": expected " +
                                         std::to_string(header.size()) + " fields");
    }
    Row row;
    row.area = text::trim(fields[c_area]);
    row.period = text::trim(fields[c_period]);
    row.disease = text::trim(fields[c_disease]);
    row.count = parse_count(fields[c_count], line_no);
    row.expected = has_expected ? parse_real(fields[col["expected"]], "expected count", line_no) : 0.0;
    row.population = has_population ? parse_real(fields[col["population"]], "population", line_no) : 0.0;
    row.line = line_no;
    areas.insert(row.area);
    periods.insert(row.period);
    diseases.insert(row.disease);
    parsed.push_back(std::move(row));
  }
  if (parsed.empty()) throw Error(ErrorCode::incomplete, "counts CSV has no data rows");

  CountTable table;
  table.area_labels = resolve_order(areas, order.areas, "area");
  table.period_labels = resolve_order(periods, order.periods, "period");
  table.disease_labels = resolve_order(diseases, order.diseases, "disease");
  const Dims dims{table.area_labels.size(), table.period_labels.size(), table.disease_labels.size()};
  const auto ai = index_of(table.area_labels);
  const auto pi = index_of(table.period_labels);
  const auto di = index_of(table.disease_labels);

  table.counts = Counts(dims, 0);
  if (has_expected) table.expected = Expected(dims, 0.0);
  if (has_population) table.population = Eigen::MatrixXd::Constant(
      static_cast<Eigen::Index>(dims.areas), static_cast<Eigen::Index>(dims.periods), -1.0);
  std::vector<char> filled(dims.cells(), 0);

  for (const auto& row : parsed) {
    const auto i = ai.at(row.area), j = pi.at(row.period), k = di.at(row.disease);
    const auto cell = dims.index(i, j, k);
    if (filled[cell]) {
      throw Error(ErrorCode::duplicate, "line " + std::to_string(row.line) + ": duplicate cell " +
                                            cell_name(row.area, row.period, row.disease));
    }
    filled[cell] = 1;
    table.counts[cell] = row.count;
    if (has_expected) {
      if (!(row.expected > 0.0)) {
        throw Error(ErrorCode::value, "line " + std::to_string(row.line) + ": expected count must be positive");
      }
      (*table.expected)[cell] = row.expected;
    }
    if (has_population) {
      if (!(row.population > 0.0)) {
        throw Error(ErrorCode::value, "line " + std::to_string(row.line) + ": population must be positive");
      }
      auto& slot = (*table.population)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (slot > 0.0 && slot != row.population) {
        throw Error(ErrorCode::value, "line " + std::to_string(row.line) +
                                          ": population differs between diseases of the same area and period");
      }
      slot = row.population;
    }
  }
  for (std::size_t i = 0; i < dims.areas; ++i)
    for (std::size_t j = 0; j < dims.periods; ++j)
      for (std::size_t k = 0; k < dims.diseases; ++k)
        if (!filled[dims.index(i, j, k)]) {
          throw Error(ErrorCode::incomplete, "missing cell " + cell_name(table.area_labels[i],
                                                                         table.period_labels[j],
                                                                         table.disease_labels[k]));
        }
  return table;
}

Eigen::MatrixXd load_population(std::string_view csv, const std::vector<std::string>& area_labels,
                                const std::vector<std::string>& period_labels) {
  const auto rows = text::lines(csv);
  if (rows.empty()) throw Error(ErrorCode::format, "population CSV is empty");
  const auto header = text::split(rows.front(), ',');
  std::map<std::string, std::size_t> col;
  for (std::size_t c = 0; c < header.size(); ++c) col.emplace(std::string(text::trim(header[c])), c);
  for (const char* required : {"area", "period", "population"}) {
    if (!col.count(required)) {
      throw Error(ErrorCode::format, std::string("population CSV is missing column '") + required + "'");
    }
  }
  const auto ai = index_of(area_labels);
  const auto pi = index_of(period_labels);
  Eigen::MatrixXd pop = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(area_labels.size()),
                                                  static_cast<Eigen::Index>(period_labels.size()), -1.0);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (text::trim(rows[r]).empty()) continue;
    const auto fields = text::split(rows[r], ',');
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::format, "population line " + std::to_string(r + 1) + ": wrong field count");
    }
    const std::string area{text::trim(fields[col["area"]])};
    const std::string period{text::trim(fields[col["period"]])};
    const auto a = ai.find(area);
    const auto p = pi.find(period);
    if (a == ai.end() || p == pi.end()) {
      throw Error(ErrorCode::unknown_label, "population line " + std::to_string(r + 1) + ": unknown area/period '" +
                                                area + "', '" + period + "'");
    }
    auto& slot = pop(static_cast<Eigen::Index>(a->second), static_cast<Eigen::Index>(p->second));
    if (slot != -1.0) {
      throw Error(ErrorCode::duplicate, "population line " + std::to_string(r + 1) + ": duplicate entry");
    }
    slot = parse_real(fields[col["population"]], "population", r + 1);
    if (!(slot > 0.0)) throw Error(ErrorCode::value, "population must be strictly positive");
  }
  if ((pop.array() == -1.0).any()) {
    throw Error(ErrorCode::incomplete, "population CSV does not cover every area and period");
  }
  return pop;
}

Expected compute_expected(const Eigen::MatrixXd& population, const Counts& observed) {
  const auto& d = observed.dims();
  if (static_cast<std::size_t>(population.rows()) != d.areas ||
      static_cast<std::size_t>(population.cols()) != d.periods) {
    throw Error(ErrorCode::dimension_mismatch, "population table must be areas x periods");
  }
  if (!(population.array() > 0.0).all()) {
    throw Error(ErrorCode::domain, "populations must be strictly positive");
  }
  Expected e(d, 0.0);
  for (std::size_t j = 0; j < d.periods; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double total_pop = population.col(jj).sum();
    for (std::size_t k = 0; k < d.diseases; ++k) {
      std::int64_t total_cases = 0;
      for (std::size_t i = 0; i < d.areas; ++i) total_cases += observed(i, j, k);
      if (total_cases == 0) {
        throw Error(ErrorCode::degenerate_rate, "period " + std::to_string(j) + ", disease " + std::to_string(k) +
                                                    ": no cases, crude rate is zero");
      }
      const double rate = static_cast<double>(total_cases) / total_pop;
      for (std::size_t i = 0; i < d.areas; ++i) {
        e(i, j, k) = rate * population(static_cast<Eigen::Index>(i), jj);
      }
    }
  }
  return e;
}

CancerDataset make_dataset(const CountTable& table, const std::optional<Eigen::MatrixXd>& population) {
  Expected e;
  if (table.expected) {
    e = *table.expected;
  } else if (table.population) {
    e = compute_expected(*table.population, table.counts);
  } else if (population) {
    e = compute_expected(*population, table.counts);
  } else {
    throw Error(ErrorCode::incomplete, "no expected counts and no population to derive them from");
  }
  return CancerDataset(table.counts, std::move(e), table.area_labels, table.period_labels, table.disease_labels);
}

CancerDataset align_to_graph(const CancerDataset& data, const AdjacencyGraph& graph) {
  const auto& d = data.dims();
  if (graph.n_nodes() != d.areas) {
    throw Error(ErrorCode::dimension_mismatch, "adjacency has " + std::to_string(graph.n_nodes()) +
                                                   " areas but counts have " + std::to_string(d.areas));
  }
  const auto from = index_of(data.area_labels());
  std::vector<std::size_t> src(d.areas);
  for (std::size_t i = 0; i < d.areas; ++i) {
    const auto it = from.find(graph.labels()[i]);
    if (it == from.end()) {
      throw Error(ErrorCode::unknown_label, "area '" + graph.labels()[i] + "' is in the adjacency but not the counts");
    }
    src[i] = it->second;
  }
  Counts y(d, 0);
  Expected e(d, 0.0);
  for (std::size_t i = 0; i < d.areas; ++i)
    for (std::size_t j = 0; j < d.periods; ++j)
      for (std::size_t k = 0; k < d.diseases; ++k) {
        y(i, j, k) = data.observed()(src[i], j, k);
        e(i, j, k) = data.expected()(src[i], j, k);
      }
  return CancerDataset(std::move(y), std::move(e), graph.labels(), data.period_labels(), data.disease_labels());
}

std::string write_counts_csv(const CancerDataset& data) {
  const auto& d = data.dims();
  std::string out = "area,period,disease,count,expected\n";
  for (std::size_t i = 0; i < d.areas; ++i)
    for (std::size_t j = 0; j < d.periods; ++j)
      for (std::size_t k = 0; k < d.diseases; ++k) {
        out += data.area_labels()[i] + ',' + data.period_labels()[j] + ',' + data.disease_labels()[k] + ',' +
               std::to_string(data.observed()(i, j, k)) + ',' + text::format_double(data.expected()(i, j, k)) + '\n';
      }
  return out;
}

std::vector<std::string> default_disease_labels() {
  return {"esophagus", "stomach", "bladder", "colorectal", "lung", "prostate", "breast"};
}

ComponentMap default_component_map() {
  auto row = [](std::initializer_list<std::size_t> diseases) {
    std::vector<bool> r(7, false);
    for (auto k : diseases) r[k] = true;
    return r;
  };
  return ComponentMap({"smoking", "overweight", "fruit_vegetables", "physical_activity"},
                      {row({0, 1, 2, 4}), row({0, 3, 5, 6}), row({0, 1}), row({3, 6})});
}

}  // namespace jointmap
