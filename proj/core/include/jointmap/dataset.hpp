#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "jointmap/graph.hpp"

namespace jointmap {

// Extents of an area x period x disease array. Cells are laid out with the
// disease index fastest.
struct Dims {
  std::size_t areas = 0;
  std::size_t periods = 0;
  std::size_t diseases = 0;

  std::size_t cells() const noexcept { return areas * periods * diseases; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return (i * periods + j) * diseases + k;
  }
  bool operator==(const Dims&) const = default;
};

template <typename T>
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Dims dims, T fill = T{}) : dims_{dims}, values_(dims.cells(), fill) {}

  const Dims& dims() const noexcept { return dims_; }
  T& operator()(std::size_t i, std::size_t j, std::size_t k) { return values_[dims_.index(i, j, k)]; }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return values_[dims_.index(i, j, k)];
  }
  T& operator[](std::size_t cell) { return values_[cell]; }
  const T& operator[](std::size_t cell) const { return values_[cell]; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<T>& values() const noexcept { return values_; }

  bool operator==(const Tensor3&) const = default;

 private:
  Dims dims_;
  std::vector<T> values_;
};

using Counts = Tensor3<std::int64_t>;
using Expected = Tensor3<double>;

// Observed and expected counts with labels. Construction validates that every
// expected count is strictly positive, every count nonnegative, and that label
// lists match the tensor extents.
class CancerDataset {
 public:
  CancerDataset(Counts observed, Expected expected, std::vector<std::string> area_labels,
                std::vector<std::string> period_labels, std::vector<std::string> disease_labels);

  const Dims& dims() const noexcept { return observed_.dims(); }
  const Counts& observed() const noexcept { return observed_; }
  const Expected& expected() const noexcept { return expected_; }
  const std::vector<std::string>& area_labels() const noexcept { return area_labels_; }
  const std::vector<std::string>& period_labels() const noexcept { return period_labels_; }
  const std::vector<std::string>& disease_labels() const noexcept { return disease_labels_; }

 private:
  Counts observed_;
  Expected expected_;
  std::vector<std::string> area_labels_;
  std::vector<std::string> period_labels_;
  std::vector<std::string> disease_labels_;
};

// Which diseases load on which shared component.
class ComponentMap {
 public:
  ComponentMap() = default;
  // include[l][k]. Every component must cover >= 2 diseases and every disease
  // must belong to >= 1 component.
  ComponentMap(std::vector<std::string> labels, std::vector<std::vector<bool>> include);

  std::size_t n_components() const noexcept { return labels_.size(); }
  std::size_t n_diseases() const noexcept { return n_diseases_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  bool includes(std::size_t component, std::size_t disease) const {
    return include_.at(component).at(disease);
  }
  // Disease indices of component l, ascending.
  const std::vector<std::size_t>& members(std::size_t component) const { return members_.at(component); }
  // Position of `disease` within members(component), or nullopt.
  std::optional<std::size_t> slot(std::size_t component, std::size_t disease) const;
  // Total number of (component, disease) pairs.
  std::size_t n_loadings() const noexcept { return n_loadings_; }

  bool operator==(const ComponentMap& other) const {
    return labels_ == other.labels_ && include_ == other.include_;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<std::vector<bool>> include_;
  std::vector<std::vector<std::size_t>> members_;
  std::size_t n_diseases_ = 0;
  std::size_t n_loadings_ = 0;
};

// Explicit label orders; when absent, labels are sorted lexicographically.
struct LabelOrder {
  std::optional<std::vector<std::string>> areas;
  std::optional<std::vector<std::string>> periods;
  std::optional<std::vector<std::string>> diseases;
};

// Parsed contents of a counts CSV with header `area,period,disease,count`
// and optional `expected` and `population` columns (any column order).
struct CountTable {
  Counts counts;
  std::optional<Expected> expected;
  std::optional<Eigen::MatrixXd> population;  // areas x periods
  std::vector<std::string> area_labels;
  std::vector<std::string> period_labels;
  std::vector<std::string> disease_labels;
};

CountTable load_counts(std::string_view csv, const LabelOrder& order = {});

// Area x period population table from CSV `area,period,population`, indexed by
// the given label lists.
Eigen::MatrixXd load_population(std::string_view csv, const std::vector<std::string>& area_labels,
                                const std::vector<std::string>& period_labels);

// Internal standardization: rate_jk = sum_i Y_ijk / sum_i pop_ij and
// E_ijk = rate_jk * pop_ij.
Expected compute_expected(const Eigen::MatrixXd& population, const Counts& observed);

// Builds a dataset from a count table, using its expected column if present,
// else its population column, else `population` when given.
CancerDataset make_dataset(const CountTable& table,
                           const std::optional<Eigen::MatrixXd>& population = std::nullopt);

// Reorders areas to match the node order of `graph`. Labels must agree as sets.
CancerDataset align_to_graph(const CancerDataset& data, const AdjacencyGraph& graph);

// Writes `area,period,disease,count,expected`.
std::string write_counts_csv(const CancerDataset& data);

// The four-component, seven-cancer layout: smoking (esophagus, stomach,
// bladder, lung), overweight (esophagus, colorectal, prostate, breast), low
// fruit/vegetable intake (esophagus, stomach), low physical activity
// (colorectal, breast).
ComponentMap default_component_map();
std::vector<std::string> default_disease_labels();

}  // namespace jointmap
