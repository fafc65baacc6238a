#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "jointmap/dataset.hpp"
#include "jointmap/error.hpp"
#include "jointmap/text.hpp"

using namespace jointmap;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::io;
}

}  // namespace

TEST_CASE("load_counts single cell") {
  const auto t = load_counts("area,period,disease,count\nX,2005,lung,7\n");
  CHECK(t.counts.dims() == Dims{1, 1, 1});
  CHECK(t.counts(0, 0, 0) == 7);
  CHECK_FALSE(t.expected.has_value());
  CHECK_FALSE(t.population.has_value());
}

TEST_CASE("load_counts is invariant to row order") {
  std::vector<std::string> rows;
  for (const char* a : {"north", "south", "east"})
    for (const char* p : {"2004", "2005"})
      for (const char* d : {"lung", "breast"}) {
        rows.push_back(std::string(a) + "," + p + "," + d + "," + std::to_string(rows.size() * 3 + 1));
      }
  auto join = [](const std::vector<std::string>& r) {
    std::string s = "disease,count,area,period\n";
    for (const auto& line : r) {
      // reorder columns to match the header
      auto f = text::split(line, ',');
      s += std::string(f[2]) + "," + std::string(f[3]) + "," + std::string(f[0]) + "," + std::string(f[1]) + "\n";
    }
    return s;
  };
  const auto base = load_counts(join(rows));
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 5; ++rep) {
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto shuffled = load_counts(join(rows));
    CHECK(shuffled.counts == base.counts);
    CHECK(shuffled.area_labels == base.area_labels);
  }
  CHECK(base.area_labels == std::vector<std::string>{"east", "north", "south"});
  CHECK(base.disease_labels == std::vector<std::string>{"breast", "lung"});
}

TEST_CASE("load_counts tensor sums match an independent text tally") {
  std::mt19937_64 rng(30);
  std::poisson_distribution<int> pois(40);
  std::ostringstream csv;
  csv << "area,period,disease,count\n";
  std::vector<std::string> lines;
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 7; ++k) {
        std::ostringstream row;
        row << "prov" << i << "," << 2004 + j << ",c" << k << "," << pois(rng);
        lines.push_back(row.str());
      }
  std::shuffle(lines.begin(), lines.end(), rng);
  for (const auto& l : lines) csv << l << "\n";

  // oracle: stream-based tallies keyed by label
  std::map<std::string, long long> by_area, by_period, by_disease;
  {
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::istringstream fields(line);
      std::string a, p, d, c;
      std::getline(fields, a, ',');
      std::getline(fields, p, ',');
      std::getline(fields, d, ',');
      std::getline(fields, c, ',');
      const long long v = std::stoll(c);
      by_area[a] += v;
      by_period[p] += v;
      by_disease[d] += v;
    }
  }

  const auto t = load_counts(csv.str());
  REQUIRE(t.counts.dims() == Dims{30, 5, 7});
  const auto& d = t.counts.dims();
  for (std::size_t i = 0; i < d.areas; ++i) {
    long long s = 0;
    for (std::size_t j = 0; j < d.periods; ++j)
      for (std::size_t k = 0; k < d.diseases; ++k) s += t.counts(i, j, k);
    CHECK(s == by_area[t.area_labels[i]]);
  }
  for (std::size_t j = 0; j < d.periods; ++j) {
    long long s = 0;
    for (std::size_t i = 0; i < d.areas; ++i)
      for (std::size_t k = 0; k < d.diseases; ++k) s += t.counts(i, j, k);
    CHECK(s == by_period[t.period_labels[j]]);
  }
  for (std::size_t k = 0; k < d.diseases; ++k) {
    long long s = 0;
    for (std::size_t i = 0; i < d.areas; ++i)
      for (std::size_t j = 0; j < d.periods; ++j) s += t.counts(i, j, k);
    CHECK(s == by_disease[t.disease_labels[k]]);
  }
}

TEST_CASE("load_counts errors") {
  const std::string h = "area,period,disease,count\n";
  CHECK(code_of([&] { load_counts(h + "a,1,x,3\na,1,x,4\n"); }) == ErrorCode::duplicate);
  CHECK(code_of([&] { load_counts(h + "a,1,x,3\nb,1,y,4\n"); }) == ErrorCode::incomplete);
  CHECK(code_of([&] { load_counts(h + "a,1,x,-3\n"); }) == ErrorCode::value);
  CHECK(code_of([&] { load_counts(h + "a,1,x,2.5\n"); }) == ErrorCode::value);
  CHECK(code_of([&] { load_counts(h + "a,1,x,many\n"); }) == ErrorCode::value);
  CHECK(code_of([&] { load_counts("area,period,count\na,1,3\n"); }) == ErrorCode::format);
  CHECK(code_of([&] { load_counts(h + "a,1,x\n"); }) == ErrorCode::format);
}

TEST_CASE("explicit period order overrides lexicographic order") {
  LabelOrder order;
  order.periods = std::vector<std::string>{"late", "early"};
  const auto t = load_counts("area,period,disease,count\na,early,x,1\na,late,x,2\n", order);
  CHECK(t.period_labels == std::vector<std::string>{"late", "early"});
  CHECK(t.counts(0, 0, 0) == 2);

  order.periods = std::vector<std::string>{"late"};
  CHECK(code_of([&] { load_counts("area,period,disease,count\na,early,x,1\na,late,x,2\n", order); }) ==
        ErrorCode::unknown_label);
}

TEST_CASE("optional expected and population columns") {
  const auto t = load_counts(
      "area,period,disease,count,expected,population\n"
      "a,1,x,3,2.5,100\na,1,y,4,3.5,100\nb,1,x,5,4.5,300\nb,1,y,6,5.5,300\n");
  REQUIRE(t.expected.has_value());
  REQUIRE(t.population.has_value());
  CHECK((*t.expected)(1, 0, 1) == 5.5);
  CHECK((*t.population)(1, 0) == 300.0);

  CHECK(code_of([] {
          load_counts("area,period,disease,count,population\na,1,x,3,100\na,1,y,4,200\n");
        }) == ErrorCode::value);
}

TEST_CASE("compute_expected worked examples") {
  SUBCASE("single area reproduces the counts") {
    Counts y(Dims{1, 2, 2});
    y(0, 0, 0) = 4;
    y(0, 0, 1) = 9;
    y(0, 1, 0) = 1;
    y(0, 1, 1) = 12;
    Eigen::MatrixXd pop(1, 2);
    pop << 5000, 7000;
    const auto e = compute_expected(pop, y);
    for (std::size_t c = 0; c < y.size(); ++c) CHECK(e[c] == doctest::Approx(static_cast<double>(y[c])).epsilon(1e-14));
  }
  SUBCASE("two areas split cases by population") {
    Counts y(Dims{2, 1, 1});
    y(0, 0, 0) = 25;
    y(1, 0, 0) = 5;
    Eigen::MatrixXd pop(2, 1);
    pop << 1000, 2000;
    const auto e = compute_expected(pop, y);
    CHECK(e(0, 0, 0) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(e(1, 0, 0) == doctest::Approx(20.0).epsilon(1e-14));
  }
}

TEST_CASE("expected counts preserve the registered national total") {
  // 2584 esophagus cases registered in the first year.
  std::mt19937_64 rng(2584);
  std::uniform_real_distribution<double> pop_dist(2e5, 1.2e7);
  std::uniform_int_distribution<int> split(0, 200);
  for (int rep = 0; rep < 10; ++rep) {
    Counts y(Dims{30, 1, 1});
    int remaining = 2584;
    for (std::size_t i = 0; i + 1 < 30; ++i) {
      const int c = std::min(remaining, split(rng));
      y(i, 0, 0) = c;
      remaining -= c;
    }
    y(29, 0, 0) = remaining;
    Eigen::MatrixXd pop(30, 1);
    for (Eigen::Index i = 0; i < 30; ++i) pop(i, 0) = pop_dist(rng);
    const auto e = compute_expected(pop, y);
    double total = 0.0;
    for (std::size_t i = 0; i < 30; ++i) total += e(i, 0, 0);
    CHECK(std::abs(total - 2584.0) <= 1e-9 * 2584.0);
  }
}

TEST_CASE("compute_expected properties") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pop_dist(1e3, 1e6);
  std::poisson_distribution<int> pois(30);
  const Dims d{12, 4, 3};
  for (int rep = 0; rep < 20; ++rep) {
    Counts y(d);
    for (std::size_t c = 0; c < d.cells(); ++c) y[c] = pois(rng) + 1;
    Eigen::MatrixXd pop(12, 4);
    for (Eigen::Index i = 0; i < pop.size(); ++i) pop.data()[i] = pop_dist(rng);
    const auto e = compute_expected(pop, y);
    for (std::size_t j = 0; j < d.periods; ++j)
      for (std::size_t k = 0; k < d.diseases; ++k) {
        double se = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < d.areas; ++i) {
          se += e(i, j, k);
          sy += static_cast<double>(y(i, j, k));
        }
        CHECK(std::abs(se - sy) <= 1e-9 * sy);
      }
    const auto scaled = compute_expected(pop * 37.5, y);
    for (std::size_t c = 0; c < d.cells(); ++c) CHECK(scaled[c] == doctest::Approx(e[c]).epsilon(1e-12));
  }
}

TEST_CASE("compute_expected errors") {
  Counts y(Dims{2, 1, 1}, 0);
  Eigen::MatrixXd pop(2, 1);
  pop << 10, 20;
  CHECK(code_of([&] { compute_expected(pop, y); }) == ErrorCode::degenerate_rate);
  y(0, 0, 0) = 3;
  pop(1, 0) = 0.0;
  CHECK(code_of([&] { compute_expected(pop, y); }) == ErrorCode::domain);
}

TEST_CASE("CancerDataset validates its invariants") {
  const Dims d{1, 1, 1};
  CHECK(code_of([&] { CancerDataset(Counts(d, 1), Expected(d, 0.0), {"a"}, {"p"}, {"x"}); }) == ErrorCode::value);
  CHECK(code_of([&] { CancerDataset(Counts(d, -1), Expected(d, 1.0), {"a"}, {"p"}, {"x"}); }) == ErrorCode::value);
  CHECK(code_of([&] { CancerDataset(Counts(d, 1), Expected(d, 1.0), {"a", "b"}, {"p"}, {"x"}); }) ==
        ErrorCode::dimension_mismatch);
}

TEST_CASE("make_dataset and align_to_graph") {
  const auto t = load_counts(
      "area,period,disease,count,population\n"
      "b,1,x,3,100\nb,1,y,4,100\na,1,x,5,300\na,1,y,6,300\n");
  const auto data = make_dataset(t);
  CHECK(data.area_labels() == std::vector<std::string>{"a", "b"});
  const auto g = parse_adjacency("b: a\na:\n");
  const auto aligned = align_to_graph(data, g);
  CHECK(aligned.area_labels() == std::vector<std::string>{"b", "a"});
  CHECK(aligned.observed()(0, 0, 1) == 4);
  CHECK(aligned.expected()(1, 0, 0) == doctest::Approx(6.0));

  CHECK(code_of([&] { align_to_graph(data, parse_adjacency("b: c\nc:\n")); }) == ErrorCode::unknown_label);
  CHECK(code_of([&] { make_dataset(load_counts("area,period,disease,count\na,1,x,1\n")); }) == ErrorCode::incomplete);
}

TEST_CASE("write_counts_csv round-trips through load_counts") {
  const auto t = load_counts(
      "area,period,disease,count,expected\n"
      "a,1,x,3,2.25\na,1,y,4,3.125\nb,1,x,5,0.1\nb,1,y,6,5.5\n");
  const auto data = make_dataset(t);
  const auto back = make_dataset(load_counts(write_counts_csv(data)));
  CHECK(back.observed() == data.observed());
  CHECK(back.expected() == data.expected());
}

TEST_CASE("default component map layout") {
  const auto m = default_component_map();
  CHECK(m.n_components() == 4);
  CHECK(m.n_diseases() == 7);
  // smoking loads on lung; physical activity does not load on esophagus
  CHECK(m.includes(0, 4));
  CHECK_FALSE(m.includes(3, 0));
  std::size_t esophagus = 0;
  for (std::size_t l = 0; l < 4; ++l) {
    CHECK(m.members(l).size() >= 2);
    esophagus += m.includes(l, 0) ? 1 : 0;
  }
  CHECK(esophagus == 3);
  CHECK(m.members(1) == std::vector<std::size_t>{0, 3, 5, 6});
  CHECK(m.members(3) == std::vector<std::size_t>{3, 6});
  CHECK(m.slot(0, 4) == 3);
  CHECK_FALSE(m.slot(2, 4).has_value());
  CHECK(m.n_loadings() == 12);
  CHECK(default_disease_labels().size() == 7);
}

TEST_CASE("component map invariants") {
  CHECK(code_of([] { ComponentMap({"solo"}, {{true, false}}); }) == ErrorCode::value);
  CHECK(code_of([] { ComponentMap({"a"}, {{true, true, false}}); }) == ErrorCode::value);
  CHECK(code_of([] { ComponentMap({"a", "b"}, {{true, true}}); }) == ErrorCode::dimension_mismatch);
}
