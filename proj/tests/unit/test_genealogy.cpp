#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "gwcpp/genealogy.hpp"

namespace {

using gwcpp::environment;
using gwcpp::offspring_law;
using gwcpp::tree;

tree binary_dirac_tree() { return tree::from_child_counts({{2}, {2, 2}}); }

environment varying_env() {
  return environment({offspring_law::finite({0.125, 0.375, 0.5}), offspring_law::finite({0.5, 0.25, 0.25}),
                      offspring_law::linear_fractional_law(0.6, 0.45), offspring_law::finite({0.25, 0.25, 0.25, 0.25})});
}

// Ulam-Harris labels of the present-day individuals, in planar order, found
// by walking down from the founder.
std::vector<std::vector<int>> leaf_labels(const tree& t) {
  std::vector<std::vector<int>> out;
  std::vector<int> label;
  auto walk = [&](auto&& self, int depth, std::size_t node) -> void {
    if (depth == t.horizon()) {
      out.push_back(label);
      return;
    }
    const std::size_t first = t.first_child(depth, node);
    for (std::uint32_t c = 0; c < t.child_count(depth, node); ++c) {
      label.push_back(static_cast<int>(c) + 1);
      self(self, depth + 1, first + c);
      label.pop_back();
    }
  };
  walk(walk, 0, 0);
  return out;
}

int common_prefix(const std::vector<int>& a, const std::vector<int>& b) {
  int c = 0;
  while (c < static_cast<int>(a.size()) && a[static_cast<std::size_t>(c)] == b[static_cast<std::size_t>(c)]) ++c;
  return c;
}

// D_i(n) from labels: distinct daughters (label prefixes of length N-n+1) of
// the ancestor of i at generation -n among present-day individuals j >= i.
int d_from_labels(const std::vector<std::vector<int>>& labels, int horizon, int i, int n) {
  const auto& own = labels[static_cast<std::size_t>(i - 1)];
  const int depth = horizon - n;
  std::set<int> daughters;
  for (std::size_t j = static_cast<std::size_t>(i - 1); j < labels.size(); ++j)
    if (common_prefix(labels[j], own) >= depth) daughters.insert(labels[j][static_cast<std::size_t>(depth)]);
  return static_cast<int>(daughters.size()) - 1;
}

TEST(Tree, BinaryDiracExample) {
  const auto t = binary_dirac_tree();
  EXPECT_EQ(t.survivors(), 4);
  EXPECT_EQ(t.node_count(), 7u);
  EXPECT_EQ(gwcpp::ancestor_index(t, 3, 1), 2);
  EXPECT_EQ(gwcpp::ancestor_index(t, 4, 2), 1);
  const auto cpp = gwcpp::coalescent_times(t);
  EXPECT_EQ(cpp.survivors, 4);
  EXPECT_EQ(cpp.times, (std::vector<int>{1, 2, 1}));
  EXPECT_EQ(gwcpp::extract_d_vector(t, 1), (std::vector<int>{1, 1}));
  EXPECT_EQ(gwcpp::extract_d_vector(t, 3), (std::vector<int>{1, 0}));
  EXPECT_EQ(gwcpp::extract_d_vector(t, 4), (std::vector<int>{0, 0}));
  EXPECT_EQ(gwcpp::extract_b(t, 1), (std::vector<int>{1}));
  EXPECT_EQ(gwcpp::extract_b(t, 2), (std::vector<int>{0, 1}));
}

TEST(Tree, SingleLineage) {
  const auto t = tree::from_child_counts({{1}, {1}, {1}});
  EXPECT_EQ(t.survivors(), 1);
  EXPECT_TRUE(gwcpp::coalescent_times(t).times.empty());
  EXPECT_EQ(gwcpp::extract_d_vector(t, 1), (std::vector<int>{0, 0, 0}));
}

TEST(Tree, RejectsInconsistentCounts) {
  EXPECT_THROW(tree::from_child_counts({}), gwcpp::validation_error);
  EXPECT_THROW(tree::from_child_counts({{1, 1}}), gwcpp::validation_error);
  EXPECT_THROW(tree::from_child_counts({{2}, {1}}), gwcpp::validation_error);
  const auto t = binary_dirac_tree();
  EXPECT_THROW(gwcpp::ancestor_index(t, 5, 1), gwcpp::range_error);
  EXPECT_THROW(gwcpp::ancestor_index(t, 1, 3), gwcpp::range_error);
}

TEST(Tree, DumpFormat) {
  std::ostringstream out;
  gwcpp::dump_tree(tree::from_child_counts({{2}, {0, 1}}), out);
  EXPECT_EQ(out.str(), "() 2 1\n(1) 0 0\n(2) 1 1\n(2,1) 0 1\n");
}

TEST(Genealogy, TableFromCoalescenceTimes) {
  const auto table = gwcpp::genealogy_from_cpp({4, {1, 2, 1}});
  EXPECT_EQ(table.at(1, 2), 1);
  EXPECT_EQ(table.at(2, 3), 2);
  EXPECT_EQ(table.at(3, 4), 1);
  EXPECT_EQ(table.at(1, 4), 2);
  EXPECT_EQ(table, gwcpp::coalescence_from_tree(binary_dirac_tree()));
  EXPECT_EQ(gwcpp::genealogy_from_cpp({1, {}}).survivors(), 1);
  EXPECT_THROW(gwcpp::genealogy_from_cpp({3, {1}}), gwcpp::validation_error);
}

TEST(Genealogy, ReducedTreeRoundTrip) {
  const std::vector<gwcpp::coalescent_point_process> cases{
      {1, {}}, {2, {3}}, {4, {1, 2, 1}}, {6, {2, 1, 3, 3, 1}}, {5, {3, 3, 3, 3}}};
  for (const auto& cpp : cases) {
    const auto t = gwcpp::tree_from_cpp(cpp, 3);
    EXPECT_EQ(gwcpp::coalescent_times(t), cpp);
  }
  EXPECT_THROW(gwcpp::tree_from_cpp({2, {4}}, 3), gwcpp::validation_error);
}

TEST(Simulation, StructuralIdentitiesOnRandomTrees) {
  const auto env = varying_env();
  const gwcpp::environment_sampler sampler(env);
  int checked = 0;
  for (std::uint64_t run = 0; run < 400; ++run) {
    auto gen = gwcpp::make_engine(11, run);
    const auto t = gwcpp::condition_on_survival(sampler, gen, 10000).tree;
    const int k = t.survivors();
    const int n = t.horizon();
    const auto labels = leaf_labels(t);
    ASSERT_EQ(static_cast<int>(labels.size()), k);
    const auto cpp = gwcpp::coalescent_times(t);
    for (int i = 1; i < k; ++i) {
      const int oracle = n - common_prefix(labels[static_cast<std::size_t>(i - 1)], labels[static_cast<std::size_t>(i)]);
      ASSERT_EQ(cpp.times[static_cast<std::size_t>(i - 1)], oracle);
    }
    EXPECT_EQ(gwcpp::genealogy_from_cpp(cpp), gwcpp::coalescence_from_tree(t));
    int running = 0;
    for (int i = 1; i <= k; ++i) {
      EXPECT_EQ(gwcpp::ancestor_index(t, i, n), 1);
      if (i > 1) {
        for (int m = 1; m <= n; ++m) EXPECT_LE(gwcpp::ancestor_index(t, i - 1, m), gwcpp::ancestor_index(t, i, m));
      }
      const auto d = gwcpp::extract_d_vector(t, i);
      for (int m = 1; m <= n; ++m) ASSERT_EQ(d[static_cast<std::size_t>(m - 1)], d_from_labels(labels, n, i, m));
      if (i == k) {
        EXPECT_TRUE(std::all_of(d.begin(), d.end(), [](int v) { return v == 0; }));
        continue;
      }
      const int a = cpp.times[static_cast<std::size_t>(i - 1)];
      // A_i is the first nonzero entry of D_i.
      const auto first = std::find_if(d.begin(), d.end(), [](int v) { return v != 0; });
      ASSERT_NE(first, d.end());
      EXPECT_EQ(static_cast<int>(first - d.begin()) + 1, a);
      running = std::max(running, a);
      EXPECT_EQ(gwcpp::extract_b(t, i), std::vector<int>(d.begin(), d.begin() + running));
      // Entries above A_i carry over to D_{i+1}; entry A_i loses one.
      const auto next = gwcpp::extract_d_vector(t, i + 1);
      EXPECT_EQ(next[static_cast<std::size_t>(a - 1)], d[static_cast<std::size_t>(a - 1)] - 1);
      for (int m = a + 1; m <= n; ++m) EXPECT_EQ(next[static_cast<std::size_t>(m - 1)], d[static_cast<std::size_t>(m - 1)]);
    }
    ++checked;
  }
  EXPECT_EQ(checked, 400);
}

TEST(Simulation, SurvivalFrequencyMatchesPgf) {
  const auto env = varying_env();
  const gwcpp::environment_sampler sampler(env);
  const int runs = 100000;
  int alive = 0;
  auto gen = gwcpp::make_engine(5, 0);
  for (int r = 0; r < runs; ++r) alive += gwcpp::simulate_tree(sampler, gen).survivors() > 0;
  const double p = gwcpp::survival_prob(env, env.horizon());
  const double se = std::sqrt(p * (1 - p) / runs);
  EXPECT_LT(std::abs(static_cast<double>(alive) / runs - p), 3 * se);
}

TEST(Simulation, RejectionAttemptsMatchSurvival) {
  const auto env = varying_env();
  const gwcpp::environment_sampler sampler(env);
  const int runs = 100000;
  double attempts = 0;
  auto gen = gwcpp::make_engine(6, 0);
  for (int r = 0; r < runs; ++r) attempts += gwcpp::condition_on_survival(sampler, gen, 100000).attempts;
  const double p = gwcpp::survival_prob(env, env.horizon());
  const double se = std::sqrt((1 - p) / (p * p) / runs);
  EXPECT_LT(std::abs(attempts / runs - 1 / p), 3 * se);
}

TEST(Simulation, DeterministicPerSeed) {
  const auto env = varying_env();
  auto g1 = gwcpp::make_engine(42, 3);
  auto g2 = gwcpp::make_engine(42, 3);
  const auto a = gwcpp::coalescent_times(gwcpp::condition_on_survival(env, g1).tree);
  const auto b = gwcpp::coalescent_times(gwcpp::condition_on_survival(env, g2).tree);
  EXPECT_EQ(a, b);
}

TEST(Simulation, Guards) {
  const environment dead({offspring_law::dirac(0), offspring_law::dirac(1)});
  auto gen = gwcpp::make_engine(1, 0);
  EXPECT_THROW(gwcpp::condition_on_survival(dead, gen), gwcpp::degenerate_error);
  const environment big(std::vector<offspring_law>(6, offspring_law::dirac(3)));
  gwcpp::simulation_options small;
  small.max_nodes = 100;
  EXPECT_THROW(gwcpp::simulate_tree(big, gen, small), gwcpp::capacity_error);
  const environment rare({offspring_law::finite({0.999, 0.001}), offspring_law::finite({0.999, 0.001})});
  EXPECT_THROW(gwcpp::condition_on_survival(gwcpp::environment_sampler(rare), gen, 3), gwcpp::attempt_cap_exceeded);
}

}  // namespace
