// Simulates one surviving tree, reads off its genealogy and compares the
// empirical law of A_1 from the B chain with the closed form.

#include <cstdio>

#include "gwcpp/gwcpp.hpp"

int main() {
  using gwcpp::offspring_law;
  const gwcpp::environment env({offspring_law::finite({0.125, 0.375, 0.5}), offspring_law::linear_fractional_law(0.5, 0.5),
                                offspring_law::finite({0.25, 0.5, 0.25})});

  gwcpp::engine gen = gwcpp::make_engine(2024, 0);
  const auto t = gwcpp::condition_on_survival(env, gen).tree;
  const auto cpp = gwcpp::coalescent_times(t);
  std::printf("K = %d, A =", cpp.survivors);
  for (int a : cpp.times) std::printf(" %d", a);
  std::printf("\n");

  const gwcpp::backward_kernel kernel(env);
  const int runs = 200000;
  std::vector<int> beyond(static_cast<std::size_t>(env.horizon()) + 1, 0);
  for (int r = 0; r < runs; ++r) {
    gwcpp::engine g = gwcpp::make_engine(7, static_cast<std::uint64_t>(r));
    const auto run = gwcpp::b_run(kernel, g, 2);
    const int a1 = run.steps.empty() ? env.horizon() + 1 : run.steps.front().coalescence;
    for (int n = 1; n <= env.horizon(); ++n) beyond[static_cast<std::size_t>(n)] += a1 > n;
  }
  for (int n = 1; n <= env.horizon(); ++n)
    std::printf("P(A_1 > %d): chain %.4f, closed form %.4f\n", n, beyond[static_cast<std::size_t>(n)] / double(runs),
                gwcpp::a1_tail(env, n));
}
