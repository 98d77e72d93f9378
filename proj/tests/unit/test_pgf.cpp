#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gwcpp/pgf.hpp"

namespace {

using gwcpp::environment;
using gwcpp::exact_environment;
using gwcpp::exact_offspring_law;
using gwcpp::offspring_law;
using gwcpp::rational;

rational q(const char* text) { return gwcpp::parse_rational(text); }

exact_offspring_law binary_exact() { return exact_offspring_law::finite({q("1/4"), q("1/2"), q("1/4")}); }
offspring_law binary() { return offspring_law::finite({0.25, 0.5, 0.25}); }

std::vector<offspring_law> law_zoo() {
  return {binary(),
          offspring_law::finite({0.125, 0.375, 0.5}),
          offspring_law::finite({0.1, 0.2, 0.3, 0.4}),
          offspring_law::finite({0.5, 0.0, 0.0, 0.0, 0.5}),
          offspring_law::dirac(1),
          offspring_law::dirac(3),
          offspring_law::linear_fractional_law(0.5, 0.5),
          offspring_law::linear_fractional_law(0.9, 0.3),
          offspring_law::linear_fractional_law(0.2, 0.8)};
}

// Law of Z_n for a founder n generations back, by explicit convolution in
// exact arithmetic.
std::vector<rational> population_oracle(const exact_environment& env, int n) {
  std::vector<rational> z{rational(0), rational(1)};
  for (int depth = n; depth >= 1; --depth) {
    const auto& probs = env.law_at_depth(depth).as_finite().probs;
    std::vector<rational> next(1, rational(0));
    std::vector<rational> sum_law{rational(1)};
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (j > 0) {
        std::vector<rational> conv(sum_law.size() + probs.size() - 1, rational(0));
        for (std::size_t a = 0; a < sum_law.size(); ++a)
          for (std::size_t b = 0; b < probs.size(); ++b) conv[a + b] += sum_law[a] * probs[b];
        sum_law = conv;
      }
      if (next.size() < sum_law.size()) next.resize(sum_law.size(), rational(0));
      for (std::size_t k = 0; k < sum_law.size(); ++k) next[k] += z[j] * sum_law[k];
    }
    z = next;
  }
  return z;
}

// P(zeta = k) for an individual with offspring law `probs` whose daughters
// survive independently with probability `alive`.
std::vector<rational> surviving_daughters_oracle(const std::vector<rational>& probs, const rational& alive) {
  std::vector<rational> out(probs.size(), rational(0));
  for (std::size_t xi = 0; xi < probs.size(); ++xi) {
    // Enumerate all 2^xi survival patterns.
    for (unsigned mask = 0; mask < (1u << xi); ++mask) {
      rational w = probs[xi];
      int k = 0;
      for (std::size_t c = 0; c < xi; ++c) {
        if (mask & (1u << c)) {
          w *= alive;
          ++k;
        } else {
          w *= rational(1) - alive;
        }
      }
      out[static_cast<std::size_t>(k)] += w;
    }
  }
  return out;
}

TEST(PgfEval, NormalizationAtOne) {
  for (const auto& law : law_zoo()) EXPECT_NEAR(gwcpp::pgf_eval(law, 1.0), 1.0, 1e-12);
}

TEST(PgfEval, ValueAtZeroIsExtinctionMass) {
  EXPECT_DOUBLE_EQ(gwcpp::pgf_eval(offspring_law::linear_fractional_law(0.5, 0.5), 0.0), 0.5);
  EXPECT_EQ(gwcpp::pgf_eval(binary_exact(), rational(0)), q("1/4"));
}

TEST(PgfEval, PolynomialValue) {
  EXPECT_EQ(gwcpp::pgf_eval(binary_exact(), q("1/2")), q("9/16"));
}

TEST(PgfEval, RejectsArgumentsOutsideUnitInterval) {
  EXPECT_THROW(gwcpp::pgf_eval(binary(), -0.1), gwcpp::domain_error);
  EXPECT_THROW(gwcpp::pgf_eval(binary(), 1.5), gwcpp::domain_error);
  EXPECT_THROW(gwcpp::pgf_deriv(binary(), 0.5, 0), gwcpp::domain_error);
}

TEST(PgfDeriv, FirstDerivativeAtZeroIsOneChildMass) {
  EXPECT_EQ(gwcpp::pgf_deriv(binary_exact(), rational(0), 1), q("1/2"));
  EXPECT_DOUBLE_EQ(gwcpp::pgf_deriv(offspring_law::linear_fractional_law(0.5, 0.5), 0.0, 1), 0.25);
}

TEST(PgfDeriv, ClosedFormMatchesTruncatedSeries) {
  for (const auto& law : {offspring_law::linear_fractional_law(0.5, 0.5), offspring_law::linear_fractional_law(0.9, 0.3)}) {
    for (double s : {0.0, 0.3, 0.6}) {
      for (int k = 1; k <= 4; ++k) {
        double series = 0.0;
        for (int j = k; j < 3000; ++j) {
          double falling = 1.0;
          for (int t = 0; t < k; ++t) falling *= j - t;
          series += falling * law.pmf(j) * std::pow(s, j - k);
        }
        const double closed = gwcpp::pgf_deriv(law, s, k);
        EXPECT_NEAR(closed, series, 1e-10 * std::max(1.0, closed)) << "s=" << s << " k=" << k;
      }
    }
  }
}

TEST(PgfDeriv, MatchesCentralDifferences) {
  const double h = 1e-5;
  for (const auto& law : law_zoo()) {
    for (double s : {0.0, 0.25, 0.5, 0.75}) {
      const double lo = std::max(0.0, s - h);
      const double hi = s + h;
      for (int k = 1; k <= 3; ++k) {
        const double fd = k == 1 ? (gwcpp::pgf_eval(law, hi) - gwcpp::pgf_eval(law, lo)) / (hi - lo)
                                 : (gwcpp::pgf_deriv(law, hi, k - 1) - gwcpp::pgf_deriv(law, lo, k - 1)) / (hi - lo);
        const double exact = gwcpp::pgf_deriv(law, s, k);
        // One-sided at s = 0 is only first order; evaluate the exact value at the midpoint there.
        const double reference = s == 0.0 ? gwcpp::pgf_deriv(law, (lo + hi) / 2, k) : exact;
        if (std::abs(reference) < 1e-9) {
          EXPECT_NEAR(fd, reference, 1e-8);
        } else {
          EXPECT_LT(std::abs(fd - reference) / std::abs(reference), 1e-6) << "k=" << k << " s=" << s;
        }
      }
    }
  }
}

TEST(ComposeRange, EmptyRangeIsIdentity) {
  const environment env({binary(), binary()});
  EXPECT_EQ(gwcpp::compose_range(env, -1, -1, 0.37), 0.37);
  EXPECT_EQ(gwcpp::compose_deriv(env, -1, -1, 0.37), 1.0);
}

TEST(ComposeRange, DiracOneComposesToIdentity) {
  const environment env({offspring_law::dirac(1), offspring_law::dirac(1)});
  for (double s : {0.0, 0.2, 0.9}) {
    EXPECT_DOUBLE_EQ(gwcpp::compose_range(env, -2, 0, s), s);
    EXPECT_DOUBLE_EQ(gwcpp::compose_deriv(env, -2, 0, s), 1.0);
  }
}

TEST(ComposeRange, NestedEvaluation) {
  const exact_environment env({binary_exact(), binary_exact()});
  EXPECT_EQ(gwcpp::compose_range(env, -2, 0, rational(0)), q("25/64"));  // f(f(0)) = f(1/4)
}

TEST(ComposeRange, RejectsRangesOutsideHorizon) {
  const environment env({binary(), binary()});
  EXPECT_THROW(gwcpp::compose_range(env, -3, 0, 0.5), gwcpp::horizon_error);
  EXPECT_THROW(gwcpp::compose_range(env, -1, -2, 0.5), gwcpp::horizon_error);
  EXPECT_THROW(gwcpp::compose_range(env, -1, 1, 0.5), gwcpp::horizon_error);
}

TEST(ComposeDeriv, MatchesCentralDifferencesAndProduct) {
  const environment env({offspring_law::finite({0.125, 0.375, 0.5}), offspring_law::linear_fractional_law(0.7, 0.4),
                         binary(), offspring_law::finite({0.1, 0.2, 0.3, 0.4})});
  const double h = 1e-5;
  for (int m = -4; m < 0; ++m)
    for (int n = m + 1; n <= 0; ++n)
      for (double s : {0.1, 0.5, 0.8}) {
        const double fd = (gwcpp::compose_range(env, m, n, s + h) - gwcpp::compose_range(env, m, n, s - h)) / (2 * h);
        const double d = gwcpp::compose_deriv(env, m, n, s);
        EXPECT_LT(std::abs(fd - d) / d, 1e-6);
        // Product formula evaluated independently.
        double product = 1.0;
        for (int l = m + 1; l <= n; ++l)
          product *= gwcpp::pgf_deriv(env.law_for_generation(l - 1), gwcpp::compose_range(env, l, n, s), 1);
        EXPECT_NEAR(d, product, 1e-14);
      }
}

TEST(SurvivalProb, Basics) {
  const exact_environment env({binary_exact(), binary_exact()});
  EXPECT_EQ(gwcpp::survival_prob(env, 0), rational(1));
  EXPECT_EQ(gwcpp::survival_prob(env, 2), q("39/64"));
  const environment path({offspring_law::dirac(1), offspring_law::dirac(1), offspring_law::dirac(1)});
  for (int n = 0; n <= 3; ++n) EXPECT_EQ(gwcpp::survival_prob(path, n), 1.0);
  EXPECT_THROW(gwcpp::survival_prob(path, 4), gwcpp::horizon_error);
}

TEST(EtaPmf, OneGenerationBinary) {
  const exact_environment env({binary_exact()});
  const auto eta = gwcpp::eta_pmf(env, 1);
  EXPECT_EQ(eta.prob(0), q("2/3"));
  EXPECT_EQ(eta.prob(1), q("1/3"));
  EXPECT_EQ(eta.max_value(), 1);
}

TEST(EtaPmf, MatchesSurvivingDaughterEnumeration) {
  const std::vector<exact_environment> envs{
      exact_environment({binary_exact(), binary_exact()}),
      exact_environment({exact_offspring_law::finite({q("1/8"), q("3/8"), q("1/2")}),
                         exact_offspring_law::finite({q("1/2"), q("1/4"), q("1/4")}), binary_exact()}),
      exact_environment({exact_offspring_law::finite({q("1/10"), q("2/10"), q("3/10"), q("4/10")}), binary_exact(),
                         exact_offspring_law::finite({q("1/3"), q("0"), q("2/3")})})};
  for (const auto& env : envs) {
    for (int n = 1; n <= env.horizon(); ++n) {
      // The daughters of the founder must survive n-1 more generations.
      rational alive(1);
      if (n > 1) {
        const exact_environment daughters(std::vector<exact_offspring_law>(env.laws().begin() + 1, env.laws().begin() + n));
        alive = gwcpp::survival_prob(daughters, n - 1);
      }
      const auto zeta = surviving_daughters_oracle(env.slot(0).as_finite().probs, alive);
      const rational positive = rational(1) - zeta[0];
      const auto eta = gwcpp::eta_pmf(env, n);
      for (std::size_t k = 0; k + 1 < zeta.size(); ++k) EXPECT_EQ(eta.prob(static_cast<int>(k)), zeta[k + 1] / positive);
      EXPECT_EQ(eta.total(), rational(1));
    }
  }
}

TEST(EtaPmf, TwoBinaryGenerationsZeroMass) {
  const exact_environment env({binary_exact(), binary_exact()});
  EXPECT_EQ(gwcpp::eta_pmf(env, 2).prob(0), q("10/13"));
}

TEST(EtaPmf, SingleLineageNeverBranches) {
  const environment env({offspring_law::dirac(1), offspring_law::dirac(1)});
  EXPECT_EQ(gwcpp::eta_pmf(env, 2).prob(0), 1.0);
}

TEST(EtaPmf, SumsToOne) {
  const environment env({offspring_law::finite({0.1, 0.2, 0.3, 0.4}), binary(), offspring_law::finite({0.125, 0.375, 0.5})});
  for (int n = 1; n <= 3; ++n) EXPECT_NEAR(gwcpp::eta_pmf(env, n).total(), 1.0, 1e-10);
}

TEST(EtaPmf, GenericFormulaMatchesGeometricForLinearFractional) {
  const environment env({offspring_law::linear_fractional_law(0.9, 0.3), offspring_law::linear_fractional_law(0.5, 0.5),
                         offspring_law::linear_fractional_law(0.4, 0.7)});
  for (int n = 1; n <= 3; ++n) {
    const auto eta = gwcpp::eta_pmf(env, n);
    ASSERT_TRUE(eta.is_geometric());
    double sum = 0.0;
    for (int k = 0; k <= 50; ++k) {
      const double generic = gwcpp::eta_prob_generic(env, n, k);
      EXPECT_NEAR(generic, eta.prob(k), 1e-10);
      sum += generic;
    }
    EXPECT_NEAR(sum + eta.tail_from(51), 1.0, 1e-10);
  }
}

TEST(EtaPmf, DegenerateFounderThrows) {
  const environment env({offspring_law::dirac(0), binary()});
  EXPECT_THROW(gwcpp::eta_pmf(env, 2), gwcpp::degenerate_error);
  EXPECT_THROW(gwcpp::eta_zero_prob(env, -2), gwcpp::degenerate_error);
  EXPECT_THROW(gwcpp::a1_tail(env, 2), gwcpp::degenerate_error);
}

TEST(EtaZeroProb, Examples) {
  const environment path({offspring_law::dirac(1), offspring_law::dirac(1)});
  EXPECT_EQ(gwcpp::eta_zero_prob(path, -1), 1.0);
  const exact_environment env({binary_exact(), binary_exact()});
  EXPECT_EQ(gwcpp::eta_zero_prob(env, -2), q("10/13"));
  const environment lf({offspring_law::linear_fractional_law(0.5, 0.5)});
  EXPECT_NEAR(gwcpp::eta_zero_prob(lf, -1), 0.5, 1e-15);
}

TEST(EtaZeroProb, AgreesWithEtaPmfOfShiftedEnvironment) {
  const environment env({offspring_law::finite({0.1, 0.2, 0.3, 0.4}), offspring_law::linear_fractional_law(0.7, 0.4),
                         binary(), offspring_law::finite({0.125, 0.375, 0.5})});
  for (int m = -4; m <= -1; ++m) {
    const auto shifted = gwcpp::restrict_to_depth(env, -m);
    EXPECT_NEAR(gwcpp::eta_zero_prob(env, m), gwcpp::eta_pmf(shifted, -m).prob(0), 1e-12);
  }
}

TEST(A1Tail, Examples) {
  const environment path({offspring_law::dirac(1), offspring_law::dirac(1), offspring_law::dirac(1)});
  for (int n = 1; n <= 3; ++n) EXPECT_EQ(gwcpp::a1_tail(path, n), 1.0);
  const environment lf(std::vector<offspring_law>(6, offspring_law::linear_fractional_law(0.5, 0.5)));
  for (int n = 1; n <= 6; ++n) EXPECT_NEAR(gwcpp::a1_tail(lf, n), 1.0 / (n + 1), 1e-12);
  const exact_environment env({binary_exact(), binary_exact()});
  EXPECT_EQ(gwcpp::a1_tail(env, 1), q("2/3"));  // P(Z_1 = 1) / P(Z_1 > 0) = (1/2) / (3/4)
}

TEST(A1Tail, EqualsConditionalSingletonProbability) {
  const exact_environment env({exact_offspring_law::finite({q("1/8"), q("3/8"), q("1/2")}),
                               exact_offspring_law::finite({q("1/2"), q("1/4"), q("1/4")}), binary_exact()});
  for (int n = 1; n <= 3; ++n) {
    const auto z = population_oracle(env, n);
    const rational expected = z[1] / (rational(1) - z[0]);
    EXPECT_EQ(gwcpp::a1_tail(env, n), expected);
    EXPECT_EQ(gwcpp::a1_tail_product(env, n), expected);
  }
}

TEST(A1Tail, RejectsDepthOutsideHorizon) {
  const environment env({binary()});
  EXPECT_THROW(gwcpp::a1_tail(env, 0), gwcpp::horizon_error);
  EXPECT_THROW(gwcpp::a1_tail(env, 2), gwcpp::horizon_error);
}

TEST(LinearFractional, ReciprocalIdentity) {
  const environment env({offspring_law::linear_fractional_law(0.9, 0.3), offspring_law::linear_fractional_law(0.5, 0.5),
                         offspring_law::linear_fractional_law(0.4, 0.7)});
  for (int m = -3; m < 0; ++m)
    for (int n = m + 1; n <= 0; ++n) {
      const auto params = gwcpp::lf_compose(env, m, n);
      const double mean = params.mean();
      const double second = params.nsfm() * mean * mean;  // f''(1)
      for (double s : {0.0, 0.3, 0.9}) {
        const double f = gwcpp::compose_range(env, m, n, s);
        const double rhs = 1.0 / (mean * (1 - s)) + second / (2 * mean * mean);
        EXPECT_NEAR(1.0 / (1.0 - f), rhs, 1e-10 * rhs);
      }
    }
}

}  // namespace
