#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "permtest/distributions.hpp"

using namespace permtest;

TEST(CentralChi2, MedianOfTwoDof) {
  EXPECT_NEAR(chi2_cdf(ChiSquared{2, 0.0}, 2.0 * std::log(2.0)), 0.5, 1e-14);
}

TEST(CentralChi2, FivePercentQuantileOneDof) {
  EXPECT_NEAR(chi2_quantile(ChiSquared{1, 0.0}, 0.05), 3.841458820694124, 1e-9);
}

TEST(CentralChi2, ClosedFormForTwoDof) {
  for (double x : {0.1, 1.0, 3.0, 10.0, 40.0}) {
    EXPECT_NEAR(chi2_cdf(ChiSquared{2, 0.0}, x), 1.0 - std::exp(-0.5 * x), 1e-14);
    EXPECT_NEAR(chi2_sf(ChiSquared{2, 0.0}, x), std::exp(-0.5 * x), 1e-15 + 1e-12 * std::exp(-0.5 * x));
  }
}

TEST(CentralChi2, QuantileInvertsCdf) {
  for (int df : {1, 2, 3, 6, 15})
    for (double a : {0.001, 0.05, 0.5, 0.9}) {
      const double q = chi2_quantile(ChiSquared{df, 0.0}, a);
      EXPECT_NEAR(chi2_sf(ChiSquared{df, 0.0}, q), a, 1e-12);
    }
}

TEST(CentralChi2, DensityIntegratesToCdf) {
  // Simpson on [0.5, 6] against the CDF difference.
  const int df = 4;
  const int panels = 2000;
  const double lo = 0.5, hi = 6.0, h = (hi - lo) / panels;
  double s = chi2_pdf(df, lo) + chi2_pdf(df, hi);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * chi2_pdf(df, lo + h * i);
  EXPECT_NEAR(s * h / 3.0, chi2_cdf(ChiSquared{df, 0.0}, hi) - chi2_cdf(ChiSquared{df, 0.0}, lo), 1e-10);
  EXPECT_NEAR(chi2_pdf(df, 3.0), oracle::chi2_density(df, 3.0), 1e-15);
}

TEST(NoncentralChi2, AgreesWithIndependentImplementation) {
  for (int df : {1, 2, 3, 5, 10})
    for (double lambda : {0.01, 0.5, 2.0, 10.0, 50.0, 300.0})
      for (double x : {0.05, 1.0, 5.0, 20.0, 80.0, 400.0}) {
        boost::math::non_central_chi_squared ref(df, lambda);
        const double want = boost::math::cdf(ref, x);
        const double got = chi2_cdf(ChiSquared{df, lambda}, x);
        EXPECT_NEAR(got, want, 1e-10) << df << " " << lambda << " " << x;
        const double want_sf = boost::math::cdf(boost::math::complement(ref, x));
        EXPECT_NEAR(chi2_sf(ChiSquared{df, lambda}, x), want_sf, 1e-10 + 1e-6 * want_sf);
      }
}

TEST(NoncentralChi2, MatchesEmpiricalCdf) {
  const ChiSquared law{4, 3.0};
  Rng rng = make_stream(5, 1);
  auto xs = sample(law, rng, 1'000'000);
  std::sort(xs.begin(), xs.end());
  for (double x : {1.0, 3.0, 5.0, 7.0, 10.0, 15.0, 25.0})
    EXPECT_NEAR(chi2_cdf(law, x), oracle::ecdf(xs, x), 3e-3) << x;
}

TEST(NoncentralChi2, StableUnderTighterTruncation) {
  for (double lambda : {0.3, 4.0, 40.0, 400.0})
    for (double x : {1.0, 10.0, 60.0, 450.0}) {
      const ChiSquared law{3, lambda};
      EXPECT_NEAR(chi2_cdf(law, x, 1e-12), chi2_cdf(law, x, 1e-14), 1e-11);
    }
}

TEST(NoncentralChi2, ZeroNoncentralityIsCentral) {
  for (double x : {0.5, 2.0, 9.0})
    EXPECT_DOUBLE_EQ(chi2_cdf(ChiSquared{5, 0.0}, x), boost::math::gamma_p(2.5, 0.5 * x));
  EXPECT_NEAR(chi2_cdf(ChiSquared{5, 1e-13}, 4.0), chi2_cdf(ChiSquared{5, 0.0}, 4.0), 1e-12);
}

TEST(NoncentralChi2, QuantileInvertsCdf) {
  for (double lambda : {0.5, 2.0, 25.0})
    for (double a : {0.01, 0.05, 0.7}) {
      const ChiSquared law{6, lambda};
      EXPECT_NEAR(chi2_sf(law, chi2_quantile(law, a)), a, 1e-10);
    }
}

TEST(NoncentralChi2, BadArguments) {
  EXPECT_THROW(chi2_cdf(ChiSquared{0, 0.0}, 1.0), Error);
  EXPECT_THROW(chi2_cdf(ChiSquared{2, -1.0}, 1.0), Error);
  EXPECT_THROW(chi2_quantile(ChiSquared{2, 0.0}, 1.5), Error);
  EXPECT_EQ(chi2_cdf(ChiSquared{2, 1.0}, -1.0), 0.0);
}

TEST(Sampling, MeansMatchTheory) {
  Rng rng = make_stream(9, 2);
  for (const auto& law : {ChiSquared{3, 0.0}, ChiSquared{3, 4.0}, ChiSquared{1, 0.5}}) {
    const auto xs = sample(law, rng, 400'000);
    double m = 0.0;
    for (double v : xs) m += v;
    m /= static_cast<double>(xs.size());
    EXPECT_NEAR(m, law.mean(), 4.0 * std::sqrt(law.variance() / static_cast<double>(xs.size())));
  }
  const MixtureNull mix{4, 2, 0.5};
  const auto ys = sample(mix, rng, 400'000);
  double m = 0.0;
  for (double v : ys) m += v;
  m /= static_cast<double>(ys.size());
  EXPECT_NEAR(m, mix.mean(), 0.02);
  EXPECT_NEAR(mix.mean(), 2.0, 1e-15);
}

TEST(Mixture, MonteCarloExceedanceAtQuantile) {
  const MixtureNull mix{4, 2, 0.5};
  const double q = mixture_quantile(mix, 0.05);
  Rng rng = make_stream(21, 0);
  const auto xs = sample(mix, rng, 1'000'000);
  const double rate = static_cast<double>(std::count_if(xs.begin(), xs.end(), [&](double v) { return v > q; })) / 1e6;
  EXPECT_GE(rate, 0.047);
  EXPECT_LE(rate, 0.053);
}

TEST(Mixture, BetaOneEvenMatchesConvolution) {
  // beta = 1: 0.5 chi2_{k-d} + chi2_{d-1}; 0.5 chi2_{2a} is Gamma(a, 1).
  for (auto [k, d] : {std::pair{4, 2}, std::pair{6, 2}, std::pair{5, 3}, std::pair{7, 3}}) {
    const MixtureNull mix{k, d, 1.0};
    for (double y : {0.5, 1.5, 3.0, 6.0, 12.0})
      EXPECT_NEAR(mixture_cdf(mix, y), oracle::erlang_plus_chi2_cdf((k - d) / 2, d - 1, y), 1e-3) << k << d << y;
  }
}

TEST(Mixture, FullClusteringCollapsesToChi2) {
  for (int d : {2, 3, 5}) {
    const MixtureNull mix{d, d, 0.3};
    for (double y : {0.5, 2.0, 6.0}) EXPECT_NEAR(mixture_cdf(mix, y), chi2_cdf(ChiSquared{d - 1, 0.0}, y), 1e-12);
    EXPECT_NEAR(mixture_quantile(mix, 0.05), chi2_quantile(ChiSquared{d - 1, 0.0}, 0.05), 1e-9);
  }
}

TEST(Mixture, EqualWeightsReduceToScaledChi2) {
  // beta = 0.5 and d = 1: 0.25 chi2_{k-1} + 0.25 chi2_{k-1} = 0.25 chi2_{2k-2}.
  const MixtureNull mix{4, 1, 0.5};
  for (double y : {0.2, 1.0, 2.5}) EXPECT_NEAR(mixture_cdf(mix, y), chi2_cdf(ChiSquared{6, 0.0}, 4.0 * y), 1e-8);
}

TEST(Mixture, InvalidShape) {
  EXPECT_THROW((MixtureNull{3, 4, 0.5}.combination()), InvalidShape);
  EXPECT_THROW((MixtureNull{3, 0, 0.5}.combination()), InvalidShape);
  EXPECT_THROW((MixtureNull{3, 2, 1.5}.combination()), InvalidShape);
}

TEST(Mixture, MonteCarloQuantileOption) {
  const MixtureNull mix{4, 2, 0.5};
  QuantileOptions opt;
  opt.method = QuantileMethod::MonteCarlo;
  opt.draws = 2'000'000;
  EXPECT_NEAR(mixture_quantile(mix, 0.05, opt), mixture_quantile(mix, 0.05), 0.03);
}

TEST(TabulatedCdf, InterpolatesSmoothCdf) {
  const ChiSquared law{3, 0.0};
  TabulatedCdf t([&](double x) { return chi2_cdf(law, x); }, 40.0, 4000);
  for (double x : {0.3, 2.0, 7.7, 39.0, 50.0}) EXPECT_NEAR(t(x), chi2_cdf(law, x), 2e-4);
}
