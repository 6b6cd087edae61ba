#include <gtest/gtest.h>

#include "permtest/report_json.hpp"

using namespace permtest;

namespace {

void expect_round_trip(const TestReport& r) {
  const auto text = to_json(r).dump();
  const auto back = report_from_json(Json::parse(text));
  EXPECT_TRUE(back == r) << text;
  EXPECT_EQ(to_json(back).dump(), text);
}

}  // namespace

TEST(ReportJson, GaussianRoundTrip) {
  const auto null = NullHypothesis::gaussian({1, 2, 3, 4, 5});
  expect_round_trip(gauss_test(GaussianSample{{1.1, 2.3, 2.9, 4.0, 5.2}, 200}, null, 0.05));
}

TEST(ReportJson, DegenerateRoundTrip) {
  const auto null = NullHypothesis::gaussian({1, 3, 3, 3, 5, 5});
  auto r = gauss_test_degenerate(GaussianSample{{1.01, 3.2, 2.9, 3.05, 5.1, 4.8}, 200}, null, 0.05);
  r.seed = 1234567890123ULL;
  expect_round_trip(r);
}

TEST(ReportJson, CategoricalRoundTrip) {
  const auto null = NullHypothesis::categorical({0.1, 0.1, 0.4, 0.4});
  auto r = cat_test_degenerate(CategoricalSample{{0, 130, 420, 450}}, null, 0.05);
  r.categories = {"a", "b", "c", "d"};
  expect_round_trip(r);
  const auto j = to_json(r);
  EXPECT_EQ(j["dof"]["T_f"], 1);
  EXPECT_EQ(j["dof"]["T_g"], 3);
  EXPECT_TRUE(j["diagnostics"].contains("delta1_sq"));
}

TEST(ReportJson, TwoSampleRoundTrip) {
  auto r = two_sample_test(CategoricalSample{{210, 190, 820, 780}}, CategoricalSample{{195, 205, 790, 810}}, 0.05);
  expect_round_trip(r);
  const auto j = to_json(r);
  EXPECT_TRUE(j["dof"].is_array());
  EXPECT_EQ(j["two_sample"]["lambda_rule"], "log");
  r = two_sample_test(CategoricalSample{{210, 190, 820, 780}}, CategoricalSample{{195, 205, 790, 810}}, 0.05,
                      {LambdaRule{}, false, nullptr});
  expect_round_trip(r);
  EXPECT_TRUE(to_json(r)["p_values"]["T_g"].is_null());
}

TEST(ReportJson, MalformedInput) {
  EXPECT_THROW(report_from_json(Json::parse(R"({"test_kind": "gauss"})")), Error);
  EXPECT_THROW(report_from_json(Json::parse(R"({"test_kind": "nope"})")), Error);
}
