#include "betting/datagen.hpp"

#include <cmath>
#include <sstream>

#include "betting/engine.hpp"
#include "betting/error.hpp"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace {

using namespace betting;
using ::testing::DoubleNear;
using ::testing::HasSubstr;

const Scenario kDiff = Scenario::difference_in_means();

TEST(Sample, BernoulliDegenerate) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample(Bernoulli{1.0}, rng), 1.0);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample(Bernoulli{0.0}, rng), 0.0);
}

TEST(Sample, UniformMean) {
  Rng rng(2);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = sample(Uniform{0.2, 0.4}, rng);
    ASSERT_GE(v, 0.2);
    ASSERT_LE(v, 0.4);
    sum += v;
  }
  EXPECT_THAT(sum / 1e5, DoubleNear(0.3, 0.005));
}

TEST(Sample, TruncNormalMeanAndRange) {
  Rng rng(3);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = sample(TruncNormal{0.5, 0.15}, rng);
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    sum += v;
  }
  EXPECT_THAT(sum / 1e5, DoubleNear(0.5, 0.005));
}

TEST(Sample, TruncNormalNarrowWindow) {
  // Far-tail truncation still lands inside the window.
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double v = sample(TruncNormal{0.0, 0.05, 0.6, 0.7}, rng);
    ASSERT_GE(v, 0.6);
    ASSERT_LE(v, 0.7);
  }
}

TEST(ParseDistribution, RoundTrip) {
  EXPECT_EQ(to_string(parse_distribution("uniform:0.2,0.4")), "uniform:0.20000000000000001,0.40000000000000002");
  EXPECT_TRUE(std::holds_alternative<TruncNormal>(parse_distribution("truncnormal:0.5,0.15")));
  EXPECT_TRUE(std::holds_alternative<Bernoulli>(parse_distribution("bernoulli:0.4")));
  for (const char* bad : {"uniform:0.4,0.2", "uniform:0.2", "bernoulli:1.5", "normal:0,1",
                          "truncnormal:0.5,0", "uniform", "uniform:a,b"}) {
    EXPECT_THROW(parse_distribution(bad), ConfigError) << bad;
  }
}

TEST(H1Stream, OneSidedBernoulliPayoffs) {
  StreamSpec spec{Scenario::one_sided(0.3), Hypothesis::H1, Bernoulli{0.4}};
  auto s = make_stream(spec, 5);
  for (int i = 0; i < 500; ++i) {
    const double g = s->next()->payoff.g;
    EXPECT_TRUE(std::abs(g - 0.3) < 1e-15 || std::abs(g + 0.7) < 1e-15) << g;
  }
}

TEST(H1Stream, EasySettingIsDisjoint) {
  StreamSpec spec{kDiff, Hypothesis::H1, Uniform{0.2, 0.4}, Uniform{0.7, 0.9}};
  auto s = make_stream(spec, 6);
  for (int i = 0; i < 10000; ++i) ASSERT_LE(s->next()->payoff.g, -0.3 + 1e-15);
}

TEST(H1Stream, IdenticalDistributionsCentered) {
  StreamSpec spec{kDiff, Hypothesis::H1, Uniform{0.1, 0.9}, Uniform{0.1, 0.9}};
  auto s = make_stream(spec, 7);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) sum += s->next()->payoff.g;
  EXPECT_THAT(sum / 1e5, DoubleNear(0.0, 0.005));
}

TEST(H1Stream, DeterministicGivenSeed) {
  StreamSpec spec{kDiff, Hypothesis::H1, TruncNormal{0.5, 0.15}, TruncNormal{0.65, 0.15}};
  auto a = make_stream(spec, 11);
  auto b = make_stream(spec, 11);
  auto c = make_stream(spec, 12);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto oa = *a->next(), ob = *b->next(), oc = *c->next();
    ASSERT_EQ(oa.payoff.g, ob.payoff.g);
    differs |= oa.payoff.g != oc.payoff.g;
  }
  EXPECT_TRUE(differs);
}

TEST(H0Stream, ShiftEqualizesCalibrationMeans) {
  StreamSpec spec{kDiff, Hypothesis::H0, Uniform{0.2, 0.8}, Uniform{0.3, 0.9}};
  auto s = make_stream(spec, 13);
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto o = *s->next();
    ASSERT_GE(o.y, 0.0);
    ASSERT_LE(o.y, 1.0);
    sx += o.x;
    sy += o.y;
  }
  EXPECT_LE(std::abs(sx / 500 - sy / 500), 1e-12);
  // Rounds past the window keep the same shift.
  EXPECT_TRUE(s->next().has_value());
}

TEST(H0Stream, ShiftOutOfRangeIsAnError) {
  StreamSpec spec{kDiff, Hypothesis::H0, Uniform{0.0, 0.1}, Uniform{0.0, 1.0}};
  spec.calibrationLength = 50;
  auto s = make_stream(spec, 1);
  try {
    for (int i = 0; i < 50; ++i) s->next();
    FAIL() << "expected a shift error";
  } catch (const ConfigError& e) {
    EXPECT_THAT(e.what(), HasSubstr("round"));
  }
}

TEST(H0Stream, OneSidedDrawsDirectly) {
  StreamSpec spec{Scenario::one_sided(0.1), Hypothesis::H0, Bernoulli{0.09}};
  auto s = make_stream(spec, 2);
  double sum = 0.0;
  for (int i = 0; i < 200000; ++i) sum += s->next()->payoff.g;
  EXPECT_THAT(sum / 2e5, DoubleNear(0.01, 0.002));
}

TEST(ReadStream, CsvRows) {
  std::istringstream in("x,y\n0.3,0.8\n\n# comment\n0.5,0.5\n");
  auto s = read_stream(in, StreamFormat::Csv, kDiff);
  EXPECT_THAT(s->next()->payoff.g, DoubleNear(-0.5, 1e-15));
  EXPECT_EQ(s->next()->payoff.g, 0.0);
  EXPECT_FALSE(s->next());
}

TEST(ReadStream, JsonlOneSided) {
  std::istringstream in("{\"x\":0.2}\n{\"x\": 1}\n");
  auto s = read_stream(in, StreamFormat::Jsonl, Scenario::one_sided(0.3));
  EXPECT_THAT(s->next()->payoff.g, DoubleNear(0.1, 1e-15));
  EXPECT_THAT(s->next()->payoff.g, DoubleNear(-0.7, 1e-15));
  EXPECT_FALSE(s->next());
}

TEST(ReadStream, ErrorsCarryLineNumbers) {
  const auto message = [](const std::string& text, StreamFormat f) {
    std::istringstream in(text);
    auto s = read_stream(in, f, kDiff);
    try {
      while (s->next()) {
      }
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_THAT(message("x,y\n0.1,0.2\n1.5,0.2\n", StreamFormat::Csv), HasSubstr("line 3"));
  EXPECT_THAT(message("0.1,abc\n", StreamFormat::Csv), HasSubstr("line 1"));
  EXPECT_THAT(message("0.1\n", StreamFormat::Csv), HasSubstr("line 1"));
  EXPECT_THAT(message("{\"x\":0.1,\"y\":0.2}\n{\"x\":0.1\n", StreamFormat::Jsonl), HasSubstr("line 2"));
  EXPECT_THAT(message("x=1.5\n", StreamFormat::Csv), HasSubstr("line 1"));
}

TEST(OpenStream, MissingFile) {
  EXPECT_THROW(open_stream("/nonexistent/file.csv", StreamFormat::Csv, kDiff), IoError);
}

}  // namespace
