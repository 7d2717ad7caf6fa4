#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "plseada/core/error.hpp"
#include "plseada/harmonizers/losses.hpp"
#include "plseada/nets/grad_check.hpp"

using namespace plseada;
using namespace plseada::harmonizers;
using nets::Tensor;

namespace {

Tensor<double> random_logits(std::size_t n, std::size_t k, std::mt19937_64& rng, double scale = 3.0) {
  Tensor<double> t({n, k});
  std::normal_distribution<double> d(0.0, scale);
  for (auto& v : t.values()) v = d(rng);
  return t;
}

}  // namespace

TEST(ReconLoss, AnalyticCases) {
  Tensor<double> x({1, 1, 4, 4}), ones({1, 1, 4, 4}, 1.0);
  EXPECT_EQ(recon_loss(x, x), 0.0);
  EXPECT_DOUBLE_EQ(recon_loss(x, ones), 1.0);
  EXPECT_THROW(recon_loss(x, Tensor<double>({1, 1, 4, 5})), ContractError);
}

TEST(ReconLoss, MatchesExplicitLoop) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = random_logits(3, 17, rng), b = random_logits(3, 17, rng);
    EXPECT_NEAR(recon_loss(a, b), oracle::mse(a.to_vector(), b.to_vector()), 1e-6);
  }
}

TEST(DomainLoss, AnalyticCases) {
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_NEAR(domain_loss(zero, 0), std::log(2.0), 1e-12);
  const std::vector<double> confident{200.0, 0.0};
  EXPECT_LT(domain_loss(confident, 0), 1e-12);
  Tensor<double> logits({1, 2});
  const std::vector<int> bad{2};
  EXPECT_THROW(domain_loss(logits, bad), ContractError);
  const std::vector<int> neg{-1};
  EXPECT_THROW(domain_loss(logits, neg), ContractError);
}

TEST(DomainLoss, MatchesExplicitSoftmaxOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + trial % 4;
    auto l = random_logits(1, k, rng).to_vector();
    const int label = static_cast<int>(rng() % k);
    EXPECT_NEAR(domain_loss(l, label), oracle::cross_entropy(l, label), 1e-6);
  }
}

TEST(ConfusionLoss, ZeroLogitsGiveLnK) {
  for (std::size_t k : {2u, 3u, 5u}) {
    Tensor<double> logits({1, k}), grad;
    EXPECT_NEAR(confusion_loss(logits, &grad), std::log(double(k)), 1e-9);
    for (double g : grad.values()) EXPECT_LE(std::abs(g), 1e-8);
  }
}

TEST(ConfusionLoss, OppositeLogitsMatchOracle) {
  // -0.5 * (ln p0 + ln p1) for logits (10, -10); equals 10 + ln(1 + e^-20).
  const std::vector<double> l{10.0, -10.0};
  const double expected = 10.0 + std::log1p(std::exp(-20.0));
  EXPECT_NEAR(expected, 10.000000002061, 1e-11);
  EXPECT_NEAR(confusion_loss(l), expected, 1e-9);
  EXPECT_NEAR(oracle::confusion(l), expected, 1e-9);
}

TEST(ConfusionLoss, BoundedBelowByLnK) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t k = 2 + trial % 4;
    auto l = random_logits(1, k, rng, 1.0 + trial % 7).to_vector();
    const double loss = confusion_loss(l);
    EXPECT_GE(loss, std::log(double(k)) - 1e-12);
    EXPECT_NEAR(loss, oracle::confusion(l), 1e-9 * std::max(1.0, loss));
  }
}

TEST(ConfusionLoss, GradientVanishesAtUniformSoftmaxForAnyShift) {
  Tensor<double> logits({3, 4}), grad;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 4; ++c) logits[r * 4 + c] = 2.5 * double(r) - 1.0;
  confusion_loss(logits, &grad);
  for (double g : grad.values()) EXPECT_LE(std::abs(g), 1e-8);
}

TEST(StyleLoss, AnalyticCases) {
  Tensor<double> z({1, 2}, {8.0, -8.0});
  const std::vector<int> label0{0}, label1{1};
  EXPECT_NEAR(style_supervision_loss(z, label0, 2), std::log1p(std::exp(-16.0)), 1e-15);
  EXPECT_NEAR(style_supervision_loss(z, label0, 2), 1.125e-7, 1e-10);
  Tensor<double> zero({1, 2});
  EXPECT_NEAR(style_supervision_loss(zero, label1, 2), std::numbers::ln2, 1e-12);
}

TEST(StyleLoss, BitIdenticalToDomainLoss) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    auto z = random_logits(5, 3, rng);
    std::vector<int> labels(5);
    for (auto& l : labels) l = static_cast<int>(rng() % 3);
    Tensor<double> g1, g2;
    EXPECT_EQ(style_supervision_loss(z, labels, 3, &g1), domain_loss(z, labels, &g2));
    EXPECT_EQ(g1, g2);
  }
}

TEST(StyleLoss, MismatchedStyleDimensionIsConfigError) {
  Tensor<double> z({2, 3});
  const std::vector<int> labels{0, 1};
  try {
    style_supervision_loss(z, labels, 2);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("head"), std::string::npos);
  }
}

TEST(Softmax, SumsToOne) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto l = random_logits(1, 6, rng, 20.0).to_vector();
    double s = 0.0;
    for (double p : softmax(l)) s += p;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(LossGradients, AllLossesPassGradCheck) {
  std::mt19937_64 rng(6);
  nets::GradCheckOptions opt;
  opt.samples_per_tensor = 0;
  const auto target = random_logits(4, 3, rng);
  const std::vector<int> labels{0, 2, 1, 2};

  auto check = [&](const nets::DifferentiableFunction& fn, const char* name) {
    const auto r = nets::grad_check_function(fn, random_logits(4, 3, rng), opt);
    EXPECT_TRUE(r.passed(1e-4)) << name << ": " << r.max_relative_error;
  };
  check([&](const Tensor<double>& x, Tensor<double>* g) { return recon_loss(target, x, g); }, "recon");
  check([&](const Tensor<double>& x, Tensor<double>* g) { return domain_loss(x, labels, g); }, "domain");
  check([&](const Tensor<double>& x, Tensor<double>* g) { return confusion_loss(x, g); }, "confusion");
  check([&](const Tensor<double>& x, Tensor<double>* g) { return style_supervision_loss(x, labels, 3, g); },
        "style");
}
