#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "highway_rl/errors.hpp"
#include "highway_rl/numkit/layers.hpp"
#include "highway_rl/numkit/optimizer.hpp"
#include "highway_rl/numkit/serialize.hpp"
#include "support/tempdir.hpp"

namespace nk = highway_rl::numkit;
using nk::Matrix;

TEST(Optimizer, SgdHandStep) {
  nk::ParamSet ps;
  ps.add("w", {1});
  ps[0].value(0, 0) = 1.0;
  ps[0].grad(0, 0) = 0.5;
  nk::Optimizer opt({nk::OptimizerKind::Sgd});
  opt.step(ps, 0.1);
  EXPECT_DOUBLE_EQ(ps[0].value(0, 0), 0.95);
  EXPECT_EQ(ps[0].grad(0, 0), 0.0);
}

TEST(Optimizer, AdamFirstStepMovesByLearningRate) {
  // After bias correction the first Adam step is lr * g / (|g| + eps).
  nk::ParamSet ps;
  ps.add("w", {3});
  ps[0].value << 1.0, -2.0, 0.0;
  ps[0].grad << 0.25, -4.0, 0.0;
  nk::Optimizer opt;
  opt.step(ps, 0.01);
  EXPECT_NEAR(ps[0].value(0, 0), 1.0 - 0.01 * 0.25 / (0.25 + 1e-8), 1e-15);
  EXPECT_NEAR(ps[0].value(0, 1), -2.0 + 0.01 * 4.0 / (4.0 + 1e-8), 1e-15);
  EXPECT_EQ(ps[0].value(0, 2), 0.0);
  EXPECT_EQ(opt.steps_taken(), 1);
}

TEST(Optimizer, AdamSecondStepMatchesRecurrence) {
  nk::ParamSet ps;
  ps.add("w", {1});
  nk::Optimizer opt;
  const double g1 = 0.3, g2 = -0.7, lr = 0.05;
  ps[0].grad(0, 0) = g1;
  opt.step(ps, lr);
  const double after1 = ps[0].value(0, 0);
  ps[0].grad(0, 0) = g2;
  opt.step(ps, lr);
  const double m = 0.9 * (0.1 * g1) + 0.1 * g2;
  const double v = 0.999 * (0.001 * g1 * g1) + 0.001 * g2 * g2;
  const double mhat = m / (1 - 0.81), vhat = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(ps[0].value(0, 0), after1 - lr * mhat / (std::sqrt(vhat) + 1e-8), 1e-15);
}

TEST(Optimizer, ZeroGradientLeavesParamsUnchanged) {
  for (auto kind : {nk::OptimizerKind::Sgd, nk::OptimizerKind::Adam}) {
    nk::ParamSet ps;
    ps.add("w", {2, 2});
    ps[0].value << 1, 2, 3, 4;
    const Matrix before = ps[0].value;
    nk::Optimizer opt({kind});
    opt.step(ps, 0.1);
    EXPECT_EQ(ps[0].value, before);
  }
}

TEST(Optimizer, NonFiniteGradientIsTrainingErrorAndChangesNothing) {
  nk::ParamSet ps;
  ps.add("a", {2});
  ps.add("b", {2});
  ps[0].grad << 1.0, 1.0;
  ps[1].grad << std::numeric_limits<double>::quiet_NaN(), 0.0;
  nk::Optimizer opt;
  try {
    opt.step(ps, 0.1);
    FAIL() << "expected TrainingError";
  } catch (const highway_rl::TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos);
  }
  EXPECT_EQ(ps[0].value, Matrix::Zero(1, 2));
  EXPECT_EQ(opt.steps_taken(), 0);
}

TEST(Optimizer, GlobalNormClipScalesSgdStep) {
  nk::ParamSet ps;
  ps.add("w", {2});
  ps[0].grad << 3.0, 4.0;
  nk::OptimizerConfig cfg{nk::OptimizerKind::Sgd};
  cfg.clip_norm = 1.0;
  nk::Optimizer opt(cfg);
  opt.step(ps, 1.0);
  EXPECT_NEAR(ps[0].value(0, 0), -0.6, 1e-15);
  EXPECT_NEAR(ps[0].value(0, 1), -0.8, 1e-15);
}

TEST(Optimizer, IdenticalRunsAreBitwiseIdentical) {
  auto run = [] {
    nk::ParamSet ps;
    const auto d = nk::Dense::create(ps, "d", 4, 3);
    std::mt19937_64 rng(21);
    ps.init_uniform_fan_in(rng);
    nk::Optimizer opt;
    const Matrix x = Matrix::Constant(5, 4, 0.3);
    for (int i = 0; i < 20; ++i) {
      nk::Tape t;
      auto y = d.forward(t, ps, t.constant(x));
      t.backward(nk::mean(t, nk::mul(t, y, y)));
      opt.step(ps, 0.01);
    }
    return ps;
  };
  const auto a = run();
  const auto b = run();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].value, b[i].value);
}

TEST(Serialize, RoundTripIsBitExact) {
  highway_rl::testing::TempDir dir;
  nk::ParamSet ps;
  nk::Dense::create(ps, "layer", 7, 5);
  std::mt19937_64 rng(8);
  ps.init_uniform_fan_in(rng);
  ps[0].value(0, 0) = 0.1 + 0.2;
  ps[0].value(0, 1) = 1e-310;
  ps[1].value(0, 0) = -0.0;
  nk::save_params(ps, dir.path() / "p.json", {{"kind", "test"}});
  const nk::ParamSet back = nk::load_params(dir.path() / "p.json");
  ASSERT_EQ(back.size(), ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    EXPECT_EQ(back[i].name, ps[i].name);
    EXPECT_EQ(back[i].shape, ps[i].shape);
    EXPECT_EQ(0, std::memcmp(back[i].value.data(), ps[i].value.data(), sizeof(double) * ps[i].size()));
  }
  EXPECT_EQ(nk::read_param_file(dir.path() / "p.json")["metadata"]["kind"], "test");
}

TEST(Serialize, EmptySetIsValidFile) {
  highway_rl::testing::TempDir dir;
  nk::save_params(nk::ParamSet{}, dir.path() / "e.json");
  EXPECT_TRUE(nk::load_params(dir.path() / "e.json").empty());
}

TEST(Serialize, WrongArchitectureNamesTensor) {
  highway_rl::testing::TempDir dir;
  nk::ParamSet saved;
  nk::Dense::create(saved, "layer", 4, 3);
  nk::save_params(saved, dir.path() / "p.json");

  nk::ParamSet wider;
  nk::Dense::create(wider, "layer", 5, 3);
  try {
    nk::load_params_into(wider, dir.path() / "p.json");
    FAIL() << "expected FormatError";
  } catch (const highway_rl::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("layer.weight"), std::string::npos) << e.what();
  }

  nk::ParamSet extra;
  nk::Dense::create(extra, "layer", 4, 3);
  extra.add("more", {2});
  EXPECT_THROW(nk::load_params_into(extra, dir.path() / "p.json"), highway_rl::FormatError);

  nk::ParamSet fewer;
  fewer.add("layer.weight", {3, 4});
  EXPECT_THROW(nk::load_params_into(fewer, dir.path() / "p.json"), highway_rl::FormatError);
}

TEST(Serialize, CorruptFileIsFormatError) {
  highway_rl::testing::TempDir dir;
  std::ofstream(dir.path() / "bad.json") << "{\"format\": \"numkit-params/1\", \"tensors\": {\"w\": {\"shape\": [2],";
  EXPECT_THROW(nk::load_params(dir.path() / "bad.json"), highway_rl::FormatError);
  EXPECT_THROW(nk::load_params(dir.path() / "missing.json"), highway_rl::FormatError);
}
