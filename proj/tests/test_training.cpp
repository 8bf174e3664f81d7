/*
 * Copyright 2026 The Stancy Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "stancy/errors.hpp"
#include "stancy/evaluation.hpp"
#include "stancy/optim.hpp"
#include "stancy/training.hpp"
#include "support/fixtures.hpp"
#include "support/scenarios.hpp"

namespace stancy::train {
namespace {

using data::Split;

RunReport run_with(double lr, int bs, double f1, bool failed = false) {
  RunReport r;
  r.point = {lr, bs};
  r.best_dev_macro_f1 = f1;
  r.failed = failed;
  return r;
}

TEST(SelectBest, SingleReportIsItself) {
  const std::vector<RunReport> runs{run_with(3e-5, 32, 61.0)};
  EXPECT_EQ(select_best(runs), 0u);
}

TEST(SelectBest, TieBreaksTowardLowerLearningRateThenSmallerBatch) {
  const std::vector<RunReport> runs{run_with(1e-5, 32, 70), run_with(3e-5, 32, 75), run_with(5e-5, 32, 75)};
  EXPECT_EQ(select_best(runs), 1u);
  const std::vector<RunReport> batches{run_with(3e-5, 32, 75), run_with(3e-5, 24, 75), run_with(3e-5, 28, 75)};
  EXPECT_EQ(select_best(batches), 1u);
}

TEST(SelectBest, EmptyOrAllFailedIsTrainingError) {
  EXPECT_THROW(select_best({}), TrainingError);
  const std::vector<RunReport> runs{run_with(1e-5, 24, 0, true), run_with(3e-5, 24, 0, true)};
  EXPECT_THROW(select_best(runs), TrainingError);
}

TEST(SelectBest, NeverPicksStrictlyWorseSuccessfulRun) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RunReport> runs;
    for (int i = 0; i < 9; ++i) {
      runs.push_back(run_with((1 + 2 * rng.below(3)) * 1e-5, 24 + 4 * static_cast<int>(rng.below(3)),
                              static_cast<double>(rng.below(5)), rng.below(4) == 0));
    }
    bool any = false;
    for (const auto& r : runs) any = any || !r.failed;
    if (!any) continue;
    const auto& best = runs[select_best(runs)];
    EXPECT_FALSE(best.failed);
    for (const auto& r : runs) {
      if (!r.failed) {
        EXPECT_GE(best.best_dev_macro_f1, r.best_dev_macro_f1);
      }
    }
  }
}

TEST(Grid, ThreeByThreeGridHasNinePoints) {
  config::ExperimentConfig cfg;
  cfg.grid_learning_rates = {1e-5, 3e-5, 5e-5};
  cfg.grid_batch_sizes = {24, 28, 32};
  const auto pts = grid_points(cfg);
  ASSERT_EQ(pts.size(), 9u);
  EXPECT_EQ(pts.front().learning_rate, 1e-5);
  EXPECT_EQ(pts.front().batch_size, 24);
  EXPECT_EQ(pts.back().learning_rate, 5e-5);
  EXPECT_EQ(pts.back().batch_size, 32);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  auto p = ag::Tensor::parameter(1, 2, {1.0, -1.0});
  optim::Adam adam({p}, {0.1});
  p.mutable_grad()[0] = 3.0;
  p.mutable_grad()[1] = -0.5;
  adam.step();
  EXPECT_NEAR(p.value()[0], 0.9, 1e-6);
  EXPECT_NEAR(p.value()[1], -0.9, 1e-6);
  EXPECT_EQ(adam.steps(), 1u);
}

TEST(ClipGradNorm, RescalesToMaximum) {
  auto p = ag::Tensor::parameter(1, 2, {0, 0});
  p.mutable_grad()[0] = 3.0;
  p.mutable_grad()[1] = 4.0;
  EXPECT_DOUBLE_EQ(optim::clip_grad_norm({p}, 1.0), 5.0);
  const double scale = 1.0 / (5.0 + 1e-6);
  EXPECT_NEAR(optim::global_grad_norm({p}), 5.0 * scale, 1e-12);
  EXPECT_NEAR(p.grad()[0], 3.0 * scale, 1e-12);
  EXPECT_DOUBLE_EQ(optim::clip_grad_norm({p}, 0.0), optim::global_grad_norm({p}));
}

TEST(Train, OneEpochFullBatchTakesOneStepPerGridPoint) {
  const auto train_pairs = testing::separable_pairs(24, 1);
  const auto dev_pairs = testing::separable_pairs(8, 2, Split::kDev, "d");
  auto cfg = testing::separable_config(1);
  cfg.batch_size = static_cast<int>(train_pairs.size());
  cfg.grid_learning_rates = {1e-3, 3e-3};
  const auto result = train(cfg, train_pairs, dev_pairs);
  ASSERT_EQ(result.report.runs.size(), 2u);
  for (const auto& r : result.report.runs) EXPECT_EQ(r.optimizer_steps, 1u);
}

class SeparableTraining : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    train_pairs_ = new std::vector<data::StancePair>(testing::separable_pairs(200, 11));
    dev_pairs_ = new std::vector<data::StancePair>(testing::separable_pairs(40, 12, Split::kDev, "d"));
    result_ = new TrainResult(train(testing::separable_config(5), *train_pairs_, *dev_pairs_));
  }
  static void TearDownTestSuite() {
    delete result_;
    delete train_pairs_;
    delete dev_pairs_;
  }
  static std::vector<data::StancePair>* train_pairs_;
  static std::vector<data::StancePair>* dev_pairs_;
  static TrainResult* result_;
};
std::vector<data::StancePair>* SeparableTraining::train_pairs_ = nullptr;
std::vector<data::StancePair>* SeparableTraining::dev_pairs_ = nullptr;
TrainResult* SeparableTraining::result_ = nullptr;

TEST_F(SeparableTraining, ReachesHighTrainingAccuracy) {
  const auto report = eval::evaluate(*result_->best_model, *train_pairs_);
  EXPECT_GT(report.accuracy(), 95.0);
  EXPECT_GT(result_->report.best().epochs.back().train_accuracy, 95.0);
}

TEST_F(SeparableTraining, JointLossDecreases) {
  const auto& epochs = result_->report.best().epochs;
  ASSERT_EQ(epochs.size(), 5u);
  EXPECT_LT(epochs.back().joint, epochs.front().joint);
}

TEST_F(SeparableTraining, SameSeedReproducesLossTrajectory) {
  const auto again = train(testing::separable_config(5), *train_pairs_, *dev_pairs_);
  const auto& a = result_->report.best().epochs;
  const auto& b = again.report.best().epochs;
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].ce, b[i].ce);
    EXPECT_EQ(a[i].cos, b[i].cos);
    EXPECT_EQ(a[i].joint, b[i].joint);
    EXPECT_EQ(a[i].dev_macro_f1, b[i].dev_macro_f1);
  }
  EXPECT_EQ(again.report.to_json().dump(), result_->report.to_json().dump());
}

TEST_F(SeparableTraining, ReportRecordsOptimizerDefaults) {
  const auto j = result_->report.to_json();
  EXPECT_EQ(j["optimizer"]["beta1"], 0.9);
  EXPECT_EQ(j["optimizer"]["beta2"], 0.999);
  EXPECT_EQ(j["optimizer"]["eps"], 1e-8);
  EXPECT_EQ(j["optimizer"]["clip_norm"], 1.0);
}

TEST(Train, DivergentGridPointIsRecordedAndSkipped) {
  const auto train_pairs = testing::separable_pairs(16, 1);
  const auto dev_pairs = testing::separable_pairs(8, 2, Split::kDev, "d");
  auto cfg = testing::separable_config(2);
  cfg.clip_norm = 0.0;
  cfg.grid_learning_rates = {1e300, 1e-3};
  const auto result = train(cfg, train_pairs, dev_pairs);
  ASSERT_EQ(result.report.runs.size(), 2u);
  EXPECT_TRUE(result.report.runs[0].failed);
  EXPECT_FALSE(result.report.runs[1].failed);
  EXPECT_EQ(result.report.selected, 1u);
}

TEST(Train, EmptySplitsAreRejected) {
  const auto pairs = testing::separable_pairs(8, 1);
  EXPECT_THROW(train(testing::separable_config(1), pairs, {}), InputError);
  EXPECT_THROW(train(testing::separable_config(1), {}, pairs), InputError);
}

}  // namespace
}  // namespace stancy::train
