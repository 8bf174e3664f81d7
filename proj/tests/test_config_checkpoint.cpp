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

#include <cstdlib>
#include <fstream>

#include <gtest/gtest.h>

#include "json.hpp"
#include "stancy/checkpoint.hpp"
#include "stancy/config.hpp"
#include "stancy/errors.hpp"
#include "stancy/evaluation.hpp"
#include "stancy/io.hpp"
#include "stancy/training.hpp"
#include "support/fixtures.hpp"
#include "support/scenarios.hpp"

namespace stancy {
namespace {

using config::ExperimentConfig;
using testing::TempDir;

TEST(Config, DefaultsFollowDocumentedChoices) {
  const ExperimentConfig c;
  EXPECT_EQ(c.epochs, 3);
  EXPECT_EQ(c.learning_rate, 3e-5);
  EXPECT_EQ(c.clip_norm, 1.0);
  EXPECT_EQ(c.warmup_fraction, 0.0);
  EXPECT_EQ(c.cos_weight, 1.0);
  EXPECT_FALSE(c.detach_cos_feature);
  EXPECT_EQ(c.encoder_max_sequence_length, 512);
  EXPECT_EQ(c.lstm_dense_size, 256);
  EXPECT_EQ(c.interpret_min_count, 2);
  EXPECT_TRUE(c.violations().empty());
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c;
  c.seed = 99;
  c.variant = "base";
  c.grid_learning_rates = {1e-5, 3e-5, 5e-5};
  c.grid_batch_sizes = {24, 28, 32};
  c.ingest.collapse.mapping["MILDLY_SUPPORT"] = std::nullopt;
  const auto back = ExperimentConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  EXPECT_EQ(back.to_json().dump(), c.to_json().dump());
  EXPECT_EQ(back.grid_batch_sizes, c.grid_batch_sizes);
}

TEST(Config, EveryViolationIsListed) {
  const auto j = nlohmann::json{{"train.learning_rate", -1.0}, {"train.batch_size", 0},     {"bogus.key", 1},
                                {"train.epochs", "three"},     {"labels.map.SUPPORT", "MAYBE"}};
  try {
    ExperimentConfig::from_json(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const auto& v = e.violations();
    EXPECT_EQ(v.size(), 5u);
    const std::string all = e.what();
    for (const char* needle : {"learning_rate", "batch_size", "bogus.key", "train.epochs", "labels.map.SUPPORT"}) {
      EXPECT_NE(all.find(needle), std::string::npos) << needle;
    }
  }
}

TEST(Config, LabelMapOverridesDefaults) {
  const auto c = ExperimentConfig::from_json({{"labels.map.support", "SUPPORT"}, {"labels.map.undermine", "OPPOSE"}});
  EXPECT_EQ(c.ingest.collapse.mapping.size(), 2u);
  EXPECT_EQ(c.ingest.collapse.mapping.at("UNDERMINE"), data::StanceLabel::kOppose);
}

TEST(Config, EncoderPathFallsBackToEnvironment) {
  ExperimentConfig c;
  ::setenv("STANCY_ENCODER_DIR", "/models/bert", 1);
  EXPECT_EQ(c.resolved_encoder_path(), "/models/bert");
  c.encoder_path = "/explicit";
  EXPECT_EQ(c.resolved_encoder_path(), "/explicit");
  ::unsetenv("STANCY_ENCODER_DIR");
}

TEST(Config, BertWithoutPathIsConfigError) {
  ExperimentConfig c;
  c.encoder_name = "bert";
  ::unsetenv("STANCY_ENCODER_DIR");
  EXPECT_THROW(train::build_encoder(c, {}), ConfigError);
}

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    train_pairs_ = testing::separable_pairs(40, 1);
    dev_pairs_ = testing::separable_pairs(10, 2, data::Split::kDev, "d");
  }
  std::vector<data::StancePair> train_pairs_, dev_pairs_;
  TempDir dir_{"ckpt"};
};

TEST_F(CheckpointTest, RoundTripGivesBitIdenticalPredictions) {
  for (const char* variant : {"base", "cons"}) {
    auto cfg = testing::separable_config(1);
    cfg.variant = variant;
    const auto result = train::train(cfg, train_pairs_, dev_pairs_);
    const auto path = dir_ / (std::string(variant) + "-ckpt");
    checkpoint::save(path, *result.best_model, cfg);
    const auto loaded = checkpoint::load(path);
    EXPECT_EQ(loaded.variant, variant == std::string("base") ? "BASE" : "CONS");
    EXPECT_EQ(loaded.config.to_json().dump(), cfg.to_json().dump());
    ASSERT_NE(loaded.stancy(), nullptr);
    for (const auto& p : dev_pairs_) {
      const auto a = result.best_model->predict(p), b = loaded.classifier->predict(p);
      EXPECT_EQ(a.probs, b.probs);
      EXPECT_EQ(a.cosine, b.cosine);
    }
  }
}

TEST_F(CheckpointTest, TrainingOutputLayout) {
  auto cfg = testing::separable_config(1);
  cfg.grid_learning_rates = {1e-3, 2e-3};
  train::train(cfg, train_pairs_, dev_pairs_, dir_ / "run");
  for (const char* f : {"grid-0/meta.json", "grid-1/meta.json", "best/meta.json", "best/encoder.safetensors",
                        "best/head.safetensors", "best/config.json", "best/vocab.txt", "config.json",
                        "train_report.json", "train_epochs.jsonl"}) {
    EXPECT_TRUE(std::filesystem::exists(dir_ / "run" / f)) << f;
  }
  const auto copied = ExperimentConfig::load(dir_ / "run" / "config.json");
  EXPECT_EQ(copied.to_json().dump(), cfg.to_json().dump());
}

TEST_F(CheckpointTest, ConfigCopyReproducesResults) {
  auto cfg = testing::separable_config(2);
  const auto first = train::train(cfg, train_pairs_, dev_pairs_, dir_ / "a");
  const auto copied = ExperimentConfig::load(dir_ / "a" / "config.json");
  const auto second = train::train(copied, train_pairs_, dev_pairs_, dir_ / "b");
  EXPECT_EQ(first.report.best().epochs.back().joint, second.report.best().epochs.back().joint);
  EXPECT_EQ(io::read_file(dir_ / "a" / "best" / "encoder.safetensors"),
            io::read_file(dir_ / "b" / "best" / "encoder.safetensors"));
}

TEST_F(CheckpointTest, CorruptCheckpointIsLoadError) {
  auto cfg = testing::separable_config(1);
  const auto result = train::train(cfg, train_pairs_, dev_pairs_);
  checkpoint::save(dir_ / "c", *result.best_model, cfg);
  EXPECT_THROW(checkpoint::load(dir_ / "missing"), CheckpointError);
  {
    std::ofstream(dir_ / "c" / "head.safetensors", std::ios::trunc) << "garbage";
  }
  EXPECT_THROW(checkpoint::load(dir_ / "c"), CheckpointError);
}

TEST(Safetensors, RoundTripAndHalfPrecisionDecode) {
  TempDir dir("st");
  safetensors::TensorMap m;
  m["a"] = {{2, 2}, {1.0, -2.5, 3.25, 1e-7}};
  m["b"] = {{3}, {0.0, 1.0, 2.0}};
  safetensors::save(dir / "x.safetensors", m, {{"k", "v"}});
  const auto back = safetensors::load(dir / "x.safetensors");
  EXPECT_EQ(back.at("a").values, m.at("a").values);
  EXPECT_EQ(back.at("b").shape, m.at("b").shape);

  // Hand-built F16/BF16 file: 1.0, -2.0 in each encoding.
  const std::string header = R"({"h":{"dtype":"F16","shape":[2],"data_offsets":[0,4]},)"
                             R"("g":{"dtype":"BF16","shape":[2],"data_offsets":[4,8]}})";
  std::string bytes;
  const std::uint64_t len = header.size();
  for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<char>((len >> (8 * i)) & 0xFF));
  bytes += header;
  for (unsigned char c : {0x00, 0x3C, 0x00, 0xC0, 0x80, 0x3F, 0x00, 0xC0}) bytes.push_back(static_cast<char>(c));
  io::write_file_atomic(dir / "half.safetensors", bytes);
  const auto half = safetensors::load(dir / "half.safetensors");
  EXPECT_EQ(half.at("h").values, (std::vector<double>{1.0, -2.0}));
  EXPECT_EQ(half.at("g").values, (std::vector<double>{1.0, -2.0}));
}

}  // namespace
}  // namespace stancy
