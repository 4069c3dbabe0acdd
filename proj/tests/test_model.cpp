/*
 * Copyright 2026 The arcard Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include "arcard/model.hpp"
#include "support/fixtures.hpp"

namespace arcard {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

ModelConfig small_config(bool tied) {
  ModelConfig c;
  c.d_emb = 4;
  c.d_ff = 12;
  c.residual_blocks = 2;
  c.tie_embeddings = tied;
  return c;
}

PrefixMatrix random_inputs(const std::vector<uint32_t>& domains, size_t rows, Rng& rng,
                           double wildcard_rate) {
  PrefixMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(domains.size()));
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < domains.size(); ++c) {
      m(r, c) = rng.uniform() < wildcard_rate ? kWildcard : static_cast<int32_t>(rng.below(domains[c]));
    }
  }
  return m;
}

TEST(ResMade, OutputsIgnoreLaterColumns) {
  const std::vector<uint32_t> domains{3, 5, 2, 7, 4};
  for (bool tied : {true, false}) {
    ResMade<double> net(domains, small_config(tied), 11);
    // Masked weights start random; perturb them so zero masks cannot hide.
    Rng rng(3);
    for (size_t i = 0; i < net.params().size(); ++i) {
      auto& p = net.params()[i];
      for (Eigen::Index k = 0; k < p.size(); ++k) p.data()[k] += 0.1 * (rng.uniform() - 0.5);
      if (net.mask(i).size() > 0) p = p.cwiseProduct(net.mask(i));
    }
    const PrefixMatrix base = random_inputs(domains, 16, rng, 0.2);
    ResMade<double>::Activations act;
    net.forward(base, act);
    for (uint32_t col = 0; col < domains.size(); ++col) {
      const auto ref = net.logits(col, act);
      for (int trial = 0; trial < 10; ++trial) {
        PrefixMatrix changed = base;
        for (uint32_t c = col; c < domains.size(); ++c) {
          for (Eigen::Index r = 0; r < changed.rows(); ++r) {
            changed(r, c) = rng.uniform() < 0.3 ? kWildcard : static_cast<int32_t>(rng.below(domains[c]));
          }
        }
        ResMade<double>::Activations act2;
        net.forward(changed, act2);
        EXPECT_LT((net.logits(col, act2) - ref).cwiseAbs().maxCoeff(), 1e-12) << "col " << col;
      }
      if (col > 0) {
        // And an earlier column does matter somewhere.
        PrefixMatrix changed = base;
        for (Eigen::Index r = 0; r < changed.rows(); ++r) {
          changed(r, col - 1) = (std::max(changed(r, col - 1), 0) + 1) % static_cast<int32_t>(domains[col - 1]);
        }
        ResMade<double>::Activations act2;
        net.forward(changed, act2);
        EXPECT_GT((net.logits(col, act2) - ref).cwiseAbs().maxCoeff(), 1e-9) << "col " << col;
      }
    }
  }
}

TEST(ResMade, GradientMatchesFiniteDifferences) {
  const std::vector<uint32_t> domains{4, 3, 6, 2};
  for (bool tied : {true, false}) {
    ResMade<double> net(domains, small_config(tied), 5);
    Rng rng(8);
    const PrefixMatrix targets = random_inputs(domains, 9, rng, 0.0);
    PrefixMatrix inputs = targets;
    for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
      for (Eigen::Index c = 0; c < inputs.cols(); ++c) {
        if (rng.uniform() < 0.25) inputs(r, c) = kWildcard;
      }
    }
    std::vector<ResMade<double>::Mat> grads;
    net.loss(inputs, targets, &grads);
    size_t checked = 0;
    double worst = 0.0;
    for (size_t i = 0; i < net.params().size(); ++i) {
      auto& p = net.params()[i];
      for (Eigen::Index k = 0; k < p.size(); k += 1 + static_cast<Eigen::Index>(rng.below(3))) {
        if (net.mask(i).size() > 0 && net.mask(i).data()[k] == 0.0) continue;
        const double keep = p.data()[k];
        const double h = 1e-6;
        p.data()[k] = keep + h;
        const double up = net.loss(inputs, targets, nullptr);
        p.data()[k] = keep - h;
        const double down = net.loss(inputs, targets, nullptr);
        p.data()[k] = keep;
        const double numeric = (up - down) / (2 * h);
        const double analytic = grads[i].data()[k];
        const double rel = std::fabs(numeric - analytic) / std::max(1e-6, std::fabs(numeric) + std::fabs(analytic));
        worst = std::max(worst, rel);
        ++checked;
      }
    }
    EXPECT_GE(checked, 100u);
    EXPECT_LT(worst, 1e-4) << (tied ? "tied" : "untied");
  }
}

TEST(ResMade, MaskedGradientsAreZero) {
  const std::vector<uint32_t> domains{4, 3, 6};
  ResMade<double> net(domains, small_config(true), 1);
  Rng rng(2);
  const PrefixMatrix t = random_inputs(domains, 5, rng, 0.0);
  std::vector<ResMade<double>::Mat> grads;
  net.loss(t, t, &grads);
  for (size_t i = 0; i < grads.size(); ++i) {
    if (net.mask(i).size() == 0) continue;
    EXPECT_EQ(grads[i].cwiseProduct((1.0 - net.mask(i).array()).matrix()).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(ResMade, LossStaysFiniteForExtremeLogits) {
  const std::vector<uint32_t> domains{6, 5, 7};
  ResMade<float> net(domains, small_config(true), 2);
  for (auto& p : net.params()) p *= 40.0f;
  Rng rng(4);
  const PrefixMatrix t = random_inputs(domains, 32, rng, 0.0);
  std::vector<ResMade<float>::Mat> grads;
  const double loss = net.loss(t, t, &grads);
  EXPECT_TRUE(std::isfinite(loss));
  EXPECT_GT(loss, 100.0);  // logits far apart, so some target is very unlikely
  for (const auto& g : grads) EXPECT_TRUE(g.allFinite());
}

TEST(ModelConfig, StrictJson) {
  ModelConfig c;
  c.d_ff = 64;
  c.learning_rate = 0.01;
  const ModelConfig back = ModelConfig::FromJson(c.to_json());
  EXPECT_EQ(back.d_ff, 64u);
  EXPECT_DOUBLE_EQ(back.learning_rate, 0.01);
  EXPECT_EQ(code_of([] { ModelConfig::FromJson(R"({"d_embed": 3})"); }), ErrorCode::kConfigError);
  EXPECT_EQ(code_of([] { ModelConfig::FromJson(R"({"dropout": 1.5})"); }), ErrorCode::kConfigError);
  EXPECT_EQ(code_of([] { ModelConfig::FromJson("[1]"); }), ErrorCode::kConfigError);
  EXPECT_EQ(ModelConfig::FromJson("{}").batch_size, ModelConfig{}.batch_size);
}

TEST(Schedule, WarmupThenCosine) {
  ModelConfig c;
  c.learning_rate = 1e-3;
  c.warmup_fraction = 0.1;
  EXPECT_LT(scheduled_rate(c, 0, 1000), 1e-4);
  EXPECT_NEAR(scheduled_rate(c, 100, 1000), 1e-3, 2e-5);
  EXPECT_LT(scheduled_rate(c, 999, 1000), 1e-5);
  double prev = 1.0;
  for (uint64_t s = 100; s < 1000; s += 50) {
    const double r = scheduled_rate(c, s, 1000);
    EXPECT_LE(r, prev);
    prev = r;
  }
}

class ModelFixture : public ::testing::Test {
 protected:
  ModelFixture()
      : ds(testing::random_instance(4)), layout(ModelLayout::Build(ds, {3})), sampler(ds, layout) {}

  ArModel make(uint64_t seed) const {
    ModelConfig c = small_config(true);
    c.batch_size = 128;
    c.learning_rate = 5e-3;
    return ArModel(layout, c, seed, ds.dictionary_digest());
  }

  Dataset ds;
  ModelLayout layout;
  JoinSampler sampler;
};

TEST_F(ModelFixture, TrainingLowersLossAndIsDeterministic) {
  ArModel a = make(1);
  ArModel b = make(1);
  TrainOptions opt;
  opt.tuples = 128 * 60;
  opt.seed = 4;
  const TrainReport ra = a.train(sampler, opt);
  opt.worker_count = 3;
  const TrainReport rb = b.train(sampler, opt);
  EXPECT_EQ(ra.steps, 60u);
  EXPECT_EQ(ra.tuples, opt.tuples);
  EXPECT_EQ(ra.losses, rb.losses);
  for (size_t i = 0; i < a.net().params().size(); ++i) EXPECT_EQ(a.net().params()[i], b.net().params()[i]);
  double head = 0, tail = 0;
  for (size_t i = 0; i < 5; ++i) head += ra.losses[i];
  for (size_t i = ra.losses.size() - 5; i < ra.losses.size(); ++i) tail += ra.losses[i];
  EXPECT_LT(tail, head);
}

TEST_F(ModelFixture, ConditionalsAreDistributions) {
  const ArModel m = make(2);
  Rng rng(1);
  std::vector<uint32_t> domains;
  for (const auto& s : layout.subcolumns()) domains.push_back(s.domain);
  const PrefixMatrix prefix = random_inputs(domains, 7, rng, 0.5);
  Eigen::MatrixXd p;
  for (uint32_t s = 0; s < layout.sub_count(); ++s) {
    m.conditional(s, prefix, p);
    ASSERT_EQ(p.cols(), domains[s]);
    for (Eigen::Index r = 0; r < p.rows(); ++r) EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-9);
    EXPECT_GE(p.minCoeff(), 0.0);
  }
}

TEST_F(ModelFixture, SaveLoadRoundTrip) {
  ArModel m = make(3);
  TrainOptions opt;
  opt.tuples = 128 * 5;
  m.train(sampler, opt);
  const auto path = std::filesystem::temp_directory_path() / "arcard_model_test.bin";
  const auto path2 = std::filesystem::temp_directory_path() / "arcard_model_test2.bin";
  m.save(path);
  const ArModel back = ArModel::Load(path);
  back.save(path2);
  auto bytes = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(bytes(path), bytes(path2));
  EXPECT_EQ(back.layout(), m.layout());
  EXPECT_EQ(back.dictionary_digest(), m.dictionary_digest());
  Rng rng(1);
  PrefixMatrix prefix = PrefixMatrix::Constant(3, static_cast<Eigen::Index>(layout.sub_count()), kWildcard);
  Eigen::MatrixXd p1, p2;
  m.conditional(1, prefix, p1);
  back.conditional(1, prefix, p2);
  EXPECT_EQ(p1, p2);

  // Truncations and a bad magic are CorruptCheckpoint.
  const std::string all = bytes(path);
  for (size_t cut : {size_t{3}, size_t{20}, all.size() / 2, all.size() - 2}) {
    std::ofstream(path, std::ios::binary) << all.substr(0, cut);
    EXPECT_EQ(code_of([&] { ArModel::Load(path); }), ErrorCode::kCorruptCheckpoint) << cut;
  }
  std::string bad = all;
  bad[0] = 'X';
  std::ofstream(path, std::ios::binary) << bad;
  EXPECT_EQ(code_of([&] { ArModel::Load(path); }), ErrorCode::kCorruptCheckpoint);
  EXPECT_EQ(code_of([&] { ArModel::Load("/nonexistent/model.bin"); }), ErrorCode::kIoError);
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_F(ModelFixture, IncrementalUpdateRejectsOtherLayouts) {
  ArModel m = make(4);
  const Dataset other = testing::random_instance(9);
  const ModelLayout other_layout = ModelLayout::Build(other, {3});
  const JoinSampler other_sampler(other, other_layout);
  EXPECT_EQ(code_of([&] { incremental_update(m, other_sampler, 256, {}); }), ErrorCode::kLayoutMismatch);
  const TrainReport r = incremental_update(m, sampler, 300, {});
  EXPECT_EQ(r.tuples, 300u);
}

}  // namespace
}  // namespace arcard
