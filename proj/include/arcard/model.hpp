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

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "arcard/density.hpp"
#include "arcard/layout.hpp"
#include "arcard/rng.hpp"
#include "arcard/sampler.hpp"

namespace arcard {

struct ModelConfig {
  uint32_t d_emb = 16;
  uint32_t d_ff = 128;
  uint32_t residual_blocks = 2;
  bool tie_embeddings = true;
  bool wildcard_skipping = true;
  double dropout = 0.0;
  double learning_rate = 2e-4;
  double warmup_fraction = 0.05;
  size_t batch_size = 2048;

  std::string to_json() const;
  // Strict: unknown keys are ConfigError.
  static ModelConfig FromJson(std::string_view text);
};

// Masked residual MLP over embedded subcolumns.
//
//   h0 = W_in x + b_in
//   h_{l+1} = h_l + W2 relu(W1 relu(h_l) + b1) + b2
//   out = W_out relu(h_L) + b_out
//   logits_i = E_i^T out_i
//
// x concatenates one embedding per subcolumn; E_i is subcolumn i's input
// embedding without its wildcard column when embeddings are tied.
template <typename Scalar>
class ResMade {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  ResMade() = default;
  ResMade(std::vector<uint32_t> domains, const ModelConfig& config, uint64_t seed);

  size_t columns() const { return domains_.size(); }
  const std::vector<uint32_t>& domains() const { return domains_; }
  const ModelConfig& config() const { return config_; }

  // All parameters; masked weights hold zeros at masked positions.
  std::vector<Mat>& params() { return params_; }
  const std::vector<Mat>& params() const { return params_; }
  // Mask of params()[i], or an empty matrix when unmasked.
  const Mat& mask(size_t i) const { return masks_[i]; }
  size_t parameter_count() const;

  struct Activations {
    Mat x;
    std::vector<Mat> h;   // h0 .. hL
    std::vector<Mat> r1;  // per block
    std::vector<Mat> u1;
    std::vector<Mat> r2;
    std::vector<Mat> drop;
    Mat a;                // relu(hL)
    Mat out;
  };

  // Rows of `inputs` are samples; kWildcard selects the wildcard embedding.
  // `rng` enables dropout.
  void forward(const PrefixMatrix& inputs, Activations& act, Rng* rng = nullptr) const;
  // domain(col) x batch.
  Mat logits(uint32_t col, const Activations& act) const;

  // Mean over rows of the summed cross-entropy of `targets` given `inputs`.
  // Fills `grads` (same shapes as params()) when non-null.
  double loss(const PrefixMatrix& inputs, const PrefixMatrix& targets, std::vector<Mat>* grads,
              Rng* rng = nullptr) const;

  // Hidden-unit degrees, exposed for tests.
  const std::vector<uint32_t>& hidden_degrees() const { return degrees_; }

  template <typename Other>
  ResMade<Other> cast() const;

 private:
  template <typename>
  friend class ResMade;

  size_t emb(uint32_t s) const { return s; }
  size_t out_emb(uint32_t s) const { return domains_.size() + s; }
  size_t first_dense() const { return config_.tie_embeddings ? domains_.size() : 2 * domains_.size(); }
  size_t w_in() const { return first_dense(); }
  size_t block(uint32_t b) const { return first_dense() + 2 + 4 * b; }  // W1 b1 W2 b2
  size_t w_out() const { return first_dense() + 2 + 4 * config_.residual_blocks; }
  const Mat& out_embedding(uint32_t s) const;

  std::vector<uint32_t> domains_;
  ModelConfig config_;
  std::vector<uint32_t> degrees_;
  std::vector<Mat> params_;
  std::vector<Mat> masks_;
};

struct TrainOptions {
  uint64_t tuples = 200000;
  uint32_t worker_count = 1;
  size_t queue_capacity = 4;
  uint64_t seed = 0;
};

struct TrainReport {
  uint64_t steps = 0;
  uint64_t tuples = 0;
  double final_loss = 0.0;
  std::vector<double> losses;  // per step
  double seconds = 0.0;
};

// The learned density backend: a float ResMADE bound to a layout.
class ArModel final : public DensityBackend {
 public:
  ArModel() = default;
  ArModel(ModelLayout layout, ModelConfig config, uint64_t seed, uint64_t dictionary_digest);

  const ModelLayout& layout() const override { return layout_; }
  bool supports_wildcards() const override { return config_.wildcard_skipping; }
  void conditional(uint32_t sub, const PrefixMatrix& prefix, Eigen::MatrixXd& out) const override;

  const ModelConfig& config() const { return config_; }
  uint64_t dictionary_digest() const { return digest_; }
  ResMade<float>& net() { return net_; }
  const ResMade<float>& net() const { return net_; }

  // Trains on `options.tuples` fresh samples with a warmup-then-cosine
  // schedule. The sampler's layout must equal this model's layout.
  TrainReport train(const JoinSampler& sampler, const TrainOptions& options);

  void save(const std::filesystem::path& path) const;
  static ArModel Load(const std::filesystem::path& path);

 private:
  ModelLayout layout_;
  ModelConfig config_;
  uint64_t digest_ = 0;
  ResMade<float> net_;
};

// Additional gradient steps on `budget` tuples drawn from a sampler over
// appended data. Throws LayoutMismatch if the data changed shape.
TrainReport incremental_update(ArModel& model, const JoinSampler& sampler, uint64_t budget,
                               const TrainOptions& options);

// Learning rate at `step` of `total` steps.
double scheduled_rate(const ModelConfig& config, uint64_t step, uint64_t total);

}  // namespace arcard
