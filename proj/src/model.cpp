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

#include "arcard/model.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

#include "arcard/binary_io.hpp"
#include "json.hpp"

namespace arcard {

using nlohmann::json;

namespace {

template <typename T>
T count_of(const json& v) {
  if (!v.is_number_unsigned() || v.get<uint64_t>() > std::numeric_limits<T>::max()) {
    fail(ErrorCode::kConfigError, "expected a non-negative integer, got " + v.dump());
  }
  return static_cast<T>(v.get<uint64_t>());
}

}  // namespace

// ---------------------------------------------------------------------------
// DensityBackend

std::vector<double> DensityBackend::log_likelihood(const PrefixMatrix& rows) const {
  const auto& subs = layout().subcolumns();
  if (static_cast<size_t>(rows.cols()) != subs.size()) {
    fail(ErrorCode::kLayoutMismatch, "row width does not match layout");
  }
  std::vector<double> out(rows.rows(), 0.0);
  Eigen::MatrixXd p;
  for (uint32_t s = 0; s < subs.size(); ++s) {
    conditional(s, rows, p);
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      const int32_t t = rows(r, s);
      if (t < 0 || t >= p.cols()) fail(ErrorCode::kTokenOutOfRange, "row token outside subdomain");
      out[r] += std::log(p(r, t));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// ModelConfig

std::string ModelConfig::to_json() const {
  json doc;
  doc["d_emb"] = d_emb;
  doc["d_ff"] = d_ff;
  doc["residual_blocks"] = residual_blocks;
  doc["tie_embeddings"] = tie_embeddings;
  doc["wildcard_skipping"] = wildcard_skipping;
  doc["dropout"] = dropout;
  doc["learning_rate"] = learning_rate;
  doc["warmup_fraction"] = warmup_fraction;
  doc["batch_size"] = batch_size;
  return doc.dump();
}

ModelConfig ModelConfig::FromJson(std::string_view text) {
  ModelConfig c;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigError, std::string("model config: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::kConfigError, "model config must be an object");
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "d_emb") {
        c.d_emb = count_of<uint32_t>(value);
      } else if (key == "d_ff") {
        c.d_ff = count_of<uint32_t>(value);
      } else if (key == "residual_blocks") {
        c.residual_blocks = count_of<uint32_t>(value);
      } else if (key == "tie_embeddings") {
        c.tie_embeddings = value.get<bool>();
      } else if (key == "wildcard_skipping") {
        c.wildcard_skipping = value.get<bool>();
      } else if (key == "dropout") {
        c.dropout = value.get<double>();
      } else if (key == "learning_rate") {
        c.learning_rate = value.get<double>();
      } else if (key == "warmup_fraction") {
        c.warmup_fraction = value.get<double>();
      } else if (key == "batch_size") {
        c.batch_size = count_of<size_t>(value);
      } else {
        fail(ErrorCode::kConfigError, "unknown model config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigError, std::string("model config: ") + e.what());
  }
  if (c.d_emb == 0 || c.d_ff == 0 || c.batch_size == 0) {
    fail(ErrorCode::kConfigError, "d_emb, d_ff and batch_size must be positive");
  }
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) fail(ErrorCode::kConfigError, "dropout in [0, 1)");
  if (!(c.learning_rate > 0.0)) fail(ErrorCode::kConfigError, "learning_rate must be positive");
  if (!(c.warmup_fraction >= 0.0 && c.warmup_fraction <= 1.0)) {
    fail(ErrorCode::kConfigError, "warmup_fraction in [0, 1]");
  }
  return c;
}

double scheduled_rate(const ModelConfig& config, uint64_t step, uint64_t total) {
  const uint64_t warm = std::max<uint64_t>(
      1, static_cast<uint64_t>(std::llround(config.warmup_fraction * static_cast<double>(total))));
  if (step < warm) {
    return config.learning_rate * static_cast<double>(step + 1) / static_cast<double>(warm);
  }
  const double span = static_cast<double>(std::max<uint64_t>(1, total - warm));
  const double progress = static_cast<double>(step - warm) / span;
  return config.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

// ---------------------------------------------------------------------------
// ResMade

template <typename Scalar>
ResMade<Scalar>::ResMade(std::vector<uint32_t> domains, const ModelConfig& config, uint64_t seed)
    : domains_(std::move(domains)), config_(config) {
  const size_t n = domains_.size();
  if (n == 0) fail(ErrorCode::kLayoutMismatch, "model needs at least one column");
  const Eigen::Index d = config_.d_emb;
  const Eigen::Index h = config_.d_ff;
  const Eigen::Index nd = static_cast<Eigen::Index>(n) * d;

  degrees_.resize(h);
  const uint32_t span = std::max<uint32_t>(1, static_cast<uint32_t>(n) - 1);
  for (Eigen::Index k = 0; k < h; ++k) degrees_[k] = static_cast<uint32_t>(k) % span + 1;

  Rng rng(derive_seed(seed, {0x6d6f64656cull}));
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
  auto uniform = [&](Eigen::Index rows, Eigen::Index cols, double bound) {
    Mat m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) {
        m(i, j) = static_cast<Scalar>((2.0 * rng.uniform() - 1.0) * bound);
      }
    }
    return m;
  };

  for (size_t s = 0; s < n; ++s) {
    Mat e(d, domains_[s] + 1);
    for (Eigen::Index j = 0; j < e.cols(); ++j) {
      for (Eigen::Index i = 0; i < d; ++i) e(i, j) = static_cast<Scalar>(normal(rng));
    }
    params_.push_back(std::move(e));
    masks_.emplace_back();
  }
  if (!config_.tie_embeddings) {
    for (size_t s = 0; s < n; ++s) {
      Mat e(d, domains_[s]);
      for (Eigen::Index j = 0; j < e.cols(); ++j) {
        for (Eigen::Index i = 0; i < d; ++i) e(i, j) = static_cast<Scalar>(normal(rng));
      }
      params_.push_back(std::move(e));
      masks_.emplace_back();
    }
  }

  Mat in_mask(h, nd);
  for (Eigen::Index k = 0; k < h; ++k) {
    for (Eigen::Index j = 0; j < nd; ++j) {
      in_mask(k, j) = degrees_[k] >= static_cast<uint32_t>(j / d) + 1 ? Scalar(1) : Scalar(0);
    }
  }
  Mat hid_mask(h, h);
  for (Eigen::Index k = 0; k < h; ++k) {
    for (Eigen::Index j = 0; j < h; ++j) {
      hid_mask(k, j) = degrees_[k] >= degrees_[j] ? Scalar(1) : Scalar(0);
    }
  }
  Mat out_mask(nd, h);
  for (Eigen::Index j = 0; j < nd; ++j) {
    for (Eigen::Index k = 0; k < h; ++k) {
      out_mask(j, k) = static_cast<uint32_t>(j / d) + 1 > degrees_[k] ? Scalar(1) : Scalar(0);
    }
  }

  const double in_bound = 1.0 / std::sqrt(static_cast<double>(nd));
  const double hid_bound = 1.0 / std::sqrt(static_cast<double>(h));
  params_.push_back(uniform(h, nd, in_bound).cwiseProduct(in_mask));
  masks_.push_back(in_mask);
  params_.push_back(uniform(h, 1, in_bound));
  masks_.emplace_back();
  for (uint32_t b = 0; b < config_.residual_blocks; ++b) {
    for (int layer = 0; layer < 2; ++layer) {
      params_.push_back(uniform(h, h, hid_bound).cwiseProduct(hid_mask));
      masks_.push_back(hid_mask);
      params_.push_back(uniform(h, 1, hid_bound));
      masks_.emplace_back();
    }
  }
  params_.push_back(uniform(nd, h, hid_bound).cwiseProduct(out_mask));
  masks_.push_back(out_mask);
  params_.push_back(Mat::Zero(nd, 1));
  masks_.emplace_back();
}

template <typename Scalar>
size_t ResMade<Scalar>::parameter_count() const {
  size_t n = 0;
  for (const auto& p : params_) n += static_cast<size_t>(p.size());
  return n;
}

template <typename Scalar>
const typename ResMade<Scalar>::Mat& ResMade<Scalar>::out_embedding(uint32_t s) const {
  return config_.tie_embeddings ? params_[emb(s)] : params_[out_emb(s)];
}

template <typename Scalar>
void ResMade<Scalar>::forward(const PrefixMatrix& inputs, Activations& act, Rng* rng) const {
  const size_t n = domains_.size();
  const Eigen::Index d = config_.d_emb;
  const Eigen::Index batch = inputs.rows();
  if (static_cast<size_t>(inputs.cols()) != n) {
    fail(ErrorCode::kLayoutMismatch, "input width " + std::to_string(inputs.cols()) +
                                         " does not match model width " + std::to_string(n));
  }
  act.x.resize(static_cast<Eigen::Index>(n) * d, batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (size_t s = 0; s < n; ++s) {
      const int32_t t = inputs(b, static_cast<Eigen::Index>(s));
      if (t >= static_cast<int32_t>(domains_[s])) {
        fail(ErrorCode::kTokenOutOfRange, "input token outside subcolumn domain");
      }
      const Eigen::Index col = t < 0 ? domains_[s] : t;
      act.x.block(static_cast<Eigen::Index>(s) * d, b, d, 1) = params_[emb(s)].col(col);
    }
  }
  const uint32_t blocks = config_.residual_blocks;
  act.h.resize(blocks + 1);
  act.r1.resize(blocks);
  act.u1.resize(blocks);
  act.r2.resize(blocks);
  act.drop.resize(blocks);
  act.h[0] = (params_[w_in()] * act.x).colwise() + params_[w_in() + 1].col(0);
  const bool dropout = rng != nullptr && config_.dropout > 0.0;
  for (uint32_t l = 0; l < blocks; ++l) {
    const size_t p = block(l);
    act.r1[l] = act.h[l].cwiseMax(Scalar(0));
    act.u1[l] = (params_[p] * act.r1[l]).colwise() + params_[p + 1].col(0);
    act.r2[l] = act.u1[l].cwiseMax(Scalar(0));
    if (dropout) {
      const Scalar keep = static_cast<Scalar>(1.0 - config_.dropout);
      act.drop[l].resize(act.r2[l].rows(), act.r2[l].cols());
      for (Eigen::Index i = 0; i < act.drop[l].size(); ++i) {
        act.drop[l](i) = rng->uniform() < config_.dropout ? Scalar(0) : Scalar(1) / keep;
      }
      act.r2[l] = act.r2[l].cwiseProduct(act.drop[l]);
    } else {
      act.drop[l].resize(0, 0);
    }
    act.h[l + 1] = act.h[l] + ((params_[p + 2] * act.r2[l]).colwise() + params_[p + 3].col(0));
  }
  act.a = act.h[blocks].cwiseMax(Scalar(0));
  act.out = (params_[w_out()] * act.a).colwise() + params_[w_out() + 1].col(0);
}

template <typename Scalar>
typename ResMade<Scalar>::Mat ResMade<Scalar>::logits(uint32_t col, const Activations& act) const {
  const Eigen::Index d = config_.d_emb;
  const Mat& e = out_embedding(col);
  return e.leftCols(domains_[col]).transpose() * act.out.middleRows(static_cast<Eigen::Index>(col) * d, d);
}

template <typename Scalar>
double ResMade<Scalar>::loss(const PrefixMatrix& inputs, const PrefixMatrix& targets,
                             std::vector<Mat>* grads, Rng* rng) const {
  if (targets.rows() != inputs.rows() || targets.cols() != inputs.cols()) {
    fail(ErrorCode::kLayoutMismatch, "inputs and targets differ in shape");
  }
  Activations act;
  forward(inputs, act, rng);
  const size_t n = domains_.size();
  const Eigen::Index d = config_.d_emb;
  const Eigen::Index batch = inputs.rows();
  if (batch == 0) return 0.0;
  const Scalar inv_batch = Scalar(1) / static_cast<Scalar>(batch);

  if (grads) {
    grads->resize(params_.size());
    for (size_t i = 0; i < params_.size(); ++i) {
      (*grads)[i].setZero(params_[i].rows(), params_[i].cols());
    }
  }
  Mat dout;
  if (grads) dout.setZero(act.out.rows(), batch);

  double total = 0.0;
  for (uint32_t s = 0; s < n; ++s) {
    Mat z = logits(s, act);
    for (Eigen::Index b = 0; b < batch; ++b) {
      const int32_t t = targets(b, s);
      if (t < 0 || t >= static_cast<int32_t>(domains_[s])) {
        fail(ErrorCode::kTokenOutOfRange, "target token outside subcolumn domain");
      }
      const Scalar m = z.col(b).maxCoeff();
      const Scalar shifted = z(t, b) - m;
      z.col(b) = (z.col(b).array() - m).exp().matrix();
      const Scalar sum = z.col(b).sum();
      total -= static_cast<double>(shifted - std::log(sum));
      if (grads) {
        z.col(b) /= sum;
        z(t, b) -= Scalar(1);
        z.col(b) *= inv_batch;
      }
    }
    if (!grads) continue;
    const Mat& e = out_embedding(s);
    const auto out_s = act.out.middleRows(static_cast<Eigen::Index>(s) * d, d);
    dout.middleRows(static_cast<Eigen::Index>(s) * d, d) = e.leftCols(domains_[s]) * z;
    Mat& ge = (*grads)[config_.tie_embeddings ? emb(s) : out_emb(s)];
    ge.leftCols(domains_[s]) += out_s * z.transpose();
  }
  const double mean = total / static_cast<double>(batch);
  if (!grads) return mean;

  auto& g = *grads;
  g[w_out()] = (dout * act.a.transpose()).cwiseProduct(masks_[w_out()]);
  g[w_out() + 1] = dout.rowwise().sum();
  Mat dh = (params_[w_out()].transpose() * dout)
               .cwiseProduct((act.h.back().array() > Scalar(0)).template cast<Scalar>().matrix());
  for (uint32_t l = config_.residual_blocks; l-- > 0;) {
    const size_t p = block(l);
    g[p + 2] = (dh * act.r2[l].transpose()).cwiseProduct(masks_[p + 2]);
    g[p + 3] = dh.rowwise().sum();
    Mat dr2 = params_[p + 2].transpose() * dh;
    if (act.drop[l].size() > 0) dr2 = dr2.cwiseProduct(act.drop[l]);
    const Mat du1 =
        dr2.cwiseProduct((act.u1[l].array() > Scalar(0)).template cast<Scalar>().matrix());
    g[p] = (du1 * act.r1[l].transpose()).cwiseProduct(masks_[p]);
    g[p + 1] = du1.rowwise().sum();
    dh += (params_[p].transpose() * du1)
              .cwiseProduct((act.h[l].array() > Scalar(0)).template cast<Scalar>().matrix());
  }
  g[w_in()] = (dh * act.x.transpose()).cwiseProduct(masks_[w_in()]);
  g[w_in() + 1] = dh.rowwise().sum();
  const Mat dx = params_[w_in()].transpose() * dh;
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (uint32_t s = 0; s < n; ++s) {
      const int32_t t = inputs(b, s);
      const Eigen::Index col = t < 0 ? domains_[s] : t;
      g[emb(s)].col(col) += dx.block(static_cast<Eigen::Index>(s) * d, b, d, 1);
    }
  }
  return mean;
}

template <typename Scalar>
template <typename Other>
ResMade<Other> ResMade<Scalar>::cast() const {
  ResMade<Other> out;
  out.domains_ = domains_;
  out.config_ = config_;
  out.degrees_ = degrees_;
  for (const auto& p : params_) out.params_.push_back(p.template cast<Other>());
  for (const auto& m : masks_) out.masks_.push_back(m.template cast<Other>());
  return out;
}

template class ResMade<float>;
template class ResMade<double>;
template ResMade<double> ResMade<float>::cast<double>() const;
template ResMade<float> ResMade<double>::cast<float>() const;

// ---------------------------------------------------------------------------
// ArModel

namespace {

std::vector<uint32_t> sub_domains(const ModelLayout& layout) {
  std::vector<uint32_t> out;
  for (const auto& s : layout.subcolumns()) out.push_back(s.domain);
  return out;
}

// Flushes float subnormals to zero on this thread while alive. Tiny Adam
// moments and rare-class gradients otherwise slow training several-fold.
class FlushDenormals {
 public:
#if defined(__SSE__)
  FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040); }  // FTZ | DAZ
  ~FlushDenormals() { _mm_setcsr(saved_); }

 private:
  unsigned saved_;
#endif
};

constexpr std::string_view kModelMagic = "ARCMODEL";
constexpr uint32_t kModelVersion = 1;

}  // namespace

ArModel::ArModel(ModelLayout layout, ModelConfig config, uint64_t seed, uint64_t dictionary_digest)
    : layout_(std::move(layout)), config_(config), digest_(dictionary_digest),
      net_(sub_domains(layout_), config_, seed) {}

void ArModel::conditional(uint32_t sub, const PrefixMatrix& prefix, Eigen::MatrixXd& out) const {
  if (sub >= layout_.sub_count()) fail(ErrorCode::kLayoutMismatch, "subcolumn out of range");
  const FlushDenormals flush;
  ResMade<float>::Activations act;
  net_.forward(prefix, act);
  const Eigen::MatrixXf z = net_.logits(sub, act);
  out.resize(prefix.rows(), z.rows());
  for (Eigen::Index b = 0; b < z.cols(); ++b) {
    const Eigen::VectorXd col = z.col(b).cast<double>();
    const Eigen::ArrayXd e = (col.array() - col.maxCoeff()).exp();
    out.row(b) = (e / e.sum()).matrix().transpose();
  }
}

TrainReport ArModel::train(const JoinSampler& sampler, const TrainOptions& options) {
  if (!(sampler.layout() == layout_)) {
    fail(ErrorCode::kLayoutMismatch, "sampler layout differs from the model layout");
  }
  if (sampler.dataset().dictionary_digest() != digest_) {
    fail(ErrorCode::kLayoutMismatch, "dataset dictionaries differ from the model's");
  }
  TrainReport report;
  if (options.tuples == 0) return report;
  const FlushDenormals flush;
  const auto start = std::chrono::steady_clock::now();
  const size_t batch = static_cast<size_t>(std::min<uint64_t>(config_.batch_size, options.tuples));
  const uint64_t steps = (options.tuples + batch - 1) / batch;

  SamplerConfig sc;
  sc.batch_size = batch;
  sc.worker_count = std::max<uint32_t>(1, options.worker_count);
  sc.seed = derive_seed(options.seed, {1});
  SamplePipeline pipeline(sampler, sc, options.queue_capacity);

  auto& params = net_.params();
  std::vector<Eigen::MatrixXf> m(params.size());
  std::vector<Eigen::MatrixXf> v(params.size());
  for (size_t i = 0; i < params.size(); ++i) {
    m[i].setZero(params[i].rows(), params[i].cols());
    v[i].setZero(params[i].rows(), params[i].cols());
  }
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr float kEps = 1e-8f;

  const size_t width = layout_.sub_count();
  std::vector<Eigen::MatrixXf> grads;
  uint64_t remaining = options.tuples;
  for (uint64_t step = 0; step < steps; ++step) {
    const SampleBatch sb = pipeline.next();
    const size_t rows = static_cast<size_t>(std::min<uint64_t>(remaining, sb.rows()));
    remaining -= rows;
    PrefixMatrix targets(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
    for (size_t r = 0; r < rows; ++r) {
      layout_.factorize_row(sb.row(r),
                            std::span<int32_t>(targets.data() + r * width, width));
    }
    PrefixMatrix inputs = targets;
    Rng mask_rng(derive_seed(options.seed, {2, step}));
    if (config_.wildcard_skipping) {
      for (size_t r = 0; r < rows; ++r) {
        const double rate = mask_rng.uniform();
        for (size_t c = 0; c < width; ++c) {
          if (mask_rng.uniform() < rate) inputs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = kWildcard;
        }
      }
    }
    const double loss = net_.loss(inputs, targets, &grads, &mask_rng);
    if (!std::isfinite(loss)) {
      fail(ErrorCode::kNonFiniteLoss, "training loss became non-finite at step " + std::to_string(step));
    }
    report.losses.push_back(loss);

    const double lr = scheduled_rate(config_, step, steps);
    const double t = static_cast<double>(step + 1);
    const auto c1 = static_cast<float>(1.0 - std::pow(kBeta1, t));
    const auto c2 = static_cast<float>(1.0 - std::pow(kBeta2, t));
    for (size_t i = 0; i < params.size(); ++i) {
      m[i] = static_cast<float>(kBeta1) * m[i] + static_cast<float>(1.0 - kBeta1) * grads[i];
      v[i] = static_cast<float>(kBeta2) * v[i] +
             static_cast<float>(1.0 - kBeta2) * grads[i].cwiseProduct(grads[i]);
      params[i].array() -= static_cast<float>(lr) * (m[i].array() / c1) /
                           ((v[i].array() / c2).sqrt() + kEps);
      if (net_.mask(i).size() > 0) params[i] = params[i].cwiseProduct(net_.mask(i));
    }
  }
  report.steps = steps;
  report.tuples = options.tuples;
  report.final_loss = report.losses.empty() ? 0.0 : report.losses.back();
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void ArModel::save(const std::filesystem::path& path) const {
  json conf;
  conf["model"] = json::parse(config_.to_json());
  conf["layout"] = json::parse(layout_.to_json());
  conf["dictionary_digest"] = std::to_string(digest_);
  BinaryWriter tens;
  const auto& params = net_.params();
  tens.u32(static_cast<uint32_t>(params.size()));
  for (const auto& p : params) {
    tens.u64(static_cast<uint64_t>(p.rows()));
    tens.u64(static_cast<uint64_t>(p.cols()));
    tens.raw(p.data(), static_cast<size_t>(p.size()) * sizeof(float));
  }
  write_container(path, kModelMagic, kModelVersion, {{"CONF", conf.dump()}, {"TENS", tens.take()}});
}

ArModel ArModel::Load(const std::filesystem::path& path) {
  constexpr ErrorCode kCorrupt = ErrorCode::kCorruptCheckpoint;
  const Container c = read_container(path, kModelMagic, kModelVersion, kCorrupt);
  ModelConfig config;
  ModelLayout layout;
  uint64_t digest = 0;
  try {
    const json conf = json::parse(c.section("CONF", kCorrupt));
    config = ModelConfig::FromJson(conf.at("model").dump());
    layout = ModelLayout::FromJson(conf.at("layout").dump());
    digest = std::stoull(conf.at("dictionary_digest").get<std::string>());
  } catch (const json::exception& e) {
    fail(kCorrupt, std::string("bad checkpoint config: ") + e.what());
  } catch (const Error& e) {
    fail(kCorrupt, std::string("bad checkpoint config: ") + e.what());
  } catch (const std::exception& e) {
    fail(kCorrupt, std::string("bad checkpoint config: ") + e.what());
  }
  ArModel model(std::move(layout), config, 0, digest);
  BinaryReader r(c.section("TENS", kCorrupt), kCorrupt);
  auto& params = model.net_.params();
  if (r.u32() != params.size()) fail(kCorrupt, "tensor count mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    const uint64_t rows = r.u64();
    const uint64_t cols = r.u64();
    if (rows != static_cast<uint64_t>(params[i].rows()) ||
        cols != static_cast<uint64_t>(params[i].cols())) {
      fail(kCorrupt, "tensor shape mismatch");
    }
    r.raw(params[i].data(), static_cast<size_t>(params[i].size()) * sizeof(float));
    if (!params[i].allFinite()) fail(kCorrupt, "non-finite parameter");
  }
  r.expect_done();
  return model;
}

TrainReport incremental_update(ArModel& model, const JoinSampler& sampler, uint64_t budget,
                               const TrainOptions& options) {
  TrainOptions o = options;
  o.tuples = budget;
  return model.train(sampler, o);
}

}  // namespace arcard
