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

#include "arcard/arcard.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "arcard/eval.hpp"
#include "arcard/oracle.hpp"
#include "arcard/query_io.hpp"
#include "arcard/sampler.hpp"

struct arcard_dataset {
  arcard::Dataset dataset;
};

struct arcard_model {
  arcard::ArModel model;
};

struct arcard_backend {
  const arcard::DensityBackend* backend = nullptr;
  std::unique_ptr<arcard::EmpiricalBackend> owned;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
arcard_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return ARCARD_OK;
  } catch (const arcard::Error& e) {
    g_last_error = e.what();
    return static_cast<arcard_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return ARCARD_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ARCARD_INTERNAL;
  }
}

template <typename T>
void clear_out(T** out) {
  if (out) *out = nullptr;
}

void require(const void* p, const char* what) {
  if (!p) arcard::fail(arcard::ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

std::string_view text_or_empty(const char* s) { return s ? std::string_view(s) : std::string_view(); }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void write_file(const char* path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) arcard::fail(arcard::ErrorCode::kIoError, std::string("cannot write ") + path);
  out << content;
  if (!out) arcard::fail(arcard::ErrorCode::kIoError, std::string("write failed on ") + path);
}

}  // namespace

extern "C" {

const char* arcard_version(void) { return "0.1.0"; }

const char* arcard_status_name(arcard_status status) {
  return arcard::error_code_name(static_cast<arcard::ErrorCode>(status)).data();
}

const char* arcard_last_error(void) { return g_last_error.c_str(); }

void arcard_string_free(char* s) { std::free(s); }

arcard_status arcard_dataset_ingest(const char* schema_path, const char* data_dir,
                                    arcard_dataset** out) {
  return guarded([&] {
    clear_out(out);
    require(schema_path, "schema_path");
    require(out, "out");
    arcard::JoinSchema schema = arcard::load_schema_config(schema_path);
    const std::filesystem::path dir =
        data_dir ? std::filesystem::path(data_dir) : std::filesystem::path(schema_path).parent_path();
    *out = new arcard_dataset{arcard::Dataset::Ingest(std::move(schema), dir)};
  });
}

arcard_status arcard_dataset_load_snapshot(const char* path, arcard_dataset** out) {
  return guarded([&] {
    clear_out(out);
    require(path, "path");
    require(out, "out");
    *out = new arcard_dataset{arcard::Dataset::LoadSnapshot(path)};
  });
}

arcard_status arcard_dataset_save_snapshot(const arcard_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds, "dataset");
    require(path, "path");
    ds->dataset.SaveSnapshot(path);
  });
}

void arcard_dataset_free(arcard_dataset* ds) { delete ds; }

arcard_status arcard_dataset_full_join_size(const arcard_dataset* ds, char** out) {
  return guarded([&] {
    clear_out(out);
    require(ds, "dataset");
    require(out, "out");
    *out = dup_string(arcard::weight_to_string(ds->dataset.full_join_size()));
  });
}

arcard_status arcard_dataset_counts_json(const arcard_dataset* ds, char** out) {
  return guarded([&] {
    clear_out(out);
    require(ds, "dataset");
    require(out, "out");
    *out = dup_string(arcard::counts_to_json(ds->dataset));
  });
}

arcard_status arcard_dataset_sample_csv(const arcard_dataset* ds, uint64_t rows, uint64_t seed,
                                        uint32_t workers, const char* out_path) {
  return guarded([&] {
    require(ds, "dataset");
    require(out_path, "out_path");
    const arcard::ModelLayout layout = arcard::ModelLayout::Build(ds->dataset, {});
    const arcard::JoinSampler sampler(ds->dataset, layout);
    arcard::SamplerConfig config;
    config.batch_size = static_cast<size_t>(rows);
    config.worker_count = workers == 0 ? 1 : workers;
    config.seed = seed;
    std::ostringstream csv;
    sampler.write_csv(csv, sampler.sample_batch(config));
    write_file(out_path, csv.str());
  });
}

arcard_status arcard_dataset_materialize_csv(const arcard_dataset* ds, uint64_t cap,
                                             const char* out_path) {
  return guarded([&] {
    require(ds, "dataset");
    require(out_path, "out_path");
    const arcard::ModelLayout layout = arcard::ModelLayout::Build(ds->dataset, {});
    const arcard::MaterializedJoin join = arcard::materialize(ds->dataset, layout, cap ? cap : arcard::kDefaultMaterializeCap);
    std::ostringstream csv;
    arcard::write_rows_csv(csv, ds->dataset, layout, join.rows);
    write_file(out_path, csv.str());
  });
}

arcard_status arcard_true_cardinality(const arcard_dataset* ds, const char* query_json, char** out) {
  return guarded([&] {
    clear_out(out);
    require(ds, "dataset");
    require(query_json, "query_json");
    require(out, "out");
    const arcard::QuerySpec q = arcard::parse_query(query_json);
    *out = dup_string(arcard::weight_to_string(arcard::true_cardinality(ds->dataset, q)));
  });
}

arcard_status arcard_model_create(const arcard_dataset* ds, const char* config_json,
                                  uint32_t factorization_bits, uint64_t seed, arcard_model** out) {
  return guarded([&] {
    clear_out(out);
    require(ds, "dataset");
    require(out, "out");
    const std::string_view text = text_or_empty(config_json);
    const arcard::ModelConfig config = text.find_first_not_of(" \t\r\n") == std::string_view::npos
                                           ? arcard::ModelConfig{}
                                           : arcard::ModelConfig::FromJson(text);
    arcard::FactorizationSpec spec;
    spec.bits = factorization_bits;
    arcard::ModelLayout layout = arcard::ModelLayout::Build(ds->dataset, spec);
    *out = new arcard_model{
        arcard::ArModel(std::move(layout), config, seed, ds->dataset.dictionary_digest())};
  });
}

arcard_status arcard_model_train(arcard_model* model, const arcard_dataset* ds,
                                 const char* options_json, char** report) {
  return guarded([&] {
    clear_out(report);
    require(model, "model");
    require(ds, "dataset");
    const arcard::TrainOptions options = arcard::parse_train_options(text_or_empty(options_json));
    const arcard::JoinSampler sampler(ds->dataset, model->model.layout());
    const arcard::TrainReport r = model->model.train(sampler, options);
    if (report) *report = dup_string(arcard::train_report_to_json(r));
  });
}

arcard_status arcard_model_save(const arcard_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    model->model.save(path);
  });
}

arcard_status arcard_model_load(const char* path, arcard_model** out) {
  return guarded([&] {
    clear_out(out);
    require(path, "path");
    require(out, "out");
    *out = new arcard_model{arcard::ArModel::Load(path)};
  });
}

void arcard_model_free(arcard_model* model) { delete model; }

arcard_status arcard_backend_from_model(const arcard_model* model, arcard_backend** out) {
  return guarded([&] {
    clear_out(out);
    require(model, "model");
    require(out, "out");
    auto b = std::make_unique<arcard_backend>();
    b->backend = &model->model;
    *out = b.release();
  });
}

arcard_status arcard_backend_exact(const arcard_dataset* ds, uint32_t factorization_bits,
                                   uint64_t cap, arcard_backend** out) {
  return guarded([&] {
    clear_out(out);
    require(ds, "dataset");
    require(out, "out");
    arcard::FactorizationSpec spec;
    spec.bits = factorization_bits;
    arcard::ModelLayout layout = arcard::ModelLayout::Build(ds->dataset, spec);
    const arcard::MaterializedJoin join = arcard::materialize(ds->dataset, layout, cap ? cap : arcard::kDefaultMaterializeCap);
    auto b = std::make_unique<arcard_backend>();
    b->owned = std::make_unique<arcard::EmpiricalBackend>(std::move(layout), join);
    b->backend = b->owned.get();
    *out = b.release();
  });
}

void arcard_backend_free(arcard_backend* backend) { delete backend; }

arcard_status arcard_estimate(const arcard_dataset* ds, const arcard_backend* backend,
                              const char* queries_jsonl, const char* options_json, char** out) {
  return guarded([&] {
    clear_out(out);
    require(ds, "dataset");
    require(backend, "backend");
    require(queries_jsonl, "queries_jsonl");
    require(out, "out");
    const auto queries = arcard::parse_query_lines(queries_jsonl);
    const auto options = arcard::parse_estimate_options(text_or_empty(options_json));
    const auto outcomes = arcard::estimate_batch(ds->dataset, *backend->backend, queries, options);
    std::string text;
    for (size_t i = 0; i < outcomes.size(); ++i) {
      text += arcard::estimate_to_json(i, outcomes[i]);
      text += '\n';
    }
    *out = dup_string(text);
  });
}

arcard_status arcard_generate_workload(const arcard_dataset* ds, const char* spec_json, char** out) {
  return guarded([&] {
    clear_out(out);
    require(ds, "dataset");
    require(out, "out");
    const auto spec = arcard::parse_workload_spec(ds->dataset.schema(), text_or_empty(spec_json));
    *out = dup_string(arcard::workload_to_jsonl(arcard::generate_workload(ds->dataset, spec)));
  });
}

arcard_status arcard_evaluate(const arcard_dataset* ds, const arcard_backend* backend,
                              const char* workload_jsonl, const char* options_json, char** out) {
  return guarded([&] {
    clear_out(out);
    require(ds, "dataset");
    require(backend, "backend");
    require(workload_jsonl, "workload_jsonl");
    require(out, "out");
    const auto workload = arcard::parse_workload_jsonl(workload_jsonl);
    const auto options = arcard::parse_estimate_options(text_or_empty(options_json));
    *out = dup_string(
        arcard::report_to_jsonl(arcard::evaluate(ds->dataset, *backend->backend, workload, options)));
  });
}

arcard_status arcard_synth(const char* params_json, const char* out_dir) {
  return guarded([&] {
    require(out_dir, "out_dir");
    arcard::synth_dataset(arcard::parse_synth_params(text_or_empty(params_json))).write(out_dir);
  });
}

arcard_status arcard_simulate_updates(const arcard_dataset* ds, const char* spec_json, char** out) {
  return guarded([&] {
    clear_out(out);
    require(ds, "dataset");
    require(out, "out");
    const auto spec = arcard::parse_update_spec(ds->dataset.schema(), text_or_empty(spec_json));
    *out = dup_string(arcard::update_report_to_json(arcard::simulate_updates(ds->dataset, spec)));
  });
}

}  // extern "C"
