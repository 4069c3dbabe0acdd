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

// arcard: command-line front end over the C API. Every subcommand prints
// JSON lines on stdout; errors go to stderr with a nonzero exit status.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "arcard/arcard.h"
#include "json.hpp"

namespace {

using json = nlohmann::ordered_json;

struct Failure {
  arcard_status status;
  std::string message;
};

void check(arcard_status s) {
  if (s != ARCARD_OK) throw Failure{s, arcard_last_error()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  arcard_string_free(s);
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{ARCARD_IO_ERROR, "cannot open " + path};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure{ARCARD_IO_ERROR, "cannot write " + path};
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
};
using DatasetHandle = Handle<arcard_dataset, arcard_dataset_free>;
using ModelHandle = Handle<arcard_model, arcard_model_free>;
using BackendHandle = Handle<arcard_backend, arcard_backend_free>;

struct Common {
  std::optional<uint64_t> seed;
  std::string config_path;
  std::string schema;
  std::string data_dir;
  std::string snapshot;
  json config = json::object();

  void add_to(CLI::App* app, bool dataset) {
    app->add_option("--seed", seed, "Seed for every random stage");
    app->add_option("--config", config_path, "JSON run config (sections per subcommand)");
    app->add_option("--schema", schema, "Schema config file");
    if (dataset) {
      app->add_option("--data", data_dir, "Directory holding table CSVs (default: schema's)");
      app->add_option("--snapshot", snapshot, "Ingested dataset snapshot instead of --schema");
    }
  }

  void load() {
    if (config_path.empty()) return;
    try {
      config = json::parse(read_text(config_path));
    } catch (const json::exception& e) {
      throw Failure{ARCARD_CONFIG_ERROR, std::string("run config: ") + e.what()};
    }
    if (!config.is_object()) throw Failure{ARCARD_CONFIG_ERROR, "run config must be an object"};
  }

  // The named section of the run config, with --seed applied.
  json section(const std::string& name) const {
    json s = config.contains(name) ? config[name] : json::object();
    if (!s.is_object()) throw Failure{ARCARD_CONFIG_ERROR, "section '" + name + "' must be an object"};
    if (seed) s["seed"] = *seed;
    return s;
  }

  // Non-negative integer field, or ConfigError.
  uint64_t count(const std::string& key, uint64_t fallback, uint64_t max) const {
    if (!config.contains(key)) return fallback;
    const json& v = config[key];
    if (!v.is_number_unsigned() || v.get<uint64_t>() > max) {
      throw Failure{ARCARD_CONFIG_ERROR, "'" + key + "' must be an integer in [0, " + std::to_string(max) + "]"};
    }
    return v.get<uint64_t>();
  }

  uint64_t seed_or(const std::string& key, uint64_t fallback) const {
    return seed ? *seed : count(key, fallback, UINT64_MAX);
  }

  uint32_t factorization_bits() const {
    return static_cast<uint32_t>(count("factorization_bits", 14, UINT32_MAX));
  }

  void open(DatasetHandle& ds) const {
    if (!snapshot.empty()) {
      check(arcard_dataset_load_snapshot(snapshot.c_str(), &ds.p));
    } else if (!schema.empty()) {
      check(arcard_dataset_ingest(schema.c_str(), data_dir.empty() ? nullptr : data_dir.c_str(), &ds.p));
    } else {
      throw Failure{ARCARD_INVALID_ARGUMENT, "need --schema or --snapshot"};
    }
  }
};

void emit(const json& j) { std::cout << j.dump() << '\n'; }
void emit_lines(const std::string& text) { std::cout << text << std::flush; }

struct BackendChoice {
  std::string model;
  bool exact = false;
  uint64_t cap = 10'000'000;

  void add_to(CLI::App* app) {
    app->add_option("--model", model, "Trained model checkpoint");
    app->add_flag("--exact", exact, "Use the exact backend over the materialized join");
    app->add_option("--cap", cap, "Row cap for the exact backend");
  }

  void open(const Common& c, const DatasetHandle& ds, ModelHandle& m, BackendHandle& b) const {
    if (exact == !model.empty()) throw Failure{ARCARD_INVALID_ARGUMENT, "give exactly one of --model, --exact"};
    if (exact) {
      check(arcard_backend_exact(ds.p, c.factorization_bits(), cap, &b.p));
    } else {
      check(arcard_model_load(model.c_str(), &m.p));
      check(arcard_backend_from_model(m.p, &b.p));
    }
  }
};

json estimate_section(const Common& c, std::optional<uint64_t> samples, bool exhaustive) {
  json s = c.section("estimate");
  if (samples) s["samples"] = *samples;
  if (exhaustive) s["exhaustive"] = true;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"arcard: join cardinality estimation over a learned full-join density"};
  app.require_subcommand(1);
  app.set_version_flag("--version", arcard_version());

  // ingest
  Common ingest_c;
  std::string ingest_out;
  auto* ingest = app.add_subcommand("ingest", "Load CSVs, build indexes and join counts");
  ingest_c.add_to(ingest, true);
  ingest->add_option("--out", ingest_out, "Write a dataset snapshot here");

  // counts
  Common counts_c;
  auto* counts = app.add_subcommand("counts", "Print per-table join counts and |J|");
  counts_c.add_to(counts, true);

  // sample
  Common sample_c;
  uint64_t sample_rows = 1000;
  uint32_t sample_workers = 1;
  std::string sample_out;
  auto* sample = app.add_subcommand("sample", "Draw uniform full-join samples as CSV");
  sample_c.add_to(sample, true);
  sample->add_option("--rows", sample_rows, "Number of samples");
  sample->add_option("--workers", sample_workers, "Sampling threads");
  sample->add_option("--out", sample_out, "Output CSV")->required();

  // materialize
  Common mat_c;
  uint64_t mat_cap = 10'000'000;
  std::string mat_out;
  auto* mat = app.add_subcommand("materialize", "Write the full outer join as CSV");
  mat_c.add_to(mat, true);
  mat->add_option("--cap", mat_cap, "Abort above this many rows");
  mat->add_option("--out", mat_out, "Output CSV")->required();

  // train
  Common train_c;
  std::string train_out;
  std::optional<uint64_t> train_tuples;
  std::optional<uint32_t> train_workers;
  auto* train = app.add_subcommand("train", "Train a model on full-join samples");
  train_c.add_to(train, true);
  train->add_option("--out", train_out, "Checkpoint path")->required();
  train->add_option("--tuples", train_tuples, "Training tuples");
  train->add_option("--workers", train_workers, "Sampler threads");

  // estimate
  Common est_c;
  BackendChoice est_b;
  std::string est_queries;
  std::optional<uint64_t> est_samples;
  bool est_exhaustive = false;
  auto* est = app.add_subcommand("estimate", "Estimate cardinalities for a query file");
  est_c.add_to(est, true);
  est_b.add_to(est);
  est->add_option("--queries", est_queries, "JSON-lines query file")->required();
  est->add_option("--samples", est_samples, "Progressive samples per query");
  est->add_flag("--exhaustive", est_exhaustive, "Enumerate instead of sampling");

  // gen-workload
  Common gen_c;
  std::optional<size_t> gen_count;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-workload", "Generate queries with true cardinalities");
  gen_c.add_to(gen, true);
  gen->add_option("--queries", gen_count, "Number of queries");
  gen->add_option("--out", gen_out, "Workload file (default: stdout)");

  // eval
  Common eval_c;
  BackendChoice eval_b;
  std::string eval_workload;
  std::optional<uint64_t> eval_samples;
  bool eval_exhaustive = false;
  auto* ev = app.add_subcommand("eval", "Q-error report over a workload");
  eval_c.add_to(ev, true);
  eval_b.add_to(ev);
  ev->add_option("--workload", eval_workload, "Workload file from gen-workload")->required();
  ev->add_option("--samples", eval_samples, "Progressive samples per query");
  ev->add_flag("--exhaustive", eval_exhaustive, "Enumerate instead of sampling");

  // synth
  Common synth_c;
  std::string synth_out;
  std::optional<std::string> synth_shape;
  std::optional<uint32_t> synth_tables;
  std::optional<uint64_t> synth_rows;
  std::optional<double> synth_corr;
  auto* synth = app.add_subcommand("synth", "Write a synthetic instance (CSVs and schema.json)");
  synth_c.add_to(synth, false);
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--shape", synth_shape, "star or chain");
  synth->add_option("--tables", synth_tables, "Table count");
  synth->add_option("--rows", synth_rows, "Rows per table");
  synth->add_option("--correlation", synth_corr, "Parent/child correlation in [0, 1]");

  // update
  Common upd_c;
  std::optional<std::string> upd_column;
  auto* upd = app.add_subcommand("update", "Append simulation: stale vs fast update vs retrain");
  upd_c.add_to(upd, true);
  upd->add_option("--partition-column", upd_column, "Root column to range-partition on");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*ingest) {
      ingest_c.load();
      DatasetHandle ds;
      ingest_c.open(ds);
      if (!ingest_out.empty()) check(arcard_dataset_save_snapshot(ds.p, ingest_out.c_str()));
      char* size = nullptr;
      check(arcard_dataset_full_join_size(ds.p, &size));
      json out{{"command", "ingest"}, {"full_join_size", take(size)}};
      if (!ingest_out.empty()) out["snapshot"] = ingest_out;
      emit(out);
    } else if (*counts) {
      counts_c.load();
      DatasetHandle ds;
      counts_c.open(ds);
      char* text = nullptr;
      check(arcard_dataset_counts_json(ds.p, &text));
      emit_lines(take(text) + "\n");
    } else if (*sample) {
      sample_c.load();
      DatasetHandle ds;
      sample_c.open(ds);
      const uint64_t seed = sample_c.seed_or("seed", 0);
      check(arcard_dataset_sample_csv(ds.p, sample_rows, seed, sample_workers, sample_out.c_str()));
      emit({{"command", "sample"}, {"rows", sample_rows}, {"seed", seed}, {"out", sample_out}});
    } else if (*mat) {
      mat_c.load();
      DatasetHandle ds;
      mat_c.open(ds);
      check(arcard_dataset_materialize_csv(ds.p, mat_cap, mat_out.c_str()));
      emit({{"command", "materialize"}, {"out", mat_out}});
    } else if (*train) {
      train_c.load();
      DatasetHandle ds;
      train_c.open(ds);
      ModelHandle m;
      const json model_conf = train_c.config.contains("model") ? train_c.config["model"] : json::object();
      const uint64_t seed = train_c.seed_or("seed", 0);
      check(arcard_model_create(ds.p, model_conf.dump().c_str(), train_c.factorization_bits(), seed, &m.p));
      json opts = train_c.section("train");
      if (train_tuples) opts["tuples"] = *train_tuples;
      if (train_workers) opts["workers"] = *train_workers;
      char* report = nullptr;
      check(arcard_model_train(m.p, ds.p, opts.dump().c_str(), &report));
      check(arcard_model_save(m.p, train_out.c_str()));
      json out = json::parse(take(report));
      out["command"] = "train";
      out["checkpoint"] = train_out;
      emit(out);
    } else if (*est) {
      est_c.load();
      DatasetHandle ds;
      est_c.open(ds);
      ModelHandle m;
      BackendHandle b;
      est_b.open(est_c, ds, m, b);
      const std::string queries = read_text(est_queries);
      const json opts = estimate_section(est_c, est_samples, est_exhaustive);
      char* out = nullptr;
      check(arcard_estimate(ds.p, b.p, queries.c_str(), opts.dump().c_str(), &out));
      emit_lines(take(out));
    } else if (*gen) {
      gen_c.load();
      DatasetHandle ds;
      gen_c.open(ds);
      json spec = gen_c.section("workload");
      if (gen_count) spec["queries"] = *gen_count;
      char* out = nullptr;
      check(arcard_generate_workload(ds.p, spec.dump().c_str(), &out));
      const std::string text = take(out);
      if (gen_out.empty()) {
        emit_lines(text);
      } else {
        write_text(gen_out, text);
        emit({{"command", "gen-workload"}, {"out", gen_out}});
      }
    } else if (*ev) {
      eval_c.load();
      DatasetHandle ds;
      eval_c.open(ds);
      ModelHandle m;
      BackendHandle b;
      eval_b.open(eval_c, ds, m, b);
      const std::string workload = read_text(eval_workload);
      const json opts = estimate_section(eval_c, eval_samples, eval_exhaustive);
      char* out = nullptr;
      check(arcard_evaluate(ds.p, b.p, workload.c_str(), opts.dump().c_str(), &out));
      emit_lines(take(out));
    } else if (*synth) {
      synth_c.load();
      json params = synth_c.section("synth");
      if (synth_shape) params["shape"] = *synth_shape;
      if (synth_tables) params["tables"] = *synth_tables;
      if (synth_rows) params["rows"] = *synth_rows;
      if (synth_corr) params["correlation"] = *synth_corr;
      check(arcard_synth(params.dump().c_str(), synth_out.c_str()));
      emit({{"command", "synth"}, {"out", synth_out}, {"schema", synth_out + "/schema.json"}});
    } else if (*upd) {
      upd_c.load();
      DatasetHandle ds;
      upd_c.open(ds);
      json spec = upd_c.section("update");
      if (upd_column) spec["partition_column"] = *upd_column;
      char* out = nullptr;
      check(arcard_simulate_updates(ds.p, spec.dump().c_str(), &out));
      emit_lines(take(out) + "\n");
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << arcard_status_name(f.status) << ": " << f.message << '\n';
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: ConfigError: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
