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

#include "arcard/query_io.hpp"

#include <limits>

#include "json.hpp"

namespace arcard {

using json = nlohmann::ordered_json;

namespace {

json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigError, what + ": " + e.what());
  }
}

json parse_options(std::string_view text, const std::string& what) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
  json doc = parse_json(text, what);
  if (!doc.is_object()) fail(ErrorCode::kConfigError, what + " must be an object");
  return doc;
}

// Calls `f(key, value)` per member; `f` returns false for unknown keys.
// Non-negative integer field; rejects negatives, fractions and overflow.
template <typename T>
T count_of(const json& v) {
  if (!v.is_number_unsigned() || v.get<uint64_t>() > std::numeric_limits<T>::max()) {
    fail(ErrorCode::kConfigError, "expected a non-negative integer, got " + v.dump());
  }
  return static_cast<T>(v.get<uint64_t>());
}

template <typename F>
void read_fields(const json& obj, const std::string& what, F&& f) {
  try {
    for (const auto& [key, value] : obj.items()) {
      if (!f(key, value)) fail(ErrorCode::kConfigError, "unknown " + what + " key '" + key + "'");
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigError, what + ": " + e.what());
  }
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) out.push_back(std::move(line));
    pos = end + 1;
  }
  return out;
}

Literal literal_from_json(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) {
    if (v.is_number_unsigned() &&
        v.get<uint64_t>() > static_cast<uint64_t>(std::numeric_limits<int64_t>::max())) {
      fail(ErrorCode::kBadLiteralType, "integer literal out of range");
    }
    return v.get<int64_t>();
  }
  fail(ErrorCode::kBadLiteralType, "literal must be an integer or a string, got " + v.dump());
}

json literal_to_json(const Literal& l) {
  if (const auto* i = std::get_if<int64_t>(&l)) return *i;
  return std::get<std::string>(l);
}

Predicate predicate_from_json(const json& p) {
  Predicate out;
  const json* value = nullptr;
  std::string op;
  if (p.is_array()) {
    if (p.size() != 3) fail(ErrorCode::kConfigError, "predicate must be [column, op, literal]");
    out.column = p[0].get<std::string>();
    op = p[1].get<std::string>();
    value = &p[2];
  } else if (p.is_object()) {
    read_fields(p, "predicate", [&](const std::string& key, const json& v) {
      if (key == "column") {
        out.column = v.get<std::string>();
      } else if (key == "op") {
        op = v.get<std::string>();
      } else if (key == "value" || key == "values") {
        value = &v;
      } else {
        return false;
      }
      return true;
    });
    if (out.column.empty() || op.empty() || !value) {
      fail(ErrorCode::kConfigError, "predicate needs column, op and value");
    }
  } else {
    fail(ErrorCode::kConfigError, "predicate must be an array or an object");
  }
  const auto parsed = parse_compare_op(op);
  if (!parsed) fail(ErrorCode::kUnsupportedOperator, "unsupported operator '" + op + "'");
  out.op = *parsed;
  if (value->is_array()) {
    for (const auto& v : *value) out.literals.push_back(literal_from_json(v));
  } else {
    out.literals.push_back(literal_from_json(*value));
  }
  return out;
}

QuerySpec query_from_json(const json& doc, json* truth) {
  if (!doc.is_object()) fail(ErrorCode::kConfigError, "query must be an object");
  QuerySpec q;
  bool has_tables = false;
  read_fields(doc, "query", [&](const std::string& key, const json& v) {
    if (key == "tables") {
      has_tables = true;
      q.tables = v.get<std::vector<std::string>>();
    } else if (key == "predicates") {
      for (const auto& p : v) q.predicates.push_back(predicate_from_json(p));
    } else if (truth && (key == "truth" || key == "graph")) {
      if (key == "truth") *truth = v;
    } else {
      return false;
    }
    return true;
  });
  if (!has_tables) fail(ErrorCode::kConfigError, "query lacks 'tables'");
  return q;
}

json query_json(const QuerySpec& q) {
  json doc;
  doc["tables"] = q.tables;
  json preds = json::array();
  for (const auto& p : q.predicates) {
    json lit;
    if (p.op == CompareOp::kIn) {
      lit = json::array();
      for (const auto& l : p.literals) lit.push_back(literal_to_json(l));
    } else {
      lit = p.literals.empty() ? json() : literal_to_json(p.literals.front());
    }
    preds.push_back(json::array({p.column, std::string(compare_op_name(p.op)), lit}));
  }
  doc["predicates"] = std::move(preds);
  return doc;
}

json estimate_json(const Estimate& e) {
  return json{{"cardinality", e.cardinality}, {"raw", e.raw},       {"selectivity", e.selectivity},
              {"samples", e.samples},         {"seed", e.seed},     {"zero_mass", e.zero_mass}};
}

json status_json(const Status& s) {
  return json{{"code", std::string(error_code_name(s.code))}, {"message", s.message}};
}

json summary_json(const QuantileSummary& s) {
  return json{{"count", s.count}, {"p50", s.p50}, {"p95", s.p95}, {"p99", s.p99}, {"max", s.max}};
}

json report_summary_json(const QErrorReport& r) {
  json doc{{"summary", summary_json(r.summary)}, {"failures", r.failures}};
  doc["samples"] = r.options.exhaustive ? json("exhaustive") : json(r.options.samples);
  doc["seed"] = r.options.seed;
  return doc;
}

std::vector<uint32_t> tables_from_names(const JoinSchema& schema, const json& names) {
  std::vector<uint32_t> out;
  for (const auto& n : names) {
    const std::string name = n.get<std::string>();
    const auto t = schema.find_table(name);
    if (!t) fail(ErrorCode::kUnknownColumn, "unknown table '" + name + "'");
    out.push_back(*t);
  }
  return out;
}

EstimateOptions estimate_options_from(const json& doc) {
  EstimateOptions o;
  read_fields(doc, "estimate option", [&](const std::string& key, const json& v) {
    if (key == "samples") {
      if (v.is_string()) {
        if (v.get<std::string>() != "exhaustive") {
          fail(ErrorCode::kConfigError, "samples must be a count or \"exhaustive\"");
        }
        o.exhaustive = true;
      } else {
        o.samples = count_of<uint64_t>(v);
      }
    } else if (key == "exhaustive") {
      o.exhaustive = v.get<bool>();
    } else if (key == "wildcards") {
      o.use_wildcards = v.get<bool>();
    } else if (key == "seed") {
      o.seed = count_of<uint64_t>(v);
    } else if (key == "max_branches") {
      o.max_branches = count_of<uint64_t>(v);
    } else {
      return false;
    }
    return true;
  });
  if (!o.exhaustive && o.samples == 0) fail(ErrorCode::kConfigError, "samples must be positive");
  return o;
}

WorkloadSpec workload_spec_from(const JoinSchema& schema, const json& doc) {
  WorkloadSpec s;
  read_fields(doc, "workload", [&](const std::string& key, const json& v) {
    if (key == "queries") {
      s.query_count = count_of<size_t>(v);
    } else if (key == "join_graphs") {
      for (const auto& g : v) {
        QuerySpec probe;
        for (uint32_t t : tables_from_names(schema, g)) probe.tables.push_back(schema.table(t).name);
        const Status st = validate_query(schema, probe);
        if (!st.ok()) fail(st.code, "join graph: " + st.message);
        s.join_graphs.push_back(tables_from_names(schema, g));
      }
    } else if (key == "min_filters") {
      s.min_filters = count_of<uint32_t>(v);
    } else if (key == "max_filters") {
      s.max_filters = count_of<uint32_t>(v);
    } else if (key == "seed") {
      s.seed = count_of<uint64_t>(v);
    } else if (key == "max_attempts") {
      s.max_attempts = count_of<uint64_t>(v);
    } else {
      return false;
    }
    return true;
  });
  if (s.min_filters > s.max_filters) fail(ErrorCode::kConfigError, "min_filters exceeds max_filters");
  return s;
}

}  // namespace

QuerySpec parse_query(std::string_view text) {
  try {
    return query_from_json(parse_json(text, "query"), nullptr);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigError, std::string("query: ") + e.what());
  }
}

std::string query_to_json(const QuerySpec& query) { return query_json(query).dump(); }

std::vector<QuerySpec> parse_query_lines(std::string_view text) {
  std::vector<QuerySpec> out;
  for (const auto& line : split_lines(text)) out.push_back(parse_query(line));
  return out;
}

std::string workload_to_jsonl(const std::vector<WorkloadQuery>& workload) {
  std::string out;
  for (const auto& w : workload) {
    json doc = query_json(w.query);
    doc["truth"] = weight_to_string(w.truth);
    doc["graph"] = w.graph;
    out += doc.dump();
    out += '\n';
  }
  return out;
}

std::vector<WorkloadQuery> parse_workload_jsonl(std::string_view text) {
  std::vector<WorkloadQuery> out;
  for (const auto& line : split_lines(text)) {
    try {
      json doc = parse_json(line, "workload line");
      json truth;
      WorkloadQuery w;
      w.query = query_from_json(doc, &truth);
      if (truth.is_string()) {
        w.truth = weight_from_string(truth.get<std::string>());
      } else if (truth.is_number_unsigned()) {
        w.truth = count_of<uint64_t>(truth);
      } else {
        fail(ErrorCode::kConfigError, "workload line needs a non-negative 'truth'");
      }
      if (doc.contains("graph")) w.graph = count_of<uint32_t>(doc["graph"]);
      out.push_back(std::move(w));
    } catch (const json::exception& e) {
      fail(ErrorCode::kConfigError, std::string("workload line: ") + e.what());
    }
  }
  return out;
}

std::string estimate_to_json(size_t index, const EstimateOutcome& outcome) {
  json doc{{"index", index}};
  if (outcome.status.ok()) {
    doc.update(estimate_json(outcome.estimate));
  } else {
    doc["error"] = status_json(outcome.status);
  }
  doc["latency_ms"] = outcome.latency_ms;
  return doc.dump();
}

std::string report_to_jsonl(const QErrorReport& report) {
  std::string out;
  for (size_t i = 0; i < report.results.size(); ++i) {
    const auto& r = report.results[i];
    json doc{{"index", i}, {"truth", weight_to_string(r.truth)}};
    if (r.status.ok()) {
      doc["estimate"] = r.estimate.cardinality;
      doc["q_error"] = r.q_error;
      doc["zero_mass"] = r.estimate.zero_mass;
    } else {
      doc["error"] = status_json(r.status);
    }
    doc["latency_ms"] = r.latency_ms;
    out += doc.dump();
    out += '\n';
  }
  out += report_summary_json(report).dump();
  out += '\n';
  return out;
}

std::string summary_to_json(const QuantileSummary& summary) { return summary_json(summary).dump(); }

std::string train_report_to_json(const TrainReport& report) {
  json doc{{"steps", report.steps},
           {"tuples", report.tuples},
           {"final_loss", report.final_loss},
           {"seconds", report.seconds}};
  return doc.dump();
}

std::string update_report_to_json(const UpdateReport& report) {
  json doc;
  json sizes = json::array();
  for (Weight w : report.snapshot_sizes) sizes.push_back(weight_to_string(w));
  doc["snapshot_sizes"] = std::move(sizes);
  json strategies = json::array();
  for (const auto& s : report.strategies) {
    json e = report_summary_json(s.report);
    e["strategy"] = s.name;
    e["trained_tuples"] = s.trained_tuples;
    strategies.push_back(std::move(e));
  }
  doc["strategies"] = std::move(strategies);
  return doc.dump();
}

std::string counts_to_json(const Dataset& dataset) {
  const JoinSchema& schema = dataset.schema();
  json doc{{"full_join_size", weight_to_string(dataset.full_join_size())}};
  json tables = json::array();
  for (uint32_t t = 0; t < schema.table_count(); ++t) {
    const JoinCountTable& jc = dataset.counts().table(t);
    json entry{{"table", schema.table(t).name}};
    json key_names = json::array();
    for (uint32_t c : jc.groups.key_columns()) key_names.push_back(schema.table(t).columns[c].name);
    entry["key_columns"] = std::move(key_names);
    entry["bridge_weight"] = weight_to_string(jc.bridge_weight);
    json groups = json::array();
    for (uint32_t g = 0; g < jc.groups.size(); ++g) {
      json key = json::array();
      const auto tokens = jc.groups.key(g);
      for (size_t i = 0; i < tokens.size(); ++i) {
        const auto v = dataset.dictionary({t, jc.groups.key_columns()[i]}).decode(tokens[i]);
        key.push_back(v ? literal_to_json(*v) : json());
      }
      groups.push_back(json{{"key", std::move(key)},
                            {"rows", jc.groups.count(g)},
                            {"weight", weight_to_string(jc.weights[g])}});
    }
    entry["groups"] = std::move(groups);
    tables.push_back(std::move(entry));
  }
  doc["tables"] = std::move(tables);
  return doc.dump();
}

EstimateOptions parse_estimate_options(std::string_view text) {
  return estimate_options_from(parse_options(text, "estimate options"));
}

TrainOptions parse_train_options(std::string_view text) {
  TrainOptions o;
  read_fields(parse_options(text, "train options"), "train option",
              [&](const std::string& key, const json& v) {
                if (key == "tuples") {
                  o.tuples = count_of<uint64_t>(v);
                } else if (key == "workers") {
                  o.worker_count = count_of<uint32_t>(v);
                } else if (key == "queue_capacity") {
                  o.queue_capacity = count_of<size_t>(v);
                } else if (key == "seed") {
                  o.seed = count_of<uint64_t>(v);
                } else {
                  return false;
                }
                return true;
              });
  if (o.worker_count == 0 || o.queue_capacity == 0) {
    fail(ErrorCode::kConfigError, "workers and queue_capacity must be positive");
  }
  return o;
}

WorkloadSpec parse_workload_spec(const JoinSchema& schema, std::string_view text) {
  return workload_spec_from(schema, parse_options(text, "workload spec"));
}

SynthParams parse_synth_params(std::string_view text) {
  SynthParams p;
  read_fields(parse_options(text, "synth params"), "synth", [&](const std::string& key, const json& v) {
    if (key == "shape") {
      const std::string s = v.get<std::string>();
      if (s == "star") {
        p.shape = SynthShape::kStar;
      } else if (s == "chain") {
        p.shape = SynthShape::kChain;
      } else {
        fail(ErrorCode::kConfigError, "shape must be star or chain");
      }
    } else if (key == "tables") {
      p.tables = count_of<uint32_t>(v);
    } else if (key == "rows") {
      p.rows = count_of<uint64_t>(v);
    } else if (key == "correlation") {
      p.correlation = v.get<double>();
    } else if (key == "skew") {
      p.skew = v.get<double>();
    } else if (key == "null_fraction") {
      p.null_fraction = v.get<double>();
    } else if (key == "dangling_fraction") {
      p.dangling_fraction = v.get<double>();
    } else if (key == "attribute_domain") {
      p.attribute_domain = count_of<uint32_t>(v);
    } else if (key == "seed") {
      p.seed = count_of<uint64_t>(v);
    } else {
      return false;
    }
    return true;
  });
  return p;
}

UpdateSpec parse_update_spec(const JoinSchema& schema, std::string_view text) {
  UpdateSpec s;
  s.partition_column = schema.table(schema.root()).name + "." +
                       schema.table(schema.root()).columns.front().name;
  read_fields(parse_options(text, "update spec"), "update", [&](const std::string& key, const json& v) {
    if (key == "partition_column") {
      s.partition_column = v.get<std::string>();
    } else if (key == "partitions") {
      s.partitions = count_of<uint32_t>(v);
    } else if (key == "base_tuples") {
      s.base_tuples = count_of<uint64_t>(v);
    } else if (key == "fast_fraction") {
      s.fast_fraction = v.get<double>();
    } else if (key == "model") {
      s.model = ModelConfig::FromJson(v.dump());
    } else if (key == "factorization_bits") {
      s.factorization.bits = count_of<uint32_t>(v);
    } else if (key == "workload") {
      s.workload = workload_spec_from(schema, v);
    } else if (key == "estimate") {
      s.estimate = estimate_options_from(v);
    } else if (key == "workers") {
      s.worker_count = count_of<uint32_t>(v);
    } else if (key == "seed") {
      s.seed = count_of<uint64_t>(v);
    } else {
      return false;
    }
    return true;
  });
  if (!(s.fast_fraction >= 0.0 && s.fast_fraction <= 1.0)) {
    fail(ErrorCode::kConfigError, "fast_fraction must lie in [0, 1]");
  }
  return s;
}

}  // namespace arcard
