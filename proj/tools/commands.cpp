#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rtdpa/errors.hpp"
#include "rtdpa/framework.hpp"
#include "rtdpa/learners_tree.hpp"
#include "rtdpa/pca.hpp"
#include "rtdpa/preprocess.hpp"
#include "rtdpa/synth.hpp"

namespace rtdpa::cli {

namespace {

bool log_enabled() {
  const char* v = std::getenv("RTDPA_LOG");
  return v && (std::string(v) == "debug" || std::string(v) == "info");
}

void log_line(std::ostream& err, const std::string& msg) {
  if (log_enabled()) err << "[rtdpa] " << msg << "\n";
}

// Uniform error mapping: InputError -> 2, anything else -> 1.
template <typename Fn>
int run_guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

std::string strip_extension(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
  return path.substr(0, dot);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
  if (!out) throw InputError("failed writing '" + path + "'");
}

}  // namespace

int cmd_inspect(const InspectArgs& args, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&]() {
    const Schema schema = Schema::from_file(args.schema);
    const Dataset data = load_csv(args.data, schema);
    log_line(err, "loaded " + std::to_string(data.n_rows()) + " rows");

    const auto partitions = partition_by_row_type(data);

    // Table-1-shaped partition counts: Row Type | Class | Count.
    std::ostringstream text;
    text << "Partition counts\n";
    text << "Row Type      Class         Count\n";
    nlohmann::json jpart = nlohmann::json::array();
    for (const auto& [type, part] : partitions) {
      const TypedPartition tp = make_typed_partition(part, type);
      for (const auto& [code, count] : tp.class_counts()) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-12s  %-12s  %zu\n", type.c_str(),
                      tp.class_name(code).c_str(), count);
        text << buf;
        jpart.push_back({{"row_type", type},
                         {"class", tp.class_name(code)},
                         {"code", code},
                         {"count", count}});
      }
    }

    nlohmann::json jmissing = nlohmann::json::object();
    for (const auto& [type, part] : partitions) {
      const MissingReport report = missing_value_report(part);
      text << "\n% of Missing Values: " << type << "\n" << report.to_text();
      jmissing[type] = report.to_json();
    }

    if (args.json) {
      const nlohmann::json j{{"partitions", jpart}, {"missing", jmissing}};
      out << j.dump(2) << "\n";
    } else {
      out << text.str();
    }
    if (!args.out.empty()) {
      const nlohmann::json j{{"partitions", jpart}, {"missing", jmissing}};
      write_file(args.out, j.dump(2) + "\n");
    }
    return kExitOk;
  });
}

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&]() {
    const Schema schema = Schema::from_file(args.schema);
    const Dataset data = load_csv(args.data, schema);
    PipelineConfig config = PipelineConfig::from_file(args.config);
    if (args.seed) config.seed = *args.seed;

    log_line(err, "training on " + std::to_string(data.n_rows()) + " rows, seed " +
                      std::to_string(config.seed));
    const TrainOutcome outcome = train_all(data, config);
    for (const auto& w : outcome.warnings) err << "warning: " << w << "\n";
    for (const auto& [type, what] : outcome.per_type_errors)
      err << "error (row type " << type << "): " << what << "\n";

    if (!args.model_out.empty()) save_model(outcome.model, args.model_out);

    std::ostringstream text;
    for (const auto& report : outcome.reports) {
      text << render_report_table("Model Performance for " + report.row_type, {report},
                                  !args.no_timing);
      text << "\n";
    }
    if (args.json) {
      for (const auto& report : outcome.reports) {
        nlohmann::json j = report.to_json();
        if (args.no_timing) j["running_time_seconds"] = 0.0;
        out << j.dump() << "\n";
      }
    } else {
      out << text.str();
    }
    if (!args.report_out.empty()) write_file(args.report_out, text.str());

    if (!args.scree_dir.empty()) {
      for (const auto& [type, entry] : outcome.model.registry)
        if (entry.pca)
          write_file(args.scree_dir + "/scree_" + type + ".csv", scree_csv(*entry.pca));
    }
    if (!args.trees_dir.empty()) {
      for (const auto& [type, entry] : outcome.model.registry) {
        const auto* dt = dynamic_cast<const DecisionTreeClassifier*>(entry.model.get());
        if (!dt) continue;
        write_file(args.trees_dir + "/tree_" + type + ".txt",
                   dt->model().to_text(entry.preprocessor.feature_names));
        write_file(args.trees_dir + "/tree_" + type + ".graph",
                   dt->model().to_graph(entry.preprocessor.feature_names));
      }
    }
    return outcome.per_type_errors.empty() ? kExitOk : kExitInput;
  });
}

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&]() {
    const Schema schema = Schema::from_file(args.schema);
    const Dataset data = load_csv(args.data, schema);
    if (data.schema.target_index() < 0)
      throw InputError("evaluate: data has no target column");

    const auto partitions = partition_by_row_type(data);

    // row type -> reports across the provided models, in --model order.
    std::map<std::string, std::vector<MetricsReport>> by_type;
    std::vector<std::string> warnings;
    for (const auto& path : args.models) {
      const RtdpaModel model = load_model(path);
      for (const auto& [type, entry] : model.registry) {
        auto part = partitions.find(type);
        if (part == partitions.end()) {
          warnings.push_back("row type '" + type + "': no rows in evaluation data");
          continue;
        }
        const auto t0 = std::chrono::steady_clock::now();
        MetricsReport report = evaluate_entry(entry, part->second, &warnings);
        const auto t1 = std::chrono::steady_clock::now();
        report.running_time_seconds =
            std::chrono::duration_cast<std::chrono::duration<double>>(t1 - t0).count();
        by_type[type].push_back(std::move(report));
      }
    }
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    if (by_type.empty()) throw InputError("evaluate: nothing to evaluate");

    if (args.json) {
      for (const auto& [type, reports] : by_type)
        for (const auto& r : reports) {
          nlohmann::json j = r.to_json();
          if (args.no_timing) j["running_time_seconds"] = 0.0;
          out << j.dump() << "\n";
        }
      return kExitOk;
    }
    for (const auto& [type, reports] : by_type) {
      out << render_report_table("Model Performance for " + type, reports, !args.no_timing);
      for (const auto& line : best_estimator_lines(reports, !args.no_timing))
        out << line << "\n";
      out << "\n";
    }
    return kExitOk;
  });
}

int cmd_predict(const PredictArgs& args, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&]() {
    const Schema schema = Schema::from_file(args.schema);
    const Dataset data = load_csv(args.data, schema);
    const RtdpaModel model = load_model(args.model);

    RoutePolicy policy;
    policy.skip_unknown = args.skip_unknown;
    const auto predictions = route_predict(model, data, policy);

    // Union of class names across the registry, in registry (sorted) order.
    std::vector<std::string> score_names;
    {
      std::set<std::string> seen;
      for (const auto& [type, entry] : model.registry)
        for (const auto& label : entry.labels)
          if (seen.insert(label.name).second) score_names.push_back(label.name);
    }

    int id_col = -1;
    for (std::size_t c = 0; c < data.schema.columns.size(); ++c)
      if (data.schema.columns[c].kind == ColumnKind::identifier) {
        id_col = static_cast<int>(c);
        break;
      }

    std::ostringstream csv;
    csv << "id,row_type,predicted_class";
    for (const auto& name : score_names) csv << ",score_" << csv_escape(name);
    csv << ",status\n";
    char buf[32];
    for (const auto& p : predictions) {
      std::string id = std::to_string(p.row);
      if (id_col >= 0) {
        const Cell& cell = data.rows[p.row][static_cast<std::size_t>(id_col)];
        if (cell.is_text()) id = cell.as_text();
        else if (cell.is_number()) id = std::to_string(cell.as_number());
      }
      csv << csv_escape(id) << ',' << csv_escape(p.row_type) << ','
          << (p.routed ? csv_escape(p.class_name) : std::string());
      for (const auto& name : score_names) {
        csv << ',';
        auto it = p.scores.find(name);
        if (it != p.scores.end()) {
          std::snprintf(buf, sizeof(buf), "%.9f", it->second);
          csv << buf;
        }
      }
      csv << ',' << (p.routed ? "ok" : "unrouted") << "\n";
    }

    if (args.out.empty()) out << csv.str();
    else write_file(args.out, csv.str());
    log_line(err, "predicted " + std::to_string(predictions.size()) + " rows");
    return kExitOk;
  });
}

int cmd_gen_synth(const GenSynthArgs& args, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&]() {
    SynthSpec spec = args.spec.empty() ? SynthSpec::defaults() : SynthSpec::from_file(args.spec);
    if (args.seed) spec.seed = *args.seed;
    const SynthResult result = generate_synthetic(spec);

    if (args.out.empty()) throw InputError("gen-synth: --out is required");
    const std::string stem = strip_extension(args.out);
    write_file(args.out, synth_csv(result));
    write_file(stem + ".schema.json", result.data.schema.to_json().dump(2) + "\n");
    write_file(stem + ".sidecar.json", synth_sidecar(result).dump(2) + "\n");

    out << "rows: " << result.data.n_rows() << "\n";
    char buf[64];
    for (const auto& [type, acc] : result.bayes_accuracy_per_type) {
      std::snprintf(buf, sizeof(buf), "bayes accuracy %s: %.4f\n", type.c_str(), acc);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), "bayes accuracy overall: %.4f\n",
                  result.bayes_accuracy_overall);
    out << buf;
    log_line(err, "wrote " + args.out);
    return kExitOk;
  });
}

}  // namespace rtdpa::cli
