#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rtdpa: row-type dependent predictive analysis"};
  app.require_subcommand(1);

  rtdpa::cli::InspectArgs inspect_args;
  auto* inspect = app.add_subcommand("inspect", "partition counts and missing-value report");
  inspect->add_option("--data", inspect_args.data, "CSV data file")->required();
  inspect->add_option("--schema", inspect_args.schema, "schema JSON file")->required();
  inspect->add_flag("--json", inspect_args.json, "emit JSON instead of text");
  inspect->add_option("--out", inspect_args.out, "also write the JSON report here");

  rtdpa::cli::TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train per-row-type models");
  train->add_option("--data", train_args.data, "CSV data file")->required();
  train->add_option("--schema", train_args.schema, "schema JSON file")->required();
  train->add_option("--config", train_args.config, "pipeline config JSON")->required();
  train->add_option("--model", train_args.model_out, "output model file");
  train->add_option("--seed", train_args.seed, "override the config master seed");
  train->add_flag("--json", train_args.json, "emit JSON lines instead of tables");
  train->add_flag("--no-timing", train_args.no_timing,
                  "render the Running Time column as '-' for reproducible output");
  train->add_option("--report-out", train_args.report_out, "also write the text report here");
  train->add_option("--scree", train_args.scree_dir, "directory for per-type scree CSVs");
  train->add_option("--trees", train_args.trees_dir,
                    "directory for per-type decision-tree exports");

  rtdpa::cli::EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "evaluate model(s) on labeled data");
  evaluate->add_option("--model", eval_args.models, "model file (repeatable)")
      ->required()
      ->take_all();
  evaluate->add_option("--data", eval_args.data, "CSV data file")->required();
  evaluate->add_option("--schema", eval_args.schema, "schema JSON file")->required();
  evaluate->add_flag("--json", eval_args.json, "emit JSON lines instead of tables");
  evaluate->add_flag("--no-timing", eval_args.no_timing,
                     "render the Running Time column as '-' for reproducible output");

  rtdpa::cli::PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "route rows to per-type models");
  predict->add_option("--model", predict_args.model, "model file")->required();
  predict->add_option("--data", predict_args.data, "CSV data file")->required();
  predict->add_option("--schema", predict_args.schema, "schema JSON file")->required();
  predict->add_option("--out", predict_args.out, "output CSV (stdout when omitted)");
  predict->add_flag("--skip-unknown", predict_args.skip_unknown,
                    "emit unrouted rows instead of failing on unknown row types");

  rtdpa::cli::GenSynthArgs synth_args;
  auto* synth = app.add_subcommand("gen-synth", "generate the row-typed synthetic benchmark");
  synth->add_option("--spec", synth_args.spec, "synth spec JSON (defaults when omitted)");
  synth->add_option("--out", synth_args.out, "output CSV path")->required();
  synth->add_option("--seed", synth_args.seed, "override the spec seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? rtdpa::cli::kExitOk : rtdpa::cli::kExitInput;
  }

  if (inspect->parsed()) return rtdpa::cli::cmd_inspect(inspect_args, std::cout, std::cerr);
  if (train->parsed()) return rtdpa::cli::cmd_train(train_args, std::cout, std::cerr);
  if (evaluate->parsed()) return rtdpa::cli::cmd_evaluate(eval_args, std::cout, std::cerr);
  if (predict->parsed()) return rtdpa::cli::cmd_predict(predict_args, std::cout, std::cerr);
  if (synth->parsed()) return rtdpa::cli::cmd_gen_synth(synth_args, std::cout, std::cerr);
  return rtdpa::cli::kExitInput;
}
