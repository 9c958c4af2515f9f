#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rtdpa::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;

struct InspectArgs {
  std::string data;
  std::string schema;
  bool json = false;
  std::string out;  // optional JSON output path
};

struct TrainArgs {
  std::string data;
  std::string schema;
  std::string config;
  std::string model_out;
  std::optional<std::uint64_t> seed;
  bool json = false;
  bool no_timing = false;
  std::string report_out;
  std::string scree_dir;
  std::string trees_dir;
};

struct EvaluateArgs {
  std::vector<std::string> models;
  std::string data;
  std::string schema;
  bool json = false;
  bool no_timing = false;
};

struct PredictArgs {
  std::string model;
  std::string data;
  std::string schema;
  std::string out;
  bool skip_unknown = false;
};

struct GenSynthArgs {
  std::string spec;  // optional JSON spec path
  std::string out;   // CSV path; schema/sidecar written next to it
  std::optional<std::uint64_t> seed;
};

int cmd_inspect(const InspectArgs& args, std::ostream& out, std::ostream& err);
int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);
int cmd_evaluate(const EvaluateArgs& args, std::ostream& out, std::ostream& err);
int cmd_predict(const PredictArgs& args, std::ostream& out, std::ostream& err);
int cmd_gen_synth(const GenSynthArgs& args, std::ostream& out, std::ostream& err);

}  // namespace rtdpa::cli
