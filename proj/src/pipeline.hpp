#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chat.hpp"

namespace encls {

// Bad configuration or unusable inputs; the CLI maps this to exit code 2.
// Everything else thrown out of a command maps to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Timeouts {
  double train_soft = 60.0;
  double train_hard = 120.0;
  double train_sat = 120.0;
  double test_soft = 900.0;
  double test_hard = 1800.0;
  double test_sat = 3600.0;
  double reference_sat = 3600.0;
};

struct GatherParams {
  int n = 50;
  int max_repair_tries = 10;
  double temp_start = 0.7;
  double temp_end = 1.2;
};

struct RefineParams {
  int iterations = 19;
  int max_repair_tries = 10;
  double temperature = 0.9;
  int structure_from_version = 12;
  int top_k = 5;
};

struct RunConfig {
  std::string scheme;
  std::string instances_dir;
  std::string output_dir = "out";
  std::optional<long> bound;
  int workers = 1;
  long seed = 1;

  Timeouts timeouts;
  GatherParams gather;
  RefineParams refine;

  ProviderConfig provider;
  bool provider_set = false;

  std::string adapter = "mini";        // mini | external:<path>
  std::string cassette;                // record/replay transcript path
  std::string cassette_mode = "auto";  // auto | record | replay

  // Explicit train/test split; when empty the lists written by `split` are
  // used.
  std::vector<std::string> train_list;
  std::vector<std::string> test_list;
  bool splits_explicit = false;

  std::string easy_instance;  // verification instance; default: fastest train
  std::string builtin_entry;  // baseline runner binary; default: next to CLI
  std::vector<std::string> baselines = {"walksat", "gsat", "tabu"};
  std::vector<std::string> evaluate_candidates;  // empty: accepted versions

  std::string config_text;  // raw file contents
  std::string config_path;
};

RunConfig parse_config_text(const std::string& text, const std::string& path);
RunConfig load_config(const std::string& path);

struct FlagOverrides {
  std::optional<int> workers;
  std::optional<long> seed;
  std::optional<std::string> cassette;
  std::optional<std::string> adapter;
  std::optional<std::string> scheme;
  std::optional<std::string> output_dir;
};

void apply_overrides(RunConfig& cfg, const FlagOverrides& o);

// Hash of the semantic configuration (scheme, seed, timeouts, phase
// parameters, provider label), stamped into every manifest. Output paths and
// secrets stay out of it.
std::string config_hash(const RunConfig& cfg);

int cmd_encode(const RunConfig& cfg, const std::string& instance_path,
               std::optional<long> bound, const std::string& out_dir,
               std::ostream& log);
int cmd_split(const RunConfig& cfg, std::ostream& log);
int cmd_gather(const RunConfig& cfg, std::ostream& log);
int cmd_refine(const RunConfig& cfg, std::ostream& log);
int cmd_evaluate(const RunConfig& cfg, std::ostream& log);
int cmd_baseline(const RunConfig& cfg, std::ostream& log);
int cmd_report(const RunConfig& cfg, std::ostream& log);

// Cooperative stop for worker pools; wired to SIGINT by the CLI.
void pipeline_request_stop();
bool pipeline_stop_requested();
void pipeline_clear_stop();

// Runs `body` and maps exceptions to exit codes: ConfigError and bad CLI
// input give 2, anything else 1.
int run_exit_coded(std::ostream& log, const std::function<int()>& body);

}  // namespace encls
