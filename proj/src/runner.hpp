#pragma once

#include <optional>
#include <string>

#include "cnf.hpp"

namespace encls {

enum class CandidateOrigin { Base, Refined, Builtin };

// A runnable local-search program. `entry` is a whitespace-split command
// template; the token fragment {source} is replaced with the path of the
// materialized `source` text (written as candidate.py in the run's scratch
// directory). Builtin candidates keep `source` empty and point `entry` at an
// executable directly.
struct CandidateSpec {
  std::string id;
  std::string source;
  std::string entry;
  CandidateOrigin origin = CandidateOrigin::Builtin;
  int version = 1;
  std::optional<std::string> lineage;
};

enum class RunStatus { Ok, SoftTimeoutOk, HardTimeout, RuntimeError, InvalidOutput };

const char* run_status_name(RunStatus s);

struct RunResult {
  RunStatus status = RunStatus::RuntimeError;
  std::optional<Assignment> assignment;  // present iff Ok / SoftTimeoutOk
  double wall_time = 0.0;
  std::string message;                   // error text or invalid-output reason
  std::optional<int> error_line;
};

// On-disk instance bundle handed to candidates: the original instance, its
// DIMACS encoding, and the varmap JSON.
struct InstanceBundle {
  std::string instance_path;
  std::string cnf_path;
  std::string varmap_path;
  int num_vars = 0;  // range guard for returned literals
};

// Builds a bundle from a directory laid out as
// <dir>/{instance, formula.cnf, varmap.json}, reading num_vars from the
// DIMACS header.
InstanceBundle bundle_from_dir(const std::string& dir);

// Launches the candidate as `<entry> <instance> <cnf> <varmap> <soft>` in a
// fresh scratch directory, kills the whole process group at `hard` seconds,
// and parses stdout as signed literals terminated by a single `0` (text
// after the terminator is ignored). Returning within `soft` is Ok, within
// `hard` SoftTimeoutOk. Spawn failures are retried once; execution errors
// never are.
RunResult run_candidate(const CandidateSpec& c, const InstanceBundle& bundle,
                        double soft_seconds, double hard_seconds);

// Gathering-phase verification run: soft 30 s, hard 60 s.
RunResult verify_candidate(const CandidateSpec& c, const InstanceBundle& easy);

// Pulls the last reported error out of a stderr trace: the final error line
// (text after "Error: " when present) and the last "line N" the trace
// mentions before it. Empty stderr falls back to the exit code.
std::pair<std::string, std::optional<int>> extract_error_context(
    const std::string& raw_stderr, int exit_code);

}  // namespace encls
