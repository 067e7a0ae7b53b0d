#pragma once

#include <string>
#include <vector>

namespace encls {

struct SubprocessOptions {
  std::vector<std::string> argv;  // argv[0] resolved via PATH
  std::string workdir;            // empty = inherit current directory
  double deadline_seconds = 0;    // > 0: SIGKILL the process group at this point
  double poll_interval = 0.01;
};

struct SubprocessResult {
  bool spawn_failed = false;
  std::string spawn_error;
  int exit_code = -1;
  bool signaled = false;
  int term_signal = 0;
  bool killed_at_deadline = false;
  double wall_time = 0.0;
  std::string stdout_text;
  std::string stderr_text;
};

// Runs argv in its own process group with stdout/stderr captured. On return
// the child and any process-group descendants are dead (the group receives
// SIGKILL after the child is reaped, and at the deadline).
SubprocessResult run_subprocess(const SubprocessOptions& opts);

}  // namespace encls
