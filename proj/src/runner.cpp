#include "runner.hpp"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "subprocess.hpp"

namespace fs = std::filesystem;

namespace encls {

namespace {

struct ScratchDir {
  std::string path;
  ScratchDir() {
    char tmpl[] = "/tmp/encls-cand-XXXXXX";
    if (!mkdtemp(tmpl)) throw std::runtime_error("mkdtemp failed");
    path = tmpl;
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
};

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string format_seconds_arg(double s) {
  if (s == static_cast<long>(s)) return std::to_string(static_cast<long>(s));
  char buf[32];
  snprintf(buf, sizeof buf, "%.6g", s);
  return buf;
}

bool parse_literal(const std::string& tok, long* out) {
  if (tok.empty()) return false;
  errno = 0;
  char* end = nullptr;
  const long v = strtol(tok.c_str(), &end, 10);
  if (errno != 0 || end == tok.c_str() || *end != '\0') return false;
  *out = v;
  return true;
}

RunResult invalid(const std::string& reason, double wall) {
  RunResult r;
  r.status = RunStatus::InvalidOutput;
  r.message = reason;
  r.wall_time = wall;
  return r;
}

// Parses the protocol output: whitespace-separated signed literals ending
// with a lone 0. Sets `out` on success, otherwise returns the reason.
std::optional<std::string> parse_protocol(const std::string& text, int num_vars,
                                          Assignment* out) {
  Assignment a(num_vars);
  std::istringstream in(text);
  std::string tok;
  bool terminated = false;
  while (in >> tok) {
    long lit = 0;
    if (!parse_literal(tok, &lit)) return "malformed literal '" + tok + "'";
    if (lit == 0) {
      terminated = true;
      break;
    }
    const long v = lit < 0 ? -lit : lit;
    if (v < 1 || v > num_vars)
      return "literal out of range: " + std::to_string(lit);
    if (a.is_assigned(static_cast<Var>(v)))
      return "duplicate assignment for var " + std::to_string(v);
    a.set(static_cast<Var>(v), lit > 0);
  }
  if (!terminated) return "no terminator";
  *out = std::move(a);
  return std::nullopt;
}

}  // namespace

const char* run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Ok: return "OK";
    case RunStatus::SoftTimeoutOk: return "SOFT_TIMEOUT_OK";
    case RunStatus::HardTimeout: return "HARD_TIMEOUT";
    case RunStatus::RuntimeError: return "RUNTIME_ERROR";
    case RunStatus::InvalidOutput: return "INVALID_OUTPUT";
  }
  return "?";
}

InstanceBundle bundle_from_dir(const std::string& dir) {
  InstanceBundle b;
  b.instance_path = (fs::path(dir) / "instance").string();
  b.cnf_path = (fs::path(dir) / "formula.cnf").string();
  b.varmap_path = (fs::path(dir) / "varmap.json").string();

  std::ifstream in(b.cnf_path);
  if (!in) throw std::runtime_error("cannot open " + b.cnf_path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'c') continue;
    int vars = 0;
    long clauses = 0;
    if (sscanf(line.c_str(), "p cnf %d %ld", &vars, &clauses) == 2) {
      b.num_vars = vars;
      return b;
    }
    break;
  }
  throw std::runtime_error("no DIMACS header in " + b.cnf_path);
}

std::pair<std::string, std::optional<int>> extract_error_context(
    const std::string& raw_stderr, int exit_code) {
  std::istringstream in(raw_stderr);
  std::string line;
  std::string last_nonempty;
  std::optional<int> last_line_no;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty()) continue;
    last_nonempty = line;
    // Python frames read `File "x.py", line N, in f`; keep the latest one.
    size_t pos = 0;
    while ((pos = line.find("line ", pos)) != std::string::npos) {
      pos += 5;
      if (pos < line.size() && isdigit(static_cast<unsigned char>(line[pos]))) {
        last_line_no = atoi(line.c_str() + pos);
      }
    }
  }
  if (last_nonempty.empty())
    return {"process exited with code " + std::to_string(exit_code), std::nullopt};

  std::string message = last_nonempty;
  if (const size_t pos = message.find("Error: "); pos != std::string::npos)
    message = message.substr(pos + 7);
  while (!message.empty() && message.front() == ' ') message.erase(message.begin());
  return {message, last_line_no};
}

RunResult run_candidate(const CandidateSpec& c, const InstanceBundle& bundle,
                        double soft_seconds, double hard_seconds) {
  if (hard_seconds < soft_seconds)
    throw std::invalid_argument("hard limit below soft limit");

  ScratchDir scratch;
  std::string source_path;
  if (!c.source.empty() || c.entry.find("{source}") != std::string::npos) {
    source_path = (fs::path(scratch.path) / "candidate.py").string();
    std::ofstream out(source_path);
    out << c.source;
    if (!out) {
      RunResult r;
      r.status = RunStatus::RuntimeError;
      r.message = "cannot write candidate source";
      return r;
    }
  }

  SubprocessOptions opts;
  for (std::string tok : split_ws(c.entry)) {
    if (const size_t pos = tok.find("{source}"); pos != std::string::npos)
      tok = tok.substr(0, pos) + source_path + tok.substr(pos + 8);
    opts.argv.push_back(tok);
  }
  if (opts.argv.empty()) {
    RunResult r;
    r.status = RunStatus::RuntimeError;
    r.message = "empty entry command";
    return r;
  }
  opts.argv.push_back(fs::absolute(bundle.instance_path).string());
  opts.argv.push_back(fs::absolute(bundle.cnf_path).string());
  opts.argv.push_back(fs::absolute(bundle.varmap_path).string());
  opts.argv.push_back(format_seconds_arg(soft_seconds));
  opts.workdir = scratch.path;
  opts.deadline_seconds = hard_seconds;

  SubprocessResult res = run_subprocess(opts);
  if (res.spawn_failed) res = run_subprocess(opts);
  if (res.spawn_failed) {
    RunResult r;
    r.status = RunStatus::RuntimeError;
    r.message = "spawn failed: " + res.spawn_error;
    r.wall_time = res.wall_time;
    return r;
  }

  RunResult r;
  r.wall_time = res.wall_time;
  if (res.killed_at_deadline) {
    r.status = RunStatus::HardTimeout;
    return r;
  }
  if (res.signaled) {
    r.status = RunStatus::RuntimeError;
    r.message = "terminated by signal " + std::to_string(res.term_signal);
    return r;
  }
  if (res.exit_code != 0) {
    auto [message, err_line] = extract_error_context(res.stderr_text, res.exit_code);
    r.status = RunStatus::RuntimeError;
    r.message = message;
    r.error_line = err_line;
    return r;
  }

  Assignment a;
  if (auto reason = parse_protocol(res.stdout_text, bundle.num_vars, &a))
    return invalid(*reason, res.wall_time);
  r.status = res.wall_time <= soft_seconds ? RunStatus::Ok : RunStatus::SoftTimeoutOk;
  r.assignment = std::move(a);
  return r;
}

RunResult verify_candidate(const CandidateSpec& c, const InstanceBundle& easy) {
  return run_candidate(c, easy, 30.0, 60.0);
}

}  // namespace encls
