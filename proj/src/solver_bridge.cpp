#include "solver_bridge.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "subprocess.hpp"

namespace encls {

namespace fs = std::filesystem;

SolveOutcome solve_with_phases(const CnfFormula& f, const Assignment& phases,
                               double timeout_seconds, SolverAdapter& adapter) {
  if (phases.size() < f.num_vars() || !phases.is_total())
    throw SolverError("phases must be total; complete partial assignments first");
  SolveOutcome out = adapter.invoke(f, phases, timeout_seconds);
  if (out.status == SolveStatus::Sat && count_unsat(f, out.model).unsat != 0)
    throw SolverIntegrityError("backend '" + adapter.name() + "' returned a non-model");
  return out;
}

SolveOutcome solve_plain(const CnfFormula& f, double timeout_seconds,
                         SolverAdapter& adapter) {
  SolveOutcome out = adapter.invoke(f, Assignment{}, timeout_seconds);
  if (out.status == SolveStatus::Sat && count_unsat(f, out.model).unsat != 0)
    throw SolverIntegrityError("backend '" + adapter.name() + "' returned a non-model");
  return out;
}

namespace {

std::string substitute(std::string text, const std::string& key, const std::string& value) {
  size_t pos;
  while ((pos = text.find(key)) != std::string::npos) text.replace(pos, key.size(), value);
  return text;
}

class ExternalAdapter final : public SolverAdapter {
 public:
  explicit ExternalAdapter(ExternalSolverConfig config) : config_(std::move(config)) {}

  std::string name() const override {
    return "external:" + fs::path(config_.executable).filename().string();
  }
  bool supports_phase_hints() const override {
    return config_.phase_mode != PhaseMode::None;
  }
  bool reports_stats() const override { return false; }

  SolveOutcome invoke(const CnfFormula& f, const Assignment& phases,
                      double timeout_seconds) override {
    char dir_template[] = "/tmp/encls-solve-XXXXXX";
    if (!mkdtemp(dir_template)) throw SolverError("cannot create scratch directory");
    fs::path dir(dir_template);
    struct Cleanup {
      fs::path d;
      ~Cleanup() {
        std::error_code ec;
        fs::remove_all(d, ec);
      }
    } cleanup{dir};

    fs::path cnf_path = dir / "formula.cnf";
    {
      std::ofstream out(cnf_path);
      write_dimacs(f, out);
    }

    std::vector<std::string> argv{config_.executable};
    bool cnf_placed = false;
    for (const auto& arg : config_.extra_args) {
      std::string a = substitute(arg, "{cnf}", cnf_path.string());
      if (a != arg) cnf_placed = true;
      argv.push_back(a);
    }

    if (phases.size() > 0 && config_.phase_mode == PhaseMode::PhaseFile) {
      fs::path phase_path = dir / "phases.txt";
      std::ofstream out(phase_path);
      for (Var v = 1; v <= phases.size(); ++v)
        if (phases.is_assigned(v)) out << (phases.value(v) ? v : -v) << ' ';
      out << "0\n";
      if (config_.phase_arg.empty())
        argv.push_back(phase_path.string());
      else
        argv.push_back(substitute(config_.phase_arg, "{phases}", phase_path.string()));
    } else if (phases.size() > 0 && config_.phase_mode == PhaseMode::None && !warned_) {
      std::cerr << "warning: backend '" << name()
                << "' has no phase channel; phases are ignored\n";
      warned_ = true;
    }
    if (!cnf_placed) argv.push_back(cnf_path.string());

    SubprocessOptions opts;
    opts.argv = std::move(argv);
    opts.deadline_seconds = timeout_seconds;
    SubprocessResult res = run_subprocess(opts);
    if (res.spawn_failed) throw SolverError(res.spawn_error);

    SolveOutcome out;
    out.runtime = res.killed_at_deadline ? timeout_seconds : res.wall_time;
    if (res.killed_at_deadline) {
      out.status = SolveStatus::Timeout;
      return out;
    }
    if (res.signaled)
      throw SolverError("backend terminated by signal " + std::to_string(res.term_signal));

    bool saw_sat = false, saw_unsat = false;
    std::vector<Lit> model_lits;
    std::istringstream lines(res.stdout_text);
    std::string line;
    while (std::getline(lines, line)) {
      if (line.rfind("s ", 0) == 0) {
        if (line.find("UNSATISFIABLE") != std::string::npos)
          saw_unsat = true;
        else if (line.find("SATISFIABLE") != std::string::npos)
          saw_sat = true;
      } else if (line.rfind("v", 0) == 0 && (line.size() == 1 || line[1] == ' ')) {
        std::istringstream vs(line.substr(1));
        long lit;
        while (vs >> lit)
          if (lit != 0) model_lits.push_back(static_cast<Lit>(lit));
      }
    }
    if (!saw_sat && !saw_unsat)
      throw SolverError("unparseable backend output (no 's' line); exit code " +
                        std::to_string(res.exit_code));
    if (res.exit_code != 0 && res.exit_code != 10 && res.exit_code != 20)
      throw SolverError("backend exited with unexpected code " +
                        std::to_string(res.exit_code));

    if (saw_unsat) {
      out.status = SolveStatus::Unsat;
      return out;
    }
    out.status = SolveStatus::Sat;
    Assignment model(f.num_vars());
    for (Lit l : model_lits) {
      if (lit_var(l) > f.num_vars())
        throw SolverError("backend model mentions unknown variable " +
                          std::to_string(lit_var(l)));
      model.set(lit_var(l), lit_sign(l));
    }
    out.model = complete_assignment(f, model, false);
    return out;
  }

 private:
  ExternalSolverConfig config_;
  bool warned_ = false;
};

}  // namespace

std::unique_ptr<SolverAdapter> make_external_adapter(ExternalSolverConfig config) {
  return std::make_unique<ExternalAdapter>(std::move(config));
}

}  // namespace encls
