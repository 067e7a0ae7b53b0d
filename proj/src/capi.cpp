#include "encls.h"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>

#include "cnf.hpp"
#include "localsearch.hpp"
#include "pipeline.hpp"
#include "schemes.hpp"
#include "solver_bridge.hpp"

namespace {

thread_local std::string t_error;

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) return nullptr;
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

int fail(int code, const std::string& msg) {
  t_error = msg;
  return code;
}

}  // namespace

struct encls_formula {
  encls::CnfFormula f;
};

extern "C" {

const char* encls_version(void) { return "0.1.0"; }

const char* encls_last_error(void) { return t_error.c_str(); }

void encls_buffer_free(char* p) { std::free(p); }

encls_formula* encls_formula_parse_dimacs(const char* text) {
  if (!text) {
    t_error = "null text";
    return nullptr;
  }
  try {
    return new encls_formula{encls::parse_dimacs(std::string_view(text))};
  } catch (const std::exception& e) {
    t_error = e.what();
    return nullptr;
  }
}

void encls_formula_free(encls_formula* f) { delete f; }

int encls_formula_num_vars(const encls_formula* f) {
  return f ? f->f.num_vars() : 0;
}

long encls_formula_num_clauses(const encls_formula* f) {
  return f ? static_cast<long>(f->f.num_clauses()) : 0;
}

int encls_formula_write_dimacs(const encls_formula* f, char** text_out) {
  if (!f || !text_out) return fail(ENCLS_ERR_CONFIG, "null argument");
  try {
    *text_out = dup_string(encls::write_dimacs(f->f));
    if (!*text_out) return fail(ENCLS_ERR_RUN, "out of memory");
    return ENCLS_OK;
  } catch (const std::exception& e) {
    return fail(ENCLS_ERR_RUN, e.what());
  }
}

int encls_encode(const char* scheme, const char* instance_text, long bound,
                 char** dimacs_out, char** varmap_json_out, long* bound_out) {
  if (!scheme || !instance_text || !dimacs_out || !varmap_json_out) {
    return fail(ENCLS_ERR_CONFIG, "null argument");
  }
  *dimacs_out = nullptr;
  *varmap_json_out = nullptr;
  try {
    const encls::EncodingScheme& s = encls::get_scheme(scheme);
    std::string text(instance_text);
    long b = bound >= 0 ? bound : s.default_bound(text);
    encls::EncodeResult er = s.encode(text, b);
    *dimacs_out = dup_string(encls::write_dimacs(er.formula));
    *varmap_json_out = dup_string(er.varmap.to_json());
    if (!*dimacs_out || !*varmap_json_out) {
      encls_buffer_free(*dimacs_out);
      encls_buffer_free(*varmap_json_out);
      *dimacs_out = nullptr;
      *varmap_json_out = nullptr;
      return fail(ENCLS_ERR_RUN, "out of memory");
    }
    if (bound_out) *bound_out = b;
    return ENCLS_OK;
  } catch (const std::invalid_argument& e) {
    return fail(ENCLS_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(ENCLS_ERR_RUN, e.what());
  }
}

int encls_walksat(const encls_formula* f, unsigned long long seed,
                  double timeout_seconds, double noise, int* assignment_out,
                  int* found_out) {
  if (!f || !assignment_out) return fail(ENCLS_ERR_CONFIG, "null argument");
  try {
    encls::SearchParams p;
    p.seed = seed;
    p.soft_timeout_seconds = timeout_seconds;
    p.noise = noise;
    encls::SearchOutcome oc = encls::walksat(f->f, p);
    for (encls::Var v = 1; v <= f->f.num_vars(); ++v) {
      assignment_out[v - 1] = oc.assignment.value(v) ? 1 : -1;
    }
    if (found_out) *found_out = oc.found_model ? 1 : 0;
    return ENCLS_OK;
  } catch (const std::exception& e) {
    return fail(ENCLS_ERR_RUN, e.what());
  }
}

int encls_mini_solve(const encls_formula* f, const int* phases,
                     double timeout_seconds, int* status_out, int* model_out) {
  if (!f || !status_out) return fail(ENCLS_ERR_CONFIG, "null argument");
  try {
    encls::Assignment ph;
    if (phases) {
      ph.resize(f->f.num_vars());
      for (encls::Var v = 1; v <= f->f.num_vars(); ++v) {
        if (phases[v - 1] > 0) ph.set(v, true);
        if (phases[v - 1] < 0) ph.set(v, false);
      }
    }
    encls::SolveOutcome oc = encls::mini_solve(f->f, ph, timeout_seconds);
    switch (oc.status) {
      case encls::SolveStatus::Sat: *status_out = ENCLS_SAT; break;
      case encls::SolveStatus::Unsat: *status_out = ENCLS_UNSAT; break;
      case encls::SolveStatus::Timeout: *status_out = ENCLS_TIMEOUT; break;
    }
    if (oc.status == encls::SolveStatus::Sat && model_out) {
      for (encls::Var v = 1; v <= f->f.num_vars(); ++v) {
        model_out[v - 1] = oc.model.value(v) ? 1 : -1;
      }
    }
    return ENCLS_OK;
  } catch (const std::exception& e) {
    return fail(ENCLS_ERR_RUN, e.what());
  }
}

int encls_run_verb(const char* verb, const char* config_json,
                   const char* const* args, size_t nargs) {
  if (!verb || !config_json) {
    std::cerr << "error: null verb or config\n";
    return ENCLS_ERR_CONFIG;
  }
  std::string v(verb);
  return encls::run_exit_coded(std::cerr, [&]() -> int {
    encls::RunConfig cfg =
        encls::parse_config_text(config_json, "<config>");
    if (v == "encode") {
      if (nargs < 2) {
        throw encls::ConfigError(
            "encode needs an instance path and an output directory");
      }
      std::optional<long> bound;
      if (nargs >= 3) {
        try {
          bound = std::stol(args[2]);
        } catch (const std::exception&) {
          throw encls::ConfigError(std::string("bad bound: ") + args[2]);
        }
      }
      return encls::cmd_encode(cfg, args[0], bound, args[1], std::cout);
    }
    if (nargs != 0) throw encls::ConfigError(v + " takes no arguments");
    if (v == "split") return encls::cmd_split(cfg, std::cout);
    if (v == "gather") return encls::cmd_gather(cfg, std::cout);
    if (v == "refine") return encls::cmd_refine(cfg, std::cout);
    if (v == "evaluate") return encls::cmd_evaluate(cfg, std::cout);
    if (v == "baseline") return encls::cmd_baseline(cfg, std::cout);
    if (v == "report") return encls::cmd_report(cfg, std::cout);
    throw encls::ConfigError("unknown verb: " + v);
  });
}

void encls_request_stop(void) { encls::pipeline_request_stop(); }

}  // extern "C"
