// Operator CLI over the encls C API. Flag values are merged into the JSON
// configuration before it is handed to the library.

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "encls.h"

namespace {

void on_sigint(int) { encls_request_stop(); }

struct CommonFlags {
  std::string config_path;
  int workers = 0;
  long seed = 0;
  std::string cassette;
  std::string adapter;
  std::string scheme;
  std::string output_dir;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config_path, "JSON configuration file");
  sub->add_option("--workers", f.workers, "worker pool size")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "run seed");
  sub->add_option("--cassette", f.cassette,
                  "provider transcript to record or replay");
  sub->add_option("--adapter", f.adapter,
                  "solver backend: mini or external:<path>");
  sub->add_option("--scheme", f.scheme, "encoding scheme name");
  sub->add_option("--output", f.output_dir, "run output directory");
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_sigint);

  CLI::App app{"encoding-aware local-search preprocessors for CDCL solving"};
  app.require_subcommand(1);
  CommonFlags flags;

  std::string enc_instance;
  std::string enc_out = "encoded";
  long enc_bound = 0;

  CLI::App* c_encode =
      app.add_subcommand("encode", "encode one instance to CNF plus varmap");
  add_common(c_encode, flags);
  c_encode->add_option("instance", enc_instance, "instance file")->required();
  CLI::Option* bound_opt =
      c_encode->add_option("--bound", enc_bound, "encoding bound (default: heuristic)");
  c_encode->add_option("--out", enc_out, "output directory for the bundle");

  const char* verbs[][2] = {
      {"split", "reference solver runs and train/test split"},
      {"gather", "ask the provider for candidate searches"},
      {"refine", "iterative refinement of the top candidates"},
      {"evaluate", "run candidates plus solver over the test split"},
      {"baseline", "run the builtin searches over the test split"},
      {"report", "solved/new tables and relative scores"},
  };
  for (const auto& v : verbs) {
    add_common(app.add_subcommand(v[0], v[1]), flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::string verb = sub->get_name();

  std::string config_text = "{}";
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path, std::ios::binary);
    if (!in) {
      std::cerr << "error: config file not found: " << flags.config_path
                << "\n";
      return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    config_text = buf.str();
  }

  // overlay flags onto the file values; unparsable text goes through as-is
  // so the library reports the error
  try {
    nlohmann::json cj = nlohmann::json::parse(config_text);
    if (cj.is_object()) {
      if (sub->count("--workers")) cj["workers"] = flags.workers;
      if (sub->count("--seed")) cj["seed"] = flags.seed;
      if (sub->count("--cassette")) cj["cassette"] = flags.cassette;
      if (sub->count("--adapter")) cj["adapter"] = flags.adapter;
      if (sub->count("--scheme")) cj["scheme"] = flags.scheme;
      if (sub->count("--output")) cj["output_dir"] = flags.output_dir;
      config_text = cj.dump();
    }
  } catch (const nlohmann::json::exception&) {
  }

  std::vector<std::string> args;
  if (verb == "encode") {
    args.push_back(enc_instance);
    args.push_back(enc_out);
    if (bound_opt->count()) args.push_back(std::to_string(enc_bound));
  }
  std::vector<const char*> argp;
  argp.reserve(args.size());
  for (const auto& a : args) argp.push_back(a.c_str());

  return encls_run_verb(verb.c_str(), config_text.c_str(),
                        argp.empty() ? nullptr : argp.data(), argp.size());
}
