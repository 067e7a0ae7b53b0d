#include "pipeline.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "orchestrator.hpp"
#include "prompts.hpp"
#include "runner.hpp"
#include "schemes.hpp"
#include "scoring.hpp"
#include "solver_bridge.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace encls {

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::atomic<bool> g_stop{false};

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + p.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

void write_manifest(const fs::path& p, const json& j) {
  write_file(p, j.dump(2) + "\n");
}

// --- config ---------------------------------------------------------------

std::string env_interp(const std::string& s) {
  std::string out;
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '$' && i + 1 < s.size() && s[i + 1] == '{') {
      size_t end = s.find('}', i + 2);
      if (end == std::string::npos) {
        throw ConfigError("unterminated ${ in config value: " + s);
      }
      std::string name = s.substr(i + 2, end - i - 2);
      const char* val = std::getenv(name.c_str());
      if (!val) throw ConfigError("environment variable not set: " + name);
      out += val;
      i = end + 1;
    } else {
      out += s[i++];
    }
  }
  return out;
}

void interp_strings(json& j) {
  if (j.is_string()) {
    j = env_interp(j.get<std::string>());
  } else if (j.is_object() || j.is_array()) {
    for (auto& child : j) interp_strings(child);
  }
}

std::vector<std::string> string_list(const json& j, const std::string& key) {
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw ConfigError("config key " + key + ": expected strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& path) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(path + ": config must be a JSON object");
  interp_strings(j);

  RunConfig cfg;
  cfg.config_text = text;
  cfg.config_path = path;

  try {
    cfg.scheme = j.value("scheme", cfg.scheme);
    cfg.instances_dir = j.value("instances_dir", cfg.instances_dir);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.adapter = j.value("adapter", cfg.adapter);
    cfg.cassette = j.value("cassette", cfg.cassette);
    cfg.cassette_mode = j.value("cassette_mode", cfg.cassette_mode);
    cfg.easy_instance = j.value("easy_instance", cfg.easy_instance);
    cfg.builtin_entry = j.value("builtin_entry", cfg.builtin_entry);
    if (j.contains("bound") && !j["bound"].is_null()) {
      cfg.bound = j["bound"].get<long>();
    }
    if (j.contains("timeouts")) {
      const json& t = j["timeouts"];
      cfg.timeouts.train_soft = t.value("train_soft", cfg.timeouts.train_soft);
      cfg.timeouts.train_hard = t.value("train_hard", cfg.timeouts.train_hard);
      cfg.timeouts.train_sat = t.value("train_sat", cfg.timeouts.train_sat);
      cfg.timeouts.test_soft = t.value("test_soft", cfg.timeouts.test_soft);
      cfg.timeouts.test_hard = t.value("test_hard", cfg.timeouts.test_hard);
      cfg.timeouts.test_sat = t.value("test_sat", cfg.timeouts.test_sat);
      cfg.timeouts.reference_sat =
          t.value("reference_sat", cfg.timeouts.reference_sat);
    }
    if (j.contains("gather")) {
      const json& g = j["gather"];
      cfg.gather.n = g.value("n", cfg.gather.n);
      cfg.gather.max_repair_tries =
          g.value("max_repair_tries", cfg.gather.max_repair_tries);
      cfg.gather.temp_start = g.value("temp_start", cfg.gather.temp_start);
      cfg.gather.temp_end = g.value("temp_end", cfg.gather.temp_end);
    }
    if (j.contains("refine")) {
      const json& r = j["refine"];
      cfg.refine.iterations = r.value("iterations", cfg.refine.iterations);
      cfg.refine.max_repair_tries =
          r.value("max_repair_tries", cfg.refine.max_repair_tries);
      cfg.refine.temperature = r.value("temperature", cfg.refine.temperature);
      cfg.refine.structure_from_version =
          r.value("structure_from_version", cfg.refine.structure_from_version);
      cfg.refine.top_k = r.value("top_k", cfg.refine.top_k);
    }
    if (j.contains("provider")) {
      const json& p = j["provider"];
      cfg.provider_set = true;
      cfg.provider.name = p.value("name", std::string("provider"));
      cfg.provider.kind = p.value("kind", cfg.provider.kind);
      cfg.provider.base_url = p.value("base_url", cfg.provider.base_url);
      cfg.provider.path = p.value("path", cfg.provider.path);
      cfg.provider.model = p.value("model", cfg.provider.model);
      cfg.provider.api_key_env = p.value("api_key_env", cfg.provider.api_key_env);
      cfg.provider.max_tokens = p.value("max_tokens", cfg.provider.max_tokens);
      cfg.provider.max_retries = p.value("max_retries", cfg.provider.max_retries);
      cfg.provider.retry_backoff_seconds =
          p.value("retry_backoff_seconds", cfg.provider.retry_backoff_seconds);
      cfg.provider.timeout_seconds =
          p.value("timeout_seconds", cfg.provider.timeout_seconds);
      if (p.contains("scripted_responses")) {
        cfg.provider.scripted_responses =
            string_list(p["scripted_responses"], "provider.scripted_responses");
      }
    }
    if (j.contains("splits")) {
      const json& s = j["splits"];
      cfg.train_list = string_list(s.value("train", json::array()), "splits.train");
      cfg.test_list = string_list(s.value("test", json::array()), "splits.test");
      cfg.splits_explicit = true;
    }
    if (j.contains("baselines")) {
      cfg.baselines = string_list(j["baselines"], "baselines");
    }
    if (j.contains("evaluate_candidates")) {
      cfg.evaluate_candidates =
          string_list(j["evaluate_candidates"], "evaluate_candidates");
    }
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }

  if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
  if (cfg.timeouts.train_hard < cfg.timeouts.train_soft) {
    throw ConfigError("train_hard must be >= train_soft");
  }
  if (cfg.timeouts.test_hard < cfg.timeouts.test_soft) {
    throw ConfigError("test_hard must be >= test_soft");
  }
  if (cfg.cassette_mode != "auto" && cfg.cassette_mode != "record" &&
      cfg.cassette_mode != "replay") {
    throw ConfigError("cassette_mode must be auto, record, or replay");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
  return parse_config_text(read_file(path), path);
}

void apply_overrides(RunConfig& cfg, const FlagOverrides& o) {
  if (o.workers) cfg.workers = *o.workers;
  if (o.seed) cfg.seed = *o.seed;
  if (o.cassette) cfg.cassette = *o.cassette;
  if (o.adapter) cfg.adapter = *o.adapter;
  if (o.scheme) cfg.scheme = *o.scheme;
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
}

std::string config_hash(const RunConfig& cfg) {
  json c;
  c["scheme"] = cfg.scheme;
  c["seed"] = cfg.seed;
  c["adapter"] = cfg.adapter;
  c["bound"] = cfg.bound ? json(*cfg.bound) : json(nullptr);
  c["timeouts"] = {{"train_soft", cfg.timeouts.train_soft},
                   {"train_hard", cfg.timeouts.train_hard},
                   {"train_sat", cfg.timeouts.train_sat},
                   {"test_soft", cfg.timeouts.test_soft},
                   {"test_hard", cfg.timeouts.test_hard},
                   {"test_sat", cfg.timeouts.test_sat},
                   {"reference_sat", cfg.timeouts.reference_sat}};
  c["gather"] = {{"n", cfg.gather.n},
                 {"max_repair_tries", cfg.gather.max_repair_tries},
                 {"temp_start", cfg.gather.temp_start},
                 {"temp_end", cfg.gather.temp_end}};
  c["refine"] = {{"iterations", cfg.refine.iterations},
                 {"max_repair_tries", cfg.refine.max_repair_tries},
                 {"temperature", cfg.refine.temperature},
                 {"structure_from_version", cfg.refine.structure_from_version},
                 {"top_k", cfg.refine.top_k}};
  c["provider"] = {{"name", cfg.provider.name},
                   {"kind", cfg.provider.kind},
                   {"model", cfg.provider.model}};
  c["baselines"] = cfg.baselines;
  c["easy_instance"] = cfg.easy_instance;
  if (cfg.splits_explicit) {
    c["train"] = cfg.train_list;
    c["test"] = cfg.test_list;
  }
  return hex64(fnv1a(c.dump()));
}

void pipeline_request_stop() { g_stop.store(true); }
bool pipeline_stop_requested() { return g_stop.load(); }
void pipeline_clear_stop() { g_stop.store(false); }

int run_exit_coded(std::ostream& log, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

namespace {

// --- shared plumbing --------------------------------------------------------

void run_pool(int workers, size_t jobs, const std::function<void(size_t)>& fn) {
  if (jobs == 0) return;
  std::atomic<size_t> next{0};
  std::mutex err_m;
  std::exception_ptr err;

  auto body = [&] {
    while (true) {
      if (g_stop.load()) return;
      size_t i = next.fetch_add(1);
      if (i >= jobs) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_m);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };

  int n = std::min<size_t>(workers, jobs);
  std::vector<std::thread> pool;
  for (int i = 0; i < n; ++i) pool.emplace_back(body);
  for (auto& t : pool) t.join();

  if (err) std::rethrow_exception(err);
  if (g_stop.load()) throw std::runtime_error("interrupted; partial state kept");
}

std::unique_ptr<SolverAdapter> make_adapter_from(const RunConfig& cfg) {
  if (cfg.adapter == "mini") return make_mini_adapter();
  const std::string prefix = "external:";
  if (cfg.adapter.rfind(prefix, 0) == 0) {
    std::string exe = cfg.adapter.substr(prefix.size());
    if (exe.empty()) throw ConfigError("external adapter needs a path");
    if (!fs::exists(exe)) throw ConfigError("solver executable not found: " + exe);
    ExternalSolverConfig c;
    c.executable = exe;
    return make_external_adapter(std::move(c));
  }
  throw ConfigError("unknown adapter: " + cfg.adapter +
                    " (use mini or external:<path>)");
}

std::string provider_label(const RunConfig& cfg) {
  return cfg.provider_set && !cfg.provider.name.empty() ? cfg.provider.name
                                                        : "replay";
}

std::unique_ptr<ChatProvider> build_provider(const RunConfig& cfg) {
  if (!cfg.cassette.empty()) {
    bool replay = cfg.cassette_mode == "replay" ||
                  (cfg.cassette_mode == "auto" && fs::exists(cfg.cassette));
    if (replay) {
      if (!fs::exists(cfg.cassette)) {
        throw ConfigError("cassette not found: " + cfg.cassette);
      }
      return Transcript::replay(cfg.cassette, provider_label(cfg));
    }
    if (!cfg.provider_set) {
      throw ConfigError("recording a cassette needs a provider in the config");
    }
    return Transcript::record(make_provider(cfg.provider), cfg.cassette);
  }
  if (!cfg.provider_set) {
    throw ConfigError("no provider configured and no cassette given");
  }
  return make_provider(cfg.provider);
}

struct BundleInfo {
  std::string name;
  std::string dir;
  long bound = 0;
  InstanceBundle bundle;
  long num_clauses = 0;
};

std::string instance_stem(const fs::path& p) { return p.stem().string(); }

std::vector<BundleInfo> ensure_bundles(const RunConfig& cfg,
                                       const EncodingScheme& scheme,
                                       std::ostream& log) {
  if (cfg.instances_dir.empty() || !fs::is_directory(cfg.instances_dir)) {
    throw ConfigError("instances_dir is not a directory: " + cfg.instances_dir);
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(cfg.instances_dir)) {
    if (!e.is_regular_file()) continue;
    if (e.path().filename().string()[0] == '.') continue;
    files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw ConfigError("no instance files in " + cfg.instances_dir);
  }

  std::vector<BundleInfo> out;
  int encoded = 0;
  for (const auto& file : files) {
    BundleInfo b;
    b.name = instance_stem(file);
    fs::path bdir = fs::path(cfg.output_dir) / "bundles" / b.name;
    b.dir = bdir.string();
    fs::path meta = bdir / "bundle.json";

    if (fs::exists(meta)) {
      json mj = json::parse(read_file(meta));
      b.bound = mj.value("bound", 0L);
      b.num_clauses = mj.value("num_clauses", 0L);
      b.bundle = bundle_from_dir(b.dir);
      out.push_back(std::move(b));
      continue;
    }

    std::string text = read_file(file);
    try {
      b.bound = cfg.bound ? *cfg.bound : scheme.default_bound(text);
      EncodeResult er = scheme.encode(text, b.bound);
      fs::create_directories(bdir);
      write_file(bdir / "instance", text);
      write_file(bdir / "formula.cnf", write_dimacs(er.formula));
      write_file(bdir / "varmap.json", er.varmap.to_json());
      b.num_clauses = static_cast<long>(er.formula.num_clauses());
      json mj;
      mj["name"] = b.name;
      mj["source"] = file.filename().string();
      mj["scheme"] = scheme.name;
      mj["bound"] = b.bound;
      mj["num_vars"] = er.formula.num_vars();
      mj["num_clauses"] = b.num_clauses;
      write_manifest(meta, mj);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(file.string() + ": " + e.what());
    }
    b.bundle = bundle_from_dir(b.dir);
    out.push_back(std::move(b));
    ++encoded;
  }
  if (encoded > 0) {
    log << "encoded " << encoded << " instance(s) into " << cfg.output_dir
        << "/bundles\n";
  }
  return out;
}

const BundleInfo& find_bundle(const std::vector<BundleInfo>& bundles,
                              const std::string& name) {
  for (const auto& b : bundles) {
    if (b.name == name) return b;
  }
  // accept a source path where a bundle name is expected
  std::string stem = fs::path(name).stem().string();
  for (const auto& b : bundles) {
    if (b.name == stem) return b;
  }
  std::string known;
  for (const auto& b : bundles) {
    if (!known.empty()) known += ", ";
    known += b.name;
  }
  throw ConfigError("instance not found among bundles: " + name +
                    " (known: " + known + ")");
}

CnfFormula load_bundle_formula(const BundleInfo& b) {
  return parse_dimacs(read_file(b.bundle.cnf_path));
}

SolveStatus parse_solve_status(const std::string& s) {
  if (s == "SAT") return SolveStatus::Sat;
  if (s == "UNSAT") return SolveStatus::Unsat;
  if (s == "TIMEOUT") return SolveStatus::Timeout;
  throw std::runtime_error("unknown solve status: " + s);
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open " + p.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

struct SplitLists {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

SplitLists load_splits(const RunConfig& cfg) {
  SplitLists s;
  if (cfg.splits_explicit) {
    s.train = cfg.train_list;
    s.test = cfg.test_list;
  } else {
    fs::path dir = fs::path(cfg.output_dir) / "split";
    if (!fs::exists(dir / "train.txt")) {
      throw ConfigError("no split found under " + dir.string() +
                        "; run the split command or configure splits");
    }
    s.train = read_lines(dir / "train.txt");
    s.test = read_lines(dir / "test.txt");
  }
  return s;
}

std::map<std::string, ReferenceOutcome> load_reference(const RunConfig& cfg) {
  std::map<std::string, ReferenceOutcome> out;
  fs::path p = fs::path(cfg.output_dir) / "split" / "reference.jsonl";
  if (!fs::exists(p)) return out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    ReferenceOutcome ro;
    ro.instance = j.at("instance").get<std::string>();
    ro.status = parse_solve_status(j.at("status").get<std::string>());
    ro.seconds = j.at("seconds").get<double>();
    out[ro.instance] = ro;
  }
  return out;
}

// Cache of candidate-by-instance scores keyed on the candidate's source, so
// interrupted gather/refine runs never redo finished measurements.
class EvalCache {
 public:
  explicit EvalCache(const fs::path& path) : path_(path) {
    if (!fs::exists(path_)) return;
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line);
      EvalRow row = eval_row_from_json(j.at("row").dump());
      rows_[key(j.at("candidate_id").get<std::string>(),
                j.at("source_hash").get<std::string>(),
                row.result.instance)] = row.result;
    }
  }

  std::optional<InstanceResult> find(const std::string& id,
                                     const std::string& source_hash,
                                     const std::string& instance) const {
    std::lock_guard<std::mutex> lock(m_);
    auto it = rows_.find(key(id, source_hash, instance));
    if (it == rows_.end()) return std::nullopt;
    return it->second;
  }

  void put(const std::string& id, const std::string& source_hash,
           const InstanceResult& r) {
    std::lock_guard<std::mutex> lock(m_);
    rows_[key(id, source_hash, r.instance)] = r;
    json j;
    j["candidate_id"] = id;
    j["source_hash"] = source_hash;
    j["row"] = json::parse(eval_row_to_json(id, r));
    std::ofstream out(path_, std::ios::app);
    out << j.dump() << "\n";
  }

 private:
  static std::string key(const std::string& id, const std::string& h,
                         const std::string& inst) {
    return id + "\x1f" + h + "\x1f" + inst;
  }

  fs::path path_;
  mutable std::mutex m_;
  std::map<std::string, InstanceResult> rows_;
};

std::string source_hash(const CandidateSpec& spec) {
  return hex64(fnv1a(spec.entry + "\x1f" + spec.source));
}

InstanceResult run_pair(const CandidateSpec& spec, const BundleInfo& b,
                        const CnfFormula& f, double soft, double hard,
                        double sat_limit, SolverAdapter& adapter,
                        std::ostream* log, std::mutex* log_m) {
  InstanceResult ir;
  ir.instance = b.name;

  RunResult rr = run_candidate(spec, b.bundle, soft, hard);
  ir.ls_status = rr.status;
  ir.ls_seconds = round2(rr.wall_time);
  ir.ls_message = rr.message;
  ir.ls_error_line = rr.error_line;

  if (rr.assignment) {
    try {
      Assignment phases = complete_assignment(f, *rr.assignment, false);
      SolveOutcome oc = solve_with_phases(f, phases, sat_limit, adapter);
      ir.sat_status = oc.status;
      ir.sat_seconds = round2(oc.runtime);
    } catch (const std::exception& e) {
      if (log && log_m) {
        std::lock_guard<std::mutex> lock(*log_m);
        *log << "solver failed on " << spec.id << " x " << b.name << ": "
             << e.what() << "\n";
      }
    }
  }
  return ir;
}

std::string builtin_entry_path(const RunConfig& cfg) {
  if (!cfg.builtin_entry.empty()) {
    if (!fs::exists(cfg.builtin_entry)) {
      throw ConfigError("builtin_entry not found: " + cfg.builtin_entry);
    }
    return cfg.builtin_entry;
  }
  char buf[4096];
  ssize_t n = readlink("/proc/self/exe", buf, sizeof buf - 1);
  if (n > 0) {
    buf[n] = '\0';
    fs::path sibling = fs::path(buf).parent_path() / "encls_candidate";
    if (fs::exists(sibling)) return sibling.string();
  }
  throw ConfigError(
      "cannot locate the encls_candidate binary; set builtin_entry in the "
      "config");
}

CandidateSpec builtin_spec(const RunConfig& cfg, const std::string& mode) {
  CandidateSpec spec;
  spec.id = "builtin-" + mode;
  spec.entry = builtin_entry_path(cfg) + " " + mode + " --seed " +
               std::to_string(cfg.seed);
  spec.origin = CandidateOrigin::Builtin;
  spec.version = 1;
  return spec;
}

const char* origin_name(CandidateOrigin o) {
  switch (o) {
    case CandidateOrigin::Base: return "base";
    case CandidateOrigin::Refined: return "refined";
    case CandidateOrigin::Builtin: return "builtin";
  }
  return "base";
}

CandidateOrigin parse_origin(const std::string& s) {
  if (s == "base") return CandidateOrigin::Base;
  if (s == "refined") return CandidateOrigin::Refined;
  if (s == "builtin") return CandidateOrigin::Builtin;
  throw std::runtime_error("unknown candidate origin: " + s);
}

VersionTag parse_version_tag(const std::string& s) {
  if (s == "base") return VersionTag::Base;
  if (s == "refined") return VersionTag::Refined;
  if (s == "structure") return VersionTag::Structure;
  throw std::runtime_error("unknown version tag: " + s);
}

json spec_row(const CandidateSpec& spec, const std::string& source_file) {
  json j;
  j["id"] = spec.id;
  j["origin"] = origin_name(spec.origin);
  j["version"] = spec.version;
  j["lineage"] = spec.lineage ? json(*spec.lineage) : json(nullptr);
  j["entry"] = spec.entry;
  j["source_file"] = source_file;
  j["source_hash"] = source_hash(spec);
  return j;
}

CandidateSpec spec_from_row(const json& j, const fs::path& base_dir) {
  CandidateSpec spec;
  spec.id = j.at("id").get<std::string>();
  spec.origin = parse_origin(j.at("origin").get<std::string>());
  spec.version = j.at("version").get<int>();
  if (j.contains("lineage") && !j["lineage"].is_null()) {
    spec.lineage = j["lineage"].get<std::string>();
  }
  spec.entry = j.at("entry").get<std::string>();
  std::string sf = j.at("source_file").get<std::string>();
  if (!sf.empty()) spec.source = read_file(base_dir / sf);
  return spec;
}

std::vector<EvalRow> read_eval_rows(const fs::path& p) {
  std::vector<EvalRow> rows;
  if (!fs::exists(p)) return rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(eval_row_from_json(line));
  }
  return rows;
}

json timeouts_json(const Timeouts& t) {
  return {{"train_soft", t.train_soft},   {"train_hard", t.train_hard},
          {"train_sat", t.train_sat},     {"test_soft", t.test_soft},
          {"test_hard", t.test_hard},     {"test_sat", t.test_sat},
          {"reference_sat", t.reference_sat}};
}

// Bundles, formulas, and callbacks shared by gather and refine.
struct TrainingContext {
  const EncodingScheme* scheme = nullptr;
  std::vector<BundleInfo> bundles;
  std::vector<const BundleInfo*> train;
  const BundleInfo* easy = nullptr;
  std::map<std::string, CnfFormula> formulas;
  std::unique_ptr<SolverAdapter> adapter;
};

TrainingContext make_training_context(const RunConfig& cfg,
                                      const EncodingScheme& scheme,
                                      std::ostream& log) {
  TrainingContext ctx;
  ctx.scheme = &scheme;
  ctx.bundles = ensure_bundles(cfg, scheme, log);

  SplitLists splits = load_splits(cfg);
  if (splits.train.empty()) {
    throw ConfigError("training split is empty; nothing to score against");
  }
  for (const auto& name : splits.train) {
    ctx.train.push_back(&find_bundle(ctx.bundles, name));
  }

  if (!cfg.easy_instance.empty()) {
    ctx.easy = &find_bundle(ctx.bundles, cfg.easy_instance);
  } else {
    auto reference = load_reference(cfg);
    const BundleInfo* best = nullptr;
    double best_s = 0.0;
    for (const BundleInfo* b : ctx.train) {
      auto it = reference.find(b->name);
      if (it == reference.end() || it->second.status == SolveStatus::Timeout) {
        continue;
      }
      if (!best || it->second.seconds < best_s ||
          (it->second.seconds == best_s && b->name < best->name)) {
        best = b;
        best_s = it->second.seconds;
      }
    }
    ctx.easy = best ? best : ctx.train.front();
  }

  for (const BundleInfo* b : ctx.train) {
    ctx.formulas.emplace(b->name, load_bundle_formula(*b));
  }
  ctx.adapter = make_adapter_from(cfg);
  return ctx;
}

EvalRecord score_on_train(const TrainingContext& ctx, const RunConfig& cfg,
                          const CandidateSpec& spec, EvalCache& cache) {
  EvalRecord rec;
  rec.candidate_id = spec.id;
  std::string shash = source_hash(spec);
  for (const BundleInfo* b : ctx.train) {
    if (auto hit = cache.find(spec.id, shash, b->name)) {
      rec.results.push_back(*hit);
      continue;
    }
    InstanceResult ir =
        run_pair(spec, *b, ctx.formulas.at(b->name), cfg.timeouts.train_soft,
                 cfg.timeouts.train_hard, cfg.timeouts.train_sat, *ctx.adapter,
                 nullptr, nullptr);
    cache.put(spec.id, shash, ir);
    rec.results.push_back(std::move(ir));
  }
  return rec;
}

void append_line(const fs::path& p, const std::string& line) {
  std::ofstream out(p, std::ios::app);
  out << line << "\n";
}

json provider_manifest(const RunConfig& cfg) {
  return {{"name", provider_label(cfg)},
          {"kind", cfg.provider_set ? cfg.provider.kind : "replay"},
          {"model", cfg.provider.model}};
}

}  // namespace

// --- encode -----------------------------------------------------------------

int cmd_encode(const RunConfig& cfg, const std::string& instance_path,
               std::optional<long> bound, const std::string& out_dir,
               std::ostream& log) {
  if (cfg.scheme.empty()) throw ConfigError("no scheme configured");
  const EncodingScheme& scheme = get_scheme(cfg.scheme);
  if (!fs::exists(instance_path)) {
    throw ConfigError("instance file not found: " + instance_path);
  }

  std::string text = read_file(instance_path);
  long b = 0;
  bool defaulted = false;
  if (bound) {
    b = *bound;
  } else if (cfg.bound) {
    b = *cfg.bound;
  } else {
    try {
      b = scheme.default_bound(text);
    } catch (const std::exception& e) {
      throw ConfigError(instance_path + ": " + e.what());
    }
    defaulted = true;
  }

  EncodeResult er;
  try {
    er = scheme.encode(text, b);
  } catch (const std::exception& e) {
    throw ConfigError(instance_path + ": " + e.what());
  }

  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "instance", text);
  write_file(fs::path(out_dir) / "formula.cnf", write_dimacs(er.formula));
  write_file(fs::path(out_dir) / "varmap.json", er.varmap.to_json());

  json mj;
  mj["name"] = instance_stem(instance_path);
  mj["source"] = fs::path(instance_path).filename().string();
  mj["scheme"] = scheme.name;
  mj["bound"] = b;
  mj["bound_defaulted"] = defaulted;
  mj["num_vars"] = er.formula.num_vars();
  mj["num_clauses"] = static_cast<long>(er.formula.num_clauses());
  mj["config_hash"] = config_hash(cfg);
  mj["tool_version"] = kToolVersion;
  write_manifest(fs::path(out_dir) / "bundle.json", mj);

  if (defaulted) {
    log << "bound defaulted to " << b << " (" << scheme.bound_name
        << " heuristic)\n";
  }
  log << "wrote " << out_dir << ": " << er.formula.num_vars() << " vars, "
      << er.formula.num_clauses() << " clauses\n";
  return 0;
}

// --- split ------------------------------------------------------------------

int cmd_split(const RunConfig& cfg, std::ostream& log) {
  if (cfg.scheme.empty()) throw ConfigError("no scheme configured");
  const EncodingScheme& scheme = get_scheme(cfg.scheme);
  std::vector<BundleInfo> bundles = ensure_bundles(cfg, scheme, log);

  fs::path dir = fs::path(cfg.output_dir) / "split";
  fs::create_directories(dir);
  fs::path ref_path = dir / "reference.jsonl";

  std::map<std::string, ReferenceOutcome> existing = load_reference(cfg);
  auto adapter = make_adapter_from(cfg);

  std::vector<const BundleInfo*> todo;
  for (const auto& b : bundles) {
    if (!existing.count(b.name)) todo.push_back(&b);
  }

  std::mutex io_m;
  run_pool(cfg.workers, todo.size(), [&](size_t i) {
    const BundleInfo& b = *todo[i];
    CnfFormula f = load_bundle_formula(b);
    SolveOutcome oc = solve_plain(f, cfg.timeouts.reference_sat, *adapter);
    ReferenceOutcome ro{b.name, oc.status, round2(oc.runtime)};
    json j;
    j["instance"] = ro.instance;
    j["status"] = solve_status_name(ro.status);
    j["seconds"] = ro.seconds;
    std::lock_guard<std::mutex> lock(io_m);
    existing[ro.instance] = ro;
    append_line(ref_path, j.dump());
    log << "reference " << b.name << ": " << solve_status_name(ro.status)
        << " in " << ro.seconds << " s\n";
  });

  std::vector<ReferenceOutcome> outcomes;
  outcomes.reserve(existing.size());
  for (const auto& [_, ro] : existing) outcomes.push_back(ro);

  SplitResult sr = split_train_test(outcomes);
  auto write_list = [&dir](const char* name,
                           const std::vector<std::string>& names) {
    std::string text;
    for (const auto& n : names) text += n + "\n";
    write_file(dir / name, text);
  };
  write_list("train.txt", sr.train);
  write_list("test.txt", sr.test);
  write_list("discarded.txt", sr.discarded);

  json mj;
  mj["command"] = "split";
  mj["scheme"] = scheme.name;
  mj["adapter"] = cfg.adapter;
  mj["reference_sat"] = cfg.timeouts.reference_sat;
  mj["instances"] = static_cast<long>(outcomes.size());
  mj["train"] = sr.train;
  mj["test"] = sr.test;
  mj["discarded"] = sr.discarded;
  mj["config_hash"] = config_hash(cfg);
  mj["seed"] = cfg.seed;
  mj["tool_version"] = kToolVersion;
  write_manifest(dir / "manifest.json", mj);

  log << "split: " << sr.train.size() << " train, " << sr.test.size()
      << " test, " << sr.discarded.size() << " discarded\n";
  return 0;
}

// --- gather -----------------------------------------------------------------

int cmd_gather(const RunConfig& cfg, std::ostream& log) {
  if (cfg.scheme.empty()) throw ConfigError("no scheme configured");
  const EncodingScheme& scheme = get_scheme(cfg.scheme);

  fs::path dir = fs::path(cfg.output_dir) / "gather";
  if (fs::exists(dir / "manifest.json")) {
    log << "gather already complete under " << dir.string()
        << "; leaving outputs untouched\n";
    return 0;
  }
  fs::create_directories(dir / "candidates");

  TrainingContext ctx = make_training_context(cfg, scheme, log);
  EvalCache cache(dir / "eval_cache.jsonl");
  auto provider = build_provider(cfg);

  // A fresh run overwrites leftovers from an interrupted one; the eval
  // cache is what carries completed work across.
  fs::remove(dir / "candidates.jsonl");
  fs::remove(dir / "evals.jsonl");

  VerifyFn verify = [&](const CandidateSpec& spec) {
    return verify_candidate(spec, ctx.easy->bundle);
  };
  EvaluateFn evaluate = [&](const CandidateSpec& spec) {
    return score_on_train(ctx, cfg, spec, cache);
  };

  GatherOptions go;
  go.max_repair_tries = cfg.gather.max_repair_tries;
  go.temp_start = cfg.gather.temp_start;
  go.temp_end = cfg.gather.temp_end;
  go.on_candidate = [&](const GatheredCandidate& gc) {
    std::string sf = "candidates/" + gc.spec.id + ".py";
    write_file(dir / sf, gc.spec.source);
    json row = spec_row(gc.spec, sf);
    row["repair_rounds"] = gc.repair_rounds;
    append_line(dir / "candidates.jsonl", row.dump());
    if (gc.eval) {
      for (const auto& r : gc.eval->results) {
        append_line(dir / "evals.jsonl", eval_row_to_json(gc.spec.id, r));
      }
    }
    log << "gathered " << gc.spec.id << " (" << gc.repair_rounds
        << " repair rounds)\n";
  };

  GatherResult gr =
      gather(scheme, cfg.gather.n, *provider, verify, evaluate, go, nullptr);

  json mj;
  mj["command"] = "gather";
  mj["scheme"] = scheme.name;
  mj["n"] = cfg.gather.n;
  mj["attempts"] = gr.attempts;
  mj["gave_up"] = gr.gave_up;
  mj["provider_calls"] = gr.provider_calls;
  mj["provider"] = provider_manifest(cfg);
  mj["prompt_hash"] = prompt_set_hash(go.prompts);
  mj["temperature"] = {{"start", cfg.gather.temp_start},
                       {"end", cfg.gather.temp_end}};
  mj["max_repair_tries"] = cfg.gather.max_repair_tries;
  mj["timeouts"] = timeouts_json(cfg.timeouts);
  mj["easy_instance"] = ctx.easy->name;
  json train_names = json::array();
  for (const BundleInfo* b : ctx.train) train_names.push_back(b->name);
  mj["train"] = train_names;
  json ids = json::array();
  for (const auto& gc : gr.candidates) ids.push_back(gc.spec.id);
  mj["candidates"] = ids;
  mj["config_hash"] = config_hash(cfg);
  mj["seed"] = cfg.seed;
  mj["tool_version"] = kToolVersion;
  write_manifest(dir / "manifest.json", mj);

  log << "gather: " << gr.candidates.size() << " candidate(s) from "
      << gr.attempts << " attempt(s), " << gr.gave_up << " gave up, "
      << gr.provider_calls << " provider call(s)\n";
  return 0;
}

// --- refine -----------------------------------------------------------------

int cmd_refine(const RunConfig& cfg, std::ostream& log) {
  if (cfg.scheme.empty()) throw ConfigError("no scheme configured");
  const EncodingScheme& scheme = get_scheme(cfg.scheme);

  fs::path gdir = fs::path(cfg.output_dir) / "gather";
  if (!fs::exists(gdir / "candidates.jsonl")) {
    throw ConfigError("no gather output under " + gdir.string() +
                      "; run gather first");
  }

  std::vector<CandidateSpec> specs;
  for (const auto& line : read_lines(gdir / "candidates.jsonl")) {
    specs.push_back(spec_from_row(json::parse(line), gdir));
  }
  std::vector<EvalRecord> gather_evals =
      group_rows(read_eval_rows(gdir / "evals.jsonl"));
  std::map<std::string, EvalRecord> eval_by_id;
  for (const auto& r : gather_evals) eval_by_id[r.candidate_id] = r;

  std::map<std::string, std::vector<ScoredCandidate>> by_provider;
  for (const auto& spec : specs) {
    auto it = eval_by_id.find(spec.id);
    if (it == eval_by_id.end()) continue;
    by_provider[provider_label(cfg)].push_back({spec, it->second});
  }
  if (by_provider.empty()) {
    throw ConfigError("gather output has no scored candidates to refine");
  }

  std::vector<std::string> warnings;
  std::vector<CandidateSpec> bases =
      select_top(by_provider, cfg.refine.top_k, &warnings);
  for (const auto& w : warnings) log << "note: " << w << "\n";

  TrainingContext ctx = make_training_context(cfg, scheme, log);
  fs::path rdir = fs::path(cfg.output_dir) / "refine";
  fs::create_directories(rdir);
  EvalCache cache(rdir / "eval_cache.jsonl");
  auto provider = build_provider(cfg);

  VerifyFn verify = [&](const CandidateSpec& spec) {
    return verify_candidate(spec, ctx.easy->bundle);
  };
  EvaluateFn evaluate = [&](const CandidateSpec& spec) {
    return score_on_train(ctx, cfg, spec, cache);
  };

  int total_calls = 0;
  json base_ids = json::array();
  for (const auto& base : bases) {
    base_ids.push_back(base.id);
    fs::path cdir = rdir / base.id;
    if (fs::exists(cdir / "manifest.json")) {
      log << "refine chain " << base.id << " already complete; skipping\n";
      continue;
    }
    fs::create_directories(cdir / "sources");
    fs::remove(cdir / "versions.jsonl");
    fs::remove(cdir / "evals.jsonl");

    RefineOptions ro;
    ro.max_repair_tries = cfg.refine.max_repair_tries;
    ro.temperature = cfg.refine.temperature;
    ro.structure_from_version = cfg.refine.structure_from_version;
    ro.on_version = [&](const VersionRecord& vr) {
      std::string sf = "sources/" + vr.spec.id + ".py";
      write_file(cdir / sf, vr.spec.source);
      json row = spec_row(vr.spec, sf);
      row["tag"] = version_tag_name(vr.tag);
      row["verified"] = vr.verified;
      row["accepted"] = vr.accepted;
      row["significance"] = significance_name(vr.vs_last_accepted);
      append_line(cdir / "versions.jsonl", row.dump());
      if (vr.eval) {
        for (const auto& r : vr.eval->results) {
          append_line(cdir / "evals.jsonl", eval_row_to_json(vr.spec.id, r));
        }
      }
      if (vr.spec.version > 1) {
        log << "  " << vr.spec.id << " [" << version_tag_name(vr.tag) << "] "
            << significance_name(vr.vs_last_accepted)
            << (vr.accepted ? " (accepted)" : " (reverted)") << "\n";
      }
    };

    log << "refining " << base.id << "\n";
    RefineChain chain =
        refine(base, eval_by_id.at(base.id), cfg.refine.iterations, *provider,
               scheme, verify, evaluate, ro, nullptr);
    total_calls += chain.provider_calls;

    json cm;
    cm["command"] = "refine-chain";
    cm["base"] = base.id;
    cm["iterations"] = cfg.refine.iterations;
    cm["provider_calls"] = chain.provider_calls;
    json vids = json::array();
    json accepted = json::array();
    for (const auto& vr : chain.versions) {
      vids.push_back(vr.spec.id);
      if (vr.accepted) accepted.push_back(vr.spec.id);
    }
    cm["versions"] = vids;
    cm["accepted"] = accepted;
    cm["config_hash"] = config_hash(cfg);
    cm["tool_version"] = kToolVersion;
    write_manifest(cdir / "manifest.json", cm);
  }

  json mj;
  mj["command"] = "refine";
  mj["scheme"] = scheme.name;
  mj["bases"] = base_ids;
  mj["iterations"] = cfg.refine.iterations;
  mj["structure_from_version"] = cfg.refine.structure_from_version;
  mj["temperature"] = cfg.refine.temperature;
  mj["max_repair_tries"] = cfg.refine.max_repair_tries;
  mj["top_k"] = cfg.refine.top_k;
  mj["warnings"] = warnings;
  mj["provider"] = provider_manifest(cfg);
  mj["prompt_hash"] = prompt_set_hash(default_prompts());
  mj["timeouts"] = timeouts_json(cfg.timeouts);
  mj["easy_instance"] = ctx.easy->name;
  mj["provider_calls"] = total_calls;
  mj["config_hash"] = config_hash(cfg);
  mj["seed"] = cfg.seed;
  mj["tool_version"] = kToolVersion;
  write_manifest(rdir / "manifest.json", mj);

  log << "refine: " << bases.size() << " chain(s), " << total_calls
      << " provider call(s)\n";
  return 0;
}

// --- evaluate / baseline ------------------------------------------------------

namespace {

std::map<std::string, CandidateSpec> load_artifact_specs(const RunConfig& cfg) {
  std::map<std::string, CandidateSpec> all;
  fs::path gdir = fs::path(cfg.output_dir) / "gather";
  if (fs::exists(gdir / "candidates.jsonl")) {
    for (const auto& line : read_lines(gdir / "candidates.jsonl")) {
      CandidateSpec s = spec_from_row(json::parse(line), gdir);
      all.emplace(s.id, std::move(s));
    }
  }
  fs::path rdir = fs::path(cfg.output_dir) / "refine";
  if (fs::is_directory(rdir)) {
    std::vector<fs::path> chains;
    for (const auto& e : fs::directory_iterator(rdir)) {
      if (e.is_directory()) chains.push_back(e.path());
    }
    std::sort(chains.begin(), chains.end());
    for (const auto& cdir : chains) {
      if (!fs::exists(cdir / "versions.jsonl")) continue;
      for (const auto& line : read_lines(cdir / "versions.jsonl")) {
        json j = json::parse(line);
        CandidateSpec s = spec_from_row(j, cdir);
        bool accepted = j.value("accepted", false);
        bool verified = j.value("verified", false);
        if (s.version > 1 && accepted && verified) {
          all.emplace(s.id, std::move(s));
        }
      }
    }
  }
  return all;
}

std::vector<CandidateSpec> collect_eval_candidates(const RunConfig& cfg) {
  std::map<std::string, CandidateSpec> all = load_artifact_specs(cfg);
  std::vector<CandidateSpec> out;
  if (!cfg.evaluate_candidates.empty()) {
    for (const auto& id : cfg.evaluate_candidates) {
      if (id.rfind("builtin-", 0) == 0) {
        out.push_back(builtin_spec(cfg, id.substr(8)));
        continue;
      }
      auto it = all.find(id);
      if (it == all.end()) {
        throw ConfigError("candidate not found in run artifacts: " + id);
      }
      out.push_back(it->second);
    }
  } else {
    if (all.empty()) {
      throw ConfigError("no candidates to evaluate; run gather/refine first");
    }
    for (auto& [_, spec] : all) out.push_back(spec);
  }
  std::sort(out.begin(), out.end(),
            [](const CandidateSpec& a, const CandidateSpec& b) {
              return a.id < b.id;
            });
  return out;
}

int evaluate_impl(const RunConfig& cfg, std::vector<CandidateSpec> specs,
                  const char* command, const char* manifest_name,
                  std::ostream& log) {
  if (cfg.scheme.empty()) throw ConfigError("no scheme configured");
  const EncodingScheme& scheme = get_scheme(cfg.scheme);
  std::vector<BundleInfo> bundles = ensure_bundles(cfg, scheme, log);
  SplitLists splits = load_splits(cfg);
  if (splits.test.empty()) throw ConfigError("test split is empty");

  std::vector<const BundleInfo*> test;
  for (const auto& name : splits.test) {
    test.push_back(&find_bundle(bundles, name));
  }

  fs::path dir = fs::path(cfg.output_dir) / "evaluate";
  fs::create_directories(dir);
  fs::path results_path = dir / "results.jsonl";
  fs::path baseline_path = dir / "baseline.jsonl";

  std::set<std::string> done;
  for (const auto& row : read_eval_rows(results_path)) {
    done.insert(row.candidate_id + "\x1f" + row.result.instance);
  }

  std::map<std::string, CnfFormula> formulas;
  for (const BundleInfo* b : test) {
    formulas.emplace(b->name, load_bundle_formula(*b));
  }
  auto adapter = make_adapter_from(cfg);

  // Solver-alone baseline: reuse split reference runs, fill gaps at the
  // test limit.
  std::set<std::string> baseline_done;
  if (fs::exists(baseline_path)) {
    for (const auto& line : read_lines(baseline_path)) {
      baseline_done.insert(json::parse(line).at("instance").get<std::string>());
    }
  }
  std::map<std::string, ReferenceOutcome> reference = load_reference(cfg);
  std::vector<const BundleInfo*> baseline_todo;
  for (const BundleInfo* b : test) {
    if (baseline_done.count(b->name)) continue;
    auto it = reference.find(b->name);
    if (it != reference.end()) {
      json j;
      j["instance"] = b->name;
      j["status"] = solve_status_name(it->second.status);
      j["seconds"] = it->second.seconds;
      append_line(baseline_path, j.dump());
      continue;
    }
    baseline_todo.push_back(b);
  }
  std::mutex io_m;
  run_pool(cfg.workers, baseline_todo.size(), [&](size_t i) {
    const BundleInfo& b = *baseline_todo[i];
    SolveOutcome oc =
        solve_plain(formulas.at(b.name), cfg.timeouts.test_sat, *adapter);
    json j;
    j["instance"] = b.name;
    j["status"] = solve_status_name(oc.status);
    j["seconds"] = round2(oc.runtime);
    std::lock_guard<std::mutex> lock(io_m);
    append_line(baseline_path, j.dump());
    log << "baseline " << b.name << ": " << solve_status_name(oc.status)
        << " in " << round2(oc.runtime) << " s\n";
  });

  struct Job {
    const CandidateSpec* spec;
    const BundleInfo* bundle;
  };
  std::vector<Job> jobs;
  size_t cached = 0;
  for (const auto& spec : specs) {
    for (const BundleInfo* b : test) {
      if (done.count(spec.id + "\x1f" + b->name))
        cached++;
      else
        jobs.push_back({&spec, b});
    }
  }

  run_pool(cfg.workers, jobs.size(), [&](size_t i) {
    const Job& job = jobs[i];
    InstanceResult ir = run_pair(
        *job.spec, *job.bundle, formulas.at(job.bundle->name),
        cfg.timeouts.test_soft, cfg.timeouts.test_hard, cfg.timeouts.test_sat,
        *adapter, &log, &io_m);
    std::lock_guard<std::mutex> lock(io_m);
    append_line(results_path, eval_row_to_json(job.spec->id, ir));
    log << job.spec->id << " x " << job.bundle->name << ": "
        << run_status_name(ir.ls_status)
        << (ir.sat_status ? std::string(", solver ") +
                                solve_status_name(*ir.sat_status)
                          : std::string(", solver skipped"))
        << "\n";
  });

  json mj;
  mj["command"] = command;
  mj["scheme"] = scheme.name;
  json ids = json::array();
  for (const auto& s : specs) ids.push_back(s.id);
  mj["candidates"] = ids;
  mj["instances"] = splits.test;
  mj["adapter"] = cfg.adapter;
  mj["timeouts"] = timeouts_json(cfg.timeouts);
  mj["pairs_run"] = static_cast<long>(jobs.size());
  mj["pairs_cached"] = static_cast<long>(cached);
  mj["config_hash"] = config_hash(cfg);
  mj["seed"] = cfg.seed;
  mj["tool_version"] = kToolVersion;
  write_manifest(dir / manifest_name, mj);

  log << command << ": " << jobs.size() << " pair(s) run, " << cached
      << " already present\n";
  return 0;
}

}  // namespace

int cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  return evaluate_impl(cfg, collect_eval_candidates(cfg), "evaluate",
                       "manifest.json", log);
}

int cmd_baseline(const RunConfig& cfg, std::ostream& log) {
  std::vector<CandidateSpec> specs;
  for (const auto& mode : cfg.baselines) {
    specs.push_back(builtin_spec(cfg, mode));
  }
  if (specs.empty()) throw ConfigError("baselines list is empty");
  return evaluate_impl(cfg, std::move(specs), "baseline",
                       "baseline_manifest.json", log);
}

// --- report -------------------------------------------------------------------

namespace {

std::map<std::string, std::string> candidate_classes(const RunConfig& cfg) {
  std::map<std::string, std::string> cls;
  fs::path gdir = fs::path(cfg.output_dir) / "gather";
  if (fs::exists(gdir / "candidates.jsonl")) {
    for (const auto& line : read_lines(gdir / "candidates.jsonl")) {
      json j = json::parse(line);
      cls[j.at("id").get<std::string>()] = "base";
    }
  }
  fs::path rdir = fs::path(cfg.output_dir) / "refine";
  if (fs::is_directory(rdir)) {
    for (const auto& e : fs::directory_iterator(rdir)) {
      if (!e.is_directory()) continue;
      fs::path vp = e.path() / "versions.jsonl";
      if (!fs::exists(vp)) continue;
      for (const auto& line : read_lines(vp)) {
        json j = json::parse(line);
        cls[j.at("id").get<std::string>()] =
            j.value("tag", std::string("refined"));
      }
    }
  }
  return cls;
}

int class_rank(const std::string& c) {
  if (c == "base") return 0;
  if (c == "refined") return 1;
  if (c == "structure") return 2;
  if (c == "builtin") return 3;
  return 4;
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return std::string(buf);
}

// Per-candidate mean of per-instance relative scores for one result set.
std::map<std::string, double> mean_relative_scores(
    const std::vector<EvalRow>& rows) {
  std::set<std::string> instances;
  for (const auto& r : rows) instances.insert(r.result.instance);

  std::map<std::string, double> sum;
  std::map<std::string, long> count;
  for (const auto& inst : instances) {
    std::map<std::string, std::optional<double>> times;
    for (const auto& r : rows) {
      if (r.result.instance != inst) continue;
      if (r.result.solver_finished()) {
        times[r.candidate_id] = r.result.ls_seconds + r.result.sat_seconds;
      } else {
        times[r.candidate_id] = std::nullopt;
      }
    }
    for (const auto& [id, score] : relative_score(times)) {
      sum[id] += score;
      count[id] += 1;
    }
  }
  std::map<std::string, double> out;
  for (const auto& [id, s] : sum) out[id] = s / double(count[id]);
  return out;
}

}  // namespace

int cmd_report(const RunConfig& cfg, std::ostream& log) {
  fs::path edir = fs::path(cfg.output_dir) / "evaluate";
  fs::path dir = fs::path(cfg.output_dir) / "report";
  fs::create_directories(dir);

  std::vector<EvalRow> test_rows = read_eval_rows(edir / "results.jsonl");
  std::vector<EvalRecord> records = group_rows(test_rows);

  std::map<std::string, bool> baseline_solved;
  long baseline_count = 0;
  std::set<std::string> instances;
  if (fs::exists(edir / "baseline.jsonl")) {
    for (const auto& line : read_lines(edir / "baseline.jsonl")) {
      json j = json::parse(line);
      std::string inst = j.at("instance").get<std::string>();
      bool solved =
          parse_solve_status(j.at("status").get<std::string>()) !=
          SolveStatus::Timeout;
      baseline_solved[inst] = solved;
      baseline_count += solved;
      instances.insert(inst);
    }
  }
  for (const auto& r : test_rows) instances.insert(r.result.instance);

  std::vector<SolvedNewRow> sn = solved_new_report(records, baseline_solved);
  std::map<std::string, std::string> cls = candidate_classes(cfg);
  auto class_of = [&cls](const std::string& id) -> std::string {
    auto it = cls.find(id);
    if (it != cls.end()) return it->second;
    if (id.rfind("builtin-", 0) == 0) return "builtin";
    return "?";
  };
  std::sort(sn.begin(), sn.end(),
            [&](const SolvedNewRow& a, const SolvedNewRow& b) {
              int ra = class_rank(class_of(a.candidate_id));
              int rb = class_rank(class_of(b.candidate_id));
              if (ra != rb) return ra < rb;
              return a.candidate_id < b.candidate_id;
            });

  // solved/new table, solver-alone row first
  std::ostringstream text;
  text << "test instances: " << instances.size()
       << ", solver alone solved: " << baseline_count << "\n\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-11s %-34s %7s %5s\n", "class",
                "candidate", "solved", "new");
  text << line;
  std::snprintf(line, sizeof line, "%-11s %-34s %7ld %5s\n", "SAT",
                "solver alone", baseline_count, "-");
  text << line;
  std::string csv = "class,candidate,solved,new\n";
  csv += "SAT,solver alone," + std::to_string(baseline_count) + ",0\n";
  for (const auto& row : sn) {
    std::string c = class_of(row.candidate_id);
    std::snprintf(line, sizeof line, "%-11s %-34s %7ld %5ld\n", c.c_str(),
                  row.candidate_id.c_str(), row.solved, row.new_solved);
    text << line;
    csv += c + "," + row.candidate_id + "," + std::to_string(row.solved) +
           "," + std::to_string(row.new_solved) + "\n";
  }
  if (sn.empty()) text << "(no candidate results)\n";

  // train-vs-test relative scores
  std::vector<EvalRow> train_rows;
  {
    fs::path gp = fs::path(cfg.output_dir) / "gather" / "evals.jsonl";
    for (const auto& r : read_eval_rows(gp)) train_rows.push_back(r);
    fs::path rdir = fs::path(cfg.output_dir) / "refine";
    if (fs::is_directory(rdir)) {
      std::vector<fs::path> chains;
      for (const auto& e : fs::directory_iterator(rdir)) {
        if (e.is_directory()) chains.push_back(e.path());
      }
      std::sort(chains.begin(), chains.end());
      for (const auto& c : chains) {
        for (const auto& r : read_eval_rows(c / "evals.jsonl")) {
          train_rows.push_back(r);
        }
      }
    }
  }
  std::map<std::string, double> train_rel = mean_relative_scores(train_rows);
  std::map<std::string, double> test_rel = mean_relative_scores(test_rows);

  std::set<std::string> rel_ids;
  for (const auto& [id, _] : test_rel) rel_ids.insert(id);

  std::string rel_csv = "candidate,train_relative,test_relative\n";
  text << "\nrelative scores (1.0 = fastest, 0 = unsolved)\n";
  std::snprintf(line, sizeof line, "%-34s %14s %14s\n", "candidate",
                "train", "test");
  text << line;
  for (const auto& id : rel_ids) {
    auto tr = train_rel.find(id);
    std::string trs = tr == train_rel.end() ? "" : fmt4(tr->second);
    std::string tes = fmt4(test_rel.at(id));
    std::snprintf(line, sizeof line, "%-34s %14s %14s\n", id.c_str(),
                  trs.empty() ? "-" : trs.c_str(), tes.c_str());
    text << line;
    rel_csv += id + "," + trs + "," + tes + "\n";
  }

  write_file(dir / "report.txt", text.str());
  write_file(dir / "solved_new.csv", csv);
  write_file(dir / "relative_scores.csv", rel_csv);

  json mj;
  mj["command"] = "report";
  mj["instances"] = static_cast<long>(instances.size());
  mj["baseline_solved"] = baseline_count;
  mj["candidates"] = static_cast<long>(records.size());
  mj["config_hash"] = config_hash(cfg);
  mj["seed"] = cfg.seed;
  mj["tool_version"] = kToolVersion;
  write_manifest(dir / "manifest.json", mj);

  log << text.str();
  log << "report written to " << dir.string() << "\n";
  return 0;
}

}  // namespace encls
