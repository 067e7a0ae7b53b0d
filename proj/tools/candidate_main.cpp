// Baseline local searches speaking the candidate wire protocol:
//   <mode> [--seed S] <instance> <cnf> <varmap> <soft-seconds>
// prints the best assignment found as signed literals terminated by 0.

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "cnf.hpp"
#include "instances.hpp"
#include "localsearch.hpp"
#include "varmap.hpp"

namespace {

std::string read_file(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "Error: cannot open " << path << "\n";
    std::exit(1);
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void print_assignment(const encls::Assignment& a) {
  std::ostringstream out;
  for (encls::Var v = 1; v <= a.size(); ++v) {
    auto val = a.get(v);
    if (!val) continue;
    out << (*val ? v : -v) << ' ';
  }
  out << "0\n";
  std::cout << out.str();
  std::cout.flush();
}

bool has_family(const encls::VarMap& vm, const std::string& name) {
  const auto names = vm.family_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

int usage() {
  std::cerr << "usage: encls_candidate <walksat|gsat|tabu|native> [--seed S] "
               "<instance> <cnf> <varmap> <soft-seconds>\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace encls;

  if (argc < 2) return usage();
  std::string mode = argv[1];
  int argi = 2;
  uint64_t seed = 1;
  if (argi + 1 < argc && std::strcmp(argv[argi], "--seed") == 0) {
    seed = std::strtoull(argv[argi + 1], nullptr, 10);
    argi += 2;
  }
  if (argc - argi != 4) return usage();
  const char* instance_path = argv[argi];
  const char* cnf_path = argv[argi + 1];
  const char* varmap_path = argv[argi + 2];
  double soft = std::atof(argv[argi + 3]);

  try {
    CnfFormula f = parse_dimacs(read_file(cnf_path));
    VarMap vm = VarMap::from_json(read_file(varmap_path));

    SearchParams p;
    p.seed = seed;
    // leave headroom so printing always lands inside the soft window
    p.soft_timeout_seconds = std::max(0.05, soft * 0.9);

    SearchOutcome oc;
    if (mode == "walksat") {
      oc = walksat(f, p);
    } else if (mode == "gsat") {
      oc = gsat(f, p);
    } else if (mode == "tabu") {
      oc = tabu_sampled(f, p, vm);
    } else if (mode == "native") {
      if (has_family(vm, "x") && vm.meta("k")) {
        Graph g = parse_graph(read_file(instance_path));
        oc = coloring_native_search(g, static_cast<int>(*vm.meta("k")), p, vm);
      } else if (has_family(vm, "p") && vm.meta("depth")) {
        Dataset d = parse_dataset(read_file(instance_path));
        oc = bddt_level_search(f, d, static_cast<int>(*vm.meta("depth")), vm, p);
      } else {
        oc = walksat(f, p);
      }
    } else {
      std::cerr << "Error: unknown mode " << mode << "\n";
      return 1;
    }

    print_assignment(oc.assignment);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "Error: " << e.what() << "\n";
    return 1;
  }
}
