#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cnf.hpp"

namespace encls {

// Registry mapping semantic variable families (e.g. x(vertex, color)) to CNF
// variables. Encoders register every variable they allocate; the JSON form
// is handed to candidate programs so searches can exploit the encoding
// structure. Cardinality helper variables live in the reserved family "aux".
class VarMap {
 public:
  using IndexTuple = std::vector<int>;

  Var add(const std::string& family, IndexTuple index, Var v);
  // Allocates the next variable (1-based, dense) and registers it.
  Var fresh(const std::string& family, IndexTuple index);

  std::optional<Var> lookup(const std::string& family, const IndexTuple& index) const;
  // Reverse lookup; nullopt for unregistered variables.
  std::optional<std::pair<std::string, IndexTuple>> describe(Var v) const;

  void set_meta(const std::string& key, long value) { meta_[key] = value; }
  std::optional<long> meta(const std::string& key) const {
    auto it = meta_.find(key);
    if (it == meta_.end()) return std::nullopt;
    return it->second;
  }

  int num_vars() const { return next_var_ - 1; }
  void reserve_through(Var v) { if (v >= next_var_) next_var_ = v + 1; }

  std::vector<std::string> family_names() const;
  const std::vector<std::pair<IndexTuple, Var>>& family(const std::string& name) const;
  size_t family_size(const std::string& name) const;

  // True when no variable appears twice and the registered variables are
  // exactly 1..num_vars, with non-"aux" families forming a prefix.
  bool check_integrity(std::string* why = nullptr) const;

  std::string to_json() const;
  static VarMap from_json(const std::string& text);

  bool operator==(const VarMap&) const = default;

 private:
  std::map<std::string, std::vector<std::pair<IndexTuple, Var>>> families_;
  std::map<std::string, long> meta_;
  Var next_var_ = 1;
};

}  // namespace encls
