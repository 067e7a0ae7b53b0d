#include "varmap.hpp"

#include <algorithm>
#include <json.hpp>

namespace encls {

Var VarMap::add(const std::string& family, IndexTuple index, Var v) {
  families_[family].emplace_back(std::move(index), v);
  reserve_through(v);
  return v;
}

Var VarMap::fresh(const std::string& family, IndexTuple index) {
  return add(family, std::move(index), next_var_);
}

std::optional<Var> VarMap::lookup(const std::string& family,
                                  const IndexTuple& index) const {
  auto it = families_.find(family);
  if (it == families_.end()) return std::nullopt;
  for (const auto& [tuple, v] : it->second)
    if (tuple == index) return v;
  return std::nullopt;
}

std::optional<std::pair<std::string, VarMap::IndexTuple>> VarMap::describe(Var v) const {
  for (const auto& [name, entries] : families_)
    for (const auto& [tuple, var] : entries)
      if (var == v) return std::make_pair(name, tuple);
  return std::nullopt;
}

std::vector<std::string> VarMap::family_names() const {
  std::vector<std::string> names;
  for (const auto& [name, _] : families_) names.push_back(name);
  return names;
}

const std::vector<std::pair<VarMap::IndexTuple, Var>>& VarMap::family(
    const std::string& name) const {
  static const std::vector<std::pair<IndexTuple, Var>> empty;
  auto it = families_.find(name);
  return it == families_.end() ? empty : it->second;
}

size_t VarMap::family_size(const std::string& name) const {
  return family(name).size();
}

bool VarMap::check_integrity(std::string* why) const {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  std::vector<char> seen(next_var_, 0);
  Var max_core = 0;
  for (const auto& [name, entries] : families_) {
    for (const auto& [tuple, v] : entries) {
      if (v < 1 || v >= next_var_) return fail("variable out of range in family " + name);
      if (seen[v]) return fail("variable " + std::to_string(v) + " registered twice");
      seen[v] = 1;
      if (name != "aux") max_core = std::max(max_core, v);
    }
  }
  for (Var v = 1; v < next_var_; ++v)
    if (!seen[v]) return fail("variable " + std::to_string(v) + " unregistered");
  // aux variables must sit after every core family variable
  for (const auto& [tuple, v] : family("aux"))
    if (v <= max_core)
      return fail("aux variable " + std::to_string(v) + " below core prefix");
  return true;
}

std::string VarMap::to_json() const {
  nlohmann::json out;
  out["families"] = nlohmann::json::object();
  for (const auto& [name, entries] : families_) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [tuple, v] : entries) arr.push_back({tuple, v});
    out["families"][name] = std::move(arr);
  }
  out["meta"] = nlohmann::json::object();
  for (const auto& [key, value] : meta_) out["meta"][key] = value;
  return out.dump(2);
}

VarMap VarMap::from_json(const std::string& text) {
  nlohmann::json in = nlohmann::json::parse(text);
  VarMap vm;
  for (const auto& [name, arr] : in.at("families").items())
    for (const auto& entry : arr)
      vm.add(name, entry.at(0).get<IndexTuple>(), entry.at(1).get<Var>());
  if (in.contains("meta"))
    for (const auto& [key, value] : in.at("meta").items())
      vm.set_meta(key, value.get<long>());
  return vm;
}

}  // namespace encls
