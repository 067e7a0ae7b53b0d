#pragma once

#include <functional>
#include <string>
#include <vector>

#include "encodings.hpp"
#include "localsearch.hpp"

namespace encls {

// One problem encoding wired for the pipeline: text-level encode/decode,
// a bound heuristic, the encoder source embedded in prompts, and the terms
// that must never appear in any prompt (the problem's name stays hidden
// from the model).
struct EncodingScheme {
  std::string name;
  std::string instance_kind;  // graph | digraph | dataset
  std::string bound_name;     // what the bound parameter means, e.g. "k"
  std::string source_text;
  std::vector<std::string> deny_terms;

  std::function<long(const std::string& instance_text)> default_bound;
  std::function<EncodeResult(const std::string& instance_text, long bound)> encode;
  // Decodes against the original instance, validates the solution, and
  // returns a one-line summary. Throws DecodeError on an invalid model.
  std::function<std::string(const std::string& instance_text, long bound,
                            const Assignment& model, const VarMap& vm)>
      decode;
  // Encoding-aware baseline search; empty for schemes without one.
  std::function<SearchOutcome(const std::string& instance_text, long bound,
                              const CnfFormula& f, const VarMap& vm,
                              const SearchParams& p)>
      native_search;
};

const EncodingScheme& get_scheme(const std::string& name);
std::vector<std::string> scheme_names();

// Case-insensitive scan of `text` for the scheme's deny terms; returns the
// terms found. Tests assert this is empty for every emitted prompt.
std::vector<std::string> scan_deny_terms(const EncodingScheme& scheme,
                                         const std::string& text);

}  // namespace encls
