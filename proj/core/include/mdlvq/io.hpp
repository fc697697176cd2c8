#pragma once

#include <string>

#include <json.hpp>

#include "mdlvq/oracle.hpp"

namespace mdlvq {

using json = nlohmann::ordered_json;

json lattice_to_json(const Lattice& lat);
Lattice lattice_from_json(const json& j);

json sublattice_to_json(const SimilarSublattice& s, const SublatticePredicates* preds = nullptr);

json assignment_to_json(const IndexAssignment& asg);
IndexAssignment assignment_from_json(const json& j);

json report_to_json(const DistortionReport& r);
json sim_to_json(const SimResult& r);
json compare_to_json(const CompareReport& r);
json frac_to_json(const Frac& f);

// Deterministic text form: insertion-ordered fields, floats at 17 significant
// digits, newline-terminated.
std::string canonical_dump(const json& j, int indent = 2);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace mdlvq
