#include "bcm/consensus.hpp"

#include "json.hpp"

namespace bcm {

std::string Classification::to_string() const {
  switch (kind) {
    case Kind::total: return "total";
    case Kind::partial: return "partial(" + std::to_string(components) + ")";
    case Kind::unresolved: return "unresolved";
  }
  return "unresolved";
}

std::string ConsensusReport::to_json(int indent) const {
  nlohmann::ordered_json j;
  auto comps = nlohmann::ordered_json::array();
  for (const auto& c : components) comps.push_back({{"position", c.position}, {"mass", c.mass}});
  j["components"] = std::move(comps);
  j["classification"] = classification.to_string();
  j["steps"] = steps;
  j["frozen"] = frozen;
  j["mass_threshold"] = mass_threshold;
  j["source"] = source == ReportSource::agent ? "agent" : "kinetic";
  j["raw_components"] = raw_components;
  if (!note.empty()) j["note"] = note;
  return j.dump(indent);
}

}  // namespace bcm
