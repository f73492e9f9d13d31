#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace bcm {

struct Component {
  double position = 0.0;
  double mass = 0.0;
};

struct Classification {
  enum class Kind { total, partial, unresolved };

  Kind kind = Kind::unresolved;
  std::size_t components = 0;

  static Classification total() { return {Kind::total, 1}; }
  static Classification partial(std::size_t c) { return {Kind::partial, c}; }
  static Classification unresolved(std::size_t c) { return {Kind::unresolved, c}; }

  bool is_total() const { return kind == Kind::total; }
  bool is_partial() const { return kind == Kind::partial; }

  /// "total", "partial(c)" or "unresolved".
  std::string to_string() const;

  friend bool operator==(const Classification&, const Classification&) = default;
};

enum class ReportSource { agent, kinetic };

/// Limit-state summary shared by the agent and kinetic paths.
struct ConsensusReport {
  /// Components above the mass threshold, sorted by position.
  std::vector<Component> components;
  Classification classification;
  double mass_threshold = 0.01;
  ReportSource source = ReportSource::kinetic;
  std::uint64_t steps = 0;
  bool frozen = false;
  /// Number of components before the mass threshold was applied.
  std::size_t raw_components = 0;
  /// Why the state is unresolved, empty otherwise.
  std::string note;

  /// JSON object `{components:[{position,mass}],classification,steps,frozen,...}`.
  std::string to_json(int indent = 2) const;
};

}  // namespace bcm
