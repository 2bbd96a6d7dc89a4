#ifndef CFRISK__SCENARIO_IO_HPP_
#define CFRISK__SCENARIO_IO_HPP_

#include "cfrisk/scenario.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace cfrisk
{

enum class ScenarioFormat { canonical, deepaccident_log };

struct LoadedScenario
{
  Scenario scenario;
  std::vector<std::string> warnings;
};

/// Decode a scenario from `in`. In strict mode unknown keys are rejected;
/// otherwise they are collected as warnings. Unknown agent categories drop
/// the whole track with a warning (structural error if it is the ego).
LoadedScenario load_scenario(std::istream & in, ScenarioFormat format, bool strict = false);
LoadedScenario load_scenario_file(
  const std::string & path, ScenarioFormat format, bool strict = false);

/// Canonical JSON encoding. Deterministic: sorted keys, shortest
/// round-trip float representation, so load(write(s)) == s field-for-field
/// and identical inputs produce byte-identical output.
std::string write_scenario(const Scenario & s);
void write_scenario_file(const Scenario & s, const std::string & path);

}  // namespace cfrisk

#endif  // CFRISK__SCENARIO_IO_HPP_
