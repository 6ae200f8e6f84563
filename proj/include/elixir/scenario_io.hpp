#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "elixir/scenario.hpp"

namespace elixir {

// Reference text serialization of a scenario: scalar key/value lines followed
// by one block per timeline phase and one block per AU:
//
//   scenario demo3d
//   seed 7702
//   image_size 48
//   steps_per_phase 30000
//   estimator_noise_sigma 0
//   phase LAB {
//     ambient 1
//     objects FD 40
//   }
//   au FD {
//     width 6
//     priority 3
//     dimension_weights 1 1 1 1
//     optimum LAB [60,30,40,80]
//   }
//
// Floats are written as shortest round-trip decimals, so
// parse(serialize(x)) == x exactly. '#' starts a comment line.
std::string serialize_scenario(const ScenarioConfig& scenario);

// Throws ParseError on malformed text, ConfigError when the parsed scenario
// violates an invariant.
ScenarioConfig parse_scenario(std::string_view text);

ScenarioConfig load_scenario(const std::filesystem::path& path);
void save_scenario(const ScenarioConfig& scenario,
                   const std::filesystem::path& path);

} // namespace elixir
