#pragma once

#include <istream>
#include <string>
#include <vector>

#include "corrugate/driver.hpp"

namespace corrugate {

/// Parses flat `key = value` text into a RunConfig. Blank lines and `#`
/// comments are ignored; keys mirror RunConfig and Schedule fields
/// (`holder_alphas` takes a comma-separated list, `deterministic` takes
/// true/false). Unknown keys, duplicates and malformed values throw
/// ConfigError. `schedule.n` follows `n`.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Recognized keys in the order they are documented.
const std::vector<std::string>& config_keys();

}  // namespace corrugate
