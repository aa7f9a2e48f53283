#pragma once

#include "pathosim/model.hpp"

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pathosim::model {

/// Malformed JSON. Line and column are 1-based.
class SyntaxError : public std::runtime_error {
public:
    SyntaxError(const std::string& what, std::size_t line, std::size_t column);
    std::size_t line;
    std::size_t column;
};

/// Well-formed JSON that does not describe a scenario: unknown key, wrong
/// type, missing required field, no Coordinator, duplicate id.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Every field written explicitly; parse_scenario(serialize_scenario(c)) == c.
std::string serialize_scenario(const ScenarioConfig& cfg);

}  // namespace pathosim::model
