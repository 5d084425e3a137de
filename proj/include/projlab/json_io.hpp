#pragma once

#include <json.hpp>

#include <string>

namespace projlab {

using json = nlohmann::json;

// Deterministic dump: sorted keys, floats with 17 significant digits.
std::string dump_json(const json& j, int indent = 2);
std::string format_double(double x);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace projlab
