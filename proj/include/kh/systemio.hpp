#pragma once

#include <json.hpp>
#include <string>

#include "kh/measure.hpp"

namespace kh {

using Json = nlohmann::ordered_json;

// Reads and validates a system description; every violated invariant is
// reported as a ValidationError naming the offending atom or generator.
FiniteExtension load_system(const std::string& path);
FiniteExtension parse_system(const Json& doc);

Json serialize_system(const FiniteExtension& ext);

// Deterministic rendering: fixed field order, two-space indentation, floats
// with seventeen significant digits, one trailing newline.
std::string render_report(const Json& report);

std::string fnv1a_digest(const std::string& bytes);
std::string fnv1a_digest_file(const std::string& path);

}  // namespace kh
