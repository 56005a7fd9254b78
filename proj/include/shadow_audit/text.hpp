#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace shadow_audit {

/// Shortest decimal text that reads back to the identical double.
std::string format_number(double value);

/// Strict decimal literal: optional sign, digits with optional fraction,
/// optional exponent. Surrounding whitespace is not accepted. Returns nullopt
/// for anything else, including literals that overflow to infinity.
std::optional<double> parse_decimal(std::string_view text);

std::string_view trim(std::string_view text) noexcept;

std::vector<std::string_view> split(std::string_view text, char sep);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace shadow_audit
