#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace psim {

// Plain list files hold one entry per line. Blank lines are ignored and "#"
// starts a comment (at line start or after whitespace). Section files use the
// same syntax with "[name]" headers opening each section.

std::vector<std::string> parse_list(std::istream& in);
std::vector<std::string> read_list_file(const std::filesystem::path& path);

struct Section {
  std::string name;
  std::vector<std::string> entries;
};

/// Throws FormatError for entries before the first header, empty or
/// duplicate section names.
std::vector<Section> parse_sections(std::istream& in);
std::vector<Section> read_section_file(const std::filesystem::path& path);

}  // namespace psim
