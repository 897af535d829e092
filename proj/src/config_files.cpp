#include "psim/config_files.hpp"

#include <fstream>
#include <set>

#include "psim/error.hpp"

namespace psim {

namespace {

std::string strip(const std::string& raw) {
  std::string line = raw;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
      line.erase(i);
      break;
    }
  }
  const auto first = line.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = line.find_last_not_of(" \t\r");
  return line.substr(first, last - first + 1);
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

std::vector<std::string> parse_list(std::istream& in) {
  std::vector<std::string> out;
  std::string raw;
  while (std::getline(in, raw)) {
    auto line = strip(raw);
    if (!line.empty()) out.push_back(std::move(line));
  }
  return out;
}

std::vector<std::string> read_list_file(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_list(in);
}

std::vector<Section> parse_sections(std::istream& in) {
  std::vector<Section> sections;
  std::set<std::string> names;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = strip(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw FormatError("line " + std::to_string(line_no) + ": malformed section header '" +
                          line + "'");
      }
      auto name = line.substr(1, line.size() - 2);
      if (!names.insert(name).second) {
        throw FormatError("line " + std::to_string(line_no) + ": duplicate section '" + name + "'");
      }
      sections.push_back({std::move(name), {}});
      continue;
    }
    if (sections.empty()) {
      throw FormatError("line " + std::to_string(line_no) + ": entry '" + line +
                        "' appears before any [section] header");
    }
    sections.back().entries.push_back(std::move(line));
  }
  return sections;
}

std::vector<Section> read_section_file(const std::filesystem::path& path) {
  auto in = open(path);
  try {
    return parse_sections(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace psim
