#include "psim/vector_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "psim/error.hpp"

namespace psim {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

void check_label(const std::string& label) {
  if (label.empty()) throw FormatError("cannot store an empty label in a vector file");
  for (char c : label) {
    if (is_space(c)) throw FormatError("label '" + label + "' contains whitespace");
  }
}

template <typename T>
T parse_number(std::string_view field, const std::string& context) {
  T value{};
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError(context + ": cannot parse '" + std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

std::pair<Eigen::Index, Eigen::Index> read_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("vector file: missing header line");
  auto fields = split_spaces(line);
  if (fields.size() != 2) throw FormatError("vector file: malformed header '" + line + "'");
  const auto rows = parse_number<long long>(fields[0], "vector file header");
  const auto dim = parse_number<long long>(fields[1], "vector file header");
  if (rows < 0 || dim < 1) throw FormatError("vector file: malformed header '" + line + "'");
  return {rows, dim};
}

void write_float(std::ostream& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  const std::array<char, 4> bytes = {
      static_cast<char>(bits & 0xFF), static_cast<char>((bits >> 8) & 0xFF),
      static_cast<char>((bits >> 16) & 0xFF), static_cast<char>((bits >> 24) & 0xFF)};
  out.write(bytes.data(), bytes.size());
}

float read_float(const unsigned char* p) {
  const std::uint32_t bits = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
                             (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
  return std::bit_cast<float>(bits);
}

std::string extension(VectorFormat format) {
  return format == VectorFormat::kBinary ? ".bin" : ".txt";
}

std::ofstream open_out(const std::filesystem::path& path, VectorFormat format) {
  std::ofstream out(path, format == VectorFormat::kBinary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

VectorTable read_table_file(const std::filesystem::path& path, VectorFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vector file '" + path.string() + "'");
  try {
    return read_vector_table(in, format);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

VectorFormat parse_vector_format(std::string_view name) {
  if (name == "text") return VectorFormat::kText;
  if (name == "binary") return VectorFormat::kBinary;
  throw UsageError("unknown vector format '" + std::string(name) + "' (expected text or binary)");
}

VectorTable read_vector_table(std::istream& in, VectorFormat format) {
  const auto [rows, dim] = read_header(in);
  VectorTable table;
  table.labels.reserve(static_cast<std::size_t>(rows));
  table.vectors.resize(rows, dim);
  std::unordered_set<std::string> seen;

  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::string where = "vector file row " + std::to_string(r + 1);
    std::string label;
    if (format == VectorFormat::kText) {
      std::string line;
      if (!std::getline(in, line)) throw FormatError(where + ": unexpected end of file");
      auto fields = split_spaces(line);
      if (fields.empty()) throw FormatError(where + ": empty line");
      if (static_cast<Eigen::Index>(fields.size()) - 1 != dim) {
        throw FormatError(where + ": expected " + std::to_string(dim) + " values, found " +
                          std::to_string(fields.size() - 1));
      }
      label = std::string(fields[0]);
      for (Eigen::Index c = 0; c < dim; ++c) {
        table.vectors(r, c) = parse_number<float>(fields[static_cast<std::size_t>(c) + 1], where);
      }
    } else {
      int ch = in.get();
      while (ch == '\n') ch = in.get();
      while (ch != EOF && ch != ' ') {
        label.push_back(static_cast<char>(ch));
        ch = in.get();
      }
      if (ch == EOF) throw FormatError(where + ": unexpected end of file");
      std::vector<unsigned char> buf(static_cast<std::size_t>(dim) * 4);
      in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
      if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
        throw FormatError(where + ": truncated vector");
      }
      for (Eigen::Index c = 0; c < dim; ++c) table.vectors(r, c) = read_float(&buf[c * 4]);
    }
    if (label.empty()) throw FormatError(where + ": empty label");
    if (!seen.insert(label).second) throw FormatError(where + ": duplicate token '" + label + "'");
    table.labels.push_back(std::move(label));
  }

  if (format == VectorFormat::kText) {
    std::string rest;
    while (std::getline(in, rest)) {
      if (!split_spaces(rest).empty()) {
        throw FormatError("vector file: more rows than the header declares");
      }
    }
  } else {
    int ch = in.get();
    while (ch == '\n') ch = in.get();
    if (ch != EOF) throw FormatError("vector file: more rows than the header declares");
  }
  return table;
}

void write_vector_table(std::ostream& out, const std::vector<std::string>& labels,
                        const RowMatrixXf& vectors, VectorFormat format) {
  if (static_cast<Eigen::Index>(labels.size()) != vectors.rows()) {
    throw FormatError("vector table: label count does not match row count");
  }
  for (const auto& label : labels) check_label(label);
  out << vectors.rows() << ' ' << vectors.cols() << '\n';
  std::array<char, 64> buf{};
  for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
    out << labels[static_cast<std::size_t>(r)] << ' ';
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
      if (format == VectorFormat::kBinary) {
        write_float(out, vectors(r, c));
      } else {
        if (c > 0) out << ' ';
        auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), vectors(r, c));
        out.write(buf.data(), ptr - buf.data());
      }
    }
    if (format == VectorFormat::kText) out << '\n';
  }
}

EmbeddingModel load_vectors(const std::filesystem::path& path, VectorFormat format) {
  auto table = read_table_file(path, format);
  std::vector<std::uint64_t> counts(table.labels.size(), 0);
  RowMatrixXf contexts = RowMatrixXf::Zero(table.vectors.rows(), table.vectors.cols());
  return EmbeddingModel(Vocabulary(std::move(table.labels), std::move(counts)),
                        std::move(table.vectors), std::move(contexts));
}

void save_vectors(const EmbeddingModel& model, const std::filesystem::path& path,
                  VectorFormat format) {
  auto out = open_out(path, format);
  write_vector_table(out, model.vocab().tokens(), model.targets(), format);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void save_model(const EmbeddingModel& model, const std::filesystem::path& dir,
                VectorFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());

  {
    std::ofstream vocab(dir / "vocab.tsv");
    if (!vocab) throw IoError("cannot write '" + (dir / "vocab.tsv").string() + "'");
    for (TokenId i = 0; i < model.vocab().size(); ++i) {
      vocab << model.vocab().token(i) << '\t' << model.vocab().count(i) << '\n';
    }
  }
  const auto ext = extension(format);
  auto write = [&](const char* stem, const std::vector<std::string>& labels, const RowMatrixXf& m) {
    const auto path = dir / (std::string(stem) + ext);
    auto out = open_out(path, format);
    write_vector_table(out, labels, m, format);
    if (!out) throw IoError("failed writing '" + path.string() + "'");
  };
  write("targets", model.vocab().tokens(), model.targets());
  write("contexts", model.vocab().tokens(), model.contexts());
  if (model.has_sources()) write("sources", model.source_labels(), model.sources());
}

EmbeddingModel load_model(const std::filesystem::path& dir) {
  VectorFormat format;
  if (std::filesystem::exists(dir / "targets.bin")) {
    format = VectorFormat::kBinary;
  } else if (std::filesystem::exists(dir / "targets.txt")) {
    format = VectorFormat::kText;
  } else {
    throw IoError("no targets.bin or targets.txt in model directory '" + dir.string() + "'");
  }
  const auto ext = extension(format);

  std::vector<std::string> tokens;
  std::vector<std::uint64_t> counts;
  {
    const auto path = dir / "vocab.tsv";
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw FormatError(path.string() + " line " + std::to_string(line_no) + ": expected token<TAB>count");
      }
      tokens.push_back(line.substr(0, tab));
      counts.push_back(parse_number<std::uint64_t>(std::string_view(line).substr(tab + 1),
                                                   path.string() + " line " + std::to_string(line_no)));
    }
  }

  auto targets = read_table_file(dir / ("targets" + ext), format);
  auto contexts = read_table_file(dir / ("contexts" + ext), format);
  if (targets.labels != tokens || contexts.labels != tokens) {
    throw FormatError("model directory '" + dir.string() +
                      "': vector files do not follow vocab.tsv order");
  }
  VectorTable sources;
  if (std::filesystem::exists(dir / ("sources" + ext))) {
    sources = read_table_file(dir / ("sources" + ext), format);
  }
  return EmbeddingModel(Vocabulary(std::move(tokens), std::move(counts)), std::move(targets.vectors),
                        std::move(contexts.vectors), std::move(sources.labels),
                        std::move(sources.vectors));
}

}  // namespace psim
