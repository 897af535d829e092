#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "psim/embedding_model.hpp"

namespace psim {

enum class VectorFormat { kText, kBinary };

/// Parses "text" / "binary"; throws UsageError otherwise.
VectorFormat parse_vector_format(std::string_view name);

/// Labelled rows as stored in one vector file.
struct VectorTable {
  std::vector<std::string> labels;
  RowMatrixXf vectors;
};

// Both formats start with a plain-text "<rows> <dim>\n" header.
//   text:   "<label> <v1> ... <v_dim>\n" per row, shortest round-trip decimals
//   binary: "<label> " followed by dim little-endian IEEE-754 floats per row,
//           no separator between rows
VectorTable read_vector_table(std::istream& in, VectorFormat format);
void write_vector_table(std::ostream& out, const std::vector<std::string>& labels,
                        const RowMatrixXf& vectors, VectorFormat format);

/// Loads a single vector file as target vectors. Counts are zero (the file
/// carries none) and context vectors are zero-filled.
EmbeddingModel load_vectors(const std::filesystem::path& path, VectorFormat format);
/// Writes the model's target vectors.
void save_vectors(const EmbeddingModel& model, const std::filesystem::path& path,
                  VectorFormat format);

/// A model directory holds vocab.tsv plus targets/contexts/(sources) vector
/// files with extension .txt (text) or .bin (binary).
void save_model(const EmbeddingModel& model, const std::filesystem::path& dir,
                VectorFormat format);
EmbeddingModel load_model(const std::filesystem::path& dir);

}  // namespace psim
