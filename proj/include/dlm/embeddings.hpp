#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dlm/lexicon.hpp"

namespace dlm {

// Dense words x dims matrix of meaning vectors; row_ids align with the rows.
struct SemanticMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> row_ids;

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t dims() const { return static_cast<std::size_t>(values.cols()); }
};

struct EmbeddingCoverage {
    std::size_t hits = 0;
    std::vector<std::string> missing;

    std::size_t requested() const { return hits + missing.size(); }
    double hit_ratio() const { return requested() == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(requested()); }
};

// Reads a "count dim" headed text vector file and returns one row per vocabulary
// position found in the file, in vocabulary order.
std::pair<SemanticMatrix, EmbeddingCoverage> load_embeddings(const std::filesystem::path& path,
                                                            std::span<const std::string> vocabulary);

// Keeps the lexicon entries whose surface has an embedding and returns the
// row-aligned semantic matrix (one row per kept entry, keyed by entry key).
struct EmbeddedLexicon {
    Lexicon entries;
    SemanticMatrix semantics;
    EmbeddingCoverage coverage;  // over distinct surfaces
};

EmbeddedLexicon attach_embeddings(const Lexicon& lexicon, const std::filesystem::path& path);

// Writes the same text format; used for bundles and fixtures.
void save_embeddings(const std::filesystem::path& path, const SemanticMatrix& s);

struct ShiftVectorSet {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (singular row, plural row)
    Eigen::MatrixXd shifts;                                  // plural - singular
    std::vector<Case> cases;
    std::vector<std::optional<int>> classes;
};

// Pairs every singular with every plural of the same lexeme and case. `semantics`
// must be row-aligned with `lexicon`.
ShiftVectorSet compute_shift_vectors(const Lexicon& lexicon, const SemanticMatrix& semantics);

}  // namespace dlm
