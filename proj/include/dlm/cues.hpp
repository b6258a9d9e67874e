#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dlm {

inline constexpr std::string_view kBoundary = "#";

// Letter n-grams of "#" + surface + "#", left to right, duplicates kept.
// A padded word shorter than n yields the whole padded string as its only gram.
std::vector<std::string> extract_ngrams(std::string_view surface, int n);

class CueInventory {
public:
    CueInventory() = default;
    explicit CueInventory(int n) : n_(n) {}

    int gram_size() const { return n_; }
    std::size_t size() const { return cues_.size(); }
    const std::vector<std::string>& cues() const { return cues_; }
    const std::string& cue(std::size_t column) const { return cues_.at(column); }

    // Column of a cue, or -1.
    std::ptrdiff_t find(std::string_view cue) const;
    bool contains(std::string_view cue) const { return find(cue) >= 0; }

    // Appends the cue if unseen; returns its column.
    std::size_t add(const std::string& cue);

    // FNV-1a over the newline-joined cue list; identifies the column layout.
    std::string hash() const;

    void save(const std::filesystem::path& path) const;
    static CueInventory load(const std::filesystem::path& path, int n);

private:
    int n_ = 3;
    std::vector<std::string> cues_;
    std::unordered_map<std::string, std::size_t> index_;
};

CueInventory build_inventory(std::span<const std::string> surfaces, int n);

enum class UnknownCuePolicy { strict, skip };

struct CoverageReport {
    std::size_t total_cues = 0;    // cue occurrences looked up (distinct per word)
    std::size_t skipped_cues = 0;  // not in the inventory
    std::vector<std::pair<std::string, std::string>> skipped;  // (word, cue)

    double coverage() const {
        return total_cues == 0 ? 1.0 : 1.0 - static_cast<double>(skipped_cues) / static_cast<double>(total_cues);
    }
};

// Binary words x cues matrix, stored as the sorted distinct cue columns of each row.
class FormMatrix {
public:
    FormMatrix() = default;
    FormMatrix(std::size_t cols, std::vector<std::string> row_ids, std::vector<std::vector<std::uint32_t>> rows);

    std::size_t rows() const { return rows_.size(); }
    std::size_t cols() const { return cols_; }
    const std::vector<std::string>& row_ids() const { return row_ids_; }
    std::span<const std::uint32_t> row(std::size_t i) const { return rows_.at(i); }
    bool at(std::size_t i, std::size_t j) const;

    Eigen::SparseMatrix<double, Eigen::RowMajor> sparse() const;
    Eigen::MatrixXd dense() const;
    Eigen::MatrixXd dense_rows(std::span<const std::size_t> indices) const;

    // Groups of row indices (size >= 2) whose cue sets coincide.
    std::vector<std::vector<std::size_t>> collisions() const;

    // Sparse triplet text ("row col 1" per line) plus a row-key manifest.
    void save(const std::filesystem::path& triplets, const std::filesystem::path& manifest) const;
    static FormMatrix load(const std::filesystem::path& triplets, const std::filesystem::path& manifest,
                           std::size_t cols);

private:
    std::size_t cols_ = 0;
    std::vector<std::string> row_ids_;
    std::vector<std::vector<std::uint32_t>> rows_;
};

// Encodes one surface; out-of-inventory cues are skipped (and counted) or raise under
// the strict policy.
std::vector<std::uint32_t> encode_surface(std::string_view surface, const CueInventory& inventory,
                                          UnknownCuePolicy policy, CoverageReport* coverage = nullptr);

// Row ids default to the surfaces themselves.
FormMatrix build_form_matrix(std::span<const std::string> surfaces, const CueInventory& inventory,
                             UnknownCuePolicy policy = UnknownCuePolicy::strict, CoverageReport* coverage = nullptr,
                             std::span<const std::string> row_ids = {});

}  // namespace dlm
