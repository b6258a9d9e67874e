#include "dlm/cues.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "dlm/error.hpp"
#include "dlm/text.hpp"

namespace dlm {

std::vector<std::string> extract_ngrams(std::string_view surface, int n) {
    if (n < 2) throw config_error("gram size must be at least 2");
    if (surface.empty()) throw data_error("cannot extract n-grams from an empty surface");
    if (surface.find(kBoundary) != std::string_view::npos)
        throw data_error("surface '" + std::string(surface) + "' contains the reserved boundary symbol");

    std::vector<std::string> chars = text::code_points(surface);
    chars.insert(chars.begin(), std::string(kBoundary));
    chars.emplace_back(kBoundary);

    const auto width = static_cast<std::size_t>(n);
    std::vector<std::string> grams;
    if (chars.size() <= width) {
        std::string whole;
        for (const auto& c : chars) whole += c;
        grams.push_back(std::move(whole));
        return grams;
    }
    grams.reserve(chars.size() - width + 1);
    for (std::size_t i = 0; i + width <= chars.size(); ++i) {
        std::string g;
        for (std::size_t k = 0; k < width; ++k) g += chars[i + k];
        grams.push_back(std::move(g));
    }
    return grams;
}

std::ptrdiff_t CueInventory::find(std::string_view cue) const {
    auto it = index_.find(std::string(cue));
    return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

std::size_t CueInventory::add(const std::string& cue) {
    auto [it, inserted] = index_.try_emplace(cue, cues_.size());
    if (inserted) cues_.push_back(cue);
    return it->second;
}

std::string CueInventory::hash() const {
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&h](unsigned char c) {
        h ^= c;
        h *= 1099511628211ULL;
    };
    for (const auto& c : cues_) {
        for (unsigned char ch : c) mix(ch);
        mix('\n');
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void CueInventory::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path.string());
    for (const auto& c : cues_) out << c << '\n';
}

CueInventory CueInventory::load(const std::filesystem::path& path, int n) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open cue inventory " + path.string());
    CueInventory inv(n);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) throw data_error(path.string() + ":" + std::to_string(line_no) + ": empty cue");
        if (inv.add(line) != line_no - 1)
            throw data_error(path.string() + ":" + std::to_string(line_no) + ": duplicate cue '" + line + "'");
    }
    return inv;
}

CueInventory build_inventory(std::span<const std::string> surfaces, int n) {
    if (surfaces.empty()) throw data_error("cannot build a cue inventory from an empty word list");
    CueInventory inv(n);
    for (const auto& s : surfaces)
        for (auto& g : extract_ngrams(s, n)) inv.add(g);
    return inv;
}

FormMatrix::FormMatrix(std::size_t cols, std::vector<std::string> row_ids, std::vector<std::vector<std::uint32_t>> rows)
    : cols_(cols), row_ids_(std::move(row_ids)), rows_(std::move(rows)) {
    if (row_ids_.size() != rows_.size()) throw data_error("form matrix: row id count does not match row count");
    for (auto& r : rows_) {
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        if (!r.empty() && r.back() >= cols_) throw data_error("form matrix: column index out of range");
    }
}

bool FormMatrix::at(std::size_t i, std::size_t j) const {
    const auto& r = rows_.at(i);
    return std::binary_search(r.begin(), r.end(), static_cast<std::uint32_t>(j));
}

Eigen::SparseMatrix<double, Eigen::RowMajor> FormMatrix::sparse() const {
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t i = 0; i < rows_.size(); ++i)
        for (auto j : rows_[i]) triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), 1.0);
    Eigen::SparseMatrix<double, Eigen::RowMajor> m(static_cast<Eigen::Index>(rows_.size()),
                                                   static_cast<Eigen::Index>(cols_));
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
}

Eigen::MatrixXd FormMatrix::dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_.size()), static_cast<Eigen::Index>(cols_));
    for (std::size_t i = 0; i < rows_.size(); ++i)
        for (auto j : rows_[i]) m(static_cast<Eigen::Index>(i), j) = 1.0;
    return m;
}

Eigen::MatrixXd FormMatrix::dense_rows(std::span<const std::size_t> indices) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(cols_));
    for (std::size_t k = 0; k < indices.size(); ++k)
        for (auto j : rows_.at(indices[k])) m(static_cast<Eigen::Index>(k), j) = 1.0;
    return m;
}

std::vector<std::vector<std::size_t>> FormMatrix::collisions() const {
    std::map<std::vector<std::uint32_t>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < rows_.size(); ++i) groups[rows_[i]].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [cues, members] : groups)
        if (members.size() > 1) out.push_back(std::move(members));
    std::sort(out.begin(), out.end());
    return out;
}

void FormMatrix::save(const std::filesystem::path& triplets, const std::filesystem::path& manifest) const {
    std::ofstream t(triplets), m(manifest);
    if (!t || !m) throw data_error("cannot write form matrix to " + triplets.string());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        m << row_ids_[i] << '\n';
        for (auto j : rows_[i]) t << i << ' ' << j << " 1\n";
    }
}

FormMatrix FormMatrix::load(const std::filesystem::path& triplets, const std::filesystem::path& manifest,
                            std::size_t cols) {
    std::ifstream t(triplets), m(manifest);
    if (!t || !m) throw data_error("cannot open form matrix " + triplets.string());
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(m, line)) ids.push_back(line);
    std::vector<std::vector<std::uint32_t>> rows(ids.size());
    std::size_t line_no = 0;
    while (std::getline(t, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::size_t i = 0, j = 0;
        int v = 0;
        if (!(ss >> i >> j >> v) || v != 1 || i >= ids.size() || j >= cols)
            throw data_error(triplets.string() + ":" + std::to_string(line_no) + ": bad triplet");
        rows[i].push_back(static_cast<std::uint32_t>(j));
    }
    return FormMatrix(cols, std::move(ids), std::move(rows));
}

std::vector<std::uint32_t> encode_surface(std::string_view surface, const CueInventory& inventory,
                                          UnknownCuePolicy policy, CoverageReport* coverage) {
    auto grams = extract_ngrams(surface, inventory.gram_size());
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    std::vector<std::uint32_t> cols;
    cols.reserve(grams.size());
    for (const auto& g : grams) {
        auto j = inventory.find(g);
        if (coverage) ++coverage->total_cues;
        if (j < 0) {
            if (policy == UnknownCuePolicy::strict)
                throw data_error("word '" + std::string(surface) + "' has cue '" + g + "' missing from the inventory");
            if (coverage) {
                ++coverage->skipped_cues;
                coverage->skipped.emplace_back(std::string(surface), g);
            }
            continue;
        }
        cols.push_back(static_cast<std::uint32_t>(j));
    }
    std::sort(cols.begin(), cols.end());
    return cols;
}

FormMatrix build_form_matrix(std::span<const std::string> surfaces, const CueInventory& inventory,
                             UnknownCuePolicy policy, CoverageReport* coverage, std::span<const std::string> row_ids) {
    if (!row_ids.empty() && row_ids.size() != surfaces.size())
        throw data_error("form matrix: row id count does not match word count");
    std::vector<std::vector<std::uint32_t>> rows;
    rows.reserve(surfaces.size());
    for (const auto& s : surfaces) rows.push_back(encode_surface(s, inventory, policy, coverage));
    std::vector<std::string> ids = row_ids.empty() ? std::vector<std::string>(surfaces.begin(), surfaces.end())
                                                   : std::vector<std::string>(row_ids.begin(), row_ids.end());
    return FormMatrix(inventory.size(), std::move(ids), std::move(rows));
}

}  // namespace dlm
