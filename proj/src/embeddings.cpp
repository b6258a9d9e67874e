#include "dlm/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <unordered_map>

#include "dlm/error.hpp"
#include "dlm/text.hpp"

namespace dlm {

namespace {

bool is_ascii(std::string_view s) {
    for (unsigned char c : s)
        if (c >= 0x80) return false;
    return true;
}

double parse_real(std::string_view tok, const std::string& where) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) throw data_error(where + ": bad number '" + std::string(tok) + "'");
    if (!std::isfinite(v)) throw data_error(where + ": non-finite value");
    return v;
}

}  // namespace

std::pair<SemanticMatrix, EmbeddingCoverage> load_embeddings(const std::filesystem::path& path,
                                                            std::span<const std::string> vocabulary) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open embedding file " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw data_error(path.string() + ": missing 'count dim' header");
    std::size_t declared_count = 0, dims = 0;
    {
        std::istringstream ss(line);
        if (!(ss >> declared_count >> dims) || dims == 0)
            throw data_error(path.string() + ": header must be 'vocab_count dim', got '" + line + "'");
    }

    std::unordered_map<std::string, std::vector<std::size_t>> wanted;
    for (std::size_t i = 0; i < vocabulary.size(); ++i) wanted[vocabulary[i]].push_back(i);

    std::vector<std::optional<Eigen::VectorXd>> found(vocabulary.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        std::size_t sp = line.find(' ');
        if (sp == std::string::npos) throw data_error(path.string() + ":" + std::to_string(line_no) + ": no vector");
        std::string token = line.substr(0, sp);
        if (!is_ascii(token)) token = text::normalize(token);
        auto it = wanted.find(token);
        if (it == wanted.end()) {
            // Validate shape even for rows we skip.
            std::size_t fields = 0;
            std::istringstream ss(line.substr(sp));
            std::string tok;
            while (ss >> tok) ++fields;
            if (fields != dims)
                throw data_error(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(dims) +
                                 " values, found " + std::to_string(fields));
            continue;
        }
        const std::string where = path.string() + ":" + std::to_string(line_no);
        Eigen::VectorXd v(static_cast<Eigen::Index>(dims));
        std::istringstream ss(line.substr(sp));
        std::string tok;
        std::size_t k = 0;
        while (ss >> tok) {
            if (k >= dims) throw data_error(where + ": more than " + std::to_string(dims) + " values");
            v(static_cast<Eigen::Index>(k++)) = parse_real(tok, where);
        }
        if (k != dims) throw data_error(where + ": expected " + std::to_string(dims) + " values, found " + std::to_string(k));
        if (v.isZero(0.0)) throw data_error(where + ": all-zero vector for '" + token + "'");
        for (std::size_t idx : it->second)
            if (!found[idx]) found[idx] = v;
    }

    EmbeddingCoverage coverage;
    std::vector<std::size_t> hit_positions;
    for (std::size_t i = 0; i < vocabulary.size(); ++i) {
        if (found[i]) {
            ++coverage.hits;
            hit_positions.push_back(i);
        } else {
            coverage.missing.push_back(vocabulary[i]);
        }
    }
    if (!vocabulary.empty() && coverage.hits == 0)
        throw data_error(path.string() + ": none of the " + std::to_string(vocabulary.size()) +
                         " requested words has an embedding");

    SemanticMatrix s;
    s.values.resize(static_cast<Eigen::Index>(hit_positions.size()), static_cast<Eigen::Index>(dims));
    for (std::size_t r = 0; r < hit_positions.size(); ++r) {
        s.values.row(static_cast<Eigen::Index>(r)) = found[hit_positions[r]]->transpose();
        s.row_ids.push_back(vocabulary[hit_positions[r]]);
    }
    return {std::move(s), std::move(coverage)};
}

EmbeddedLexicon attach_embeddings(const Lexicon& lexicon, const std::filesystem::path& path) {
    std::vector<std::string> distinct;
    std::unordered_map<std::string, std::size_t> seen;
    for (const auto& e : lexicon)
        if (seen.emplace(e.surface, distinct.size()).second) distinct.push_back(e.surface);

    auto [vectors, coverage] = load_embeddings(path, distinct);
    std::unordered_map<std::string, Eigen::Index> row_of;
    for (std::size_t r = 0; r < vectors.row_ids.size(); ++r) row_of[vectors.row_ids[r]] = static_cast<Eigen::Index>(r);

    EmbeddedLexicon out;
    out.coverage = std::move(coverage);
    for (const auto& e : lexicon)
        if (row_of.count(e.surface)) out.entries.push_back(e);
    out.semantics.values.resize(static_cast<Eigen::Index>(out.entries.size()), vectors.values.cols());
    for (std::size_t i = 0; i < out.entries.size(); ++i) {
        out.semantics.values.row(static_cast<Eigen::Index>(i)) = vectors.values.row(row_of.at(out.entries[i].surface));
        out.semantics.row_ids.push_back(out.entries[i].key());
    }
    return out;
}

void save_embeddings(const std::filesystem::path& path, const SemanticMatrix& s) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path.string());
    out << s.rows() << ' ' << s.dims() << '\n';
    out << std::setprecision(17);
    for (std::size_t i = 0; i < s.rows(); ++i) {
        out << s.row_ids[i];
        for (Eigen::Index j = 0; j < s.values.cols(); ++j) out << ' ' << s.values(static_cast<Eigen::Index>(i), j);
        out << '\n';
    }
}

ShiftVectorSet compute_shift_vectors(const Lexicon& lexicon, const SemanticMatrix& semantics) {
    if (semantics.rows() != lexicon.size())
        throw data_error("shift vectors: semantic matrix is not row-aligned with the lexicon");

    // (lexeme, case) -> plural rows, in lexicon order
    std::map<std::pair<std::string, Case>, std::vector<std::size_t>> plurals;
    for (std::size_t i = 0; i < lexicon.size(); ++i)
        if (lexicon[i].number == Number::plural) plurals[{lexicon[i].lexeme, lexicon[i].grammatical_case}].push_back(i);

    ShiftVectorSet set;
    for (std::size_t i = 0; i < lexicon.size(); ++i) {
        const auto& e = lexicon[i];
        if (e.number != Number::singular) continue;
        auto it = plurals.find({e.lexeme, e.grammatical_case});
        if (it == plurals.end()) continue;
        for (std::size_t j : it->second) {
            set.pairs.emplace_back(i, j);
            set.cases.push_back(e.grammatical_case);
            set.classes.push_back(e.inflectional_class);
        }
    }
    set.shifts.resize(static_cast<Eigen::Index>(set.pairs.size()), semantics.values.cols());
    for (std::size_t p = 0; p < set.pairs.size(); ++p) {
        auto [sg, pl] = set.pairs[p];
        set.shifts.row(static_cast<Eigen::Index>(p)) =
            semantics.values.row(static_cast<Eigen::Index>(pl)) - semantics.values.row(static_cast<Eigen::Index>(sg));
    }
    return set;
}

}  // namespace dlm
