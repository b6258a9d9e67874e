#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dlm {

enum class Case {
    nominative,
    genitive,
    partitive,
    illative,
    inessive,
    elative,
    allative,
    adessive,
    ablative,
    essive,
    translative,
    abessive,
    instructive,
    comitative,
    uncertain,
};

enum class Number { singular, plural, ambiguous };

inline constexpr int kMinClass = 1;
inline constexpr int kMaxClass = 51;

std::string_view case_name(Case c);          // "genitive"
std::string_view case_abbreviation(Case c);  // "gen"
std::string_view number_name(Number n);      // "sg", "pl", "ambiguous"

// Lenient parsers: anything unrecognized maps to the uncertain/ambiguous marker.
Case parse_case(std::string_view s);
Number parse_number(std::string_view s);

// Paradigm cell label, e.g. "sg_gen", "pl_ill". The comitative has no number
// contrast and is always "sg_pl_com".
std::string cell_label(Case c, Number n);

struct LexiconEntry {
    std::string surface;
    std::string lexeme;
    Case grammatical_case = Case::uncertain;
    Number number = Number::ambiguous;
    std::optional<int> inflectional_class;  // nullopt = unknown
    std::uint64_t frequency = 0;

    bool operator==(const LexiconEntry&) const = default;

    // Usable in per-class statistics: known class and unambiguous number.
    bool classifiable() const { return inflectional_class.has_value() && number != Number::ambiguous; }

    // "surface|lexeme|case|number", unique across a lexicon.
    std::string key() const;
};

using Lexicon = std::vector<LexiconEntry>;

inline constexpr std::string_view kLexiconHeader = "surface,lexeme,case,number,class,frequency";

Lexicon load_lexicon(const std::filesystem::path& path);
Lexicon parse_lexicon(std::istream& in, const std::string& source_name = "<stream>");
void write_lexicon(std::ostream& out, const Lexicon& entries);
void save_lexicon(const std::filesystem::path& path, const Lexicon& entries);

// Surfaces in lexicon order.
std::vector<std::string> surfaces(const Lexicon& entries);

struct DataSplit {
    Lexicon train;
    Lexicon test;
};

// train = frequency > threshold, test = frequency <= threshold.
DataSplit split_by_frequency(const Lexicon& entries, std::uint64_t threshold);

// Random held-out split where every test entry's lexeme, case and number all remain
// attested in train. Reproducible from the seed; relative order of the input is kept
// within each side. Throws if the achievable test size falls short of the request
// by more than 1% of the lexicon.
DataSplit split_holdout_constrained(const Lexicon& entries, double test_fraction, std::uint64_t seed);

}  // namespace dlm
