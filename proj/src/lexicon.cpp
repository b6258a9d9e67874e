#include "dlm/lexicon.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "dlm/error.hpp"
#include "dlm/random.hpp"
#include "dlm/text.hpp"

namespace dlm {

namespace {

struct CaseInfo {
    Case value;
    std::string_view name;
    std::string_view abbreviation;
};

constexpr std::array<CaseInfo, 15> kCases{{
    {Case::nominative, "nominative", "nom"},
    {Case::genitive, "genitive", "gen"},
    {Case::partitive, "partitive", "par"},
    {Case::illative, "illative", "ill"},
    {Case::inessive, "inessive", "ine"},
    {Case::elative, "elative", "ela"},
    {Case::allative, "allative", "all"},
    {Case::adessive, "adessive", "ade"},
    {Case::ablative, "ablative", "abl"},
    {Case::essive, "essive", "ess"},
    {Case::translative, "translative", "tra"},
    {Case::abessive, "abessive", "abe"},
    {Case::instructive, "instructive", "ins"},
    {Case::comitative, "comitative", "com"},
    {Case::uncertain, "uncertain", "unc"},
}};

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

std::optional<int> parse_class(std::string_view s) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    if (value < kMinClass || value > kMaxClass) return std::nullopt;
    return value;
}

bool has_whitespace(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; });
}

}  // namespace

std::string_view case_name(Case c) { return kCases[static_cast<std::size_t>(c)].name; }
std::string_view case_abbreviation(Case c) { return kCases[static_cast<std::size_t>(c)].abbreviation; }

std::string_view number_name(Number n) {
    switch (n) {
        case Number::singular: return "sg";
        case Number::plural: return "pl";
        default: return "ambiguous";
    }
}

Case parse_case(std::string_view s) {
    std::string key = lower_ascii(text::trim(s));
    for (const auto& info : kCases)
        if (key == info.name || key == info.abbreviation) return info.value;
    return Case::uncertain;
}

Number parse_number(std::string_view s) {
    std::string key = lower_ascii(text::trim(s));
    if (key == "sg" || key == "singular") return Number::singular;
    if (key == "pl" || key == "plural") return Number::plural;
    return Number::ambiguous;
}

std::string cell_label(Case c, Number n) {
    if (c == Case::comitative) return "sg_pl_com";
    std::string prefix = n == Number::singular ? "sg" : n == Number::plural ? "pl" : "amb";
    return prefix + "_" + std::string(case_abbreviation(c));
}

std::string LexiconEntry::key() const {
    std::string k = surface;
    k += '|';
    k += lexeme;
    k += '|';
    k += case_name(grammatical_case);
    k += '|';
    k += number_name(number);
    return k;
}

Lexicon parse_lexicon(std::istream& in, const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line)) throw data_error(source_name + ": missing header line");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // Tolerate a UTF-8 byte order mark.
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (text::trim(line) != kLexiconHeader)
        throw data_error(source_name + ": header must be '" + std::string(kLexiconHeader) + "', got '" + line + "'");

    Lexicon entries;
    std::unordered_set<std::string> keys;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        const std::string where = source_name + ":" + std::to_string(line_no);
        auto fields = text::split(line, ',');
        if (fields.size() != 6)
            throw data_error(where + ": expected 6 columns, found " + std::to_string(fields.size()));

        LexiconEntry e;
        e.surface = text::normalize(text::trim(fields[0]));
        e.lexeme = text::normalize(text::trim(fields[1]));
        if (e.surface.empty()) throw data_error(where + ": empty surface");
        if (has_whitespace(e.surface)) throw data_error(where + ": surface contains whitespace");
        if (e.surface.find('#') != std::string::npos) throw data_error(where + ": surface contains reserved '#'");
        if (e.lexeme.empty()) throw data_error(where + ": empty lexeme");
        e.grammatical_case = parse_case(fields[2]);
        e.number = parse_number(fields[3]);
        e.inflectional_class = parse_class(text::trim(fields[4]));

        std::string_view freq = text::trim(fields[5]);
        std::uint64_t f = 0;
        auto [ptr, ec] = std::from_chars(freq.data(), freq.data() + freq.size(), f);
        if (freq.empty() || ec != std::errc{} || ptr != freq.data() + freq.size())
            throw data_error(where + ": frequency '" + std::string(freq) + "' is not a non-negative integer");
        if (f < 1) throw data_error(where + ": frequency must be at least 1");
        e.frequency = f;

        if (!keys.insert(e.key()).second) throw data_error(where + ": duplicate entry " + e.key());
        entries.push_back(std::move(e));
    }
    return entries;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open lexicon file " + path.string());
    return parse_lexicon(in, path.string());
}

void write_lexicon(std::ostream& out, const Lexicon& entries) {
    out << kLexiconHeader << '\n';
    for (const auto& e : entries) {
        out << e.surface << ',' << e.lexeme << ',' << case_name(e.grammatical_case) << ',' << number_name(e.number)
            << ',';
        if (e.inflectional_class)
            out << *e.inflectional_class;
        else
            out << "unknown";
        out << ',' << e.frequency << '\n';
    }
}

void save_lexicon(const std::filesystem::path& path, const Lexicon& entries) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path.string());
    write_lexicon(out, entries);
}

std::vector<std::string> surfaces(const Lexicon& entries) {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.surface);
    return out;
}

DataSplit split_by_frequency(const Lexicon& entries, std::uint64_t threshold) {
    DataSplit split;
    for (const auto& e : entries) (e.frequency > threshold ? split.train : split.test).push_back(e);
    return split;
}

DataSplit split_holdout_constrained(const Lexicon& entries, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw config_error("test fraction must lie strictly between 0 and 1");
    const std::size_t n = entries.size();
    const auto target = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));

    // Remaining train counts per lexeme, case and number.
    std::unordered_map<std::string, std::size_t> lexeme_count;
    std::array<std::size_t, 15> case_count{};
    std::array<std::size_t, 3> number_count{};
    for (const auto& e : entries) {
        ++lexeme_count[e.lexeme];
        ++case_count[static_cast<std::size_t>(e.grammatical_case)];
        ++number_count[static_cast<std::size_t>(e.number)];
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    shuffle(std::span<std::size_t>(order), rng);

    std::vector<bool> in_test(n, false);
    std::size_t n_test = 0;
    std::size_t blocked_lexeme = 0, blocked_case = 0, blocked_number = 0;
    for (std::size_t idx : order) {
        if (n_test == target) break;
        const auto& e = entries[idx];
        auto& lc = lexeme_count[e.lexeme];
        auto& cc = case_count[static_cast<std::size_t>(e.grammatical_case)];
        auto& nc = number_count[static_cast<std::size_t>(e.number)];
        bool ok = true;
        if (lc < 2) ok = false, ++blocked_lexeme;
        if (cc < 2) ok = false, ++blocked_case;
        if (nc < 2) ok = false, ++blocked_number;
        if (!ok) continue;
        --lc, --cc, --nc;
        in_test[idx] = true;
        ++n_test;
    }

    const double tolerance = 0.01 * static_cast<double>(n);
    if (static_cast<double>(target) - static_cast<double>(n_test) > tolerance) {
        std::string binding = "lexeme";
        std::size_t worst = blocked_lexeme;
        if (blocked_case > worst) binding = "case", worst = blocked_case;
        if (blocked_number > worst) binding = "number";
        throw config_error("infeasible test fraction " + std::to_string(test_fraction) + ": only " +
                           std::to_string(n_test) + " of " + std::to_string(target) +
                           " requested test entries keep their " + binding + " attested in train");
    }

    DataSplit split;
    for (std::size_t i = 0; i < n; ++i) (in_test[i] ? split.test : split.train).push_back(entries[i]);
    return split;
}

}  // namespace dlm
