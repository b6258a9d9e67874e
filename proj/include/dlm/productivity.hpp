#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dlm/lexicon.hpp"

namespace dlm {

// Classes with fewer lexemes than this are too small for meaningful measures.
inline constexpr std::size_t kMinClassTypes = 3;

struct ClassProductivity {
    int class_id = 0;
    std::size_t V = 0;   // lexeme types
    std::size_t V1 = 0;  // hapax lexemes (lemma frequency 1)
    std::uint64_t N = 0; // summed lemma frequencies
    double median_lemma_freq = 0.0;
    double P = 0.0;      // V1 / N
    double Pstar = 0.0;  // V1 / hapaxes over all classes

    double logV() const;
    double logV1() const;       // log(V1 + 1)
    double logMedian() const;
    double logP() const;        // log(P + 0.01)
    double logPstar() const;    // log(Pstar + 0.01)
    bool too_small() const { return V < kMinClassTypes; }
};

using LemmaFrequencies = std::map<std::string, std::uint64_t>;

// `lexeme,frequency` CSV with header.
LemmaFrequencies load_lemma_frequencies(const std::filesystem::path& path);

// Lemma frequencies summed over each lexeme's inflected forms.
LemmaFrequencies lemma_frequencies_from(const Lexicon& entries);

// Per-class measures over the distinct lexemes of each known class, sorted by class.
std::vector<ClassProductivity> class_measures(const Lexicon& entries, const LemmaFrequencies& lemma_freqs);

struct WordPerformance {
    std::string key;  // LexiconEntry::key()
    std::optional<double> correlation;
    std::optional<double> accuracy;  // 0 or 1
    std::optional<double> support;
};

struct ClassPerformance {
    int class_id = 0;
    std::optional<double> mean_target_correlation;
    std::optional<double> mean_accuracy;
    std::optional<double> mean_support;
    std::size_t n_words = 0;
    bool unstable = false;  // fewer than 5 words
};

// Per-class means. Entries with unknown class or ambiguous number are left out.
std::vector<ClassPerformance> class_performance(std::span<const WordPerformance> rows, const Lexicon& entries);

struct SpearmanResult {
    double rho = 0.0;
    double p_value = 1.0;
};

std::vector<double> mid_ranks(std::span<const double> values);
SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

struct CorrelationRow {
    std::string measure;      // logP, logV, logV1, logMedian, logPstar
    std::string performance;  // mean_accuracy, mean_target_correlation, mean_support
    std::size_t n_classes = 0;
    std::optional<SpearmanResult> result;
    std::string note;  // why the correlation is undefined, if it is
};

struct ScatterPoint {
    std::string measure;
    std::string performance;
    int class_id = 0;
    double x = 0.0;
    double y = 0.0;
};

struct CorrelationReport {
    std::vector<CorrelationRow> rows;
    std::vector<ScatterPoint> scatter;
    std::vector<int> unstable_classes;
};

inline const std::vector<std::string> kProductivityMeasures{"logP", "logV", "logV1", "logMedian", "logPstar"};

double measure_value(const ClassProductivity& p, const std::string& measure);

// Spearman correlations of every measure against every available performance column,
// over classes present in both lists and large enough for measures.
CorrelationReport productivity_correlation_report(std::span<const ClassPerformance> perf,
                                                  std::span<const ClassProductivity> prod);

void write_productivity_csv(std::ostream& out, std::span<const ClassProductivity> prod);
void write_class_performance_csv(std::ostream& out, std::span<const ClassPerformance> perf);
void write_correlation_csv(std::ostream& out, const CorrelationReport& report);
void write_scatter_csv(std::ostream& out, const CorrelationReport& report);

}  // namespace dlm
