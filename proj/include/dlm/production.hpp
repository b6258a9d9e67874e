#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dlm {

class CueInventory;
class FeedforwardNetwork;
struct LinearMapping;

struct ProductionCandidate {
    std::string surface;
    std::vector<std::string> cue_path;
    double support = std::numeric_limits<double>::quiet_NaN();
};

// Cues whose predicted support exceeds the threshold, in inventory order.
std::vector<std::string> select_cues(std::span<const double> predicted_form, const CueInventory& inventory,
                                     double threshold);

struct WeaveOptions {
    std::size_t max_length = 25;        // surface code points
    std::size_t candidate_cap = 10000;  // beyond this, best-first by summed support
    std::size_t expansion_budget = 2'000'000;
    // Support per input cue (aligned with the cue list); defaults to 1 each.
    std::optional<std::span<const double>> supports;
};

struct WeaveResult {
    std::vector<ProductionCandidate> candidates;  // sorted by surface
    bool capped = false;                          // best-first fallback was used
    bool missing_start = false;
    bool missing_end = false;
};

// Every surface spelled by a chain of cues overlapping in n-1 characters, from a
// boundary-initial cue to a boundary-final cue. Cues may repeat along a path.
WeaveResult weave(std::span<const std::string> cues, const WeaveOptions& options = {});

struct SynthesisResult {
    std::optional<ProductionCandidate> best;  // empty = no production
    std::vector<ProductionCandidate> ranked;  // support desc, then shorter, then lexicographic
    bool tie = false;
};

// Synthesis by analysis: each candidate is encoded with the inventory, mapped to
// meaning through the comprehension mapping, and scored by its correlation with the
// intended meaning.
SynthesisResult synthesize_by_analysis(std::span<const std::string> candidates, const LinearMapping& comprehension,
                                       const CueInventory& inventory, const Eigen::VectorXd& intended);

struct ProductionOptions {
    double threshold = 0.01;
    WeaveOptions weave;
};

struct ProductionOutcome {
    std::optional<ProductionCandidate> best;
    std::size_t selected_cues = 0;
    std::size_t n_candidates = 0;
    bool tie = false;
    bool capped = false;
};

// Where-system given the what-system's output in cue space.
ProductionOutcome produce_from_form(std::span<const double> predicted_form, const Eigen::VectorXd& intended,
                                    const LinearMapping& comprehension, const CueInventory& inventory,
                                    const ProductionOptions& options = {});

// Full pipeline with a linear what-system (intended * G).
ProductionOutcome produce(const Eigen::VectorXd& intended, const LinearMapping& what, const LinearMapping& comprehension,
                          const CueInventory& inventory, const ProductionOptions& options = {});
// Full pipeline with a network what-system.
ProductionOutcome produce(const Eigen::VectorXd& intended, const FeedforwardNetwork& what,
                          const LinearMapping& comprehension, const CueInventory& inventory,
                          const ProductionOptions& options = {});

struct ProductionLogRow {
    std::string key;
    std::string produced;  // empty when nothing was produced
    std::string target;
    double support = std::numeric_limits<double>::quiet_NaN();
    std::size_t n_candidates = 0;
    bool correct = false;
};

void write_production_log(std::ostream& out, std::span<const ProductionLogRow> rows);

}  // namespace dlm
