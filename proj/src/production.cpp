#include "dlm/production.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <queue>
#include <set>

#include "dlm/cues.hpp"
#include "dlm/error.hpp"
#include "dlm/evaluation.hpp"
#include "dlm/linear.hpp"
#include "dlm/network.hpp"
#include "dlm/text.hpp"

namespace dlm {

std::vector<std::string> select_cues(std::span<const double> predicted_form, const CueInventory& inventory,
                                     double threshold) {
    if (predicted_form.size() != inventory.size())
        throw data_error("select_cues: form vector has " + std::to_string(predicted_form.size()) +
                         " entries, inventory has " + std::to_string(inventory.size()));
    std::vector<std::string> out;
    for (std::size_t j = 0; j < predicted_form.size(); ++j)
        if (predicted_form[j] > threshold) out.push_back(inventory.cue(j));
    return out;
}

namespace {

struct Cue {
    std::vector<std::string> chars;
    std::string text;
    double support = 1.0;
    bool starts = false, ends = false;
};

struct Graph {
    std::size_t n = 0;
    std::vector<Cue> cues;  // sorted by text
    std::vector<std::vector<std::size_t>> next;
};

std::string join(const std::vector<std::string>& chars, std::size_t from, std::size_t count) {
    std::string s;
    for (std::size_t i = from; i < from + count; ++i) s += chars[i];
    return s;
}

Graph build_graph(std::span<const std::string> cues, const WeaveOptions& options) {
    if (options.supports && options.supports->size() != cues.size())
        throw data_error("weave: support list does not match the cue list");
    Graph g;
    std::map<std::string, double> unique;
    for (std::size_t i = 0; i < cues.size(); ++i) {
        double s = options.supports ? (*options.supports)[i] : 1.0;
        auto [it, inserted] = unique.emplace(cues[i], s);
        if (!inserted) it->second = std::max(it->second, s);
    }
    for (auto& [textual, support] : unique) {
        Cue c;
        c.text = textual;
        c.chars = text::code_points(textual);
        c.support = support;
        if (g.n == 0) g.n = c.chars.size();
        if (c.chars.size() != g.n) throw data_error("weave: cues of different gram sizes ('" + textual + "')");
        if (g.n < 2) throw data_error("weave: gram size must be at least 2");
        for (std::size_t k = 1; k + 1 < c.chars.size(); ++k)
            if (c.chars[k] == kBoundary) throw data_error("weave: boundary symbol inside cue '" + textual + "'");
        c.starts = c.chars.front() == kBoundary;
        c.ends = c.chars.back() == kBoundary;
        g.cues.push_back(std::move(c));
    }
    std::map<std::string, std::vector<std::size_t>> by_prefix;
    for (std::size_t i = 0; i < g.cues.size(); ++i) by_prefix[join(g.cues[i].chars, 0, g.n - 1)].push_back(i);
    g.next.resize(g.cues.size());
    for (std::size_t i = 0; i < g.cues.size(); ++i) {
        if (g.cues[i].ends) continue;
        auto it = by_prefix.find(join(g.cues[i].chars, 1, g.n - 1));
        if (it == by_prefix.end()) continue;
        for (std::size_t j : it->second)
            if (!g.cues[j].starts) g.next[i].push_back(j);
    }
    return g;
}

// Surface length of a complete path with `len` cues.
std::size_t surface_length(std::size_t n, std::size_t len) { return n + len - 1 - 2; }

ProductionCandidate make_candidate(const Graph& g, const std::vector<std::size_t>& path) {
    ProductionCandidate c;
    std::vector<std::string> chars = g.cues[path.front()].chars;
    for (std::size_t k = 1; k < path.size(); ++k) chars.push_back(g.cues[path[k]].chars.back());
    c.surface = join(chars, 1, chars.size() - 2);
    for (auto idx : path) c.cue_path.push_back(g.cues[idx].text);
    return c;
}

struct BudgetExceeded {};

void dfs(const Graph& g, std::vector<std::size_t>& path, const WeaveOptions& options, std::size_t& expansions,
         std::vector<ProductionCandidate>& out) {
    if (++expansions > options.expansion_budget) throw BudgetExceeded{};
    const std::size_t last = path.back();
    if (g.cues[last].ends) {
        if (out.size() >= options.candidate_cap) throw BudgetExceeded{};
        out.push_back(make_candidate(g, path));
        return;
    }
    if (surface_length(g.n, path.size() + 1) > options.max_length) return;
    for (std::size_t nxt : g.next[last]) {
        path.push_back(nxt);
        dfs(g, path, options, expansions, out);
        path.pop_back();
    }
}

std::vector<ProductionCandidate> best_first(const Graph& g, const std::vector<std::size_t>& starts,
                                            const WeaveOptions& options) {
    struct Node {
        double score;
        std::vector<std::size_t> path;
    };
    // Highest summed support first; equal scores expand the lexicographically smaller path.
    auto worse = [&](const Node& a, const Node& b) {
        if (a.score != b.score) return a.score < b.score;
        return a.path > b.path;
    };
    std::priority_queue<Node, std::vector<Node>, decltype(worse)> queue(worse);
    for (auto s : starts) queue.push({g.cues[s].support, {s}});
    std::vector<ProductionCandidate> out;
    std::size_t expansions = 0;
    while (!queue.empty() && out.size() < options.candidate_cap && expansions < options.expansion_budget) {
        Node node = queue.top();
        queue.pop();
        ++expansions;
        const std::size_t last = node.path.back();
        if (g.cues[last].ends) {
            out.push_back(make_candidate(g, node.path));
            continue;
        }
        if (surface_length(g.n, node.path.size() + 1) > options.max_length) continue;
        for (std::size_t nxt : g.next[last]) {
            Node child{node.score + g.cues[nxt].support, node.path};
            child.path.push_back(nxt);
            queue.push(std::move(child));
        }
    }
    return out;
}

}  // namespace

WeaveResult weave(std::span<const std::string> cues, const WeaveOptions& options) {
    WeaveResult result;
    if (cues.empty()) {
        result.missing_start = result.missing_end = true;
        return result;
    }
    Graph g = build_graph(cues, options);
    std::vector<std::size_t> starts;
    bool any_end = false;
    for (std::size_t i = 0; i < g.cues.size(); ++i) {
        if (g.cues[i].starts) starts.push_back(i);
        any_end = any_end || g.cues[i].ends;
    }
    result.missing_start = starts.empty();
    result.missing_end = !any_end;
    if (result.missing_start || result.missing_end) return result;

    try {
        std::size_t expansions = 0;
        for (auto s : starts) {
            if (surface_length(g.n, 1) > options.max_length) break;
            std::vector<std::size_t> path{s};
            dfs(g, path, options, expansions, result.candidates);
        }
    } catch (const BudgetExceeded&) {
        result.capped = true;
        result.candidates = best_first(g, starts, options);
    }
    std::sort(result.candidates.begin(), result.candidates.end(),
              [](const ProductionCandidate& a, const ProductionCandidate& b) { return a.surface < b.surface; });
    return result;
}

SynthesisResult synthesize_by_analysis(std::span<const std::string> candidates, const LinearMapping& comprehension,
                                       const CueInventory& inventory, const Eigen::VectorXd& intended) {
    if (comprehension.input_dims() != static_cast<Eigen::Index>(inventory.size()))
        throw data_error("synthesis: comprehension mapping was not trained on this cue inventory");
    if (comprehension.output_dims() != intended.size())
        throw data_error("synthesis: intended meaning has the wrong dimensionality");
    SynthesisResult result;
    for (const auto& surface : candidates) {
        ProductionCandidate c;
        c.surface = surface;
        c.cue_path = extract_ngrams(surface, inventory.gram_size());
        Eigen::VectorXd meaning = Eigen::VectorXd::Zero(comprehension.output_dims());
        for (auto col : encode_surface(surface, inventory, UnknownCuePolicy::skip))
            meaning += comprehension.weights.row(col).transpose();
        try {
            c.support = target_correlation(meaning, intended);
        } catch (const Error&) {
            c.support = std::numeric_limits<double>::quiet_NaN();
        }
        result.ranked.push_back(std::move(c));
    }
    auto key = [](const ProductionCandidate& c) { return std::isnan(c.support) ? -std::numeric_limits<double>::infinity() : c.support; };
    std::stable_sort(result.ranked.begin(), result.ranked.end(), [&](const ProductionCandidate& a, const ProductionCandidate& b) {
        if (key(a) != key(b)) return key(a) > key(b);
        const auto la = text::length(a.surface), lb = text::length(b.surface);
        if (la != lb) return la < lb;
        return a.surface < b.surface;
    });
    if (!result.ranked.empty()) {
        result.best = result.ranked.front();
        result.tie = result.ranked.size() > 1 && key(result.ranked[0]) == key(result.ranked[1]);
    }
    return result;
}

ProductionOutcome produce_from_form(std::span<const double> predicted_form, const Eigen::VectorXd& intended,
                                    const LinearMapping& comprehension, const CueInventory& inventory,
                                    const ProductionOptions& options) {
    ProductionOutcome out;
    std::vector<std::string> selected = select_cues(predicted_form, inventory, options.threshold);
    out.selected_cues = selected.size();
    std::vector<double> supports;
    for (std::size_t j = 0; j < predicted_form.size(); ++j)
        if (predicted_form[j] > options.threshold) supports.push_back(predicted_form[j]);
    WeaveOptions wopt = options.weave;
    wopt.supports = std::span<const double>(supports);
    WeaveResult woven = weave(selected, wopt);
    out.capped = woven.capped;
    out.n_candidates = woven.candidates.size();
    if (woven.candidates.empty()) return out;
    std::vector<std::string> surfaces;
    for (auto& c : woven.candidates) surfaces.push_back(c.surface);
    SynthesisResult synth = synthesize_by_analysis(surfaces, comprehension, inventory, intended);
    out.best = synth.best;
    out.tie = synth.tie;
    return out;
}

ProductionOutcome produce(const Eigen::VectorXd& intended, const LinearMapping& what, const LinearMapping& comprehension,
                          const CueInventory& inventory, const ProductionOptions& options) {
    if (what.input_dims() != intended.size()) throw data_error("produce: what-system expects a different meaning size");
    Eigen::VectorXd form = what.weights.transpose() * intended;
    return produce_from_form(std::span<const double>(form.data(), static_cast<std::size_t>(form.size())), intended,
                             comprehension, inventory, options);
}

ProductionOutcome produce(const Eigen::VectorXd& intended, const FeedforwardNetwork& what,
                          const LinearMapping& comprehension, const CueInventory& inventory,
                          const ProductionOptions& options) {
    Eigen::VectorXd form = what.forward(intended);
    return produce_from_form(std::span<const double>(form.data(), static_cast<std::size_t>(form.size())), intended,
                             comprehension, inventory, options);
}

void write_production_log(std::ostream& out, std::span<const ProductionLogRow> rows) {
    out << "word,produced,target,support,n_candidates,correct\n";
    auto old = out.precision(17);
    for (const auto& r : rows)
        out << r.key << ',' << r.produced << ',' << r.target << ',' << r.support << ',' << r.n_candidates << ','
            << int(r.correct) << '\n';
    out.precision(old);
}

}  // namespace dlm
