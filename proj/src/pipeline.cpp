#include "dlm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "dlm/cues.hpp"
#include "dlm/embeddings.hpp"
#include "dlm/error.hpp"
#include "dlm/evaluation.hpp"
#include "dlm/lexicon.hpp"
#include "dlm/linear.hpp"
#include "dlm/network.hpp"
#include "dlm/parallel.hpp"
#include "dlm/probe.hpp"
#include "dlm/production.hpp"
#include "dlm/productivity.hpp"
#include "dlm/svg.hpp"
#include "dlm/text.hpp"

namespace dlm {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- config

namespace {

// Reads known keys from one JSON object and rejects anything else.
class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw config_error(where_ + ": expected an object");
    }
    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw config_error(where_ + "." + key + ": " + e.what());
        }
    }
    const json* child(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw config_error(where_ + ": unknown key '" + it.key() + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

}  // namespace

ojson ExperimentConfig::to_json() const {
    ojson j;
    j["paths"] = {{"lexicon", paths.lexicon},
                  {"embeddings", paths.embeddings},
                  {"lemma_frequencies", paths.lemma_frequencies},
                  {"out", paths.out}};
    j["gram_size"] = gram_size;
    j["learning"] = learning;
    j["seed"] = seed;
    j["threads"] = threads;
    j["split"] = {{"mode", split.mode}, {"threshold", split.threshold}, {"fraction", split.fraction}};
    j["mapping"] = {{"ridge", mapping.ridge}};
    j["evaluation"] = {{"k", evaluation.k}, {"pool", evaluation.pool}};
    j["network"] = {{"hidden", network.hidden},
                    {"epochs", network.epochs},
                    {"patience", network.patience},
                    {"batch_size", network.batch_size},
                    {"step_size", network.step_size},
                    {"optimizer", network.optimizer},
                    {"validation_fraction", network.validation_fraction}};
    j["production"] = {{"what", production.what},
                       {"feedback", production.feedback},
                       {"evaluate", production.evaluate},
                       {"threshold", production.threshold},
                       {"max_length", production.max_length},
                       {"candidate_cap", production.candidate_cap}};
    j["probe"] = {{"shrinkage", probe.shrinkage},   {"targets", probe.targets},
                  {"min_tokens", probe.min_tokens}, {"by_cell", probe.by_cell},
                  {"shift_vectors", probe.shift_vectors}, {"loocv", probe.loocv}};
    j["report"] = {{"results", report.results}, {"metric", report.metric}};
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig c;
    Reader top(j, "config");
    if (auto* p = top.child("paths")) {
        Reader r(*p, "config.paths");
        r.get("lexicon", c.paths.lexicon);
        r.get("embeddings", c.paths.embeddings);
        r.get("lemma_frequencies", c.paths.lemma_frequencies);
        r.get("out", c.paths.out);
        r.finish();
    }
    top.get("gram_size", c.gram_size);
    top.get("learning", c.learning);
    top.get("seed", c.seed);
    top.get("threads", c.threads);
    if (auto* p = top.child("split")) {
        Reader r(*p, "config.split");
        r.get("mode", c.split.mode);
        r.get("threshold", c.split.threshold);
        r.get("fraction", c.split.fraction);
        r.finish();
    }
    if (auto* p = top.child("mapping")) {
        Reader r(*p, "config.mapping");
        r.get("ridge", c.mapping.ridge);
        r.finish();
    }
    if (auto* p = top.child("evaluation")) {
        Reader r(*p, "config.evaluation");
        r.get("k", c.evaluation.k);
        r.get("pool", c.evaluation.pool);
        r.finish();
    }
    if (auto* p = top.child("network")) {
        Reader r(*p, "config.network");
        r.get("hidden", c.network.hidden);
        r.get("epochs", c.network.epochs);
        r.get("patience", c.network.patience);
        r.get("batch_size", c.network.batch_size);
        r.get("step_size", c.network.step_size);
        r.get("optimizer", c.network.optimizer);
        r.get("validation_fraction", c.network.validation_fraction);
        r.finish();
    }
    if (auto* p = top.child("production")) {
        Reader r(*p, "config.production");
        r.get("what", c.production.what);
        r.get("feedback", c.production.feedback);
        r.get("evaluate", c.production.evaluate);
        r.get("threshold", c.production.threshold);
        r.get("max_length", c.production.max_length);
        r.get("candidate_cap", c.production.candidate_cap);
        r.finish();
    }
    if (auto* p = top.child("probe")) {
        Reader r(*p, "config.probe");
        r.get("shrinkage", c.probe.shrinkage);
        r.get("targets", c.probe.targets);
        r.get("min_tokens", c.probe.min_tokens);
        r.get("by_cell", c.probe.by_cell);
        r.get("shift_vectors", c.probe.shift_vectors);
        r.get("loocv", c.probe.loocv);
        r.finish();
    }
    if (auto* p = top.child("report")) {
        Reader r(*p, "config.report");
        r.get("results", c.report.results);
        r.get("metric", c.report.metric);
        r.finish();
    }
    top.finish();

    if (c.gram_size != 3 && c.gram_size != 4) throw config_error("config.gram_size must be 3 or 4");
    parse_learning(c.learning);
    parse_learning(c.production.feedback);
    if (c.split.mode != "frequency" && c.split.mode != "constrained" && c.split.mode != "none")
        throw config_error("config.split.mode must be frequency, constrained or none");
    if (c.evaluation.pool != "full" && c.evaluation.pool != "split")
        throw config_error("config.evaluation.pool must be full or split");
    if (c.network.optimizer != "adam" && c.network.optimizer != "sgd")
        throw config_error("config.network.optimizer must be adam or sgd");
    if (c.production.what != "network" && c.production.what != "linear" && c.production.what != "gold")
        throw config_error("config.production.what must be network, linear or gold");
    if (c.production.evaluate != "test" && c.production.evaluate != "train")
        throw config_error("config.production.evaluate must be test or train");
    if (c.probe.loocv != "downdate" && c.probe.loocv != "refit")
        throw config_error("config.probe.loocv must be downdate or refit");
    for (const auto& t : c.probe.targets) parse_probe_target(t);
    return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path.string());
    try {
        return from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw config_error(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------- helpers

namespace {

fs::path prepare_out(const ExperimentConfig& c) {
    fs::path out = c.paths.out;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw config_error("cannot create output directory " + out.string() + ": " + ec.message());
    std::ofstream cfg(out / "config.json");
    cfg << c.to_json().dump(2) << '\n';
    set_thread_count(c.threads);
    return out;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path.string());
    out << content;
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path.string());
    fn(out);
}

void require_path(const std::string& p, const char* what) {
    if (p.empty()) throw config_error(std::string("config.paths.") + what + " is required for this command");
    if (!fs::exists(p)) throw data_error(std::string(what) + " file not found: " + p);
}

EmbeddedLexicon load_working(const ExperimentConfig& c) {
    require_path(c.paths.lexicon, "lexicon");
    require_path(c.paths.embeddings, "embeddings");
    return attach_embeddings(load_lexicon(c.paths.lexicon), c.paths.embeddings);
}

struct Partition {
    std::vector<std::size_t> train, test;  // row indices into the working lexicon
};

Partition partition(const ExperimentConfig& c, const Lexicon& entries) {
    DataSplit split;
    if (c.split.mode == "frequency")
        split = split_by_frequency(entries, c.split.threshold);
    else if (c.split.mode == "constrained")
        split = split_holdout_constrained(entries, c.split.fraction, c.seed);
    else
        split.train = entries;
    std::unordered_map<std::string, std::size_t> row;
    for (std::size_t i = 0; i < entries.size(); ++i) row.emplace(entries[i].key(), i);
    Partition p;
    for (const auto& e : split.train) p.train.push_back(row.at(e.key()));
    for (const auto& e : split.test) p.test.push_back(row.at(e.key()));
    return p;
}

std::vector<std::string> pick_keys(const Lexicon& entries, std::span<const std::size_t> rows) {
    std::vector<std::string> out;
    for (auto i : rows) out.push_back(entries[i].key());
    return out;
}

std::vector<double> pick_frequencies(const Lexicon& entries, std::span<const std::size_t> rows) {
    std::vector<double> out;
    for (auto i : rows) out.push_back(static_cast<double>(entries[i].frequency));
    return out;
}

SemanticMatrix pick_semantics(const SemanticMatrix& s, std::span<const std::size_t> rows) {
    SemanticMatrix out;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), s.values.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.values.row(static_cast<Eigen::Index>(r)) = s.values.row(static_cast<Eigen::Index>(rows[r]));
        out.row_ids.push_back(s.row_ids[rows[r]]);
    }
    return out;
}

ojson summary_object(const EvaluationSummary& s) { return ojson::parse(summary_json(s)); }

std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
    return buf;
}

struct FormModel {
    CueInventory inventory;
    FormMatrix all;  // every working-lexicon row
    CoverageReport coverage;
};

FormModel build_forms(const ExperimentConfig& c, const Lexicon& entries) {
    FormModel f;
    auto surf = surfaces(entries);
    f.inventory = build_inventory(surf, c.gram_size);
    auto keys = pick_keys(entries, [&] {
        std::vector<std::size_t> all(entries.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return all;
    }());
    f.all = build_form_matrix(surf, f.inventory, UnknownCuePolicy::skip, &f.coverage, keys);
    return f;
}

FormMatrix pick_forms(const FormMatrix& all, std::span<const std::size_t> rows) {
    std::vector<std::string> ids;
    std::vector<std::vector<std::uint32_t>> r;
    for (auto i : rows) {
        ids.push_back(all.row_ids()[i]);
        auto span = all.row(i);
        r.emplace_back(span.begin(), span.end());
    }
    return FormMatrix(all.cols(), std::move(ids), std::move(r));
}

LinearMapping fit_comprehension(const FormMatrix& c_train, const SemanticMatrix& s_train, const Lexicon& entries,
                                std::span<const std::size_t> rows, Learning learning, double ridge) {
    SolveOptions opt;
    opt.ridge = ridge;
    opt.kind = MappingKind::comprehension;
    std::vector<double> w;
    if (learning == Learning::fil) {
        w = pick_frequencies(entries, rows);
        opt.row_weights = std::span<const double>(w);
    }
    return solve_linear(c_train.sparse(), s_train.values, opt);
}

}  // namespace

// ---------------------------------------------------------------- commands

std::string cmd_ingest(const ExperimentConfig& c) {
    require_path(c.paths.lexicon, "lexicon");
    require_path(c.paths.embeddings, "embeddings");
    fs::path out = prepare_out(c);
    Lexicon raw = load_lexicon(c.paths.lexicon);
    EmbeddedLexicon data = attach_embeddings(raw, c.paths.embeddings);
    save_lexicon(out / "working_lexicon.csv", data.entries);

    // one vector per distinct surface
    SemanticMatrix distinct;
    std::set<std::string> seen;
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < data.entries.size(); ++i)
        if (seen.insert(data.entries[i].surface).second) {
            rows.push_back(static_cast<Eigen::Index>(i));
            distinct.row_ids.push_back(data.entries[i].surface);
        }
    distinct.values.resize(static_cast<Eigen::Index>(rows.size()), data.semantics.values.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) distinct.values.row(static_cast<Eigen::Index>(r)) = data.semantics.values.row(rows[r]);
    save_embeddings(out / "embeddings.vec", distinct);

    ojson cov;
    cov["lexicon_entries"] = raw.size();
    cov["working_entries"] = data.entries.size();
    cov["distinct_surfaces"] = data.coverage.requested();
    cov["covered_surfaces"] = data.coverage.hits;
    cov["hit_ratio"] = data.coverage.hit_ratio();
    cov["missing"] = data.coverage.missing;
    cov["config"] = c.to_json();
    write_text(out / "coverage.json", cov.dump(2) + "\n");
    return "working lexicon: " + std::to_string(data.entries.size()) + " of " + std::to_string(raw.size()) +
           " entries; surface coverage " + percent(data.coverage.hit_ratio()) + "%";
}

std::string cmd_split(const ExperimentConfig& c) {
    fs::path out = prepare_out(c);
    Lexicon entries;
    if (!c.paths.embeddings.empty())
        entries = load_working(c).entries;
    else {
        require_path(c.paths.lexicon, "lexicon");
        entries = load_lexicon(c.paths.lexicon);
    }
    Partition p = partition(c, entries);
    Lexicon train, test;
    for (auto i : p.train) train.push_back(entries[i]);
    for (auto i : p.test) test.push_back(entries[i]);
    save_lexicon(out / "train.csv", train);
    save_lexicon(out / "test.csv", test);
    ojson meta;
    meta["mode"] = c.split.mode;
    meta["threshold"] = c.split.threshold;
    meta["fraction"] = c.split.fraction;
    meta["seed"] = c.seed;
    meta["train_size"] = train.size();
    meta["test_size"] = test.size();
    meta["config"] = c.to_json();
    write_text(out / "split.json", meta.dump(2) + "\n");
    return "train " + std::to_string(train.size()) + ", test " + std::to_string(test.size());
}

std::string cmd_comprehend(const ExperimentConfig& c) {
    fs::path out = prepare_out(c);
    EmbeddedLexicon data = load_working(c);
    const Lexicon& entries = data.entries;
    Partition p = partition(c, entries);
    if (p.train.empty()) throw data_error("comprehend: the training split is empty");
    FormModel forms = build_forms(c, entries);
    const Learning learning = parse_learning(c.learning);

    FormMatrix c_train = pick_forms(forms.all, p.train);
    SemanticMatrix s_train = pick_semantics(data.semantics, p.train);
    LinearMapping f = fit_comprehension(c_train, s_train, entries, p.train, learning, c.mapping.ridge);
    save_mapping(out / "comprehension.bin", f, forms.inventory.hash());
    forms.inventory.save(out / "cues.txt");

    ojson summary;
    summary["gram_size"] = c.gram_size;
    summary["learning"] = c.learning;
    summary["cues"] = forms.inventory.size();
    summary["train_words"] = p.train.size();
    summary["test_words"] = p.test.size();
    summary["form_collisions"] = forms.all.collisions().size();

    auto train_keys = pick_keys(entries, p.train);
    auto train_freq = pick_frequencies(entries, p.train);
    EvaluationOptions opt;
    opt.k = std::min(c.evaluation.k, p.train.size());
    opt.keys = std::span<const std::string>(train_keys);
    opt.frequencies = std::span<const double>(train_freq);
    Eigen::MatrixXd pred_train = apply_mapping(f, c_train.sparse());
    EvaluationReport train_report = evaluate_nearest(pred_train, GoldPool(s_train.values), opt);
    write_with(out / "comprehension_train.csv", [&](std::ostream& o) { write_report_csv(o, train_report); });
    summary["train"] = summary_object(train_report.summary);

    std::string line = "train type@1 " + percent(train_report.summary.type_accuracy_at_1) + "%";
    if (!p.test.empty()) {
        FormMatrix c_test = pick_forms(forms.all, p.test);
        Eigen::MatrixXd pred_test = apply_mapping(f, c_test.sparse());
        auto test_keys = pick_keys(entries, p.test);
        auto test_freq = pick_frequencies(entries, p.test);
        EvaluationOptions topt = opt;
        topt.keys = std::span<const std::string>(test_keys);
        topt.frequencies = std::span<const double>(test_freq);
        EvaluationReport test_report;
        if (c.evaluation.pool == "full") {
            topt.k = std::min(c.evaluation.k, entries.size());
            test_report = evaluate_against_pool(pred_test, GoldPool(data.semantics.values), p.test, topt);
        } else {
            topt.k = std::min(c.evaluation.k, p.test.size());
            test_report = evaluate_nearest(pred_test, GoldPool(pick_semantics(data.semantics, p.test).values), topt);
        }
        write_with(out / "comprehension_test.csv", [&](std::ostream& o) { write_report_csv(o, test_report); });
        summary["test"] = summary_object(test_report.summary);
        summary["test_pool"] = c.evaluation.pool;
        line += ", test type@1 " + percent(test_report.summary.type_accuracy_at_1) + "%";
    }
    summary["config"] = c.to_json();
    write_text(out / "comprehension_summary.json", summary.dump(2) + "\n");
    return line;
}

std::string cmd_produce(const ExperimentConfig& c) {
    if (c.gram_size != 3) throw config_error("produce: production uses 3-gram cues only");
    fs::path out = prepare_out(c);
    EmbeddedLexicon data = load_working(c);
    const Lexicon& entries = data.entries;
    Partition p = partition(c, entries);
    if (p.train.empty()) throw data_error("produce: the training split is empty");
    FormModel forms = build_forms(c, entries);
    forms.inventory.save(out / "cues.txt");

    FormMatrix c_train = pick_forms(forms.all, p.train);
    SemanticMatrix s_train = pick_semantics(data.semantics, p.train);
    LinearMapping feedback =
        fit_comprehension(c_train, s_train, entries, p.train, parse_learning(c.production.feedback), c.mapping.ridge);
    save_mapping(out / "feedback.bin", feedback, forms.inventory.hash());

    std::vector<std::size_t> targets = c.production.evaluate == "train" || p.test.empty() ? p.train : p.test;
    const Eigen::Index n_cues = static_cast<Eigen::Index>(forms.inventory.size());

    // what-system output for every target row
    Eigen::MatrixXd predicted_forms;
    ojson summary;
    SemanticMatrix s_targets = pick_semantics(data.semantics, targets);
    if (c.production.what == "gold") {
        predicted_forms = pick_forms(forms.all, targets).dense();
    } else {
        if (c.production.what == "network") {
            TrainingOptions topt;
            topt.hidden = c.network.hidden;
            topt.epochs = c.network.epochs;
            topt.patience = c.network.patience;
            topt.batch_size = c.network.batch_size;
            topt.step_size = c.network.step_size;
            topt.optimizer = c.network.optimizer == "sgd" ? Optimizer::sgd : Optimizer::adam;
            topt.validation_fraction = c.network.validation_fraction;
            topt.seed = c.seed;
            TrainingHistory hist;
            FeedforwardNetwork net = train_network(s_train, c_train, topt, &hist);
            save_network(out / "what_network.bin", net);
            predicted_forms = net.forward(s_targets.values);
            summary["network"] = {{"parameters", net.parameter_count()},
                                  {"trained_epochs", net.trained_epochs},
                                  {"best_epoch", hist.best_epoch},
                                  {"stopped_early", hist.stopped_early},
                                  {"train_loss", hist.train_loss},
                                  {"validation_loss", hist.validation_loss}};
        } else {
            SolveOptions sopt;
            sopt.ridge = c.mapping.ridge;
            sopt.kind = MappingKind::production;
            std::vector<double> w;
            if (parse_learning(c.learning) == Learning::fil) {
                w = pick_frequencies(entries, p.train);
                sopt.row_weights = std::span<const double>(w);
            }
            LinearMapping g = solve_linear(s_train.values, c_train.dense(), sopt);
            save_mapping(out / "what_linear.bin", g, forms.inventory.hash());
            predicted_forms = apply_mapping(g, s_targets.values);
        }
        // what-system accuracy: nearest gold form vector over the full lexicon
        auto keys = pick_keys(entries, targets);
        EvaluationOptions eopt;
        eopt.k = std::min(c.evaluation.k, entries.size());
        eopt.keys = std::span<const std::string>(keys);
        EvaluationReport what = evaluate_against_pool(predicted_forms, GoldPool(forms.all), targets, eopt);
        write_with(out / "what_system.csv", [&](std::ostream& o) { write_report_csv(o, what); });
        summary["what_system"] = summary_object(what.summary);
    }
    if (predicted_forms.cols() != n_cues) throw data_error("produce: what-system output has the wrong width");

    ProductionOptions popt;
    popt.threshold = c.production.threshold;
    popt.weave.max_length = c.production.max_length;
    popt.weave.candidate_cap = c.production.candidate_cap;
    std::vector<ProductionLogRow> log(targets.size());
    std::vector<char> tie(targets.size()), capped(targets.size());
    parallel_for(targets.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            const auto& e = entries[targets[t]];
            Eigen::VectorXd form = predicted_forms.row(static_cast<Eigen::Index>(t)).transpose();
            Eigen::VectorXd intended = s_targets.values.row(static_cast<Eigen::Index>(t)).transpose();
            ProductionOutcome o = produce_from_form(std::span<const double>(form.data(), static_cast<std::size_t>(form.size())),
                                                    intended, feedback, forms.inventory, popt);
            ProductionLogRow& row = log[t];
            row.key = e.key();
            row.target = e.surface;
            row.n_candidates = o.n_candidates;
            if (o.best) {
                row.produced = o.best->surface;
                row.support = o.best->support;
                row.correct = o.best->surface == e.surface;
            }
            tie[t] = o.tie;
            capped[t] = o.capped;
        }
    });
    write_with(out / "production_log.csv", [&](std::ostream& o) { write_production_log(o, log); });

    std::size_t correct = 0, none = 0, ties = 0, caps = 0;
    double support_sum = 0;
    std::size_t support_n = 0;
    for (std::size_t t = 0; t < log.size(); ++t) {
        correct += log[t].correct;
        none += log[t].produced.empty();
        ties += tie[t];
        caps += capped[t];
        if (std::isfinite(log[t].support)) support_sum += log[t].support, ++support_n;
    }
    const double accuracy = log.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(log.size());
    summary["what"] = c.production.what;
    summary["feedback"] = c.production.feedback;
    summary["evaluated"] = c.production.evaluate == "train" || p.test.empty() ? "train" : "test";
    summary["words"] = log.size();
    summary["accuracy"] = accuracy;
    summary["no_production"] = none;
    summary["ties"] = ties;
    summary["capped"] = caps;
    summary["mean_support"] = support_n ? support_sum / static_cast<double>(support_n) : 0.0;
    summary["config"] = c.to_json();
    write_text(out / "production_summary.json", summary.dump(2) + "\n");
    return "production accuracy " + percent(accuracy) + "% over " + std::to_string(log.size()) + " words";
}

std::string cmd_probe(const ExperimentConfig& c) {
    fs::path out = prepare_out(c);
    EmbeddedLexicon data = load_working(c);
    const Lexicon& entries = data.entries;
    ProbeOptions opt;
    opt.shrinkage = c.probe.shrinkage;
    opt.min_tokens = c.probe.min_tokens;
    opt.loocv = c.probe.loocv == "refit" ? LoocvMethod::refit : LoocvMethod::downdate;

    ojson summary;
    std::string line;
    for (const auto& name : c.probe.targets) {
        const ProbeTarget target = parse_probe_target(name);
        std::vector<ProbeRow> rows;
        std::vector<std::optional<std::string>> labels;
        for (const auto& e : entries) labels.push_back(probe_label(e, target));
        rows.push_back(probe_rows("all", data.semantics.values, labels, entries, opt));

        if (c.probe.shift_vectors && target != ProbeTarget::number && target != ProbeTarget::case_number) {
            ShiftVectorSet shifts = compute_shift_vectors(entries, data.semantics);
            std::vector<std::optional<std::string>> shift_labels;
            Lexicon shift_entries;
            for (const auto& [sg, pl] : shifts.pairs) {
                shift_labels.push_back(probe_label(entries[sg], target));
                shift_entries.push_back(entries[sg]);
            }
            rows.push_back(probe_rows("shift", shifts.shifts, shift_labels, shift_entries, opt));
        }
        if (c.probe.by_cell && target == ProbeTarget::inflectional_class) {
            auto cells = probe_by_cell(entries, data.semantics, target, opt);
            rows.insert(rows.end(), cells.begin(), cells.end());
        }
        write_with(out / ("probe_" + name + ".csv"), [&](std::ostream& o) { write_probe_csv(o, rows); });
        ojson t;
        for (const auto& r : rows) {
            if (r.cell != "all" && r.cell != "shift") continue;
            t[r.cell] = {{"n_token", r.n_token},
                         {"lda", r.lda ? ojson(*r.lda) : ojson(nullptr)},
                         {"lda_cv", r.lda_cv ? ojson(*r.lda_cv) : ojson(nullptr)},
                         {"baseline", r.baseline ? ojson(*r.baseline) : ojson(nullptr)},
                         {"note", r.note}};
        }
        summary[name] = t;
        if (rows.front().lda)
            line += name + ": LDA " + percent(*rows.front().lda) + "%, LOOCV " + percent(rows.front().lda_cv.value_or(0)) +
                    "%, baseline " + percent(rows.front().baseline.value_or(0)) + "%; ";
        else
            line += name + ": NA (" + rows.front().note + "); ";
    }
    summary["config"] = c.to_json();
    write_text(out / "probe_summary.json", summary.dump(2) + "\n");
    return line;
}

namespace {

Lexicon lexicon_for_measures(const ExperimentConfig& c) {
    if (!c.paths.embeddings.empty()) return load_working(c).entries;
    require_path(c.paths.lexicon, "lexicon");
    return load_lexicon(c.paths.lexicon);
}

LemmaFrequencies lemma_table(const ExperimentConfig& c, const Lexicon& entries) {
    if (c.paths.lemma_frequencies.empty()) return lemma_frequencies_from(entries);
    require_path(c.paths.lemma_frequencies, "lemma_frequencies");
    return load_lemma_frequencies(c.paths.lemma_frequencies);
}

}  // namespace

std::string cmd_productivity(const ExperimentConfig& c) {
    fs::path out = prepare_out(c);
    Lexicon entries = lexicon_for_measures(c);
    auto prod = class_measures(entries, lemma_table(c, entries));
    write_with(out / "productivity.csv", [&](std::ostream& o) { write_productivity_csv(o, prod); });
    return std::to_string(prod.size()) + " inflectional classes measured";
}

std::string cmd_report(const ExperimentConfig& c) {
    fs::path out = prepare_out(c);
    if (c.report.results.empty()) throw config_error("config.report.results is required for report");
    require_path(c.report.results, "results");
    Lexicon entries = lexicon_for_measures(c);
    auto prod = class_measures(entries, lemma_table(c, entries));

    std::ifstream in(c.report.results);
    std::string line;
    std::getline(in, line);
    auto header = text::split(text::trim(line), ',');
    auto col = [&](const std::string& name) -> std::ptrdiff_t {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : it - header.begin();
    };
    const auto k_word = col("word"), k_corr = col("correlation"), k_acc1 = col("correct_at_1"), k_correct = col("correct"),
               k_support = col("support");
    if (k_word < 0 || (k_acc1 < 0 && k_correct < 0))
        throw data_error(c.report.results + ": not a comprehension or production result file");
    std::vector<WordPerformance> rows;
    auto number = [](const std::string& s) -> std::optional<double> {
        try {
            double v = std::stod(s);
            return std::isfinite(v) ? std::optional<double>(v) : std::nullopt;
        } catch (...) {
            return std::nullopt;
        }
    };
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        auto f = text::split(text::trim(line), ',');
        if (f.size() != header.size()) throw data_error(c.report.results + ": ragged row");
        WordPerformance w;
        w.key = f[static_cast<std::size_t>(k_word)];
        if (k_corr >= 0) w.correlation = number(f[static_cast<std::size_t>(k_corr)]);
        w.accuracy = number(f[static_cast<std::size_t>(k_acc1 >= 0 ? k_acc1 : k_correct)]);
        if (k_support >= 0) w.support = number(f[static_cast<std::size_t>(k_support)]);
        rows.push_back(std::move(w));
    }
    auto perf = class_performance(rows, entries);
    CorrelationReport report = productivity_correlation_report(perf, prod);
    write_with(out / "class_performance.csv", [&](std::ostream& o) { write_class_performance_csv(o, perf); });
    write_with(out / "productivity.csv", [&](std::ostream& o) { write_productivity_csv(o, prod); });
    write_with(out / "correlations.csv", [&](std::ostream& o) { write_correlation_csv(o, report); });
    write_with(out / "scatter.csv", [&](std::ostream& o) { write_scatter_csv(o, report); });

    std::size_t plots = 0;
    for (const auto& measure : kProductivityMeasures) {
        std::vector<double> xs, ys;
        std::vector<std::string> labels;
        for (const auto& s : report.scatter)
            if (s.measure == measure && s.performance == c.report.metric) {
                xs.push_back(s.x);
                ys.push_back(s.y);
                labels.push_back(std::to_string(s.class_id));
            }
        std::string note = "Spearman rho = NA";
        for (const auto& r : report.rows)
            if (r.measure == measure && r.performance == c.report.metric && r.result) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "Spearman rho = %.2f, p = %.4f", r.result->rho, r.result->p_value);
                note = buf;
            }
        ScatterSpec spec{c.report.metric + " by inflectional class", measure, c.report.metric, note};
        write_text(out / ("scatter_" + measure + ".svg"), scatter_svg(xs, ys, labels, spec));
        ++plots;
    }
    return std::to_string(perf.size()) + " classes, " + std::to_string(plots) + " scatterplots";
}

}  // namespace dlm
