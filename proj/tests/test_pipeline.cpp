#include <cstdlib>
#include <random>
#include <set>
#include <sys/wait.h>

#include "doctest.h"
#include "dlm/cues.hpp"
#include "dlm/embeddings.hpp"
#include "dlm/error.hpp"
#include "dlm/pipeline.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace dlm;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

ExperimentConfig toy_config(const std::string& name) {
    auto c = ExperimentConfig::load(testing::toy_dir() / "config.json");
    c.paths.lexicon = (testing::toy_dir() / "lexicon.csv").string();
    c.paths.embeddings = (testing::toy_dir() / "embeddings.vec").string();
    c.paths.lemma_frequencies = (testing::toy_dir() / "lemma_freqs.csv").string();
    c.paths.out = testing::scratch_dir(name).string();
    c.threads = 1;
    return c;
}

json read_json(const fs::path& p) { return json::parse(testing::slurp(p)); }

struct Run {
    int code;
    std::string err;
};

Run run_cli(const std::string& args, const fs::path& scratch) {
    const auto err = scratch / "stderr.txt";
    const std::string cmd = std::string(DLM_CLI) + " " + args + " > " + (scratch / "stdout.txt").string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, testing::slurp(err)};
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config serializes and parses back identically") {
    auto c = ExperimentConfig::load(testing::toy_dir() / "config.json");
    CHECK(c.network.hidden == std::vector<std::size_t>{64});
    CHECK(c.mapping.ridge == 0.1);
    auto again = ExperimentConfig::from_json(json::parse(c.to_json().dump()));
    CHECK(again.to_json() == c.to_json());
    CHECK(ExperimentConfig{}.to_json()["network"]["hidden"] == json::array({1000}));
}

TEST_CASE("config errors are configuration errors") {
    auto kind = [](const std::string& text) {
        try {
            ExperimentConfig::from_json(json::parse(text));
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::data;
    };
    CHECK(kind(R"({"gram_sise": 3})") == ErrorKind::config);
    CHECK(kind(R"({"paths": {"lexikon": "x"}})") == ErrorKind::config);
    CHECK(kind(R"({"gram_size": 5})") == ErrorKind::config);
    CHECK(kind(R"({"learning": "both"})") == ErrorKind::config);
    CHECK(kind(R"({"seed": "one"})") == ErrorKind::config);
    CHECK(kind(R"({"probe": {"targets": ["mood"]}})") == ErrorKind::config);
}

TEST_CASE("ingest writes the working lexicon with full toy coverage") {
    auto c = toy_config("ingest");
    cmd_ingest(c);
    auto cov = read_json(fs::path(c.paths.out) / "coverage.json");
    CHECK(cov["hit_ratio"] == 1.0);
    CHECK(cov["working_entries"] == 200);
    CHECK(cov["config"] == json::parse(c.to_json().dump()));
    CHECK(load_lexicon(fs::path(c.paths.out) / "working_lexicon.csv").size() == 200);
    CHECK(ExperimentConfig::load(fs::path(c.paths.out) / "config.json").to_json() == c.to_json());
}

TEST_CASE("the CLI maps failures onto exit codes") {
    auto dir = testing::scratch_dir("cli");
    auto c = toy_config("cli_out");
    c.paths.embeddings = (dir / "nowhere.vec").string();
    testing::spit(dir / "missing.json", c.to_json().dump());
    auto r = run_cli("--config " + (dir / "missing.json").string() + " ingest", dir);
    CHECK(r.code == 3);
    CHECK(r.err.find("nowhere.vec") != std::string::npos);

    testing::spit(dir / "bad.json", R"({"gram_size": 9})");
    CHECK(run_cli("--config " + (dir / "bad.json").string() + " ingest", dir).code == 2);
    CHECK(run_cli("frobnicate", dir).code == 2);
    CHECK(run_cli("--help", dir).code == 0);

    auto good = toy_config("cli_good");
    good.mapping.ridge = 0.0;
    testing::spit(dir / "singular.json", good.to_json().dump());
    CHECK(run_cli("--config " + (dir / "singular.json").string() + " comprehend", dir).code == 4);

    testing::spit(dir / "good.json", toy_config("cli_good").to_json().dump());
    CHECK(run_cli("--config " + (dir / "good.json").string() + " --out " + (dir / "o").string() + " --seed 5 split", dir).code == 0);
    CHECK(read_json(dir / "o" / "split.json")["seed"] == 5);
}

TEST_CASE("comprehension is exact when meanings are linear in the form cues") {
    // S = C F with F in the row space of the training cues, so the minimum-norm
    // solution recovers F and predicts held-out words exactly as well.
    auto c = toy_config("linear");
    auto full = load_lexicon(c.paths.lexicon);
    std::set<std::string> train_cues;
    for (const auto& e : full)
        if (e.frequency > c.split.threshold)
            for (const auto& g : extract_ngrams(e.surface, 3)) train_cues.insert(g);
    // held-out words with a cue never seen in training are not linearly predictable
    Lexicon lex;
    for (const auto& e : full) {
        bool seen = true;
        for (const auto& g : extract_ngrams(e.surface, 3)) seen = seen && train_cues.count(g);
        if (seen) lex.push_back(e);
    }
    const fs::path lex_path = fs::path(c.paths.out) / "linear.csv";
    save_lexicon(lex_path, lex);
    c.paths.lexicon = lex_path.string();

    auto words = surfaces(lex);
    auto inv = build_inventory(words, 3);
    Eigen::MatrixXd cues = build_form_matrix(words, inv).dense();
    std::vector<Eigen::Index> train;
    for (std::size_t i = 0; i < lex.size(); ++i)
        if (lex[i].frequency > c.split.threshold) train.push_back(static_cast<Eigen::Index>(i));
    const auto n_test = lex.size() - train.size();
    REQUIRE(n_test >= 10);
    std::mt19937_64 rng(31);
    Eigen::MatrixXd f = cues(train, Eigen::all).transpose() * testing::random_matrix(static_cast<Eigen::Index>(train.size()), 12, rng);
    Eigen::MatrixXd s = cues * f;
    for (Eigen::Index i = 0; i < s.rows(); ++i)
        for (Eigen::Index j = 0; j < i; ++j) REQUIRE((s.row(i) - s.row(j)).norm() > 1e-6);
    std::string vec = std::to_string(words.size()) + " 12\n";
    for (std::size_t i = 0; i < words.size(); ++i) {
        vec += words[i];
        char buf[40];
        for (Eigen::Index j = 0; j < 12; ++j) {
            std::snprintf(buf, sizeof buf, " %.17g", s(static_cast<Eigen::Index>(i), j));
            vec += buf;
        }
        vec += '\n';
    }
    testing::spit(fs::path(c.paths.out) / "linear.vec", vec);
    c.paths.embeddings = (fs::path(c.paths.out) / "linear.vec").string();
    c.mapping.ridge = 1e-9;
    cmd_comprehend(c);
    auto summary = read_json(fs::path(c.paths.out) / "comprehension_summary.json");
    CHECK(summary["train"]["type_accuracy_at_1"] == 1.0);
    CHECK(summary["test"]["type_accuracy_at_1"] == 1.0);
    CHECK(summary["test_words"] == n_test);
}

TEST_CASE("gold-vector production reproduces every word") {
    auto c = toy_config("gold");
    c.production.what = "gold";
    c.mapping.ridge = 1e-6;
    c.split.mode = "none";
    cmd_produce(c);
    auto summary = read_json(fs::path(c.paths.out) / "production_summary.json");
    CHECK(summary["words"] == 200);
    CHECK(summary["accuracy"] == 1.0);
    CHECK(summary["config"]["production"]["what"] == "gold");
}

TEST_CASE("probe, productivity and report write their tables and plots") {
    auto c = toy_config("analysis");
    cmd_comprehend(c);
    cmd_probe(c);
    cmd_productivity(c);
    c.report.results = (fs::path(c.paths.out) / "comprehension_train.csv").string();
    cmd_report(c);
    const fs::path out = c.paths.out;
    auto probe = testing::slurp(out / "probe_class.csv");
    CHECK(probe.rfind("cell,n_class,n_lexeme,n_token,lda_pct,lda_cv_pct,baseline_pct\nall,4,20,200,", 0) == 0);
    CHECK(probe.find("\nshift,") != std::string::npos);
    CHECK(probe.find("\nsg_gen,") != std::string::npos);
    CHECK(fs::exists(out / "probe_case.csv"));
    CHECK(testing::slurp(out / "productivity.csv").find("\n38,5,3,212,1,") != std::string::npos);
    for (const char* m : {"logP", "logV", "logV1", "logMedian", "logPstar"}) {
        auto svg = testing::slurp(out / (std::string("scatter_") + m + ".svg"));
        CHECK(svg.rfind("<svg", 0) == 0);
        CHECK(svg.find("Spearman") != std::string::npos);
    }
    CHECK(testing::slurp(out / "correlations.csv").rfind("measure,performance,n_classes,rho,p_value,note\n", 0) == 0);
}

}
