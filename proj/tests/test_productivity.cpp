#include <random>
#include <sstream>

#include "doctest.h"
#include "dlm/error.hpp"
#include "dlm/productivity.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace dlm;

namespace {

// One entry per lexeme is enough for the lexeme-level measures.
Lexicon lexemes_of(const std::vector<std::pair<std::string, int>>& lexemes) {
    Lexicon out;
    for (const auto& [lex, cls] : lexemes)
        out.push_back(testing::entry(lex, lex, Case::nominative, Number::singular, cls, 1));
    return out;
}

}  // namespace

TEST_SUITE("productivity") {

TEST_CASE("class measures unroll the definitions") {
    auto lex = lexemes_of({{"a", 1}, {"b", 1}, {"c", 1}});
    auto m = class_measures(lex, {{"a", 1}, {"b", 1}, {"c", 3}});
    REQUIRE(m.size() == 1);
    CHECK(m[0].V == 3);
    CHECK(m[0].V1 == 2);
    CHECK(m[0].N == 5);
    CHECK(m[0].P == doctest::Approx(0.4));
    CHECK(m[0].median_lemma_freq == 1.0);
    CHECK(m[0].Pstar == 1.0);
}

TEST_CASE("expanding productivity shares the hapaxes across classes") {
    auto lex = lexemes_of({{"a", 1}, {"b", 1}, {"c", 1}, {"d", 2}, {"e", 2}, {"f", 2}, {"g", 2}});
    auto m = class_measures(lex, {{"a", 1}, {"b", 1}, {"c", 9}, {"d", 1}, {"e", 1}, {"f", 1}, {"g", 4}});
    REQUIRE(m.size() == 2);
    CHECK(m[0].Pstar == doctest::Approx(0.4));
    CHECK(m[1].Pstar == doctest::Approx(0.6));
    CHECK(m[0].Pstar + m[1].Pstar == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(m[1].median_lemma_freq == 1.0);
}

TEST_CASE("a class without hapaxes backs off to zero") {
    auto lex = lexemes_of({{"a", 4}, {"b", 4}, {"c", 4}, {"d", 5}});
    auto m = class_measures(lex, {{"a", 2}, {"b", 3}, {"c", 8}, {"d", 1}});
    CHECK(m[0].V1 == 0);
    CHECK(m[0].P == 0.0);
    CHECK(m[0].logV1() == 0.0);
    CHECK(m[0].logP() == std::log(0.01));
    CHECK(m[0].Pstar == 0.0);
    CHECK(m[0].median_lemma_freq == 3.0);
    CHECK(m[1].too_small());
    CHECK_THROWS_AS(class_measures(lex, {{"a", 2}}), Error);
}

TEST_CASE("the toy lemma table matches a hand computation") {
    auto lex = load_lexicon(testing::toy_dir() / "lexicon.csv");
    auto freqs = load_lemma_frequencies(testing::toy_dir() / "lemma_freqs.csv");
    auto m = class_measures(lex, freqs);
    REQUIRE(m.size() == 4);
    // class 38: nainen 136, hevonen 1, kappalainen 1, ihminen 73, kärpänen 1
    const auto& c38 = m[2];
    CHECK(c38.class_id == 38);
    CHECK(c38.V == 5);
    CHECK(c38.V1 == 3);
    CHECK(c38.N == 212);
    CHECK(c38.median_lemma_freq == 1.0);
    CHECK(c38.P == 3.0 / 212.0);
    CHECK(c38.Pstar == 3.0 / 6.0);
    CHECK(c38.logV1() == std::log(4.0));
    CHECK(c38.logP() == std::log(3.0 / 212.0 + 0.01));
    CHECK(c38.logPstar() == std::log(0.5 + 0.01));
    double total = 0;
    for (const auto& c : m) total += c.Pstar;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));

    std::ostringstream csv;
    write_productivity_csv(csv, m);
    CHECK(csv.str().rfind("class,V,V1,N,median_lemma_freq,P,Pstar,logV,logV1,logMedian,logP,logPstar,too_small\n5,5,1,", 0) == 0);
}

TEST_CASE("class performance averages per class") {
    Lexicon lex{testing::entry("a", "a", Case::nominative, Number::singular, 3, 1),
                testing::entry("b", "b", Case::nominative, Number::singular, 3, 1),
                testing::entry("c", "c", Case::nominative, Number::ambiguous, 3, 1)};
    std::vector<WordPerformance> rows{{lex[0].key(), 0.2, 1.0, {}}, {lex[1].key(), 0.4, 1.0, {}}, {lex[2].key(), 0.9, 0.0, {}}};
    auto p = class_performance(rows, lex);
    REQUIRE(p.size() == 1);
    CHECK(*p[0].mean_target_correlation == doctest::Approx(0.3));
    CHECK(*p[0].mean_accuracy == 1.0);
    CHECK_FALSE(p[0].mean_support);
    CHECK(p[0].n_words == 2);
    CHECK(p[0].unstable);
    rows.push_back({"zzz|zzz|nominative|sg", 0.1, 0.0, {}});
    CHECK_THROWS_AS(class_performance(rows, lex), Error);
}

TEST_CASE("spearman worked examples") {
    std::vector<double> x{1, 2, 3, 4, 5}, up{2, 4, 8, 16, 32}, down{5, 4, 3, 2, 1}, y{1, 3, 2, 5, 4};
    CHECK(spearman(x, up).rho == 1.0);
    CHECK(spearman(x, up).p_value == 0.0);
    CHECK(spearman(x, down).rho == -1.0);
    // rank differences (0, 1, 1, 1, 1): 1 - 6 * 4 / (5 * 24)
    CHECK(spearman(x, y).rho == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(spearman(x, y).rho == doctest::Approx(oracle::spearman(x, y)).epsilon(1e-15));
    CHECK(spearman(x, y).p_value == doctest::Approx(0.10408803866182788).epsilon(1e-10));
    CHECK(mid_ranks(std::vector<double>{3, 1, 3, 2}) == std::vector<double>{3.5, 1, 3.5, 2});
    CHECK_THROWS_AS(spearman(x, std::vector<double>(5, 2.0)), Error);
}

TEST_CASE("spearman agrees with brute-force ranks on tied and untied data") {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> small(0, 4);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(12), y(12);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = trial % 2 ? small(rng) : g(rng);
            y[i] = trial % 2 ? small(rng) : g(rng);
        }
        if (oracle::brute_ranks(x) == std::vector<double>(12, 6.5) || oracle::brute_ranks(y) == std::vector<double>(12, 6.5))
            continue;
        CHECK(std::abs(spearman(x, y).rho - oracle::spearman(x, y)) < 1e-12);
    }
}

TEST_CASE("correlation report over per-class aggregates") {
    std::vector<ClassProductivity> prod(4);
    const int v1[] = {0, 3, 1, 6};
    for (int i = 0; i < 4; ++i) {
        prod[i].class_id = i + 1;
        prod[i].V = 10;
        prod[i].V1 = static_cast<std::size_t>(v1[i]);
        prod[i].N = 100;
        prod[i].median_lemma_freq = 2.0 + i;
        prod[i].P = v1[i] / 100.0;
        prod[i].Pstar = v1[i] / 10.0;
    }
    std::vector<ClassPerformance> perf(4);
    for (int i = 0; i < 4; ++i) {
        perf[i].class_id = i + 1;
        perf[i].mean_accuracy = prod[i].logV1();
        perf[i].mean_target_correlation = 0.5;
        perf[i].n_words = 10;
    }
    auto report = productivity_correlation_report(perf, prod);
    bool saw_v1 = false, saw_constant = false;
    for (const auto& r : report.rows) {
        if (r.measure == "logV1" && r.performance == "mean_accuracy") {
            saw_v1 = true;
            REQUIRE(r.result);
            CHECK(r.result->rho == doctest::Approx(1.0));
        }
        if (r.performance == "mean_target_correlation") {
            saw_constant = true;
            CHECK_FALSE(r.result);
            CHECK_FALSE(r.note.empty());
        }
        if (r.measure == "logV") CHECK_FALSE(r.result);
    }
    CHECK(saw_v1);
    CHECK(saw_constant);

    prod[2].V = 2;
    prod[3].V = 1;
    CHECK_THROWS_AS(productivity_correlation_report(perf, prod), Error);
}

}
