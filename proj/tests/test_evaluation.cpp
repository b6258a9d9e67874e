#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dlm/cues.hpp"
#include "dlm/error.hpp"
#include "dlm/evaluation.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace dlm;

namespace {

std::vector<double> to_vec(const Eigen::RowVectorXd& r) { return {r.data(), r.data() + r.size()}; }

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("target correlation") {
    Eigen::VectorXd v(4);
    v << 0.3, -1.2, 2.0, 0.1;
    CHECK(target_correlation(v, v) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(target_correlation(v, Eigen::VectorXd(-v)) == doctest::Approx(-1.0).epsilon(1e-15));
    Eigen::VectorXd a(3), b(3);
    a << 1, 2, 3;
    b << 1, 2, 4;
    CHECK(target_correlation(a, b) == doctest::Approx(oracle::pearson({1, 2, 3}, {1, 2, 4})).epsilon(1e-14));
    CHECK(target_correlation(a, b) == doctest::Approx(0.9819805060619657).epsilon(1e-14));
    CHECK_THROWS_AS(target_correlation(Eigen::VectorXd(Eigen::VectorXd::Ones(3)), b), Error);
}

TEST_CASE("perfect predictions are all correct") {
    std::mt19937_64 rng(1);
    Eigen::MatrixXd gold = testing::random_matrix(12, 5, rng);
    auto r = evaluate_nearest(gold, GoldPool(gold), {});
    CHECK(r.summary.type_accuracy_at_1 == 1.0);
    CHECK(r.summary.mean_target_correlation == doctest::Approx(1.0));
    for (const auto& w : r.per_word) CHECK(w.rank == 1);
}

TEST_CASE("pool correlations match the Pearson oracle for dense and binary pools") {
    std::mt19937_64 rng(2);
    auto lex = load_lexicon(testing::toy_dir() / "lexicon.csv");
    auto words = surfaces(lex);
    words.resize(40);
    auto inv = build_inventory(words, 3);
    auto forms = build_form_matrix(words, inv);
    Eigen::MatrixXd dense = forms.dense();
    Eigen::MatrixXd pred = testing::random_matrix(3, dense.cols(), rng);
    Eigen::MatrixXd sparse_c = GoldPool(forms).correlations(pred);
    Eigen::MatrixXd dense_c = GoldPool(dense).correlations(pred);
    for (Eigen::Index i = 0; i < pred.rows(); ++i)
        for (Eigen::Index j = 0; j < dense.rows(); ++j) {
            const double expect = oracle::pearson(to_vec(pred.row(i)), to_vec(dense.row(j)));
            CHECK(sparse_c(i, j) == doctest::Approx(expect).epsilon(1e-12));
            CHECK(dense_c(i, j) == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("single-row pool") {
    Eigen::MatrixXd gold(1, 3);
    gold << 1, 0, 2;
    Eigen::MatrixXd pred(1, 3);
    pred << 0, 1, 0.5;
    auto r = evaluate_nearest(pred, GoldPool(gold), {});
    CHECK(r.summary.type_accuracy_at_1 == 1.0);
}

TEST_CASE("identical gold rows resolve to the first and flag the tie") {
    Eigen::MatrixXd gold(3, 3);
    gold << 1, 0, 0, 0, 1, 2, 0, 1, 2;
    Eigen::MatrixXd pred(1, 3);
    pred << 0, 1, 2.1;
    std::vector<std::size_t> targets{2};
    EvaluationOptions opt;
    opt.k = 2;
    auto r = evaluate_against_pool(pred, GoldPool(gold), targets, opt);
    CHECK(r.per_word[0].rank == 2);
    CHECK_FALSE(r.per_word[0].correct_at_1);
    CHECK(r.per_word[0].correct_at_k);
    CHECK(r.per_word[0].tied);
    CHECK(r.summary.ties == 1);

    targets = {1};
    auto first = evaluate_against_pool(pred, GoldPool(gold), targets, opt);
    CHECK(first.per_word[0].rank == 1);
    CHECK(first.per_word[0].correct_at_1);
}

TEST_CASE("constant predictions are undefined and ranked last") {
    std::mt19937_64 rng(3);
    Eigen::MatrixXd gold = testing::random_matrix(4, 3, rng);
    Eigen::MatrixXd pred = gold;
    pred.row(1).setConstant(0.7);
    auto r = evaluate_nearest(pred, GoldPool(gold), {});
    CHECK(std::isnan(r.per_word[1].target_correlation));
    CHECK(r.per_word[1].rank == 4);
    CHECK(r.summary.undefined == 1);
    CHECK(r.summary.type_accuracy_at_1 == 0.75);
}

TEST_CASE("accuracy at k grows with k and token weights reduce to types under uniform frequencies") {
    std::mt19937_64 rng(4);
    Eigen::MatrixXd gold = testing::random_matrix(30, 6, rng);
    Eigen::MatrixXd pred = gold + 1.2 * testing::random_matrix(30, 6, rng);
    std::vector<double> uniform(30, 3.0);
    double previous = 0.0;
    for (std::size_t k = 1; k <= 30; ++k) {
        EvaluationOptions opt;
        opt.k = k;
        opt.frequencies = std::span<const double>(uniform);
        auto r = evaluate_nearest(pred, GoldPool(gold), opt);
        CHECK(r.summary.type_accuracy_at_k >= previous);
        previous = r.summary.type_accuracy_at_k;
        CHECK(*r.summary.token_accuracy_at_1 == doctest::Approx(r.summary.type_accuracy_at_1).epsilon(1e-15));
        CHECK(*r.summary.token_accuracy_at_k == doctest::Approx(r.summary.type_accuracy_at_k).epsilon(1e-15));
    }
    CHECK(previous == 1.0);
}

TEST_CASE("token accuracy weights words by frequency") {
    Eigen::MatrixXd gold(3, 3);
    gold << 1, 0, 0, 0, 1, 0, 0, 0, 1;
    Eigen::MatrixXd pred(3, 3);
    pred << 1, 0, 0, 0, 1, 0, 1, 0, 0.5;
    std::vector<double> f{1, 1, 8};
    EvaluationOptions opt;
    opt.k = 1;
    opt.frequencies = std::span<const double>(f);
    auto r = evaluate_nearest(pred, GoldPool(gold), opt);
    CHECK(r.summary.type_accuracy_at_1 == doctest::Approx(2.0 / 3.0));
    CHECK(*r.summary.token_accuracy_at_1 == doctest::Approx(0.2));
}

TEST_CASE("ranking is invariant under positive affine transforms of a prediction") {
    std::mt19937_64 rng(5);
    Eigen::MatrixXd gold = testing::random_matrix(25, 8, rng);
    Eigen::MatrixXd pred = gold + testing::random_matrix(25, 8, rng);
    GoldPool pool(gold);
    Eigen::MatrixXd base = pool.correlations(pred);
    Eigen::MatrixXd shifted = pool.correlations(Eigen::MatrixXd((3.7 * pred.array() + 11.0).matrix()));
    auto r1 = evaluate_nearest(pred, pool, {});
    auto r2 = evaluate_nearest(Eigen::MatrixXd((3.7 * pred.array() + 11.0).matrix()), pool, {});
    for (Eigen::Index i = 0; i < pred.rows(); ++i) {
        Eigen::Index a, b;
        base.row(i).maxCoeff(&a);
        shifted.row(i).maxCoeff(&b);
        CHECK(a == b);
        CHECK(r1.per_word[static_cast<std::size_t>(i)].rank == r2.per_word[static_cast<std::size_t>(i)].rank);
        std::vector<Eigen::Index> o1(static_cast<std::size_t>(gold.rows())), o2(o1.size());
        std::iota(o1.begin(), o1.end(), 0);
        std::iota(o2.begin(), o2.end(), 0);
        std::stable_sort(o1.begin(), o1.end(), [&](auto x, auto y) { return base(i, x) > base(i, y); });
        std::stable_sort(o2.begin(), o2.end(), [&](auto x, auto y) { return shifted(i, x) > shifted(i, y); });
        CHECK(o1 == o2);
    }
}

TEST_CASE("report csv and summary json") {
    Eigen::MatrixXd gold(2, 2);
    gold << 1, 0, 0, 1;
    std::vector<std::string> keys{"a|a|nominative|sg", "b|b|nominative|sg"};
    EvaluationOptions opt;
    opt.k = 1;
    opt.keys = std::span<const std::string>(keys);
    auto r = evaluate_nearest(gold, GoldPool(gold), opt);
    std::ostringstream csv;
    write_report_csv(csv, r);
    CHECK(csv.str().rfind("word,correlation,rank,correct_at_1,correct_at_k,tied\na|a|nominative|sg,", 0) == 0);
    CHECK(csv.str().find(",1,1,1,0\nb|b|nominative|sg,") != std::string::npos);
    auto j = nlohmann::json::parse(summary_json(r.summary));
    CHECK(j["type_accuracy_at_1"] == 1.0);
    CHECK(j["token_accuracy_at_1"].is_null());
}

}
