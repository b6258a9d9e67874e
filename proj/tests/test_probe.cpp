#include <random>
#include <sstream>

#include "doctest.h"
#include "dlm/embeddings.hpp"
#include "dlm/error.hpp"
#include "dlm/probe.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace dlm;
using Strings = std::vector<std::string>;

TEST_SUITE("probe") {

TEST_CASE("majority baseline") {
    CHECK(majority_baseline(Strings{"a", "a", "b"}) == doctest::Approx(2.0 / 3.0));
    CHECK(majority_baseline(Strings{"c", "c", "c"}) == 1.0);
    CHECK(majority_baseline(Strings{"a", "b", "c", "d"}) == 0.25);
    CHECK_THROWS_AS(majority_baseline(Strings{}), Error);
}

TEST_CASE("a class mean is classified as that class") {
    Eigen::MatrixXd means(3, 2);
    means << 1, 0, -1, 0, 0, 3;
    auto m = LdaModel::from_statistics({"a", "b", "c"}, means, Eigen::MatrixXd::Identity(2, 2), Eigen::Vector3d::Constant(1.0 / 3), 0.0);
    for (Eigen::Index k = 0; k < 3; ++k) CHECK(m.predict(means.row(k).transpose()).label == static_cast<std::size_t>(k));

    // equidistant from a and b, far from c
    auto p = m.predict(Eigen::Vector2d(0, -2));
    CHECK(p.label == 0);
    CHECK(p.tie);
}

TEST_CASE("two-class decision agrees with the closed-form boundary") {
    // symmetric offsets make the sample means and pooled covariance exact:
    // scatter per class diag(2, 8), pooled over 8 - 2 dof
    const Eigen::Vector2d mu_a(1, 2), mu_b(-1, 0.5);
    const Eigen::Vector2d offsets[] = {{1, 0}, {-1, 0}, {0, 2}, {0, -2}};
    Eigen::MatrixXd x(8, 2);
    Strings y;
    for (int i = 0; i < 4; ++i) {
        x.row(i) = (mu_a + offsets[i]).transpose();
        x.row(4 + i) = (mu_b + offsets[i]).transpose();
    }
    for (int i = 0; i < 8; ++i) y.push_back(i < 4 ? "a" : "b");
    auto m = LdaModel::fit(x, y, 0.0);
    const Eigen::Matrix2d sigma = Eigen::Vector2d(4.0 / 6.0, 16.0 / 6.0).asDiagonal();
    CHECK((m.covariance() - sigma).cwiseAbs().maxCoeff() < 1e-8);

    const Eigen::Vector2d w = sigma.inverse() * (mu_a - mu_b);
    const double c = -0.5 * (mu_a + mu_b).dot(w);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-4, 4);
    for (int i = 0; i < 200; ++i) {
        Eigen::Vector2d q(u(rng), u(rng));
        const double side = w.dot(q) + c;
        if (std::abs(side) < 1e-6) continue;
        CHECK(m.predict_label(q) == (side > 0 ? "a" : "b"));
    }
}

TEST_CASE("separable clusters are classified perfectly") {
    std::mt19937_64 rng(19);
    std::normal_distribution<double> g(0, 0.3);
    Eigen::MatrixXd x(60, 3);
    Strings y;
    for (Eigen::Index i = 0; i < 60; ++i) {
        const double centre = i < 30 ? 5.0 : -5.0;
        x.row(i) << centre + g(rng), g(rng), -centre + g(rng);
        y.push_back(i < 30 ? "near" : "far");
    }
    auto m = LdaModel::fit(x, y, 0.1);
    CHECK(resubstitution_accuracy(m, x, y) == 1.0);
    CHECK(loocv(x, y, 0.1).accuracy == 1.0);
}

TEST_CASE("interleaved identical points defeat leave-one-out") {
    Eigen::MatrixXd x(8, 1);
    x << 0, 1, 10, 11, 0, 1, 10, 11;
    Strings y{"a", "a", "a", "a", "b", "b", "b", "b"};
    CHECK(loocv(x, y, 0.0, LoocvMethod::refit).accuracy == 0.0);
    CHECK(loocv(x, y, 0.0, LoocvMethod::downdate).accuracy == 0.0);
}

TEST_CASE("leave-one-out fast path equals naive refitting") {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> label(0, 3);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::Index n = 40 + 30 * trial;
        Eigen::MatrixXd x = testing::random_matrix(n, 4, rng);
        Strings y;
        for (Eigen::Index i = 0; i < n; ++i) {
            y.push_back(std::string(1, static_cast<char>('a' + label(rng))));
            x(i, y.back()[0] - 'a') += 1.5;
        }
        y[0] = "z";  // a singleton label is never held out
        y[1] = "z";
        const double shrink = 0.05 * trial;
        auto naive = oracle::loocv_predictions(x, y, shrink);
        auto fast = loocv(x, y, shrink, LoocvMethod::downdate);
        auto refit = loocv(x, y, shrink, LoocvMethod::refit);
        std::size_t hits = 0, folds = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            CHECK(fast.predictions[i].value_or("") == naive[i]);
            CHECK(refit.predictions[i].value_or("") == naive[i]);
            if (!naive[i].empty()) ++folds, hits += naive[i] == y[i];
        }
        CHECK(fast.skipped == 2);
        CHECK(std::abs(fast.accuracy - static_cast<double>(hits) / static_cast<double>(folds)) < 1e-10);
        CHECK(std::abs(refit.accuracy - fast.accuracy) < 1e-10);
    }
}

TEST_CASE("fitting needs two labels with two members each") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 2);
    CHECK_THROWS_AS(LdaModel::fit(x, Strings{"a", "a", "a"}, 0.1), Error);
    CHECK_THROWS_AS(LdaModel::fit(x, Strings{"a", "a", "b"}, 0.1), Error);
    CHECK_THROWS_AS(LdaModel::fit(Eigen::MatrixXd::Random(4, 2), Strings{"a", "a", "b", "b"}, 1.5), Error);
}

TEST_CASE("per-cell probing with one-hot class embeddings is perfect") {
    Lexicon lex;
    SemanticMatrix s;
    const int classes[] = {1, 2, 3};
    s.values = Eigen::MatrixXd::Zero(3 * 12 * 2, 3);
    Eigen::Index row = 0;
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 12; ++l)
            for (Number n : {Number::singular, Number::plural}) {
                const std::string lexeme = "w" + std::to_string(k) + "_" + std::to_string(l);
                lex.push_back(testing::entry(lexeme + (n == Number::plural ? "t" : ""), lexeme, Case::nominative, n,
                                             classes[k], 2));
                s.values(row++, k) = 1.0;
                s.row_ids.push_back(lex.back().key());
            }
    ProbeOptions opt;
    opt.min_tokens = 30;
    auto rows = probe_by_cell(lex, s, ProbeTarget::inflectional_class, opt);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.n_token == 36);
        CHECK(r.n_class == 3);
        CHECK(r.lda == 1.0);
        CHECK(r.lda_cv == 1.0);
        CHECK(r.baseline == doctest::Approx(1.0 / 3.0));
    }
    opt.min_tokens = 37;
    auto na = probe_by_cell(lex, s, ProbeTarget::inflectional_class, opt);
    CHECK_FALSE(na[0].lda);
    std::ostringstream csv;
    write_probe_csv(csv, na);
    CHECK(csv.str() == "cell,n_class,n_lexeme,n_token,lda_pct,lda_cv_pct,baseline_pct\n"
                       "pl_nom,3,36,36,NA,NA,NA\nsg_nom,3,36,36,NA,NA,NA\n");
}

TEST_CASE("probe labels") {
    auto e = testing::entry("talossa", "talo", Case::inessive, Number::singular, 1, 3);
    CHECK(probe_label(e, ProbeTarget::inflectional_class) == "1");
    CHECK(probe_label(e, ProbeTarget::grammatical_case) == "inessive");
    CHECK(probe_label(e, ProbeTarget::number) == "sg");
    CHECK(probe_label(e, ProbeTarget::case_number) == "sg_ine");
    e.inflectional_class.reset();
    CHECK_FALSE(probe_label(e, ProbeTarget::inflectional_class));
    CHECK_THROWS_AS(parse_probe_target("gender"), Error);
}

}
