#include <random>

#include "doctest.h"
#include "dlm/cues.hpp"
#include "dlm/embeddings.hpp"
#include "dlm/error.hpp"
#include "dlm/evaluation.hpp"
#include "dlm/linear.hpp"
#include "dlm/network.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace dlm;

TEST_SUITE("mappings") {

TEST_CASE("square invertible system is recovered exactly") {
    std::mt19937_64 rng(3);
    Eigen::MatrixXd x = testing::random_matrix(8, 8, rng);
    Eigen::MatrixXd b = testing::random_matrix(8, 3, rng);
    auto m = solve_linear(x, x * b);
    CHECK((m.weights - b).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((apply_mapping(m, x) - x * b).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("constant row weights give the unweighted solution") {
    std::mt19937_64 rng(4);
    Eigen::MatrixXd x = testing::random_matrix(30, 6, rng), y = testing::random_matrix(30, 4, rng);
    std::vector<double> w(30, 3.5);
    SolveOptions opt;
    opt.row_weights = std::span<const double>(w);
    CHECK((solve_linear(x, y, opt).weights - solve_linear(x, y).weights).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("frequency weights equal row replication") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> f(1, 10);
    Eigen::MatrixXd x = testing::random_matrix(50, 20, rng), y = testing::random_matrix(50, 7, rng);
    std::vector<int> counts(50);
    std::vector<double> w(50);
    for (int i = 0; i < 50; ++i) w[i] = counts[i] = f(rng);
    SolveOptions opt;
    opt.row_weights = std::span<const double>(w);
    auto m = solve_linear(x, y, opt);
    CHECK(m.learning == Learning::fil);
    CHECK((m.weights - oracle::replicated_solve(x, y, counts)).cwiseAbs().maxCoeff() < 1e-8);

    // the sparse path agrees with the dense one
    Eigen::MatrixXd binary = (x.array() > 0.3).cast<double>();
    binary.col(0).setOnes();
    Eigen::SparseMatrix<double, Eigen::RowMajor> sp = binary.sparseView();
    opt.ridge = 1e-3;
    CHECK((solve_linear(sp, y, opt).weights - solve_linear(binary, y, opt).weights).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("identity and zero mappings") {
    std::mt19937_64 rng(6);
    Eigen::MatrixXd rows = testing::random_matrix(5, 4, rng);
    LinearMapping id{Eigen::MatrixXd::Identity(4, 4)};
    CHECK(apply_mapping(id, rows) == rows);
    LinearMapping zero{Eigen::MatrixXd::Zero(4, 2)};
    CHECK(apply_mapping(zero, rows).isZero(0.0));
    CHECK_THROWS_AS(apply_mapping(zero, Eigen::MatrixXd::Ones(2, 3)), Error);
}

TEST_CASE("rank-deficient systems need a ridge") {
    Eigen::MatrixXd x(3, 2);
    x << 1, 2, 2, 4, 3, 6;
    Eigen::MatrixXd y = Eigen::MatrixXd::Ones(3, 1);
    try {
        solve_linear(x, y);
        FAIL("expected a numerical error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::numerical);
        CHECK(std::string(e.what()).find("ridge") != std::string::npos);
    }
    SolveOptions opt;
    opt.ridge = 0.1;
    CHECK(solve_linear(x, y, opt).weights.allFinite());
    std::vector<double> negative{1, -1, 1};
    opt.row_weights = std::span<const double>(negative);
    CHECK_THROWS_AS(solve_linear(x, y, opt), Error);
}

TEST_CASE("mapping save and load round-trip with metadata") {
    std::mt19937_64 rng(7);
    LinearMapping m{testing::random_matrix(6, 3, rng), MappingKind::production, Learning::fil, 0.25};
    auto dir = testing::scratch_dir("mapping");
    save_mapping(dir / "g.bin", m, "abc");
    auto back = load_mapping(dir / "g.bin");
    CHECK(back.weights == m.weights);
    CHECK(back.kind == MappingKind::production);
    CHECK(back.learning == Learning::fil);
    CHECK(back.ridge == 0.25);
}

TEST_CASE("zero network outputs one half everywhere") {
    FeedforwardNetwork net({3, 5, 4});
    Eigen::VectorXd out = net.forward(Eigen::VectorXd(Eigen::VectorXd::Ones(3)));
    CHECK(out.size() == 4);
    CHECK((out.array() == 0.5).all());
}

TEST_CASE("analytic gradient matches central differences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int point = 0; point < 10; ++point) {
        auto net = FeedforwardNetwork::glorot({5, 4, 6}, 100 + point);
        for (auto& l : net.layers()) l.bias = testing::random_matrix(1, l.bias.size(), rng) * 0.3;
        Eigen::MatrixXd x = testing::random_matrix(3, 5, rng);
        Eigen::MatrixXd t = Eigen::MatrixXd::NullaryExpr(3, 6, [&] { return u(rng) < 0.5 ? 0.0 : 1.0; });
        auto grad = bce_gradient(net, x, t);
        CHECK(grad.loss == doctest::Approx(bce_loss(net, x, t)).epsilon(1e-12));
        double diff = 0, norm = 0;
        const double h = 1e-6;
        for (std::size_t l = 0; l < net.layers().size(); ++l) {
            auto probe = [&](double& param, double analytic) {
                const double keep = param;
                param = keep + h;
                const double up = bce_loss(net, x, t);
                param = keep - h;
                const double down = bce_loss(net, x, t);
                param = keep;
                const double numeric = (up - down) / (2 * h);
                diff += (numeric - analytic) * (numeric - analytic);
                norm += analytic * analytic;
            };
            auto& layer = net.layers()[l];
            for (Eigen::Index i = 0; i < layer.weights.size(); ++i) probe(layer.weights.data()[i], grad.layers[l].weights.data()[i]);
            for (Eigen::Index i = 0; i < layer.bias.size(); ++i) probe(layer.bias.data()[i], grad.layers[l].bias.data()[i]);
        }
        CHECK(std::sqrt(diff / norm) < 1e-4);
    }
}

TEST_CASE("network save and load round-trip") {
    auto net = FeedforwardNetwork::glorot({4, 3, 5}, 9);
    net.trained_epochs = 12;
    auto dir = testing::scratch_dir("network");
    save_network(dir / "n.bin", net);
    auto back = load_network(dir / "n.bin");
    CHECK(back.layer_sizes() == net.layer_sizes());
    CHECK(back.trained_epochs == 12);
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(2, 4);
    CHECK(back.forward(x) == net.forward(x));
}

TEST_CASE("glorot initialization is bounded, seeded and has zero biases") {
    auto a = FeedforwardNetwork::glorot({10, 6, 4}, 1), b = FeedforwardNetwork::glorot({10, 6, 4}, 1);
    auto c = FeedforwardNetwork::glorot({10, 6, 4}, 2);
    CHECK(a.layers()[0].weights == b.layers()[0].weights);
    CHECK(a.layers()[0].weights != c.layers()[0].weights);
    CHECK(a.layers()[0].weights.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 16.0));
    CHECK(a.layers()[1].bias.isZero(0.0));
    CHECK(a.parameter_count() == 10 * 6 + 6 + 6 * 4 + 4);
}

TEST_CASE("a small network memorizes the toy lexicon") {
    auto lex = load_lexicon(testing::toy_dir() / "lexicon.csv");
    lex.resize(100);
    auto data = attach_embeddings(lex, testing::toy_dir() / "embeddings.vec");
    auto words = surfaces(data.entries);
    auto inv = build_inventory(words, 3);
    auto forms = build_form_matrix(words, inv);
    TrainingOptions opt;
    opt.hidden = {64};
    opt.batch_size = 16;
    opt.step_size = 0.01;
    opt.validation_fraction = 0.0;
    opt.seed = 1;
    TrainingHistory history;
    auto net = train_network(data.semantics, forms, opt, &history);
    CHECK(history.train_loss.size() == 100);
    CHECK(history.train_loss.back() < history.train_loss.front());
    Eigen::MatrixXd out = net.forward(data.semantics.values);
    auto report = evaluate_nearest(out, GoldPool(forms), {});
    CHECK(report.summary.type_accuracy_at_1 >= 0.99);

    // a training word's true cues are its top outputs, so thresholding recovers them
    for (std::size_t w = 0; w < words.size(); w += 17) {
        auto cues = forms.row(w);
        std::vector<double> row(out.cols());
        for (Eigen::Index j = 0; j < out.cols(); ++j) row[j] = out(static_cast<Eigen::Index>(w), j);
        std::vector<double> sorted = row;
        std::nth_element(sorted.begin(), sorted.begin() + (cues.size() - 1), sorted.end(), std::greater<>());
        for (auto c : cues) CHECK(row[c] >= sorted[cues.size() - 1]);
    }
}

TEST_CASE("early stopping restores the best validation epoch") {
    auto lex = load_lexicon(testing::toy_dir() / "lexicon.csv");
    auto data = attach_embeddings(lex, testing::toy_dir() / "embeddings.vec");
    auto words = surfaces(data.entries);
    auto inv = build_inventory(words, 3);
    auto forms = build_form_matrix(words, inv);
    TrainingOptions opt;
    opt.hidden = {32};
    opt.epochs = 200;
    opt.patience = 3;
    opt.batch_size = 8;
    opt.step_size = 0.05;
    opt.validation_fraction = 0.2;
    TrainingHistory h;
    auto net = train_network(data.semantics, forms, opt, &h);
    REQUIRE(!h.validation_loss.empty());
    const auto best = std::min_element(h.validation_loss.begin(), h.validation_loss.end()) - h.validation_loss.begin() + 1;
    CHECK(h.best_epoch == best);
    if (h.stopped_early) CHECK(static_cast<int>(h.validation_loss.size()) == h.best_epoch + opt.patience);
    CHECK(net.trained_epochs == static_cast<int>(h.validation_loss.size()));
}

}
