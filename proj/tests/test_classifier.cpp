#include "terrain/classifier.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

using namespace terrain;

namespace {

KnnModel model_1d(const std::vector<double>& points, const std::vector<TerrainLabel>& labels, int k) {
    KnnModel model;
    model.points = Eigen::Map<const Vector>(points.data(), static_cast<Index>(points.size()));
    model.labels = labels;
    model.k = k;
    return model;
}

Vector query_1d(double x) {
    Vector q(1);
    q << x;
    return q;
}

} // namespace

TEST_CASE("knn_classify nails a training point at k=1") {
    const auto model = model_1d({0.0, 1.0, 2.0}, {"a", "b", "c"}, 1);
    const Prediction pred = knn_classify(model, query_1d(1.0));
    CHECK(pred.label == "b");
    CHECK(pred.max_distance == 0.0);
    CHECK(pred.votes.at("b") == 1);
    CHECK(pred.confidence() == doctest::Approx(1.0));
}

TEST_CASE("knn_classify majority vote with k=3") {
    const auto model = model_1d({0.0, 1.0, 2.0, 10.0, 11.0}, {"A", "A", "B", "B", "B"}, 3);
    const Prediction pred = knn_classify(model, query_1d(0.0));
    CHECK(pred.label == "A");
    CHECK(pred.votes.at("A") == 2);
    CHECK(pred.votes.at("B") == 1);
    CHECK(pred.max_distance == doctest::Approx(2.0));
    CHECK(pred.confidence() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("knn_classify breaks vote ties with the nearest neighbour") {
    const auto model = model_1d({0.5, -0.6, 5.0}, {"A", "B", "B"}, 2);
    const Prediction pred = knn_classify(model, query_1d(0.0));
    CHECK(pred.votes.at("A") == 1);
    CHECK(pred.votes.at("B") == 1);
    CHECK(pred.label == "A");  // 0.5 beats 0.6

    // exact distance ties break toward the lower training-point index
    const auto sym = model_1d({1.0, -1.0}, {"A", "B"}, 1);
    CHECK(knn_classify(sym, query_1d(0.0)).label == "A");

    CHECK_THROWS_AS(knn_classify(model, Vector::Zero(2)), SchemaError);
}

TEST_CASE("knn_classify matches the exhaustive oracle") {
    std::mt19937_64 rng(67);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::vector<TerrainLabel> pool = {"a", "b", "c"};
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 20 + static_cast<int>(rng() % 200);
        const int dim = 1 + static_cast<int>(rng() % 4);
        KnnModel model;
        model.k = 1 + static_cast<int>(rng() % 7);
        model.points.resize(n, dim);
        std::vector<std::vector<double>> raw(static_cast<std::size_t>(n),
                                             std::vector<double>(static_cast<std::size_t>(dim)));
        for (int i = 0; i < n; ++i) {
            model.labels.push_back(pool[rng() % 3]);
            for (int j = 0; j < dim; ++j) {
                const double v = gauss(rng);
                model.points(i, j) = v;
                raw[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
            }
        }
        for (int q = 0; q < 20; ++q) {
            Vector query(dim);
            std::vector<double> raw_query(static_cast<std::size_t>(dim));
            for (int j = 0; j < dim; ++j) {
                query(j) = gauss(rng);
                raw_query[static_cast<std::size_t>(j)] = query(j);
            }
            const Prediction pred = knn_classify(model, query);
            CHECK(pred.label == oracle::knn(raw, model.labels, model.k, raw_query));
            int total = 0;
            for (const auto& [l, c] : pred.votes) total += c;
            CHECK(total == model.k);

            // scaling points and query together must not change the label
            KnnModel scaled = model;
            scaled.points *= 3.5;
            CHECK(knn_classify(scaled, (3.5 * query).eval()).label == pred.label);
        }
    }
}

TEST_CASE("permuting training points leaves predictions unchanged") {
    // distances are almost surely distinct for continuous data, so the index
    // tie-break never fires and order cannot matter
    std::mt19937_64 rng(71);
    std::normal_distribution<double> gauss(0.0, 1.0);
    KnnModel model;
    model.k = 5;
    model.points.resize(60, 3);
    const std::vector<TerrainLabel> pool = {"a", "b", "c"};
    for (Index i = 0; i < 60; ++i) {
        model.labels.push_back(pool[rng() % 3]);
        for (Index j = 0; j < 3; ++j) model.points(i, j) = gauss(rng);
    }

    KnnModel shuffled;
    shuffled.k = model.k;
    std::vector<Index> order(60);
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    shuffled.points.resize(60, 3);
    for (Index i = 0; i < 60; ++i) {
        shuffled.points.row(i) = model.points.row(order[static_cast<std::size_t>(i)]);
        shuffled.labels.push_back(model.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
    }

    for (int q = 0; q < 50; ++q) {
        Vector query(3);
        for (Index j = 0; j < 3; ++j) query(j) = gauss(rng);
        const Prediction a = knn_classify(model, query);
        const Prediction b = knn_classify(shuffled, query);
        CHECK(a.label == b.label);
        CHECK(a.votes == b.votes);
        CHECK(a.max_distance == b.max_distance);
    }
}

TEST_CASE("evaluate builds the confusion matrix and accuracy") {
    const std::vector<TerrainLabel> classes = {"A", "B"};
    const auto [perfect, acc1] = evaluate({"A", "B", "A"}, {"A", "B", "A"}, classes);
    CHECK(acc1 == 1.0);
    CHECK(perfect.counts(0, 0) == 2);
    CHECK(perfect.counts(1, 1) == 1);
    CHECK(perfect.counts(0, 1) == 0);

    const auto [mixed, acc2] = evaluate({"A", "A", "B"}, {"A", "B", "B"}, classes);
    CHECK(acc2 == doctest::Approx(2.0 / 3.0));
    CHECK(mixed.counts(1, 0) == 1);  // true B predicted A
    CHECK(mixed.trace() == 2);
    CHECK(mixed.total() == 3);

    CHECK_THROWS_AS(evaluate({"A"}, {"A", "B"}, classes), SchemaError);
    CHECK_THROWS_AS(evaluate({"C"}, {"A"}, classes), SchemaError);
    CHECK_THROWS_AS(evaluate({}, {}, classes), SchemaError);
}

TEST_CASE("evaluate report rendering") {
    const auto [matrix, accuracy] = evaluate({"A", "A", "B"}, {"A", "B", "B"}, {"A", "B"});
    std::ostringstream text, csv;
    print_report(text, matrix, accuracy);
    CHECK(text.str().find("accuracy: 0.6667 (2/3)") != std::string::npos);
    write_confusion_csv(csv, matrix);
    CHECK(csv.str() == "true\\pred,A,B\nA,1,0\nB,1,1\n");
}

TEST_CASE("transition_lag measures detection delay") {
    std::vector<TerrainLabel> truth(20, "A");
    for (std::size_t i = 10; i < truth.size(); ++i) truth[i] = "B";

    SUBCASE("identical sequences have zero lag") {
        const auto lags = transition_lag(truth, truth);
        REQUIRE(lags.size() == 1);
        CHECK(lags[0].index == 10);
        CHECK(lags[0].lag == 0);
        CHECK(lags[0].matched);
    }

    SUBCASE("late detection reports the delay") {
        std::vector<TerrainLabel> pred(20, "A");
        for (std::size_t i = 13; i < pred.size(); ++i) pred[i] = "B";
        const auto lags = transition_lag(pred, truth);
        REQUIRE(lags.size() == 1);
        CHECK(lags[0].lag == 3);
        CHECK(lags[0].matched);
    }

    SUBCASE("a never-matching prediction reports the sentinel") {
        const std::vector<TerrainLabel> pred(20, "A");
        const auto lags = transition_lag(pred, truth);
        REQUIRE(lags.size() == 1);
        CHECK(lags[0].lag == 10);  // remaining length
        CHECK_FALSE(lags[0].matched);
    }

    CHECK_THROWS_AS(transition_lag({"A"}, {"A", "B"}), SchemaError);
}

TEST_CASE("accuracy_excluding_transitions masks post-transition frames") {
    std::vector<TerrainLabel> truth(12, "A");
    for (std::size_t i = 6; i < truth.size(); ++i) truth[i] = "B";
    std::vector<TerrainLabel> pred = truth;
    pred[6] = pred[7] = "A";  // wrong only right after the switch

    CHECK(accuracy_excluding_transitions(pred, truth, 2) == 1.0);
    CHECK(accuracy_excluding_transitions(pred, truth, 0) == doctest::Approx(10.0 / 12.0));
    // margin covering everything after the transition leaves the A prefix
    CHECK(accuracy_excluding_transitions(pred, truth, 100) == 1.0);
}
