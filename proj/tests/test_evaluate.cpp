#include "doctest.h"

#include "centershift/data.hpp"
#include "centershift/errors.hpp"
#include "centershift/evaluate.hpp"

using namespace centershift;

TEST_CASE("accuracy counting") {
    const std::vector<std::size_t> a{1, 2, 3, 4};
    CHECK(accuracy(a, a) == 1.0);
    const std::vector<std::size_t> none{0, 0, 0, 0};
    CHECK(accuracy(a, none) == 0.0);
    const std::vector<std::size_t> half{1, 2, 0, 0};
    CHECK(accuracy(a, half) == 0.5);
    CHECK_THROWS_AS(accuracy({}, {}), config_error);
    const std::vector<std::size_t> shorter{0, 0};
    CHECK_THROWS_AS(accuracy(a, shorter), config_error);
}

TEST_CASE("accuracy is invariant to simultaneous reordering") {
    Rng rng(70);
    std::vector<std::size_t> pred(50), truth(50);
    for (std::size_t i = 0; i < 50; ++i) {
        pred[i] = rng.index(4);
        truth[i] = rng.index(4);
    }
    const double base = accuracy(pred, truth);
    // reverse both
    std::vector<std::size_t> rp(pred.rbegin(), pred.rend());
    std::vector<std::size_t> rt(truth.rbegin(), truth.rend());
    CHECK(accuracy(rp, rt) == base);
}

TEST_CASE("a_distance_from_epsilon closed forms") {
    CHECK(a_distance_from_epsilon(0.5) == 0.0);
    CHECK(a_distance_from_epsilon(0.0) == 2.0);
    CHECK(a_distance_from_epsilon(0.05) == 1.8);
    CHECK(a_distance_from_epsilon(1.0 / 20.0) == 1.8);
    CHECK_THROWS_AS(a_distance_from_epsilon(0.7), config_error);
}

TEST_CASE("proxy_a_distance separates far-apart clouds and not identical ones") {
    Rng rng(71);
    Matrix2D near_a(60, 3), near_b(60, 3), far(60, 3);
    for (double& v : near_a.data) v = rng.normal();
    for (double& v : near_b.data) v = rng.normal();
    for (std::size_t i = 0; i < far.rows; ++i) {
        for (std::size_t k = 0; k < 3; ++k) far(i, k) = rng.normal(8.0, 1.0);
    }

    Rng eval_a(72);
    const ADistanceReport separated = proxy_a_distance(near_a, far, eval_a);
    CHECK(separated.dist_a > 1.5);

    Rng eval_b(73);
    const ADistanceReport overlapping = proxy_a_distance(near_a, near_b, eval_b);
    CHECK(overlapping.dist_a < 1.0);

    // field identity and ranges
    for (const auto& report : {separated, overlapping}) {
        CHECK(report.epsilon >= 0.0);
        CHECK(report.epsilon <= 0.5);
        CHECK(report.dist_a == a_distance_from_epsilon(report.epsilon));
    }
}

TEST_CASE("proxy_a_distance is deterministic given the split seed") {
    Rng rng(74);
    Matrix2D a(40, 2), b(40, 2);
    for (double& v : a.data) v = rng.normal();
    for (double& v : b.data) v = rng.normal(1.0, 1.0);
    Rng eval_a(75), eval_b(75);
    const ADistanceReport ra = proxy_a_distance(a, b, eval_a);
    const ADistanceReport rb = proxy_a_distance(a, b, eval_b);
    CHECK(ra.split_seed == rb.split_seed);
    CHECK(ra.epsilon == rb.epsilon);
    CHECK(ra.dist_a == rb.dist_a);
}

TEST_CASE("proxy_a_distance rejects undersized domains") {
    Matrix2D tiny(10, 2, 0.0);
    Matrix2D fine(30, 2, 0.0);
    Rng rng(76);
    CHECK_THROWS_AS(proxy_a_distance(tiny, fine, rng), config_error);
}

TEST_CASE("pseudo_accuracy compares pseudo labels against truth") {
    PseudoState state;
    state.labels = {0, 1, 2, 2};
    const std::vector<std::size_t> truth{0, 1, 2, 1};
    CHECK(pseudo_accuracy(state, truth) == 0.75);
}

TEST_CASE("random pseudo labels over five classes sit near chance") {
    Rng rng(77);
    PseudoState state;
    const std::size_t n = 5000;
    state.labels.resize(n);
    std::vector<std::size_t> truth(n);
    for (std::size_t i = 0; i < n; ++i) {
        state.labels[i] = rng.index(5);
        truth[i] = rng.index(5);
    }
    const double acc = pseudo_accuracy(state, truth);
    CHECK(acc > 0.15);
    CHECK(acc < 0.25);
}
