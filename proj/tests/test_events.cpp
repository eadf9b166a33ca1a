#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "alignrr/errors.hpp"
#include "alignrr/events.hpp"

using namespace alignrr;

namespace {

Trajectory make_trajectory(const std::vector<int>& states, double ret = 0.0) {
    Trajectory t;
    for (int s : states) t.steps.push_back({s, 0, 0.0});
    t.terminal_return = ret;
    t.final_state = states.back();
    return t;
}

// Net similarity of a clustering: every exemplar pays the preference, every
// other point earns its similarity to its exemplar.
double ap_objective(const Matrix& s, double pref, const std::vector<int>& exemplars,
                    const std::vector<int>& labels) {
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int e = exemplars[labels[i]];
        total += (static_cast<int>(i) == e) ? pref : s(i, e);
    }
    return total;
}

}  // namespace

TEST_CASE("successor representation: identity update with zero discount") {
    const Matrix m = build_successor_representation({{0, 0}}, 2, 1.0, 0.0, 1);
    CHECK(m(0, 0) == doctest::Approx(1.0));
    CHECK(m(0, 1) == doctest::Approx(0.0));
    CHECK(m(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("successor representation: TD fixed point matches (I - gP)^-1") {
    // two-state cycle; the closed form is the direct matrix inverse
    const double gamma = 0.99;
    Matrix p(2, 2);
    p << 0, 1, 1, 0;
    const Matrix oracle = (Matrix::Identity(2, 2) - gamma * p).inverse();

    const Matrix m =
        build_successor_representation({{0, 1}, {1, 0}}, 2, 0.1, gamma, 20000);
    CHECK((m - oracle).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("successor representation: chain MDP fixed point") {
    // 3-state chain 0 -> 1 -> 2 -> 0
    const double gamma = 0.9;
    Matrix p = Matrix::Zero(3, 3);
    p(0, 1) = p(1, 2) = p(2, 0) = 1.0;
    const Matrix oracle = (Matrix::Identity(3, 3) - gamma * p).inverse();
    const Matrix m =
        build_successor_representation({{0, 1}, {1, 2}, {2, 0}}, 3, 0.1, gamma, 5000);
    CHECK((m - oracle).cwiseAbs().maxCoeff() < 0.05);
    for (int i = 0; i < 3; ++i) CHECK(m(i, i) >= 1.0);
    CHECK((m.array() >= 0.0).all());
}

TEST_CASE("successor representation: rejected inputs") {
    CHECK_THROWS_AS(build_successor_representation({}, 2, 0.1, 0.9, 1), invalid_input);
    CHECK_THROWS_AS(build_successor_representation({{0, 5}}, 2, 0.1, 0.9, 1), invalid_input);
    CHECK_THROWS_AS(build_successor_representation({{0, 1}}, 2, 0.0, 0.9, 1), invalid_input);
    CHECK_THROWS_AS(build_successor_representation({{0, 1}}, 2, 0.1, 1.0, 1), invalid_input);
}

TEST_CASE("successor similarity: diagonal is the maximum") {
    Matrix m(3, 3);
    m << 1, 0, 0, 1, 0, 0, 0, 1, 0;  // rows 0 and 1 identical
    const Matrix sim = successor_similarity(m);
    CHECK(sim(0, 1) == doctest::Approx(0.0));
    CHECK(sim(0, 0) == doctest::Approx(0.0));
    CHECK(sim(0, 2) == doctest::Approx(-std::sqrt(2.0)));
}

TEST_CASE("successor similarity: matches brute-force distances") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(5, 4);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = normal(rng);
    const Matrix sim = successor_similarity(m);
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            double sq = 0.0;
            for (int k = 0; k < 4; ++k) sq += (m(i, k) - m(j, k)) * (m(i, k) - m(j, k));
            CHECK(sim(i, j) == doctest::Approx(-std::sqrt(sq)));
            CHECK(sim(i, j) == doctest::Approx(sim(j, i)));
            CHECK(sim(i, j) <= sim(i, i) + 1e-12);
        }
    }
}

TEST_CASE("affinity propagation: two separated pairs of identical points") {
    // points 0,0,10,10 on a line; similarity = -squared distance
    Eigen::Vector4d x(0.0, 0.0, 10.0, 10.0);
    Matrix s(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) s(i, j) = -(x(i) - x(j)) * (x(i) - x(j));

    const ClusterAssignment result = affinity_propagation(s, 0.5, 1000);
    CHECK(result.n_clusters == 2);
    CHECK(result.labels[0] == result.labels[1]);
    CHECK(result.labels[2] == result.labels[3]);
    CHECK(result.labels[0] != result.labels[2]);

    // exhaustive oracle over every exemplar set of the 4-point instance
    const double pref = -100.0;  // median of off-diagonal {0 x4, -100 x8}
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> best_labels;
    for (int mask = 1; mask < 16; ++mask) {
        std::vector<int> exemplars;
        for (int k = 0; k < 4; ++k)
            if (mask & (1 << k)) exemplars.push_back(k);
        std::vector<int> labels(4);
        for (int i = 0; i < 4; ++i) {
            int arg = 0;
            for (std::size_t c = 0; c < exemplars.size(); ++c) {
                if (exemplars[c] == i) {
                    arg = static_cast<int>(c);
                    break;
                }
                if (s(i, exemplars[c]) > s(i, exemplars[arg])) arg = static_cast<int>(c);
            }
            labels[i] = arg;
        }
        const double value = ap_objective(s, pref, exemplars, labels);
        if (value > best) {
            best = value;
            best_labels = labels;
        }
    }
    // same partition as the oracle optimum
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK((result.labels[i] == result.labels[j]) ==
                  (best_labels[i] == best_labels[j]));
}

TEST_CASE("affinity propagation: single point") {
    Matrix s(1, 1);
    s << 0.0;
    const ClusterAssignment result = affinity_propagation(s, 0.5, 100);
    CHECK(result.n_clusters == 1);
    CHECK(result.labels[0] == 0);
}

TEST_CASE("affinity propagation: identical similarities, preference at maximum") {
    Matrix s = Matrix::Constant(4, 4, -3.0);
    const ClusterAssignment result = affinity_propagation(s, 0.5, 1000, -3.0);
    CHECK(result.n_clusters == 4);
    for (int i = 0; i < 4; ++i) CHECK(result.labels[i] == i);
}

TEST_CASE("affinity propagation: deterministic across runs") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix points(8, 2);
    for (int i = 0; i < 8; ++i) {
        points(i, 0) = normal(rng) + (i < 4 ? 0.0 : 6.0);
        points(i, 1) = normal(rng);
    }
    Matrix s(8, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) s(i, j) = -(points.row(i) - points.row(j)).squaredNorm();

    const ClusterAssignment a = affinity_propagation(s, 0.5, 1000);
    const ClusterAssignment b = affinity_propagation(s, 0.5, 1000);
    CHECK(a.labels == b.labels);
    CHECK(a.centers == b.centers);
}

TEST_CASE("affinity propagation: rejects bad input") {
    CHECK_THROWS_AS(affinity_propagation(Matrix::Zero(2, 3), 0.5, 10), invalid_input);
    CHECK_THROWS_AS(affinity_propagation(Matrix::Zero(2, 2), 0.4, 10), invalid_input);
}

TEST_CASE("merge clusters: no-op when within budget") {
    ClusterAssignment a{{0, 1, 2}, {0, 1, 2}, 3};
    const Matrix embedding = Matrix::Identity(3, 3);
    const ClusterAssignment merged = merge_clusters(a, embedding, 3);
    CHECK(merged.n_clusters == 3);
    CHECK(merged.labels == a.labels);
}

TEST_CASE("merge clusters: coincident centers merge first") {
    // four singleton clusters; centers 1 and 2 nearly coincide
    Matrix embedding(4, 2);
    embedding << 0.0, 0.0, 5.0, 5.0, 5.0, 5.01, 9.0, 0.0;
    ClusterAssignment a{{0, 1, 2, 3}, {0, 1, 2, 3}, 4};
    const ClusterAssignment merged = merge_clusters(a, embedding, 3);
    CHECK(merged.n_clusters == 3);
    CHECK(merged.labels[1] == merged.labels[2]);
    CHECK(merged.labels[0] != merged.labels[1]);
    CHECK(merged.labels[3] != merged.labels[1]);

    // brute-force nearest-pair oracle
    double best = std::numeric_limits<double>::infinity();
    int bi = -1, bj = -1;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const double d = (embedding.row(i) - embedding.row(j)).norm();
            if (d < best) {
                best = d;
                bi = i;
                bj = j;
            }
        }
    CHECK(merged.labels[bi] == merged.labels[bj]);
}

TEST_CASE("merge clusters: full merge and monotonicity") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix embedding(10, 3);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 3; ++j) embedding(i, j) = normal(rng);
    std::vector<int> labels(10);
    for (int i = 0; i < 10; ++i) labels[i] = i % 5;
    ClusterAssignment a{labels, {0, 1, 2, 3, 4}, 5};

    for (int max_clusters : {1, 2, 3, 5, 9}) {
        const ClusterAssignment merged = merge_clusters(a, embedding, max_clusters);
        CHECK(merged.n_clusters == std::min(5, max_clusters));
        std::set<int> seen(merged.labels.begin(), merged.labels.end());
        CHECK(static_cast<int>(seen.size()) == merged.n_clusters);
        for (int label : merged.labels) {
            CHECK(label >= 0);
            CHECK(label < merged.n_clusters);
        }
    }
}

TEST_CASE("map to events: collapses duplicate runs") {
    ClusterAssignment a{{0, 0, 0, 1}, {0, 3}, 2};
    const EventSequence seq = map_to_events(make_trajectory({3, 3, 3}, 1.0), a);
    CHECK(seq.events == std::vector<int>{1});
    CHECK(seq.source_return == doctest::Approx(1.0));

    const EventSequence aba = map_to_events(make_trajectory({0, 3, 1}), a);
    CHECK(aba.events == std::vector<int>{0, 1, 0});
}

TEST_CASE("map to events: matches label lookup oracle, no equal neighbors") {
    std::mt19937_64 rng(19);
    std::uniform_int_distribution<int> state(0, 9);
    ClusterAssignment a;
    a.n_clusters = 3;
    a.centers = {0, 1, 2};
    a.labels = {0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> states;
        for (int t = 0; t < 30; ++t) states.push_back(state(rng));
        const EventSequence seq = map_to_events(make_trajectory(states), a);

        std::vector<int> oracle;
        for (int s : states) {
            const int e = a.labels[s];
            if (oracle.empty() || oracle.back() != e) oracle.push_back(e);
        }
        CHECK(seq.events == oracle);
        for (std::size_t i = 1; i < seq.events.size(); ++i)
            CHECK(seq.events[i] != seq.events[i - 1]);
    }
}

TEST_CASE("map to events: unlabeled state rejected") {
    ClusterAssignment a{{0, 1}, {0, 1}, 2};
    CHECK_THROWS_AS(map_to_events(make_trajectory({5}), a), invalid_input);
}

TEST_CASE("event frequencies: direct counts and pseudocount rule") {
    EventSequence aabb{{0, 0, 1, 1}, 0.0};
    const EventBackground p1 = event_frequencies({aabb}, 2);
    CHECK(p1(0) == doctest::Approx(0.5));
    CHECK(p1(1) == doctest::Approx(0.5));

    EventSequence aaa{{0, 0, 0}, 0.0};
    const EventBackground p2 = event_frequencies({aaa}, 2);
    CHECK(p2(0) == doctest::Approx(4.0 / 5.0));
    CHECK(p2(1) == doctest::Approx(1.0 / 5.0));
}

TEST_CASE("event frequencies: multi-sequence corpus vs counting oracle") {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> event(0, 3);
    std::uniform_int_distribution<int> length(1, 12);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<EventSequence> corpus(3);
        std::map<int, long> counts;
        for (auto& seq : corpus) {
            const int n = length(rng);
            for (int i = 0; i < n; ++i) {
                const int e = event(rng);
                seq.events.push_back(e);
                ++counts[e];
            }
        }
        const EventBackground p = event_frequencies(corpus, 4);

        double total = 0.0;
        bool any_zero = false;
        for (int e = 0; e < 4; ++e) any_zero = any_zero || counts[e] == 0;
        for (int e = 0; e < 4; ++e) total += counts[e] + (any_zero ? 1.0 : 0.0);
        for (int e = 0; e < 4; ++e)
            CHECK(p(e) ==
                  doctest::Approx((counts[e] + (any_zero ? 1.0 : 0.0)) / total).epsilon(1e-12));

        CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((p.array() > 0.0).all());
    }
}

TEST_CASE("event frequencies: empty input rejected") {
    CHECK_THROWS_AS(event_frequencies({}, 2), invalid_input);
    CHECK_THROWS_AS(event_frequencies({EventSequence{}}, 2), invalid_input);
}
