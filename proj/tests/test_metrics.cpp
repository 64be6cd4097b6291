#include "doctest.h"
#include "oracles.hpp"

#include "selfclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace selfclust;

namespace {

Labels permuted(const Labels& l, const std::vector<int>& perm) {
    Labels out(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) out[i] = perm[l[i]];
    return out;
}

}  // namespace

TEST_CASE("pair confusion examples") {
    CHECK(pair_confusion({0, 0, 1, 1}, {0, 0, 1, 1}) == PairConfusion{2, 0, 0, 4});
    CHECK(pair_confusion({0, 0, 1, 1}, {0, 1, 0, 1}) == PairConfusion{0, 2, 2, 2});
    CHECK(pair_confusion({0, 0, 1, 1}, {0, 0, 0, 0}) == PairConfusion{2, 4, 0, 0});
}

TEST_CASE("JC, FMI, ARI examples") {
    const Labels x{0, 0, 1, 1, 2};
    const auto same = pair_confusion(x, x);
    CHECK(jc(same) == 1.0);
    CHECK(fmi(same) == 1.0);
    CHECK(ari(x, x) == 1.0);

    const auto cross = pair_confusion({0, 0, 1, 1}, {0, 1, 0, 1});
    CHECK(jc(cross) == 0.0);
    CHECK(fmi(cross) == 0.0);
    CHECK(ari({0, 0, 1, 1}, {0, 1, 0, 1}) == -0.5);
}

TEST_CASE("NMI examples") {
    CHECK(nmi({0, 0, 1, 1}, {1, 1, 0, 0}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(nmi({0, 0, 1, 1}, {0, 1, 0, 1})) < 1e-15);
    CHECK(nmi({0, 0, 1, 1}, {3, 3, 3, 3}) == 0.0);
    // hand value from the definitions: H(T) = ln 2, H(P) = ln 3
    const Labels t{0, 0, 0, 1, 1, 1}, p{0, 0, 1, 1, 2, 2};
    const double n = 6;
    const double ht = std::log(2.0);
    const double hp = std::log(3.0);
    // contingency [[2,1,0],[0,1,2]]
    const double mi = 2 * (2 / n) * std::log((2 / n) / ((3 / n) * (2 / n))) + 2 * (1 / n) * std::log((1 / n) / ((3 / n) * (2 / n)));
    CHECK(nmi(t, p) == doctest::Approx(mi / std::sqrt(ht * hp)).epsilon(1e-12));
}

TEST_CASE("ACC examples") {
    CHECK(acc({0, 0, 1, 1, 2}, {2, 2, 0, 0, 1}) == 1.0);
    CHECK(acc({0, 0, 1, 1}, {0, 1, 0, 1}) == 0.5);
    CHECK(acc({0, 0, 0, 1, 1, 2}, {0, 0, 1, 1, 2, 2}) == 4.0 / 6.0);
    // more clusters than classes: unmatched clusters count as errors
    CHECK(acc({0, 0, 0, 0}, {0, 1, 2, 3}) == 0.25);
}

TEST_CASE("closed forms equal brute-force pair enumeration on 200 random cases") {
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(gen() % 11);
        const int kt = 1 + static_cast<int>(gen() % std::min(4, n));
        const int kp = 1 + static_cast<int>(gen() % std::min(4, n));
        const auto t = oracle::random_labels(gen, n, kt);
        const auto p = oracle::random_labels(gen, n, kp);
        const auto brute = oracle::pairs(t, p);
        const auto fast = pair_confusion(t, p);
        CAPTURE(trial);
        CHECK(fast == brute);
        CHECK(jc(fast) == oracle::jc(brute));
        CHECK(fmi(fast) == oracle::fmi(brute));
        CHECK(ari(t, p) == oracle::ari(brute));
        CHECK(acc(t, p) == oracle::acc(t, p));
    }
}

TEST_CASE("ACC equals exhaustive matching up to K = 6") {
    std::mt19937_64 gen(77);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 1 + trial % 6;
        const int n = k + static_cast<int>(gen() % 15);
        const auto t = oracle::random_labels(gen, n, k);
        const auto p = oracle::random_labels(gen, n, 1 + static_cast<int>(gen() % k));
        CHECK(acc(t, p) == oracle::acc(t, p));
    }
}

TEST_CASE("Hungarian solver matches brute force on random costs") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + trial % 6;
        std::vector<std::vector<double>> cost(n, std::vector<double>(n));
        for (auto& row : cost)
            for (auto& c : row) c = std::round(u(gen) * 10) / 10;
        const auto match = solve_assignment(cost);
        double got = 0;
        for (int r = 0; r < n; ++r) got += cost[r][match[r]];
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        double best = 1e300;
        do {
            double s = 0;
            for (int r = 0; r < n; ++r) s += cost[r][perm[r]];
            best = std::min(best, s);
        } while (std::next_permutation(perm.begin(), perm.end()));
        CHECK(got == doctest::Approx(best).epsilon(1e-12));
        std::vector<int> sorted = match;
        std::sort(sorted.begin(), sorted.end());
        for (int r = 0; r < n; ++r) CHECK(sorted[r] == r);
    }
}

TEST_CASE("indices are invariant under relabeling either side") {
    std::mt19937_64 gen(31);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 12;
        const auto t = oracle::random_labels(gen, n, 3);
        const auto p = oracle::random_labels(gen, n, 4);
        std::vector<int> pp{0, 1, 2, 3}, tp{0, 1, 2};
        std::shuffle(pp.begin(), pp.end(), gen);
        std::shuffle(tp.begin(), tp.end(), gen);
        const auto p2 = permuted(p, pp);
        const auto t2 = permuted(t, tp);
        CHECK(jc(pair_confusion(t, p)) == jc(pair_confusion(t2, p2)));
        CHECK(fmi(pair_confusion(t, p)) == fmi(pair_confusion(t2, p2)));
        CHECK(ari(t, p) == ari(t2, p2));
        CHECK(acc(t, p) == acc(t2, p2));
        CHECK(nmi(t, p) == doctest::Approx(nmi(t2, p2)).epsilon(1e-12));
        CHECK(ari(t, t) == 1.0);
        CHECK(nmi(t, t) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("DBI examples") {
    Matrix f(4, 2);
    f << 0, 0, 0, 2, 10, 0, 10, 2;
    CHECK(std::abs(dbi(f, {0, 0, 1, 1}) - 0.2) <= 1e-12);

    Matrix two(2, 3);
    two << 1, 2, 3, -1, 0, 5;
    CHECK(dbi(two, {0, 1}) == 0.0);

    Matrix scaled = f * 3.5;
    CHECK(dbi(scaled, {0, 0, 1, 1}) == doctest::Approx(dbi(f, {0, 0, 1, 1})).epsilon(1e-12));

    CHECK_THROWS(dbi(f, {0, 0, 0, 0}));
}

TEST_CASE("normalized DBI") {
    CHECK(dbi_normalized(0.7, 0.7) == 1.0);
    CHECK(dbi_normalized(0.5, 1.0) == 0.5);
}

TEST_CASE("tau examples") {
    CHECK(tau({0.5, 0.5, 0.5}) == 0.0);
    CHECK(tau({0.4, 0.6}, StdMode::population) == doctest::Approx(0.2).epsilon(1e-12));
    const double t = tau({0.55, 0.58, 0.46, 0.57}, StdMode::sample);
    CHECK(t == doctest::Approx(0.1016).epsilon(1e-3));
    CHECK(std::abs(t - 0.11) <= 0.02);
    CHECK(tau({0.55, 0.58, 0.46, 0.57}, StdMode::population) < t);
    CHECK_THROWS(tau({0.5}));
}

TEST_CASE("evaluate bundles every index") {
    Matrix f(4, 2);
    f << 0, 0, 0, 2, 10, 0, 10, 2;
    const auto r = evaluate({0, 0, 1, 1}, {1, 1, 0, 0}, &f);
    CHECK(r.jc == 1.0);
    CHECK(r.fmi == 1.0);
    CHECK(r.ari == 1.0);
    CHECK(r.acc == 1.0);
    CHECK(r.nmi == doctest::Approx(1.0));
    REQUIRE(r.dbi.has_value());
    CHECK(*r.dbi == doctest::Approx(0.2));
    CHECK_FALSE(evaluate({0, 1}, {0, 1}).dbi.has_value());
}
