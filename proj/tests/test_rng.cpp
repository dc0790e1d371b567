#include <doctest.h>

#include <cmath>
#include <vector>

#include "causal_audit/rng.hpp"

using namespace causal_audit;

TEST_CASE("equal seeds give equal streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 100; ++i) same += a.next_u64() == b.next_u64();
    CHECK(same == 0);
}

TEST_CASE("uniform01 stays in [0,1)") {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("child streams depend only on (seed, index)") {
    Rng parent(99);
    // Drawing from the parent must not shift its children.
    Rng before = parent.child(3);
    for (int i = 0; i < 57; ++i) parent.next_u64();
    Rng after = parent.child(3);
    for (int i = 0; i < 100; ++i) CHECK(before.next_u64() == after.next_u64());

    Rng c0 = parent.child(0), c1 = parent.child(1);
    CHECK(c0.next_u64() != c1.next_u64());
}

TEST_CASE("normal variates have the requested moments") {
    Rng rng(2024);
    const int n = 200000;
    double sum = 0, sum_sq = 0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal(3.0, 2.0);
        sum += x;
        sum_sq += x * x;
    }
    const double m = sum / n;
    const double var = sum_sq / n - m * m;
    CHECK(m == doctest::Approx(3.0).epsilon(0.01));
    CHECK(var == doctest::Approx(4.0).epsilon(0.03));
}

TEST_CASE("below produces full range without bias artifacts") {
    Rng rng(5);
    std::vector<int> counts(10, 0);
    for (int i = 0; i < 100000; ++i) ++counts[rng.below(10)];
    for (int c : counts) {
        CHECK(c > 9000);
        CHECK(c < 11000);
    }
}

TEST_CASE("bernoulli respects the probability") {
    Rng rng(13);
    int hits = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) hits += rng.bernoulli(0.2);
    CHECK(static_cast<double>(hits) / n == doctest::Approx(0.2).epsilon(0.05));
}
