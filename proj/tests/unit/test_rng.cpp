// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "echoscout/rng.hpp"

using namespace echoscout;

TEST_CASE("rng is deterministic for a fixed seed") {
    Rng a(1234), b(1234);
    for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("rng seeds decorrelate") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i) same += (a.next() == b.next());
    CHECK(same == 0);
}

TEST_CASE("uniform stays in [0,1) and has sane mean") {
    Rng r(7);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 5e-3);
}

TEST_CASE("uniform_int covers both endpoints inclusively") {
    Rng r(42);
    std::set<int64_t> seen;
    for (int i = 0; i < 5000; ++i) {
        const int64_t v = r.uniform_int(-3, 3);
        REQUIRE(v >= -3);
        REQUIRE(v <= 3);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("normal has roughly standard moments") {
    Rng r(99);
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s1 += x;
        s2 += x * x;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 1e-2);
    CHECK(std::abs(var - 1.0) < 2e-2);
}

TEST_CASE("state save and restore replays the stream") {
    Rng r(5);
    for (int i = 0; i < 17; ++i) r.next();
    const auto st = r.state();
    std::vector<uint64_t> ahead;
    for (int i = 0; i < 32; ++i) ahead.push_back(r.next());
    r.set_state(st);
    for (int i = 0; i < 32; ++i) CHECK(r.next() == ahead[i]);
}

TEST_CASE("derive_seed separates named streams and indices") {
    const uint64_t a = derive_seed(10, "world", 0);
    const uint64_t b = derive_seed(10, "world", 1);
    const uint64_t c = derive_seed(10, "echo", 0);
    const uint64_t d = derive_seed(11, "world", 0);
    CHECK(a != b);
    CHECK(a != c);
    CHECK(a != d);
    CHECK(b != c);
    // frozen: any change here silently re-seeds every experiment
    CHECK(derive_seed(10, "world", 0) == a);
}
