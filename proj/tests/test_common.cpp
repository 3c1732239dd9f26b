#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "xsum/common.hpp"

using namespace xsum;

TEST_CASE("fnv1a64 matches the published FNV-1a test vectors with seed 0") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("fnv1a64 seeds give different functions and the span overload agrees") {
    CHECK(fnv1a64("token", 1) != fnv1a64("token", 2));
    CHECK(fnv1a64("token", 1) != fnv1a64("token"));
    const std::string s = "bytes";
    const std::vector<std::uint8_t> b(s.begin(), s.end());
    CHECK(fnv1a64(std::span<const std::uint8_t>(b), 7) == fnv1a64(s, 7));
}

TEST_CASE("hex64 is zero padded lowercase") {
    CHECK(hex64(0) == "0000000000000000");
    CHECK(hex64(0xABCULL) == "0000000000000abc");
}

TEST_CASE("Rng reproduces the standard mt19937_64 stream") {
    Rng rng(5489);
    std::uint64_t x = 0;
    for (int i = 0; i < 10000; ++i) x = rng.next();
    CHECK(x == 9981545732273789042ULL);
}

TEST_CASE("Rng draws stay in range and look right") {
    Rng rng(3);
    double sum = 0.0, sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const auto k = rng.below(7);
        CHECK(k < 7);
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("shuffle permutes and derive is a pure function of seed and tag") {
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    auto a = v;
    auto r1 = Rng::derive(9, "shuffle");
    r1.shuffle(a.begin(), a.end());
    auto b = v;
    auto r2 = Rng::derive(9, "shuffle");
    r2.shuffle(b.begin(), b.end());
    CHECK(a == b);
    CHECK(a != v);
    std::sort(a.begin(), a.end());
    CHECK(a == v);

    CHECK(Rng::derive(9, "init").next() != Rng::derive(9, "shuffle").next());
    CHECK(Rng::derive(9, "init").next() != Rng::derive(10, "init").next());
}

TEST_CASE("errors carry their exit codes") {
    CHECK(ConfigError("x").code() == ExitCode::config_error);
    CHECK(DataError("x").code() == ExitCode::data_error);
    CHECK(NumericError("x").code() == ExitCode::numeric_failure);
    CHECK(static_cast<int>(ExitCode::config_error) == 2);
    CHECK(static_cast<int>(ExitCode::data_error) == 3);
    CHECK(static_cast<int>(ExitCode::numeric_failure) == 4);
}

TEST_CASE("trim") {
    CHECK(trim("  a b \n") == "a b");
    CHECK(trim(" \t ") == "");
}
