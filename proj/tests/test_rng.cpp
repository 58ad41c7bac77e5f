#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "sgronwall/rng.hpp"

using namespace sgronwall;

TEST_CASE("philox matches the published known-answer vectors") {
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and independent of construction order") {
    RandomStream a(42, 7), b(42, 7);
    RandomStream other(42, 8);
    std::vector<std::uint64_t> xs, ys;
    for (int i = 0; i < 100; ++i) {
        xs.push_back(a.next_u64());
        ys.push_back(other.next_u64());
    }
    for (int i = 0; i < 100; ++i) CHECK(b.next_u64() == xs[i]);
    CHECK(xs != ys);
    CHECK(RandomStream(43, 7).next_u64() != xs[0]);
}

TEST_CASE("uniforms lie strictly inside (0,1) with the right moments") {
    RandomStream rng(1, 0);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        s += u;
        s2 += u * u;
    }
    CHECK(std::abs(s / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
    CHECK(std::abs(s2 / n - 1.0 / 3) < 0.003);
}

TEST_CASE("normals have zero mean, unit variance and a sensible tail") {
    RandomStream rng(9, 3);
    const int n = 400000;
    double s = 0, s2 = 0;
    int beyond2 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s += z;
        s2 += z * z;
        beyond2 += std::abs(z) > 2.0;
    }
    CHECK(std::abs(s / n) < 4 / std::sqrt(double(n)));
    CHECK(std::abs(s2 / n - 1.0) < 4 * std::sqrt(2.0 / n));
    const double p2 = 0.04550026389635842;
    CHECK(std::abs(double(beyond2) / n - p2) < 4 * std::sqrt(p2 * (1 - p2) / n));
}

TEST_CASE("signs are balanced") {
    RandomStream rng(5, 5);
    int total = 0;
    for (int i = 0; i < 100000; ++i) total += rng.sign();
    CHECK(std::abs(total) < 4 * std::sqrt(100000.0));
}

TEST_CASE("distinct substreams give distinct prefixes") {
    std::set<std::uint64_t> first;
    for (std::uint64_t id = 0; id < 10000; ++id) first.insert(RandomStream(123, id).next_u64());
    CHECK(first.size() == 10000);
}
