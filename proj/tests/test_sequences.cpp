#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "sgronwall/errors.hpp"
#include "sgronwall/sequences.hpp"

using namespace sgronwall;

TEST_CASE("closed form on hand examples") {
    CHECK(gronwall_closed_form({1, 1, 1}, RealSequence::weights({1, 1, 1}), 2) == 4.0);
    CHECK(gronwall_closed_form({5}, RealSequence::weights({3}), 0) == 5.0);
    CHECK(gronwall_closed_form({2.5, -1, 7}, RealSequence::weights({0, 0, 0}), 2) == 7.0);

    const double c = 1.5, gamma = 0.3;
    const std::size_t n = 9;
    const double expect = c * std::pow(1 + gamma, n);
    CHECK(gronwall_closed_form(RealSequence::constant(n + 1, c), RealSequence::constant(n + 1, gamma), n) ==
          doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("recursive envelope on hand examples") {
    CHECK(gronwall_recursive_envelope({1, 1, 1}, RealSequence::weights({1, 1, 1}), 2) == RealSequence{1, 2, 4});
    CHECK(gronwall_recursive_envelope({5}, RealSequence::weights({3}), 0) == RealSequence{5});
    CHECK(gronwall_recursive_envelope({0, 0, 0, 0}, RealSequence::weights({1, 2, 3, 4}), 3) ==
          RealSequence{0, 0, 0, 0});
}

TEST_CASE("telescoping identity on hand examples") {
    CHECK(telescoping_identity_lhs(RealSequence::weights({0.7}), 0, 1) == doctest::Approx(1.7));
    CHECK(telescoping_identity_lhs(RealSequence::weights({1, 1, 1}), 0, 3) == 8.0);
    CHECK(telescoping_identity_lhs(RealSequence::weights({0, 0}), 0, 2) == 1.0);
}

TEST_CASE("empty ranges") {
    const auto g = RealSequence::weights({1, 2, 3});
    CHECK(weight_product(g, 2, 2) == 1.0);
    CHECK(log_weight_product(g, 1, 1) == 0.0);
}

TEST_CASE("contract violations") {
    CHECK_THROWS_AS(RealSequence({1.0, std::nan("")}), ContractViolation);
    CHECK_THROWS_AS(RealSequence({std::numeric_limits<double>::infinity()}), ContractViolation);
    CHECK_THROWS_AS(RealSequence::weights({0.0, -0.5}), ContractViolation);
    CHECK_THROWS_AS(gronwall_closed_form({1, 1}, RealSequence::weights({1, 1}), 2), ContractViolation);
    CHECK_THROWS_AS(gronwall_closed_form({1, 1}, RealSequence{1, -1}, 1), ContractViolation);
    CHECK_THROWS_AS(telescoping_identity_lhs(RealSequence::weights({1, 1}), 2, 2), ContractViolation);
    try {
        RealSequence::weights({0.0, 1.0, -2.0});
        FAIL("expected a violation");
    } catch (const ContractViolation& e) {
        CHECK(std::string(e.what()).find("entry 2") != std::string::npos);
    }
}

TEST_CASE("property: telescoping identity on random weights") {
    gen::Gen g(11);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto w = g.weights(g.size(1, 20), 10.0);
        const auto seq = RealSequence::weights(w);
        for (std::size_t n = 1; n <= w.size(); ++n) {
            for (std::size_t k = 0; k < n; ++k) {
                const double expect = oracle::product(w, k, n);
                REQUIRE(std::abs(telescoping_identity_lhs(seq, k, n) - expect) <= 1e-10 * expect);
            }
        }
    }
}

TEST_CASE("property: closed form matches the direct double loop and the equality recursion") {
    gen::Gen g(12);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t len = g.size(1, 20);
        const auto f = g.coin() ? g.signed_values(len, 5.0) : g.weights(len, 5.0);
        const auto w = g.weights(len, 3.0);
        const auto y = oracle::gronwall_equality(f, w);
        const RealSequence fs(f);
        const auto ws = RealSequence::weights(w);
        const auto env = gronwall_recursive_envelope(fs, ws, len - 1);
        for (std::size_t n = 0; n < len; ++n) {
            const double direct = oracle::gronwall_direct(f, w, n);
            const double closed = gronwall_closed_form(fs, ws, n);
            const double scale = std::max(1.0, std::abs(direct));
            REQUIRE(std::abs(closed - direct) <= 1e-10 * scale);
            REQUIRE(std::abs(closed - y[n]) <= 1e-10 * scale);
            REQUIRE(std::abs(env[n] - closed) <= 1e-12 * std::max(1.0, std::abs(closed)));
        }
    }
}

TEST_CASE("property: any sequence satisfying the hypothesis with slack lies below the closed form") {
    gen::Gen g(13);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t len = g.size(1, 21);
        const auto f = g.coin() ? g.signed_values(len, 5.0) : g.weights(len, 5.0);
        const auto w = g.weights(len, 2.0);
        std::vector<double> y(len);
        for (std::size_t n = 0; n < len; ++n) {
            double rhs = f[n];
            for (std::size_t k = 0; k < n; ++k) rhs += w[k] * y[k];
            y[n] = rhs - g.uniform(0.0, 3.0);
        }
        const RealSequence fs(f);
        const auto ws = RealSequence::weights(w);
        for (std::size_t n = 0; n < len; ++n) {
            const double bound = gronwall_closed_form(fs, ws, n);
            REQUIRE(y[n] <= bound + 1e-10 * std::max(1.0, std::abs(bound)));
        }
    }
}

TEST_CASE("property: closed form is nondecreasing in f and in g") {
    gen::Gen g(14);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t len = g.size(2, 15);
        auto f = g.weights(len, 4.0);
        auto w = g.weights(len, 2.0);
        const std::size_t n = len - 1;
        const double base = gronwall_closed_form(RealSequence(f), RealSequence::weights(w), n);
        const std::size_t i = g.size(0, n);
        const double bump = g.uniform(0.0, 1.0);
        auto f2 = f;
        f2[i] += bump;
        auto w2 = w;
        w2[i] += bump;
        CHECK(gronwall_closed_form(RealSequence(f2), RealSequence::weights(w), n) >= base * (1 - 1e-14));
        CHECK(gronwall_closed_form(RealSequence(f), RealSequence::weights(w2), n) >= base * (1 - 1e-14));
    }
}

TEST_CASE("log-space path when products overflow") {
    // (1 + 1e30)^12 = 1e360 overflows a double, the closed form does not if f is tiny.
    const std::size_t n = 12;
    const auto g = RealSequence::constant(n + 1, 1e30);
    const double logp = log_weight_product(g, 0, n);
    CHECK(logp == doctest::Approx(n * std::log1p(1e30)).epsilon(1e-14));
    CHECK(std::isinf(weight_product(g, 0, n)));

    const auto f = RealSequence::constant(n + 1, 1e-300);
    const double closed = gronwall_closed_form(f, g, n);
    // Closed form for constant f, g is c (1+g)^n.
    const double expect = std::exp(std::log(1e-300) + logp);
    CHECK(std::isfinite(closed));
    CHECK(closed == doctest::Approx(expect).epsilon(1e-10));

    const double tele = telescoping_identity_lhs(RealSequence::constant(14, 1e25), 0, 14);
    CHECK(std::isinf(tele));
    const auto mid = RealSequence::constant(8, 1e38);
    const double lhs = telescoping_identity_lhs(mid, 0, 8);
    CHECK(lhs / std::pow(1e38, 7) == doctest::Approx(1e38).epsilon(1e-12));
}
