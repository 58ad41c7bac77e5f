#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "sgronwall/bounds.hpp"
#include "sgronwall/errors.hpp"

using namespace sgronwall;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("holder parameters") {
    const HolderParams a(0.5, 1.0);
    CHECK(a.mu_is_infinite());
    CHECK(std::isinf(a.mu()));
    const HolderParams b(0.25, 2.0);
    CHECK(b.mu() == doctest::Approx(2.0));
    CHECK(HolderParams::from_mu(0.25, 2.0).nu() == doctest::Approx(2.0));
    CHECK(HolderParams::from_mu(0.5, kInf).nu() == 1.0);

    CHECK_THROWS_AS(HolderParams(0.5, kInf), ContractViolation);
    CHECK_THROWS_AS(HolderParams(0.5, 2.0), ContractViolation);  // p nu = 1
    CHECK_THROWS_AS(HolderParams(0.5, 0.9), ContractViolation);
    CHECK_THROWS_AS(HolderParams(0.0, 1.0), ContractViolation);
    CHECK_THROWS_AS(HolderParams(1.0, 1.0), ContractViolation);
}

TEST_CASE("holder prefactor examples") {
    CHECK(holder_prefactor(HolderParams(0.5, 1.0)) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(holder_prefactor(HolderParams(0.25, 2.0)) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
    CHECK(holder_prefactor(HolderParams(1e-9, 1.0)) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("holder prefactor along nu") {
    // Not monotone: it dips below the nu = 1 value for small p, then diverges as p nu -> 1.
    for (double p : {0.1, 0.25, 0.4, 0.6, 0.9}) {
        for (int i = 0; i <= 50; ++i) {
            const double nu = 1.0 + (1.0 / p - 1.0) * i / 51.0;
            const double expect = std::pow(1.0 + 1.0 / (1.0 - nu * p), 1.0 / nu);
            CHECK(holder_prefactor(HolderParams(p, nu)) == doctest::Approx(expect).epsilon(1e-14));
        }
        CHECK(holder_prefactor(HolderParams(p, (1.0 - 1e-9) / p)) > holder_prefactor(HolderParams(p, 1.0)));
    }
    CHECK(holder_prefactor(HolderParams(0.25, 3.0)) < holder_prefactor(HolderParams(0.25, 1.0)));
    CHECK(holder_prefactor(HolderParams(0.9, 1.05)) > holder_prefactor(HolderParams(0.9, 1.0)));
}

TEST_CASE("deterministic-G bound examples") {
    CHECK(theorem_bound_deterministic_G(0.5, RealSequence::weights({0, 0, 0}), 3, 1.0) == doctest::Approx(3.0));
    CHECK(theorem_bound_deterministic_G(0.5, RealSequence::weights({1, 1}), 2, 1.0) == doctest::Approx(6.0));
    CHECK(theorem_bound_deterministic_G(0.5, RealSequence::weights({3}), 1, 4.0) == doctest::Approx(12.0));
    CHECK(theorem_bound_deterministic_G(0.5, RealSequence::weights({3}), 1, 0.0) == 0.0);
    CHECK(std::isinf(theorem_bound_deterministic_G(0.5, RealSequence::weights({3}), 1, kInf)));
    CHECK_THROWS_AS(theorem_bound_deterministic_G(0.5, RealSequence::weights({3}), 2, 1.0), ContractViolation);
    CHECK_THROWS_AS(theorem_bound_deterministic_G(0.5, RealSequence::weights({3}), 1, -1.0), ContractViolation);
}

TEST_CASE("random-G bound examples and consistency with the deterministic form") {
    CHECK(theorem_bound_random_G(HolderParams(0.25, 2.0), 1.0, 5, 1.0) == doctest::Approx(std::sqrt(3.0)));
    CHECK(theorem_bound_random_G(HolderParams(0.25, 2.0), 2.0, 5, 16.0) == doctest::Approx(4 * std::sqrt(3.0)));

    gen::Gen g(21);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = g.size(0, 20);
        const auto w = g.weights(n, 2.0);
        const double p = g.uniform(0.01, 0.99);
        const double e = g.uniform(0.0, 50.0);
        const double norm = std::pow(oracle::product(w, 0, n), p);
        const double det = theorem_bound_deterministic_G(p, RealSequence::weights(w), n, e);
        const double rnd = theorem_bound_random_G(HolderParams(p, 1.0), norm, n, e);
        CHECK(std::abs(det - rnd) <= 1e-12 * std::max(1.0, det));
    }
}

TEST_CASE("a priori bound") {
    AprioriInputs in{0.5, 1.0, 1.0, 0.25, 1.0, 0.0};
    const double expect = 3.0 * std::exp(2.0) * std::sqrt(5.0);
    CHECK(apriori_bound(in) == doctest::Approx(expect).epsilon(1e-14));

    AprioriInputs flat{0.3, 0.0, 2.0, 0.5, 4.0, 7.0};
    CHECK(apriori_bound(flat) == doctest::Approx((1 + 1 / 0.7) * std::pow(4.0 + 0.5 * 7.0, 0.3)));

    AprioriInputs tiny_p{1e-9, 1.0, 1.0, 0.25, 1.0, 0.0};
    CHECK(apriori_bound(tiny_p) == doctest::Approx(2.0).epsilon(1e-7));

    AprioriInputs bad = in;
    bad.h0 = 0.5;  // 2 h0 L = 1
    CHECK_THROWS_AS(apriori_bound(bad), ContractViolation);
    bad = in;
    bad.p = 1.0;
    CHECK_THROWS_AS(apriori_bound(bad), ContractViolation);
    bad = in;
    bad.x0_norm_sq = -1.0;
    CHECK_THROWS_AS(apriori_bound(bad), ContractViolation);
}

TEST_CASE("property: a priori bound is monotone in each input") {
    gen::Gen g(22);
    for (int trial = 0; trial < 1000; ++trial) {
        AprioriInputs in;
        in.p = g.uniform(0.05, 0.95);
        in.L = g.uniform(0.0, 3.0);
        in.T = g.uniform(0.1, 5.0);
        in.h0 = in.L > 0 ? g.uniform(0.0, 0.49 / in.L) : g.uniform(0.0, 2.0);
        in.x0_norm_sq = g.uniform(0.0, 10.0);
        in.g_x0_norm_sq = g.uniform(0.0, 10.0);
        const double base = apriori_bound(in);
        const double eps = g.uniform(1e-6, 1e-2);

        auto bumped = [&](auto mutate) {
            AprioriInputs c = in;
            mutate(c);
            return apriori_bound(c);
        };
        if (2.0 * in.h0 * (in.L + eps) < 1.0) {
            CHECK(bumped([&](AprioriInputs& c) { c.L += eps; }) >= base * (1 - 1e-14));
        }
        CHECK(bumped([&](AprioriInputs& c) { c.T += eps; }) >= base * (1 - 1e-14));
        CHECK(bumped([&](AprioriInputs& c) { c.h0 = c.L > 0 ? std::min(c.h0 + eps, 0.4999 / c.L) : c.h0 + eps; }) >=
              base * (1 - 1e-14));
        CHECK(bumped([&](AprioriInputs& c) { c.x0_norm_sq += eps; }) >= base * (1 - 1e-14));
        CHECK(bumped([&](AprioriInputs& c) { c.g_x0_norm_sq += eps; }) >= base * (1 - 1e-14));
    }
}

TEST_CASE("path bundle validation") {
    const auto b = GronwallPathBundle::by_equality({1, 1, 1}, RealSequence::weights({1, 1, 0}), {0, 0.5, -0.5});
    CHECK(b.X() == RealSequence{1, 2.5, 4});
    CHECK(b.horizon() == 2);
    CHECK_NOTHROW(GronwallPathBundle({1, 2, 2}, {1, 1, 1}, RealSequence::weights({1, 1, 0}), {0, 0.5, -0.5}));
    // X_1 = 3 exceeds F_1 + M_1 + G_0 X_0 = 2.5.
    CHECK_THROWS_AS(GronwallPathBundle({1, 3, 2}, {1, 1, 1}, RealSequence::weights({1, 1, 0}), {0, 0.5, -0.5}),
                    ContractViolation);
    CHECK_THROWS_AS(GronwallPathBundle({1, 1}, {1, 1}, RealSequence::weights({0, 0}), {0.1, 0}), ContractViolation);
    CHECK_THROWS_AS(GronwallPathBundle::by_equality({0, 0}, RealSequence::weights({0, 0}), {0, -1}),
                    ContractViolation);
}

TEST_CASE("transformed martingale examples") {
    const auto zero = GronwallPathBundle::by_equality({1, 1, 1, 1}, RealSequence::weights({0.3, 0, 2, 1}),
                                                      {0, 0, 0, 0});
    CHECK(transformed_martingale(zero) == RealSequence{0, 0, 0, 0});

    const RealSequence M{0, 0.4, -0.3, 0.2};
    const auto unit = GronwallPathBundle::by_equality({1, 1, 1, 1}, RealSequence::weights({0, 0, 0, 0}), M);
    const auto L = transformed_martingale(unit);
    for (std::size_t i = 0; i < 4; ++i) CHECK(L[i] == doctest::Approx(M[i]).epsilon(1e-15));

    const auto hand = GronwallPathBundle::by_equality({1, 1, 1}, RealSequence::weights({1, 1, 1}), {0, 1, 0});
    const auto Lh = transformed_martingale(hand);
    CHECK(Lh[0] == 0.0);
    CHECK(Lh[1] == doctest::Approx(0.5));
    CHECK(Lh[2] == doctest::Approx(0.25));
}

TEST_CASE("property: pathwise transformed bound on random bundles") {
    gen::Gen g(23);
    int checked = 0;
    for (int trial = 0; trial < 3000; ++trial) {
        const std::size_t len = g.size(1, 20);
        const auto F = g.weights(len, 5.0);
        const auto G = g.weights(len, 1.0);
        // Shifting F by 0.5 len dominates any walk with steps below 0.5, so X stays nonnegative.
        auto M = g.walk(len, 0.5);
        std::vector<double> Fs = F;
        for (auto& x : Fs) x += 0.5 * len;
        const auto bundle = GronwallPathBundle::by_equality(RealSequence(Fs), RealSequence::weights(G), RealSequence(M));
        const auto L = transformed_martingale(bundle);
        const auto Lo = oracle::transformed(M, G);
        for (std::size_t i = 0; i < len; ++i) REQUIRE(std::abs(L[i] - Lo[i]) <= 1e-12 * (1 + std::abs(Lo[i])));
        const auto res = check_transformed_bound(bundle);
        REQUIRE(res.passed);
        ++checked;
    }
    CHECK(checked == 3000);
}

TEST_CASE("transformed bound checker flags excess beyond a negative tolerance") {
    // At index 0 both sides equal F_0, so any negative tolerance must fail there.
    const auto b = GronwallPathBundle::by_equality({1, 1, 1}, RealSequence::weights({0.5, 0.5, 0.5}), {0, 0.3, -0.1});
    const auto ok = check_transformed_bound(b, 1e-9);
    CHECK(ok.passed);
    CHECK(ok.max_excess <= 1e-9);
    const auto strict = check_transformed_bound(b, -1e-6);
    CHECK_FALSE(strict.passed);
    CHECK(strict.first_violation == 0);
}
