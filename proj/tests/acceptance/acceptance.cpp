// Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails, including on its runtime budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "sgronwall/bounds.hpp"
#include "sgronwall/cli.hpp"
#include "sgronwall/martingale_lab.hpp"
#include "sgronwall/mc_engine.hpp"
#include "sgronwall/problem_zoo.hpp"
#include "sgronwall/sde_bem.hpp"
#include "sgronwall/sequences.hpp"

using namespace sgronwall;

namespace {

// Pinned tolerances.
constexpr double kTelescopingRelTol = 1e-10;
constexpr double kGronwallSlack = 1e-10;
constexpr double kEnumerationSlack = 1e-12;
constexpr double kRatioPeakTol = 1e-12;
constexpr double kRatioEdgeTol = 0.02;
constexpr double kStdErrors = 4.0;
constexpr double kMaxHalfwidth = 0.02;
constexpr double kTransformedTol = 1e-9;
constexpr double kNewtonTol = 1e-10;
constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    bool passed;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out{false, ""};
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < budget_s;
    const bool ok = out.passed && in_time;
    failures += !ok;
    std::printf("%s  %2d  %-44s %s; %.2f s (budget %.0f s)%s\n", ok ? "PASS" : "FAIL", id, name, out.detail.c_str(),
                secs, budget_s, in_time ? "" : " OVER BUDGET");
    std::fflush(stdout);
}

Outcome telescoping() {
    gen::Gen g(kSeed + 1);
    double worst = 0.0;
    std::size_t pairs = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const auto w = g.weights(g.size(1, 20), 10.0);
        const auto seq = RealSequence::weights(w);
        for (std::size_t n = 1; n <= w.size(); ++n) {
            for (std::size_t k = 0; k < n; ++k) {
                const double expect = oracle::product(w, k, n);
                worst = std::max(worst, std::abs(telescoping_identity_lhs(seq, k, n) - expect) / expect);
                ++pairs;
            }
        }
    }
    return {worst <= kTelescopingRelTol, fmt("%zu (k,n) pairs, max rel err %.3g", pairs, worst)};
}

Outcome gronwall_soundness() {
    gen::Gen g(kSeed + 2);
    double worst = -INFINITY;
    int violations = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t len = g.size(1, 21);
        const auto f = g.coin() ? g.signed_values(len, 5.0) : g.weights(len, 5.0);
        const auto w = g.weights(len, 2.0);
        const RealSequence fs(f);
        const auto ws = RealSequence::weights(w);
        std::vector<double> y(len);
        for (std::size_t n = 0; n < len; ++n) {
            double rhs = f[n];
            for (std::size_t k = 0; k < n; ++k) rhs += w[k] * y[k];
            y[n] = rhs - (g.coin() ? 0.0 : g.uniform(0.0, 3.0));
            const double excess = y[n] - gronwall_closed_form(fs, ws, n);
            worst = std::max(worst, excess);
            violations += excess > kGronwallSlack;
        }
    }
    return {violations == 0, fmt("%d violations, max excess %.3g", violations, worst)};
}

Outcome walk_enumeration() {
    const std::vector<double> ps{0.1, 0.25, 0.5, 0.75, 0.9};
    int violations = 0, cases = 0;
    double worst_ratio = 0.0;
    for (double stop : {kNoStop, -1.0, -2.0, -3.0}) {
        for (std::size_t n = 1; n <= 12; ++n) {
            const auto e = enumerate_walks(n, stop, ps);
            for (std::size_t i = 0; i < ps.size(); ++i) {
                const double rhs = std::pow(e.e_neg_inf, ps[i]) / (1.0 - ps[i]);
                violations += e.e_sup_p[i] > rhs + kEnumerationSlack;
                worst_ratio = std::max(worst_ratio, e.e_sup_p[i] / rhs);
                ++cases;
            }
        }
    }
    const auto two = enumerate_walks(2, kNoStop, std::vector<double>{0.5});
    const bool hand = two.e_sup_p[0] == (std::sqrt(2.0) + 1.0) / 4.0;
    return {violations == 0 && hand, fmt("%d cases, %d violations, max lhs/rhs %.4f, two-step value %s", cases,
                                         violations, worst_ratio, hand ? "exact" : "WRONG")};
}

Outcome constant_bracket() {
    bool ordered = true;
    double best = 0.0, best_p = 0.0;
    for (int i = 1; i <= 99; ++i) {
        const double p = i / 100.0;
        const auto c = remark_constants(p);
        ordered = ordered && c.lower <= c.upper;
        if (c.ratio > best) best = c.ratio, best_p = p;
    }
    const double peak_err = std::abs(best - 4 / std::numbers::pi);
    const double lo = std::abs(remark_constants(0.01).ratio - 1.0);
    const double hi = std::abs(remark_constants(0.99).ratio - 1.0);
    const bool ok = ordered && best_p == 0.5 && peak_err <= kRatioPeakTol && lo <= kRatioEdgeTol && hi <= kRatioEdgeTol;
    return {ok, fmt("argmax p=%.2f, |R-4/pi|=%.2g, |R_0.01-1|=%.4f, |R_0.99-1|=%.4f", best_p, peak_err, lo, hi)};
}

Outcome sharp_constant() {
    const Sampler sampler = [](RandomStream& r) { return std::sqrt(sample_sup_stopped_bm_exact(r)); };
    std::size_t n = 1000000;
    McEstimate est = estimate_expectation(sampler, n, StreamPlan{kSeed + 5});
    if (est.ci_halfwidth > kMaxHalfwidth) {
        n = 10000000;
        est = estimate_expectation(sampler, n, StreamPlan{kSeed + 5});
    }
    const double dev = std::abs(est.mean - std::numbers::pi / 2);
    return {dev <= kStdErrors * est.std_error,
            fmt("n=%zu mean=%.6f se=%.2g ci95=+-%.4f |mean-pi/2|=%.2f se", n, est.mean, est.std_error,
                est.ci_halfwidth, dev / est.std_error)};
}

Outcome theorem_synthetic() {
    EstimatorConfig cfg;
    cfg.z = kStdErrors;
    bool ok = true;
    std::string detail;
    const auto systems = reference_synthetic_systems(10);
    const StreamPlan plan{kSeed + 6};
    for (std::size_t i = 0; i < systems.size(); ++i) {
        const auto v = verify_theorem_on_synthetic(systems[i], 0.5, 100000, plan.derive(i), cfg);
        ok = ok && v.passed;
        detail += fmt("%s%s %.4f<=%.4f", i ? ", " : "", v.system.c_str(), v.estimate.upper_ci(), v.bound);
    }
    return {ok && systems.size() == 3, detail};
}

Outcome transformed_bound() {
    gen::Gen g(kSeed + 7);
    int violations = 0;
    double worst = -INFINITY;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t len = g.size(1, 20);
        auto F = g.weights(len, 5.0);
        for (auto& x : F) x += 0.5 * len;
        const auto G = g.weights(len, 1.0);
        const auto M = g.walk(len, 0.5);
        const auto bundle = GronwallPathBundle::by_equality(RealSequence(F), RealSequence::weights(G), RealSequence(M));
        const auto res = check_transformed_bound(bundle, kTransformedTol);
        violations += !res.passed;
        worst = std::max(worst, res.max_excess);
    }
    return {violations == 0, fmt("10000 bundles, %d violations, max excess %.3g", violations, worst)};
}

Outcome newton_linear() {
    gen::Gen g(kSeed + 8);
    ProblemParams pp;
    pp.lambda = 1.0;
    pp.sigma = 0.5;
    const auto pb = make_problem("linear", pp);
    double worst = 0.0;
    for (double h : {0.2, 0.1, 0.05, 0.01}) {
        for (int i = 0; i < 1000; ++i) {
            State y(1), dw(1);
            y(0) = g.uniform(-5.0, 5.0);
            dw(0) = g.uniform(-1.0, 1.0) * std::sqrt(h) * 3.0;
            const auto res = bem_step(pb, y, dw, h);
            const double expect = (y(0) + 0.5 * y(0) * dw(0)) / (1.0 + h);
            worst = std::max(worst, std::abs(res.y_next(0) - expect));
        }
    }
    return {worst <= kNewtonTol, fmt("4000 steps, max |newton - closed form| %.3g", worst)};
}

std::vector<std::string> apriori_args(std::size_t workers) {
    return {"verify", "apriori", "--problem", "ginzburg-landau", "--sigma", "0.5",  "--p",     "0.5",
            "--T",    "1",       "--h0",      "0.25",            "--h-grid", "0.125,0.0625,0.03125,0.015625",
            "--paths", "100000", "--seed",    std::to_string(kSeed + 9),     "--z", "4",
            "--format", "json",  "--workers", std::to_string(workers)};
}

std::string apriori_report;

Outcome apriori() {
    std::ostringstream out, err;
    const int code = cli::run(apriori_args(1), out, err);
    apriori_report = out.str();
    if (apriori_report.empty()) return {false, "no report: " + err.str()};
    const auto doc = nlohmann::json::parse(apriori_report);
    const double bound = doc["inputs"]["bound"].get<double>();
    bool below = true;
    std::string detail = fmt("bound %.4f; upper CI", bound);
    for (const auto& row : doc["rows"]) {
        below = below && row["passed"].get<bool>() && row["upper_ci"].get<double>() < bound;
        detail += fmt(" %.4f", row["upper_ci"].get<double>());
    }
    const double spread = doc["inputs"]["spread"].get<double>();
    const double margin = doc["inputs"]["margin"].get<double>();
    const bool robust = spread < margin;
    detail += fmt("; spread %.4f < margin %.2f", spread, margin);
    return {code == 0 && below && robust && doc["rows"].size() == 4, detail};
}

Outcome reproducibility() {
    if (apriori_report.empty()) return {false, "criterion 9 produced no report"};
    bool same = true;
    for (std::size_t w : {4u, 8u}) {
        std::ostringstream out, err;
        cli::run(apriori_args(w), out, err);
        same = same && out.str() == apriori_report;
    }
    return {same, same ? "workers 1, 4, 8 give byte-identical reports" : "reports differ across worker counts"};
}

}  // namespace

int main() {
    criterion(1, "telescoping identity", 5, telescoping);
    criterion(2, "discrete Gronwall soundness", 5, gronwall_soundness);
    criterion(3, "martingale sup/inf by exact enumeration", 60, walk_enumeration);
    criterion(4, "sup/inf constant bracket", 1, constant_bracket);
    criterion(5, "stopped Brownian sharp constant", 30, sharp_constant);
    criterion(6, "synthetic Gronwall bound", 60, theorem_synthetic);
    criterion(7, "transformed martingale pathwise bound", 10, transformed_bound);
    criterion(8, "implicit step vs closed form", 5, newton_linear);
    criterion(9, "step-size independent a priori bound", 600, apriori);
    criterion(10, "reproducibility across worker counts", 1200, reproducibility);
    std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
