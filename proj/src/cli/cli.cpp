#include "sgronwall/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include "sgronwall/bounds.hpp"
#include "sgronwall/errors.hpp"
#include "sgronwall/martingale_lab.hpp"
#include "sgronwall/mc_engine.hpp"
#include "sgronwall/problem_zoo.hpp"
#include "sgronwall/report.hpp"
#include "sgronwall/sde_bem.hpp"
#include "sgronwall/sequences.hpp"

namespace sgronwall::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr std::uint64_t kDefaultSeed = 1;

double parse_double(const std::string& key, const std::string& text) {
    std::string t = text;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("--" + key + ": '" + text + "' is not a number");
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    return out;
}

/// Resolves parameters from command-line flags first, then the JSON config
/// document, then defaults. Every config key must be consumed.
class Params {
public:
    Params(std::map<std::string, std::string> flags, json config, std::string command)
        : flags_(std::move(flags)), config_(std::move(config)), command_(std::move(command)) {
        if (!config_.is_object()) throw ConfigError("config document must be a JSON object");
        if (config_.contains("command")) {
            used_.insert("command");
            if (!config_["command"].is_string() || config_["command"].get<std::string>() != command_) {
                throw ConfigError("config is for command '" + config_["command"].dump() + "', not '" + command_ + "'");
            }
        }
    }

    bool has(const std::string& key) const { return flags_.count(key) || config_.contains(key); }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        if (auto it = flags_.find(key); it != flags_.end()) return parse_double(key, it->second);
        if (config_.contains(key)) {
            used_.insert(key);
            const auto& v = config_[key];
            if (v.is_number()) return v.get<double>();
            if (v.is_string()) return parse_double(key, v.get<std::string>());
            throw ConfigError("config key '" + key + "' must be a number");
        }
        if (fallback) return *fallback;
        throw ConfigError("missing required parameter --" + key);
    }

    std::size_t count(const std::string& key, std::optional<std::size_t> fallback = std::nullopt) {
        const double v = number(key, fallback ? std::optional<double>(static_cast<double>(*fallback)) : std::nullopt);
        if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) {
            throw ConfigError("--" + key + " must be a nonnegative integer");
        }
        return static_cast<std::size_t>(v);
    }

    std::vector<double> list(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) {
        if (auto it = flags_.find(key); it != flags_.end()) return parse_list(key, it->second);
        if (config_.contains(key)) {
            used_.insert(key);
            const auto& v = config_[key];
            if (v.is_number()) return {v.get<double>()};
            if (v.is_string()) return parse_list(key, v.get<std::string>());
            if (!v.is_array()) throw ConfigError("config key '" + key + "' must be an array of numbers");
            std::vector<double> out;
            for (const auto& e : v) {
                if (!e.is_number()) throw ConfigError("config key '" + key + "' must be an array of numbers");
                out.push_back(e.get<double>());
            }
            return out;
        }
        if (fallback) return *fallback;
        throw ConfigError("missing required parameter --" + key);
    }

    std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        if (auto it = flags_.find(key); it != flags_.end()) return it->second;
        if (config_.contains(key)) {
            used_.insert(key);
            if (!config_[key].is_string()) throw ConfigError("config key '" + key + "' must be a string");
            return config_[key].get<std::string>();
        }
        if (fallback) return *fallback;
        throw ConfigError("missing required parameter --" + key);
    }

    std::uint64_t seed() {
        if (has("seed")) {
            const double v = number("seed");
            if (!(v >= 0.0) || v != std::floor(v) || v >= 18446744073709551616.0) {
                throw ConfigError("--seed must be an unsigned 64-bit integer");
            }
            // Large seeds lose precision through double; reparse the raw text.
            if (auto it = flags_.find("seed"); it != flags_.end()) return std::stoull(it->second);
            if (config_["seed"].is_number_unsigned()) return config_["seed"].get<std::uint64_t>();
            if (config_["seed"].is_string()) return std::stoull(config_["seed"].get<std::string>());
            return static_cast<std::uint64_t>(v);
        }
        if (const char* env = std::getenv(kSeedEnvVar); env && *env) {
            try {
                return std::stoull(env);
            } catch (const std::exception&) {
                throw ConfigError(std::string(kSeedEnvVar) + " is not an unsigned integer");
            }
        }
        return kDefaultSeed;
    }

    void finish() const {
        for (const auto& [key, value] : config_.items()) {
            if (!used_.count(key) && !flags_.count(key)) throw ConfigError("unknown config key '" + key + "' for " + command_);
        }
    }

private:
    std::map<std::string, std::string> flags_;
    json config_;
    std::string command_;
    std::set<std::string> used_;
};

json json_list(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(x);
    return out;
}

std::vector<double> read_csv_column(const std::string& path, std::size_t column, const std::string& name) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::vector<double> out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (column >= fields.size()) throw ConfigError(path + ": row without a " + name + " column");
        std::string cell = fields[column];
        cell.erase(0, cell.find_first_not_of(" \t\r"));
        cell.erase(cell.find_last_not_of(" \t\r") + 1);
        if (first) {
            first = false;
            bool header = false;
            try {
                std::size_t pos = 0;
                std::stod(cell, &pos);
                header = pos != cell.size();
            } catch (const std::exception&) {
                header = true;
            }
            if (header) continue;
        }
        out.push_back(parse_double(name, cell));
    }
    return out;
}

// ---------------------------------------------------------------------------
// bound

Report cmd_bound(Params& prm) {
    const std::string form = prm.text("form");
    Report rep;
    rep.command = "bound";
    rep.inputs["form"] = form;
    const double p = prm.number("p");
    rep.inputs["p"] = p;

    if (form == "deterministic-G") {
        const std::vector<double> G = prm.list("G");
        const std::size_t n = prm.count("n", G.size());
        const double e_sup_f = prm.number("e-sup-f");
        rep.inputs["G"] = json_list(G);
        rep.inputs["n"] = n;
        rep.inputs["e-sup-f"] = e_sup_f;
        const RealSequence Gs = RealSequence::weights(G);
        const double bound = theorem_bound_deterministic_G(p, Gs, n, e_sup_f);
        const double prefactor = 1.0 + 1.0 / (1.0 - p);
        const double power = e_sup_f == 0.0 ? 0.0 : std::pow(e_sup_f, p);
        const double product = std::exp(p * log_weight_product(Gs, 0, n));
        rep.columns = {"prefactor", "product_term", "power_term", "bound"};
        rep.add_row({prefactor, product, power, bound});
    } else if (form == "random-G" || form == "holder") {
        const HolderParams hp = prm.has("mu") ? HolderParams::from_mu(p, prm.number("mu")) : HolderParams(p, prm.number("nu"));
        rep.inputs["nu"] = hp.nu();
        rep.inputs["mu"] = hp.mu_is_infinite() ? json("inf") : json(hp.mu());
        const double prefactor = holder_prefactor(hp);
        if (form == "holder") {
            rep.columns = {"p", "nu", "prefactor"};
            rep.add_row({p, hp.nu(), prefactor});
        } else {
            const double norm = prm.number("norm");
            const double e_sup_f = prm.number("e-sup-f");
            const std::size_t n = prm.count("n", 0);
            rep.inputs["norm"] = norm;
            rep.inputs["e-sup-f"] = e_sup_f;
            const double bound = theorem_bound_random_G(hp, norm, n, e_sup_f);
            rep.columns = {"prefactor", "product_term", "power_term", "bound"};
            rep.add_row({prefactor, norm, e_sup_f == 0.0 ? 0.0 : std::pow(e_sup_f, p), bound});
        }
    } else if (form == "apriori") {
        AprioriInputs in;
        in.p = p;
        in.L = prm.number("L");
        in.T = prm.number("T");
        in.h0 = prm.number("h0");
        in.x0_norm_sq = prm.number("x0sq");
        in.g_x0_norm_sq = prm.number("gx0sq", 0.0);
        for (const auto& [k, v] : std::initializer_list<std::pair<const char*, double>>{
                 {"L", in.L}, {"T", in.T}, {"h0", in.h0}, {"x0sq", in.x0_norm_sq}, {"gx0sq", in.g_x0_norm_sq}}) {
            rep.inputs[k] = v;
        }
        const double bound = apriori_bound(in);
        const double inv_margin = 1.0 / (1.0 - 2.0 * in.h0 * in.L);
        const double growth = std::exp(in.p * inv_margin * 2.0 * in.L * in.T);
        const double base = in.x0_norm_sq + inv_margin * (in.h0 * in.g_x0_norm_sq + 2.0 * in.L * in.T);
        rep.columns = {"prefactor", "growth_term", "base_term", "bound"};
        rep.add_row({1.0 + 1.0 / (1.0 - p), growth, base == 0.0 ? 0.0 : std::pow(base, p), bound});
    } else {
        throw ConfigError("--form must be one of deterministic-G, random-G, holder, apriori; got '" + form + "'");
    }
    return rep;
}

// ---------------------------------------------------------------------------
// gronwall

Report cmd_gronwall(Params& prm) {
    std::vector<double> f, g;
    Report rep;
    rep.command = "gronwall";
    if (prm.has("csv")) {
        const std::string path = prm.text("csv");
        f = read_csv_column(path, 0, "f");
        g = read_csv_column(path, 1, "g");
        rep.inputs["csv"] = path;
    } else {
        f = prm.has("f-file") ? read_csv_column(prm.text("f-file"), 0, "f") : prm.list("f");
        g = prm.has("g-file") ? read_csv_column(prm.text("g-file"), 0, "g") : prm.list("g");
    }
    rep.inputs["f"] = json_list(f);
    rep.inputs["g"] = json_list(g);
    if (f.empty()) throw ContractViolation("f must have at least one entry");
    if (f.size() != g.size()) {
        throw ContractViolation("f and g must have equal length; got " + std::to_string(f.size()) + " and " +
                                std::to_string(g.size()));
    }
    const RealSequence fs(f);
    const RealSequence gs(g);
    gs.require_nonnegative("g");
    const std::size_t n = f.size() - 1;
    const RealSequence env = gronwall_recursive_envelope(fs, gs, n);

    rep.columns = {"k", "f", "g", "closed_form", "envelope"};
    bool agree = true;
    for (std::size_t k = 0; k <= n; ++k) {
        const double closed = gronwall_closed_form(fs, gs, k);
        agree = agree && std::abs(closed - env[k]) <= 1e-12 * std::max(1.0, std::abs(closed));
        rep.add_row({static_cast<std::int64_t>(k), f[k], g[k], closed, env[k]});
    }
    rep.add_verdict("envelope_matches_closed_form", agree);
    return rep;
}

// ---------------------------------------------------------------------------
// martingale

Report cmd_remark_constants(Params& prm) {
    const std::vector<double> ps = prm.list("p");
    Report rep;
    rep.command = "martingale remark-constants";
    rep.inputs["p"] = json_list(ps);
    rep.columns = {"p", "lower", "upper", "ratio"};
    bool ordered = true;
    for (double p : ps) {
        const RemarkConstants c = remark_constants(p);
        ordered = ordered && c.lower <= c.upper;
        rep.add_row({p, c.lower, c.upper, c.ratio});
    }
    rep.add_verdict("lower_le_upper", ordered);
    return rep;
}

Report cmd_enumerate(Params& prm) {
    const std::size_t steps = prm.count("steps");
    const double stop = prm.has("stop-level") ? prm.number("stop-level") : kNoStop;
    const std::vector<double> ps = prm.list("p", std::vector<double>{0.1, 0.25, 0.5, 0.75, 0.9});
    Report rep;
    rep.command = "martingale enumerate";
    rep.inputs["steps"] = steps;
    rep.inputs["stop-level"] = std::isinf(stop) ? json("none") : json(stop);
    rep.inputs["p"] = json_list(ps);
    const WalkEnumeration en = enumerate_walks(steps, stop, ps);
    rep.columns = {"p", "e_sup_p", "e_neg_inf", "ratio", "constant", "within_bound"};
    bool all = true;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const LemmaRatio r = lemma_bound_ratio(ps[i], en.e_sup_p[i], en.e_neg_inf);
        const bool ok = en.e_sup_p[i] <= r.constant * (en.e_neg_inf == 0.0 ? 0.0 : std::pow(en.e_neg_inf, ps[i])) + 1e-12;
        all = all && ok;
        rep.add_row({ps[i], en.e_sup_p[i], en.e_neg_inf, r.ratio, r.constant, ok});
    }
    rep.add_verdict("sup_inf_inequality", all);
    return rep;
}

StreamPlan plan_from(Params& prm, Report& rep) {
    StreamPlan plan;
    plan.master_seed = prm.seed();
    plan.workers = prm.count("workers", 1);
    if (plan.workers == 0) throw ConfigError("--workers must be >= 1");
    rep.inputs["seed"] = plan.master_seed;
    return plan;
}

EstimatorConfig estimator_from(Params& prm, Report& rep) {
    EstimatorConfig cfg;
    cfg.z = prm.number("z", 1.96);
    cfg.max_failure_rate = prm.number("max-failure-rate", cfg.max_failure_rate);
    if (!(cfg.z > 0.0)) throw ConfigError("--z must be > 0");
    if (!(cfg.max_failure_rate >= 0.0 && cfg.max_failure_rate <= 1.0)) {
        throw ConfigError("--max-failure-rate must lie in [0, 1]");
    }
    rep.inputs["z"] = cfg.z;
    rep.inputs["max-failure-rate"] = cfg.max_failure_rate;
    return cfg;
}

Report cmd_sample_sup(Params& prm) {
    Report rep;
    rep.command = "martingale sample-sup";
    const std::size_t samples = prm.count("samples", 1000000);
    const std::vector<double> ps = prm.list("p", std::vector<double>{0.5});
    const StreamPlan plan = plan_from(prm, rep);
    const EstimatorConfig cfg = estimator_from(prm, rep);
    rep.inputs["samples"] = samples;
    rep.inputs["p"] = json_list(ps);
    for (double p : ps) detail::require(p > 0.0 && p < 1.0, "p must lie in (0,1)");

    const auto est = estimate_expectations(
        [&](RandomStream& rng, std::span<double> out) {
            const double s = sample_sup_stopped_bm_exact(rng);
            for (std::size_t i = 0; i < ps.size(); ++i) out[i] = s == 0.0 ? 0.0 : std::pow(s, ps[i]);
            return true;
        },
        ps.size(), samples, plan, cfg);
    rep.columns = {"p", "mean", "std_error", "ci_halfwidth", "exact", "n_samples"};
    bool all = true;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double exact = remark_constants(ps[i]).lower;
        all = all && std::abs(est[i].mean - exact) <= 4.0 * est[i].std_error;
        rep.add_row({ps[i], est[i].mean, est[i].std_error, est[i].ci_halfwidth, exact,
                     static_cast<std::int64_t>(est[i].n_samples)});
    }
    rep.add_verdict("within_4_std_errors", all);
    return rep;
}

Report cmd_wiener(Params& prm) {
    Report rep;
    rep.command = "martingale wiener";
    const double h = prm.number("h");
    const double t_max = prm.number("t-max", kDefaultWienerHorizon);
    const std::size_t paths = prm.count("paths", 10000);
    const std::vector<double> ps = prm.list("p", std::vector<double>{0.5});
    const StreamPlan plan = plan_from(prm, rep);
    const EstimatorConfig cfg = estimator_from(prm, rep);
    rep.inputs["h"] = h;
    rep.inputs["t-max"] = t_max;
    rep.inputs["paths"] = paths;
    rep.inputs["p"] = json_list(ps);
    for (double p : ps) detail::require(p > 0.0 && p < 1.0, "p must lie in (0,1)");
    detail::require(h > 0.0 && t_max >= h, "need h > 0 and t-max >= h");

    // Outputs: sup^p for each p, then -inf, then the truncation indicator.
    const std::size_t k = ps.size();
    const auto est = estimate_expectations(
        [&](RandomStream& rng, std::span<double> out) {
            const StoppedWienerSummary s = stopped_wiener_summary(h, t_max, rng);
            for (std::size_t i = 0; i < k; ++i) {
                out[i] = s.functionals.sup_val == 0.0 ? 0.0 : std::pow(s.functionals.sup_val, ps[i]);
            }
            out[k] = s.functionals.neg_inf_val;
            out[k + 1] = s.stopped ? 0.0 : 1.0;
            return true;
        },
        k + 2, paths, plan, cfg);
    rep.columns = {"p", "e_sup_p", "e_sup_p_std_error", "e_neg_inf", "e_neg_inf_std_error", "ratio", "constant",
                   "sharp_limit", "truncation_fraction"};
    bool all = true;
    for (std::size_t i = 0; i < k; ++i) {
        const LemmaRatio r = lemma_bound_ratio(ps[i], est[i].mean, est[k].mean);
        all = all && r.within_bound;
        rep.add_row({ps[i], est[i].mean, est[i].std_error, est[k].mean, est[k].std_error, r.ratio, r.constant,
                     remark_constants(ps[i]).lower, est[k + 1].mean});
    }
    rep.add_verdict("ratio_within_constant", all);
    return rep;
}

// ---------------------------------------------------------------------------
// problems, bem

SdeProblem problem_from(Params& prm, Report& rep) {
    const std::string label = prm.text("problem");
    ProblemParams pp;
    pp.lambda = prm.number("lambda", pp.lambda);
    pp.sigma = prm.number("sigma", pp.sigma);
    pp.omega = prm.number("omega", pp.omega);
    if (prm.has("x0")) pp.x0 = prm.list("x0");
    if (prm.has("L")) pp.L_override = prm.number("L");
    rep.inputs["problem"] = label;
    rep.inputs["lambda"] = pp.lambda;
    rep.inputs["sigma"] = pp.sigma;
    rep.inputs["omega"] = pp.omega;
    SdeProblem pb = make_problem(label, pp);
    std::vector<double> x0(pb.x0.data(), pb.x0.data() + pb.x0.size());
    rep.inputs["x0"] = json_list(x0);
    rep.inputs["L"] = pb.L;
    return pb;
}

SolverConfig solver_from(Params& prm) {
    SolverConfig s;
    s.tolerance = prm.number("tol", s.tolerance);
    s.max_iterations = prm.count("max-iter", s.max_iterations);
    return s;
}

// h0 defaults to the midpoint between h and the coercivity cap 1/(2L).
double default_h0(double h, double L) { return L > 0.0 ? 0.5 * (h + 0.5 / L) : std::max(1.0, 2.0 * h); }

Report cmd_bem_simulate(Params& prm) {
    Report rep;
    rep.command = "bem simulate";
    const SdeProblem pb = problem_from(prm, rep);
    const double h = prm.number("h");
    const double T = prm.number("T", 1.0);
    const double h0 = prm.number("h0", default_h0(h, pb.L));
    const std::vector<double> ps = prm.list("p", std::vector<double>{0.5});
    const SolverConfig solver = solver_from(prm);
    const std::uint64_t seed = prm.seed();
    rep.inputs["h"] = h;
    rep.inputs["h0"] = h0;
    rep.inputs["T"] = T;
    rep.inputs["p"] = json_list(ps);
    rep.inputs["seed"] = seed;

    const BemConfig cfg(h, h0, T, pb, solver);
    RandomStream rng(seed, 0);
    const BemTrajectory traj = simulate_trajectory(pb, cfg, ps, rng);
    const RecursionCheck check = pathwise_recursion_check(traj, pb, cfg);
    for (std::size_t i = 0; i < ps.size(); ++i) {
        rep.inputs["sup_functional_p" + format_number(ps[i])] = traj.sup_functional[i];
    }

    rep.columns = {"j", "t"};
    for (std::size_t i = 0; i < pb.d; ++i) rep.columns.push_back("y" + std::to_string(i));
    for (std::size_t i = 0; i < pb.m; ++i) rep.columns.push_back("dw" + std::to_string(i));
    rep.columns.insert(rep.columns.end(), {"z", "energy", "iterations"});
    for (std::size_t j = 0; j < traj.states.size(); ++j) {
        std::vector<Cell> row{static_cast<std::int64_t>(j), static_cast<double>(j) * h};
        for (std::size_t i = 0; i < pb.d; ++i) row.emplace_back(traj.states[j](static_cast<Eigen::Index>(i)));
        for (std::size_t i = 0; i < pb.m; ++i) {
            row.emplace_back(j == 0 ? 0.0 : traj.dW[j - 1](static_cast<Eigen::Index>(i)));
        }
        row.emplace_back(j == 0 ? 0.0 : traj.z_increments[j - 1]);
        row.emplace_back(energy(pb, traj.states[j], h));
        row.emplace_back(static_cast<std::int64_t>(j == 0 ? 0 : traj.iterations[j - 1]));
        rep.add_row(std::move(row));
    }
    rep.add_verdict("pathwise_recursion", check.passed);
    return rep;
}

// ---------------------------------------------------------------------------
// verify

Report cmd_verify_theorem(Params& prm) {
    Report rep;
    rep.command = "verify theorem";
    const std::string which = prm.text("system", "all");
    const double p = prm.number("p", 0.5);
    const std::size_t horizon = prm.count("horizon", 10);
    const std::size_t paths = prm.count("paths", 100000);
    const StreamPlan plan = plan_from(prm, rep);
    const EstimatorConfig cfg = estimator_from(prm, rep);
    rep.inputs["system"] = which;
    rep.inputs["p"] = p;
    rep.inputs["horizon"] = horizon;
    rep.inputs["paths"] = paths;

    rep.columns = {"system", "estimate", "std_error", "upper_ci", "e_sup_f", "bound", "exact", "passed"};
    const auto systems = reference_synthetic_systems(horizon);
    bool matched = false;
    for (std::size_t i = 0; i < systems.size(); ++i) {
        if (which != "all" && which != systems[i].name) continue;
        matched = true;
        const TheoremVerification v = verify_theorem_on_synthetic(systems[i], p, paths, plan.derive(i), cfg);
        rep.add_row({v.system, v.estimate.mean, v.estimate.std_error, v.estimate.upper_ci(), v.e_sup_F, v.bound,
                     v.exact ? *v.exact : std::nan(""), v.passed});
        rep.add_verdict(v.system, v.passed);
    }
    if (!matched) throw ConfigError("unknown synthetic system '" + which + "'");
    return rep;
}

Report cmd_verify_apriori(Params& prm) {
    Report rep;
    rep.command = "verify apriori";
    const SdeProblem pb = problem_from(prm, rep);
    const double p = prm.number("p", 0.5);
    const double T = prm.number("T", 1.0);
    const double h0 = prm.number("h0");
    const std::vector<double> grid = prm.list("h-grid");
    const std::size_t paths = prm.count("paths", 100000);
    const SolverConfig solver = solver_from(prm);
    const StreamPlan plan = plan_from(prm, rep);
    const EstimatorConfig cfg = estimator_from(prm, rep);
    rep.inputs["p"] = p;
    rep.inputs["T"] = T;
    rep.inputs["h0"] = h0;
    rep.inputs["h-grid"] = json_list(grid);
    rep.inputs["paths"] = paths;
    if (grid.empty()) throw ConfigError("--h-grid needs at least one step size");

    std::vector<BemConfig> configs;
    for (double h : grid) configs.emplace_back(h, h0, T, pb, solver);
    const AprioriVerification v = verify_apriori(pb, configs, p, paths, plan, cfg);
    rep.inputs["bound"] = v.bound;
    rep.inputs["h_span"] = v.h_span;
    rep.inputs["spread"] = v.spread;
    rep.inputs["margin"] = v.margin;

    rep.columns = {"h", "steps", "estimate", "std_error", "upper_ci", "bound", "failures", "recursion_violations",
                   "aborted", "passed"};
    for (const auto& row : v.rows) {
        rep.add_row({row.h, static_cast<std::int64_t>(row.steps), row.estimate.mean, row.estimate.std_error,
                     row.aborted ? std::nan("") : row.estimate.upper_ci(), v.bound,
                     static_cast<std::int64_t>(row.failures), static_cast<std::int64_t>(row.recursion_violations),
                     row.aborted, row.passed});
        rep.add_verdict("h=" + format_number(row.h), row.passed);
    }
    rep.add_verdict("h_robust", v.h_robust);
    return rep;
}

Report cmd_verify_check(Params& prm) {
    const std::string path = prm.text("report");
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open report " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    const Report checked = Report::from_json(doc);
    Report rep;
    rep.command = "verify check";
    rep.inputs["report"] = path;
    rep.columns = {"report_command", "rows", "verdicts", "all_passed"};
    rep.add_row({checked.command, static_cast<std::int64_t>(checked.rows.size()),
                 static_cast<std::int64_t>(checked.verdicts.size()), checked.all_passed()});
    rep.add_verdict("schema_valid", true);
    return rep;
}

// ---------------------------------------------------------------------------

using Handler = std::function<Report(Params&)>;

struct Leaf {
    std::string command;
    CLI::App* app = nullptr;
    Handler handler;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    std::string config_path;
    std::string output_path;
    std::string format = "auto";

    void add(const std::string& key, const std::string& help) {
        options[key] = app->add_option("--" + key, values[key], help);
    }
};

const char* kExitCodeHelp =
    "Exit codes: 0 success, 2 config error, 3 numerical-contract violation, 4 solver failure, "
    "5 verification failure.";

void add_common(Leaf& leaf, const std::string& default_format) {
    leaf.format = default_format;
    leaf.app->add_option("--config", leaf.config_path, "JSON experiment config; flags override its values");
    leaf.app->add_option("--output", leaf.output_path, "Write the report to this path instead of stdout");
    leaf.app->add_option("--format", leaf.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
}

void add_stochastic(Leaf& leaf) {
    leaf.add("seed", std::string("Master seed (default: $") + kSeedEnvVar + " or 1)");
    leaf.add("workers", "Worker threads; never changes results");
    leaf.add("z", "Confidence multiplier for CI half-widths (default 1.96)");
    leaf.add("max-failure-rate", "Abort an estimate when this fraction of paths fails (default 0.01)");
}

void add_problem(Leaf& leaf) {
    leaf.add("problem", "Problem label: linear, ginzburg-landau, bounded-rotation");
    leaf.add("lambda", "Damping rate (linear, bounded-rotation)");
    leaf.add("sigma", "Noise intensity");
    leaf.add("omega", "Rotation speed (bounded-rotation)");
    leaf.add("x0", "Initial state, comma separated");
    leaf.add("L", "Override the registered coercivity constant");
    leaf.add("tol", "Implicit solver residual tolerance (default 1e-12)");
    leaf.add("max-iter", "Implicit solver iteration cap (default 50)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Discrete stochastic Gronwall toolkit: bounds, martingale checks, backward Euler-Maruyama "
                 "and Monte Carlo verification.",
                 "sgronwall"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.footer(kExitCodeHelp);
    app.require_subcommand(1);

    std::vector<std::unique_ptr<Leaf>> leaves;
    auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& desc, std::string command,
                    Handler handler, const std::string& default_format) -> Leaf& {
        auto l = std::make_unique<Leaf>();
        l->command = std::move(command);
        l->app = parent->add_subcommand(name, desc);
        l->app->footer(kExitCodeHelp);
        l->handler = std::move(handler);
        add_common(*l, default_format);
        leaves.push_back(std::move(l));
        return *leaves.back();
    };

    {
        Leaf& l = leaf(&app, "bound", "Evaluate a stochastic Gronwall or a priori bound", "bound", cmd_bound, "csv");
        l.add("form", "deterministic-G | random-G | holder | apriori");
        l.add("p", "Exponent in (0,1)");
        l.add("nu", "Hoelder exponent nu in [1, 1/p)");
        l.add("mu", "Hoelder exponent mu in (1, inf]; alternative to --nu");
        l.add("G", "Deterministic weights G_0.., comma separated");
        l.add("n", "Horizon n (default: number of weights)");
        l.add("e-sup-f", "E[sup_{k<=n} F_k]");
        l.add("norm", "L^mu norm of prod (1+G_k)^p");
        l.add("L", "Coercivity constant");
        l.add("T", "Horizon");
        l.add("h0", "Step-size cap");
        l.add("x0sq", "|X_0|^2");
        l.add("gx0sq", "|g(X_0)|^2");
    }
    {
        Leaf& l = leaf(&app, "gronwall", "Closed-form discrete Gronwall bound and recursive envelope", "gronwall",
                       cmd_gronwall, "csv");
        l.add("f", "Sequence f, comma separated");
        l.add("g", "Nonnegative weights g, comma separated");
        l.add("f-file", "File whose first column is f");
        l.add("g-file", "File whose first column is g");
        l.add("csv", "CSV file with columns f,g");
    }
    CLI::App* mart = app.add_subcommand("martingale", "Martingale sup/inf experiments");
    mart->require_subcommand(1);
    {
        Leaf& l = leaf(mart, "remark-constants", "pi p/sin(pi p), 1/(1-p) and their ratio",
                       "martingale remark-constants", cmd_remark_constants, "csv");
        l.add("p", "Exponents, comma separated");
    }
    {
        Leaf& l = leaf(mart, "enumerate", "Exact sup/inf expectations over all +-1 walks", "martingale enumerate",
                       cmd_enumerate, "csv");
        l.add("steps", "Walk length (<= 24)");
        l.add("stop-level", "Freeze the walk once it reaches this negative level");
        l.add("p", "Exponents, comma separated");
    }
    {
        Leaf& l = leaf(mart, "sample-sup", "Exact sampler of the stopped Brownian supremum", "martingale sample-sup",
                       cmd_sample_sup, "csv");
        l.add("samples", "Number of samples (default 1e6)");
        l.add("p", "Exponents, comma separated");
        add_stochastic(l);
    }
    {
        Leaf& l = leaf(mart, "wiener", "Discretized Brownian motion stopped at -1", "martingale wiener", cmd_wiener,
                       "csv");
        l.add("h", "Grid step");
        l.add("t-max", "Truncation horizon (default 1e4)");
        l.add("paths", "Number of paths");
        l.add("p", "Exponents, comma separated");
        add_stochastic(l);
    }
    CLI::App* bem = app.add_subcommand("bem", "Backward Euler-Maruyama trajectories");
    bem->require_subcommand(1);
    {
        Leaf& l = leaf(bem, "simulate", "Simulate one trajectory", "bem simulate", cmd_bem_simulate, "csv");
        add_problem(l);
        l.add("h", "Step size");
        l.add("h0", "Step-size cap (default: midpoint of h and 1/(2L))");
        l.add("T", "Horizon (default 1)");
        l.add("p", "Functional exponents");
        l.add("seed", std::string("Seed (default: $") + kSeedEnvVar + " or 1)");
    }
    CLI::App* verify = app.add_subcommand("verify", "Monte Carlo verification of the bounds");
    verify->require_subcommand(1);
    {
        Leaf& l = leaf(verify, "theorem", "Synthetic check of the deterministic-weight Gronwall bound",
                       "verify theorem", cmd_verify_theorem, "json");
        l.add("system", "all | constant-F | ramp-F-walk | ramp-F-walk-G0.1");
        l.add("p", "Exponent (default 0.5)");
        l.add("horizon", "Horizon n (default 10)");
        l.add("paths", "Paths per system (default 1e5)");
        add_stochastic(l);
    }
    {
        Leaf& l = leaf(verify, "apriori", "Step-size independence of the backward Euler-Maruyama bound",
                       "verify apriori", cmd_verify_apriori, "json");
        add_problem(l);
        l.add("p", "Exponent (default 0.5)");
        l.add("T", "Horizon (default 1)");
        l.add("h0", "Step-size cap shared by the grid");
        l.add("h-grid", "Step sizes, comma separated");
        l.add("paths", "Paths per step size (default 1e5)");
        add_stochastic(l);
    }
    {
        Leaf& l = leaf(verify, "check", "Re-parse and schema-check an emitted JSON report", "verify check",
                       cmd_verify_check, "csv");
        l.add("report", "Path of the JSON report");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        const CLI::App* target = &app;
        for (const CLI::App* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front(); sub;
             sub = sub->get_subcommands().empty() ? nullptr : sub->get_subcommands().front()) {
            target = sub;
        }
        out << target->help();
        return static_cast<int>(ExitCode::success);
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return static_cast<int>(ExitCode::success);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::config_error);
    }

    Leaf* active = nullptr;
    for (auto& l : leaves) {
        if (l->app->parsed()) active = l.get();
    }
    if (!active) {
        err << "error: no command selected\n";
        return static_cast<int>(ExitCode::config_error);
    }

    try {
        json config = json::object();
        if (!active->config_path.empty()) {
            std::ifstream in(active->config_path);
            if (!in) throw ConfigError("cannot open config " + active->config_path);
            try {
                config = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ConfigError(active->config_path + ": " + e.what());
            }
        }
        std::map<std::string, std::string> flags;
        for (const auto& [key, opt] : active->options) {
            if (opt->count() > 0) flags[key] = active->values[key];
        }
        Params prm(std::move(flags), std::move(config), active->command);
        Report rep = active->handler(prm);
        prm.finish();

        const std::string text = active->format == "json" ? rep.to_json().dump(2) + "\n" : rep.to_csv();
        if (active->output_path.empty()) {
            out << text;
        } else {
            std::ofstream file(active->output_path);
            if (!file) throw ConfigError("cannot write " + active->output_path);
            file << text;
        }
        if (!rep.all_passed()) {
            for (const auto& [name, ok] : rep.verdicts) {
                if (!ok) err << "verification failed: " << name << '\n';
            }
            return static_cast<int>(ExitCode::verification_failure);
        }
        return static_cast<int>(ExitCode::success);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::config_error);
    } catch (const ContractViolation& e) {
        err << "contract violation: " << e.what() << '\n';
        return static_cast<int>(ExitCode::contract_violation);
    } catch (const SolverFailure& e) {
        err << "solver failure: " << e.what() << '\n';
        return static_cast<int>(ExitCode::solver_failure);
    } catch (const SamplerAborted& e) {
        err << "sampler aborted: " << e.what() << '\n';
        return static_cast<int>(ExitCode::solver_failure);
    }
}

}  // namespace sgronwall::cli
