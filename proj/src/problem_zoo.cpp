#include "sgronwall/problem_zoo.hpp"

#include <algorithm>
#include <cmath>

#include "sgronwall/errors.hpp"

namespace sgronwall {

namespace {

State initial_state(const ProblemParams& params, std::vector<double> fallback) {
    const auto& src = params.x0.empty() ? fallback : params.x0;
    State x0(static_cast<Eigen::Index>(src.size()));
    for (std::size_t i = 0; i < src.size(); ++i) x0(static_cast<Eigen::Index>(i)) = src[i];
    return x0;
}

Matrix scalar(double v) {
    Matrix out(1, 1);
    out(0, 0) = v;
    return out;
}

SdeProblem linear(const ProblemParams& params) {
    const double lambda = params.lambda;
    const double sigma = params.sigma;
    detail::require(lambda >= 0.0, "linear problem needs lambda >= 0");
    SdeProblem pb;
    pb.label = "linear";
    pb.d = 1;
    pb.m = 1;
    pb.drift = [lambda](const State& x) -> State { return -lambda * x; };
    pb.diffusion = [sigma](const State& x) { return scalar(sigma * x(0)); };
    pb.drift_jacobian = [lambda](const State&) { return scalar(-lambda); };
    pb.x0 = initial_state(params, {1.0});
    pb.L = std::max(lambda, 0.5 * sigma * sigma);
    pb.one_sided_lipschitz = -lambda;
    return pb;
}

SdeProblem ginzburg_landau(const ProblemParams& params) {
    const double sigma = params.sigma;
    SdeProblem pb;
    pb.label = "ginzburg-landau";
    pb.d = 1;
    pb.m = 1;
    pb.drift = [](const State& x) -> State { return x - x.cwiseProduct(x).cwiseProduct(x); };
    pb.diffusion = [sigma](const State& x) { return scalar(sigma * x(0)); };
    pb.drift_jacobian = [](const State& x) { return scalar(1.0 - 3.0 * x(0) * x(0)); };
    pb.x0 = initial_state(params, {1.0});
    // x^2 - x^4 + sigma^2 x^2 / 2 <= (1 + sigma^2/2)(1 + x^2)
    pb.L = 1.0 + 0.5 * sigma * sigma;
    pb.one_sided_lipschitz = 1.0;
    return pb;
}

SdeProblem bounded_rotation(const ProblemParams& params) {
    const double lambda = params.lambda;
    const double omega = params.omega;
    const double sigma = params.sigma;
    detail::require(lambda >= 0.0, "bounded-rotation problem needs lambda >= 0");
    SdeProblem pb;
    pb.label = "bounded-rotation";
    pb.d = 2;
    pb.m = 2;
    pb.drift = [lambda, omega](const State& x) -> State {
        State out(2);
        out(0) = -lambda * x(0) - omega * x(1);
        out(1) = omega * x(0) - lambda * x(1);
        return out;
    };
    pb.diffusion = [sigma](const State& x) {
        Matrix g = Matrix::Zero(2, 2);
        g(0, 0) = sigma * std::cos(x(1));
        g(1, 1) = sigma * std::sin(x(0));
        return g;
    };
    pb.drift_jacobian = [lambda, omega](const State&) {
        Matrix j(2, 2);
        j << -lambda, -omega, omega, -lambda;
        return j;
    };
    pb.x0 = initial_state(params, {1.0, 0.0});
    // The rotation is orthogonal to x and |g|^2 <= 2 sigma^2.
    pb.L = sigma * sigma;
    pb.one_sided_lipschitz = -lambda;
    return pb;
}

}  // namespace

std::vector<std::string> problem_labels() { return {"linear", "ginzburg-landau", "bounded-rotation"}; }

SdeProblem make_problem(const std::string& label, const ProblemParams& params) {
    SdeProblem pb;
    if (label == "linear") {
        pb = linear(params);
    } else if (label == "ginzburg-landau") {
        pb = ginzburg_landau(params);
    } else if (label == "bounded-rotation") {
        pb = bounded_rotation(params);
    } else {
        throw ContractViolation("unknown problem label '" + label + "'");
    }
    if (params.L_override) pb.L = *params.L_override;
    validate_problem(pb);
    return pb;
}

}  // namespace sgronwall
