#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sgronwall/sde_bem.hpp"

namespace sgronwall {

/// Parameters shared by the registered test problems. Unused fields are
/// ignored by problems that do not need them.
struct ProblemParams {
    double lambda = 1.0;  ///< linear damping rate (>= 0)
    double sigma = 0.5;   ///< noise intensity
    double omega = 1.0;   ///< rotation speed (bounded-rotation)
    std::vector<double> x0;            ///< empty selects the problem default
    std::optional<double> L_override;  ///< replaces the registered L (still spot-checked)
};

/// Registered labels: "linear", "ginzburg-landau", "bounded-rotation".
///
///   linear            f(x) = -lambda x,       g(x) = sigma x,  L = max(lambda, sigma^2/2)
///   ginzburg-landau   f(x) = x - x^3,         g(x) = sigma x,  L = 1 + sigma^2/2, c = 1
///   bounded-rotation  f(x) = -lambda x + omega J x (d = 2),
///                     g(x) = sigma diag(cos x_2, sin x_1),      L = sigma^2
///
/// The returned problem has passed `validate_problem`.
SdeProblem make_problem(const std::string& label, const ProblemParams& params = {});

std::vector<std::string> problem_labels();

}  // namespace sgronwall
