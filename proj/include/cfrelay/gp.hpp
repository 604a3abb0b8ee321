// SPDX-License-Identifier: Apache-2.0
//
// Small geometric-program solver. Variables are positive reals; after the
// substitution y = log x every posynomial constraint becomes a log-sum-exp
// inequality and the monomial objective becomes linear, which a log-barrier
// Newton method handles directly.

#ifndef CFRELAY_GP_HPP
#define CFRELAY_GP_HPP

#include <armadillo>

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace cfrelay
{

/// coeff * prod_k x_k^{exponent_k}, exponents stored sparsely.
struct Monomial
{
    double coeff = 1.0;
    std::vector<std::pair<std::size_t, double>> exps;

    Monomial &pow(std::size_t var, double e)
    {
        exps.emplace_back(var, e);
        return *this;
    }
    double eval(const arma::vec &x) const;
};

using Posynomial = std::vector<Monomial>;

double eval(const Posynomial &p, const arma::vec &x);

/// One posynomial <= 1 inequality. The label groups constraints into
/// families for reporting.
struct GpConstraint
{
    Posynomial terms;
    std::string label;
};

/// minimize objective(x) s.t. every constraint <= 1, x > 0.
struct GpProblem
{
    std::vector<std::string> names;
    Monomial objective;
    std::vector<GpConstraint> constraints;

    std::size_t add_variable(std::string name);
    std::size_t num_variables() const { return names.size(); }
    void add(Posynomial terms, std::string label);

    /// Throws std::invalid_argument on non-positive coefficients, bad indices
    /// or non-finite exponents.
    void validate() const;

    /// Largest constraint value at x (<= 1 means feasible).
    double max_constraint(const arma::vec &x) const;
};

enum class GpStatus
{
    kOptimal,
    kInfeasible,
    kUnbounded,
    kMaxIterations,
};

std::string to_string(GpStatus s);

struct GpOptions
{
    double tol = 1e-9;          // duality-gap target on the log objective
    double barrier_growth = 10.0;
    std::size_t max_newton = 500; // per centering step
    std::size_t max_outer = 60;
};

struct GpResult
{
    GpStatus status = GpStatus::kMaxIterations;
    arma::vec x;               // best iterate (strictly feasible when status is optimal)
    double objective = 0.0;
    double max_constraint = 0.0;
    std::size_t newton_steps = 0;
    std::string message;
};

/// Solves the GP. `start` is an optional starting point in x-space; when it
/// is absent or not strictly feasible a phase-I problem finds one.
GpResult solve_gp(const GpProblem &gp, const arma::vec &start = {}, const GpOptions &opt = {});

} // namespace cfrelay

#endif
