// SPDX-License-Identifier: Apache-2.0
//
// Sum-SE maximization under a total power budget by successive geometric
// programming. Each subproblem replaces the non-posynomial parts of the rate
// expressions with monomial approximations that are exact at the current
// point, so the recomputed sum SE never decreases.

#ifndef CFRELAY_POWER_ALLOC_HPP
#define CFRELAY_POWER_ALLOC_HPP

#include "cfrelay/closed_form.hpp"
#include "cfrelay/config.hpp"
#include "cfrelay/core_model.hpp"
#include "cfrelay/gp.hpp"

#include <armadillo>

#include <string>
#include <vector>

namespace cfrelay
{

/// Power-independent parts of the SINRs with the downlink shape fixed to the
/// full-power rule. With eta~ = p_u * eta:
///   MAC_X,i = a_X,i eta~_X,i / c_i,  c_i = sum_j (a3_ij eta~_A,j + a4_ij eta~_B,j) + 1
///   BC_X,i  = p_r / (p_r b_X,i + c_X,i)
struct SubproblemCoefficients
{
    arma::vec a1, a2;
    arma::mat a3, a4;
    arma::vec b_a, b_b, c_a, c_b;

    std::size_t num_pairs() const { return a1.n_elem; }
};

/// `literal` drops the (phi_A + phi_B)_mi weight inside a3/a4, which no
/// longer matches the closed-form SINR but is kept for comparison.
SubproblemCoefficients build_coefficients(const LargeScaleFading &ls, std::size_t antennas, bool literal = false);

/// SINRs implied by the coefficient model.
Sinrs model_sinrs(const SubproblemCoefficients &k, const arma::vec &eta_a, const arma::vec &eta_b, double p_r);

struct MonomialFit
{
    arma::vec delta, mu;
};

/// 1 + g ~ delta g^mu, exact at g0.
MonomialFit monomial_objective_fit(const arma::vec &gamma0);

struct AmGmSplit
{
    arma::vec phi_a, phi_b;
};

/// Weights of the monomial lower bound (u/phi_a)^phi_a (v/phi_b)^phi_b <= u + v.
AmGmSplit am_gm_split(const arma::vec &u0, const arma::vec &v0);

struct XyFit
{
    arma::vec zeta, lambda_a, lambda_b;
};

/// x + y + xy ~ zeta x^lambda_a y^lambda_b, exact at (x0, y0).
XyFit xy_monomial_fit(const arma::vec &x0, const arma::vec &y0);

/// Current point of the successive approximation.
struct AllocPoint
{
    arma::vec eta_a, eta_b; // eta~ = p_u * eta, normalized power units
    double p_r = 0.0;
    arma::vec gamma, gamma_a, gamma_b;
};

/// Fills the SINR auxiliaries from the coefficient model: gamma_a pairs the
/// A uplink with the broadcast to B, gamma_b the reverse.
AllocPoint expansion_point(const SubproblemCoefficients &k, const arma::vec &eta_a, const arma::vec &eta_b,
                           double p_r);

struct AllocOptions
{
    double budget = 0.0; // P, normalized units
    double r_min = 0.0;  // per-pair QoS in bit/s/Hz
    double theta = 1.1;
    double eps = 1e-3;
    std::size_t max_iter = 50;
    bool literal_coefficients = false;
    GpOptions gp;
};

/// Smallest pair SINR meeting r_min.
double qos_threshold(double r_min, const SystemConfig &cfg);

/// Variable layout of the subproblem: eta_a, eta_b, gamma, gamma_a, gamma_b
/// (W each) followed by p_r.
struct GpLayout
{
    std::size_t w = 0;
    std::size_t eta_a(std::size_t i) const { return i; }
    std::size_t eta_b(std::size_t i) const { return w + i; }
    std::size_t gamma(std::size_t i) const { return 2 * w + i; }
    std::size_t gamma_a(std::size_t i) const { return 3 * w + i; }
    std::size_t gamma_b(std::size_t i) const { return 4 * w + i; }
    std::size_t p_r() const { return 5 * w; }
    std::size_t size() const { return 5 * w + 1; }
};

GpProblem build_gp_subproblem(const SubproblemCoefficients &k, const AllocPoint &pt, const AllocOptions &opt,
                              const SystemConfig &cfg);

arma::vec pack(const AllocPoint &pt);

/// Number of distinct constraint labels.
std::size_t constraint_families(const GpProblem &gp);

/// Turns eta~ and p_r into a PowerAllocation with the full-power downlink shape.
PowerAllocation to_power_allocation(const LargeScaleFading &ls, const SystemConfig &cfg, const arma::vec &eta_a,
                                    const arma::vec &eta_b, double p_r);

/// Pre-log weighted sum SE from the closed-form pipeline.
double allocation_sum_se(const LargeScaleFading &ls, const SystemConfig &cfg, const arma::vec &eta_a,
                         const arma::vec &eta_b, double p_r);

struct AllocationResult
{
    arma::vec eta_tilde_a, eta_tilde_b;
    double p_r = 0.0;
    arma::vec gamma, gamma_a, gamma_b;
    double sum_se = 0.0;
    double initial_sum_se = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    bool feasible = true;
    std::vector<double> history; // true sum SE of every accepted iterate
    std::string diagnostic;
};

/// Successive GP starting from eta~ = P/(4W), p_r = P/2.
AllocationResult optimize_power(const LargeScaleFading &ls, const SystemConfig &cfg, const AllocOptions &opt);

/// Exhaustive search over a log-spaced grid of eta~ values with the rest of
/// the budget given to the relay. Needs W <= 2 and grid_points <= 50.
AllocationResult brute_force_oracle(const LargeScaleFading &ls, const SystemConfig &cfg, double budget,
                                    std::size_t grid_points);

} // namespace cfrelay

#endif
