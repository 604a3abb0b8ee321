// SPDX-License-Identifier: Apache-2.0
//
// Monte-Carlo estimates of every signal, uncertainty, interference and noise
// term behind the closed-form SINRs, computed from explicit channel draws.
//
// Terms are normalized by the transmit power of their phase: MAC terms by
// p_u (so the noise term is sum ||a||^2 / p_u) and BC terms by p_d (noise 1/p_d).

#ifndef CFRELAY_MONTE_CARLO_HPP
#define CFRELAY_MONTE_CARLO_HPP

#include "cfrelay/closed_form.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace cfrelay
{

struct McEstimate
{
    double value = 0.0;
    double std_error = 0.0;
    std::size_t num_samples = 0;
};

/// MAC terms of pair i with combiner a_mi = h_hat_mi + g_hat_mi:
/// ds_x = eta_x |E[sum_m a^H x_mi]|^2, ee_x = eta_x Var[...], iui over j != i,
/// noise = E[sum_m ||a_mi||^2] / p_u.
struct MacTermSet
{
    McEstimate ds_a, ds_b, ee_a, ee_b, iui, noise;
};

/// BC terms at user X of pair i: ds (coherent gain of the partner's data),
/// bu (its beamforming-gain uncertainty), self (leakage of X's own data),
/// iui_a / iui_b (data of A_j / B_j, j != i), noise = 1 / p_d.
struct BcTermSet
{
    McEstimate ds, bu, self, iui_a, iui_b, noise;
};

/// Indexed [pair][side] for BC, [pair] for MAC.
struct TermTables
{
    std::vector<MacTermSet> mac;
    std::vector<std::array<BcTermSet, 2>> bc;
};

/// Closed-form values of the same terms (std_error = 0).
TermTables closed_form_terms(const LargeScaleFading &ls, const PowerAllocation &pa, std::size_t antennas);

/// Per-realization statistics from which all terms and SINRs are formed.
struct McSamples
{
    std::size_t num_reals = 0;
    std::size_t num_pairs = 0;
    arma::cx_mat mac_a, mac_b;   // n x W: sum_m a_mi^H h_mi, sum_m a_mi^H g_mi
    arma::mat mac_iui;           // n x W: sum_{j != i} eta-weighted |a^H h_j|^2 + |a^H g_j|^2
    arma::mat mac_norm;          // n x W: sum_m ||a_mi||^2
    arma::cx_mat bc_des;         // n x 2W, column side * W + i
    arma::mat bc_self, bc_iui_a, bc_iui_b;
};

/// Draws `num_reals` channel realizations (realization r from stream index r
/// of `seed`) in parallel and records the per-realization statistics.
McSamples collect_samples(const LargeScaleFading &ls, const PowerAllocation &pa, std::size_t antennas,
                          std::size_t num_reals, std::uint64_t seed);

TermTables estimate_terms(const McSamples &s, const PowerAllocation &pa, double p_d);

MacTermSet mac_terms_for_pair(const McSamples &s, const PowerAllocation &pa, std::size_t pair);

std::vector<MacTermSet> estimate_mac_terms(const LargeScaleFading &ls, const PowerAllocation &pa,
                                           const SystemConfig &cfg, std::size_t num_reals, std::uint64_t seed);
std::vector<std::array<BcTermSet, 2>> estimate_bc_terms(const LargeScaleFading &ls, const PowerAllocation &pa,
                                                        const SystemConfig &cfg, std::size_t num_reals,
                                                        std::uint64_t seed);

/// SINRs from plugged-in term estimates; `rows` selects realizations
/// (all when empty), which is how bootstrap resamples are evaluated.
Sinrs sinrs_from_samples(const McSamples &s, const PowerAllocation &pa, double p_d,
                         const std::vector<std::size_t> &rows = {});

struct McReport
{
    TermTables terms;
    Sinrs sinrs;
    RateReport rates;
    McEstimate sum_se; // std_error from the bootstrap
};

McReport run_monte_carlo(const LargeScaleFading &ls, const PowerAllocation &pa, const SystemConfig &cfg,
                         std::size_t num_reals, std::uint64_t seed, std::size_t bootstrap_resamples = 200);

McEstimate mc_sum_se(const LargeScaleFading &ls, const PowerAllocation &pa, const SystemConfig &cfg,
                     std::size_t num_reals, std::uint64_t seed);

struct IdentityCheck
{
    std::string name;
    McEstimate estimate;
    double expected = 0.0;
    bool within_3se = false;
};

/// Moment identities of MMSE estimates for one link: E||h_hat||^4 = N(N+1)phi^2,
/// Var(h_hat^H h) = N alpha phi, E|h_hat^H x|^2 = N phi alpha_x for an
/// independent x ~ CN(0, alpha_x I), and E[h_hat^H h] = N phi.
std::vector<IdentityCheck> verify_identities(double phi, double err, double alpha_x, std::size_t antennas,
                                             std::size_t num_reals, std::uint64_t seed);

/// Sample mean with its standard error.
McEstimate mean_estimate(const arma::vec &x);
/// Unbiased sample variance of complex samples with the standard error sd(|x - mean|^2) / sqrt(n).
McEstimate variance_estimate(const arma::cx_vec &x);
/// |mean|^2 with a delta-method standard error.
McEstimate squared_mean_estimate(const arma::cx_vec &x);

} // namespace cfrelay

#endif
