// SPDX-License-Identifier: Apache-2.0
//
// Small-scale Rayleigh fading draws with MMSE estimates and errors.

#ifndef CFRELAY_CHANNEL_HPP
#define CFRELAY_CHANNEL_HPP

#include "cfrelay/core_model.hpp"
#include "cfrelay/rng.hpp"

#include <armadillo>
#include <cstdint>

namespace cfrelay
{

/// All cubes are N x M x W: slice i holds the N x M channel of pair i.
struct ChannelRealization
{
    arma::cx_cube h, g;         // true channels of users A_i and B_i
    arma::cx_cube h_hat, g_hat; // MMSE estimates
    arma::cx_cube h_err, g_err; // estimation errors
};

/// Samples estimates ~ CN(0, phi I) and independent errors ~ CN(0, err I),
/// then forms the true channel as their sum.
ChannelRealization draw_realization(const LargeScaleFading &ls, std::size_t antennas, Rng &rng);

/// Realization `index` of the channel stream keyed by `seed`.
ChannelRealization draw_realization(const LargeScaleFading &ls, std::size_t antennas, std::uint64_t seed,
                                    std::uint64_t index);

/// tau_p x tau_p unitary DFT matrix; its columns are orthonormal pilots.
arma::cx_mat orthonormal_pilots(std::size_t tau_p);

/// MMSE estimate from an N x tau_p pilot observation by projecting onto the
/// user's pilot and scaling by sqrt(tau_p p_p) alpha / (1 + tau_p p_p alpha).
/// Throws std::domain_error if the pilot is not unit-norm.
arma::cx_vec despread_estimate(const arma::cx_mat &pilot_obs, const arma::cx_vec &pilot, double alpha, double tau_p,
                               double p_p);

} // namespace cfrelay

#endif
