// SPDX-License-Identifier: Apache-2.0

#include "cfrelay/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cfrelay
{

ChannelRealization draw_realization(const LargeScaleFading &ls, std::size_t antennas, Rng &rng)
{
    const std::size_t m_count = ls.num_aps();
    const std::size_t w = ls.num_pairs();
    ChannelRealization r;
    r.h_hat.set_size(antennas, m_count, w);
    r.g_hat.set_size(antennas, m_count, w);
    r.h_err.set_size(antennas, m_count, w);
    r.g_err.set_size(antennas, m_count, w);

    // Fixed draw order: pair, AP, antenna; estimate then error, A then B.
    for (std::size_t i = 0; i < w; ++i)
        for (std::size_t m = 0; m < m_count; ++m)
            for (std::size_t n = 0; n < antennas; ++n)
            {
                r.h_hat(n, m, i) = rng.complex_normal(ls.phi_a(m, i));
                r.h_err(n, m, i) = rng.complex_normal(ls.err_a(m, i));
                r.g_hat(n, m, i) = rng.complex_normal(ls.phi_b(m, i));
                r.g_err(n, m, i) = rng.complex_normal(ls.err_b(m, i));
            }
    r.h = r.h_hat + r.h_err;
    r.g = r.g_hat + r.g_err;
    return r;
}

ChannelRealization draw_realization(const LargeScaleFading &ls, std::size_t antennas, std::uint64_t seed,
                                    std::uint64_t index)
{
    Rng rng(seed, Stream::kChannel, index);
    return draw_realization(ls, antennas, rng);
}

arma::cx_mat orthonormal_pilots(std::size_t tau_p)
{
    arma::cx_mat f(tau_p, tau_p);
    const double scale = 1.0 / std::sqrt(static_cast<double>(tau_p));
    for (std::size_t r = 0; r < tau_p; ++r)
        for (std::size_t c = 0; c < tau_p; ++c)
        {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(r * c % tau_p) / static_cast<double>(tau_p);
            f(r, c) = std::polar(scale, angle);
        }
    return f;
}

arma::cx_vec despread_estimate(const arma::cx_mat &pilot_obs, const arma::cx_vec &pilot, double alpha, double tau_p,
                               double p_p)
{
    if (std::fabs(arma::norm(pilot) - 1.0) > 1e-9)
        throw std::domain_error("despread_estimate: pilot must be unit-norm");
    if (pilot_obs.n_cols != pilot.n_elem)
        throw std::invalid_argument("despread_estimate: pilot length does not match observation");
    const double q = tau_p * p_p;
    const double scale = std::sqrt(q) * alpha / (1.0 + q * alpha);
    return scale * (pilot_obs * pilot);
}

} // namespace cfrelay
