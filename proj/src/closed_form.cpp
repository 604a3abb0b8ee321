// SPDX-License-Identifier: Apache-2.0

#include "cfrelay/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfrelay
{

namespace
{

double ratio_or_zero(double num, double den) { return den > 0.0 ? num / den : 0.0; }

const arma::mat &phi_of(const LargeScaleFading &ls, Side x) { return x == Side::kA ? ls.phi_a : ls.phi_b; }
const arma::mat &alpha_of(const LargeScaleFading &ls, Side x) { return x == Side::kA ? ls.alpha_a : ls.alpha_b; }
const arma::mat &eta_dl_of(const PowerAllocation &pa, Side x) { return x == Side::kA ? pa.eta_a_dl : pa.eta_b_dl; }
const arma::vec &eta_ul_of(const PowerAllocation &pa, Side x) { return x == Side::kA ? pa.eta_a_ul : pa.eta_b_ul; }

void check_shapes(const LargeScaleFading &ls, const PowerAllocation &pa)
{
    const auto m = ls.num_aps();
    const auto w = ls.num_pairs();
    if (pa.eta_a_ul.n_elem != w || pa.eta_b_ul.n_elem != w)
        throw std::invalid_argument("uplink coefficients must have one entry per pair");
    if (pa.eta_a_dl.n_rows != m || pa.eta_a_dl.n_cols != w || pa.eta_b_dl.n_rows != m || pa.eta_b_dl.n_cols != w)
        throw std::invalid_argument("downlink coefficients must be M x W");
}

// MAC denominators sum_m (interference_m + 1)(phi_A,mi + phi_B,mi). With
// `iui` the interference at AP m sums over every pair; without it only over
// pair i itself.
arma::vec mac_denominator(const LargeScaleFading &ls, const PowerAllocation &pa, bool iui)
{
    const arma::mat phi_sum = ls.phi_a + ls.phi_b;
    if (iui)
    {
        const arma::vec load = pa.p_u * (ls.alpha_a * pa.eta_a_ul + ls.alpha_b * pa.eta_b_ul) + 1.0;
        return phi_sum.t() * load;
    }
    const arma::mat own = pa.p_u * (ls.alpha_a.each_row() % pa.eta_a_ul.t() + ls.alpha_b.each_row() % pa.eta_b_ul.t());
    return arma::sum((own + 1.0) % phi_sum, 0).t();
}

arma::vec mac_dir_impl(const LargeScaleFading &ls, const PowerAllocation &pa, std::size_t antennas, Side x,
                       const arma::vec &den)
{
    const double n = static_cast<double>(antennas);
    const arma::rowvec s = arma::sum(phi_of(ls, x), 0);
    const arma::vec &eta = eta_ul_of(pa, x);
    arma::vec out(ls.num_pairs());
    for (std::size_t i = 0; i < out.n_elem; ++i)
        out(i) = ratio_or_zero(pa.p_u * eta(i) * n * s(i) * s(i), den(i));
    return out;
}

arma::vec bc_dir_impl(const LargeScaleFading &ls, const PowerAllocation &pa, std::size_t antennas, Side x, bool iui)
{
    const double n = static_cast<double>(antennas);
    const arma::mat &phi_x = phi_of(ls, x);
    const arma::mat &alpha_x = alpha_of(ls, x);
    const arma::mat &eta_bar = eta_dl_of(pa, other(x));
    const arma::mat q = pa.eta_a_dl % ls.phi_b + pa.eta_b_dl % ls.phi_a;
    const arma::rowvec coherent = arma::sum(arma::sqrt(eta_bar) % phi_x, 0);
    arma::vec out(ls.num_pairs());
    if (iui)
    {
        const arma::vec load = arma::sum(q, 1);
        const arma::vec den = (pa.p_r * alpha_x + 1.0).t() * load;
        for (std::size_t i = 0; i < out.n_elem; ++i)
            out(i) = ratio_or_zero(n * pa.p_r * coherent(i) * coherent(i), den(i));
    }
    else
    {
        const arma::rowvec den = arma::sum((pa.p_r * alpha_x + 1.0) % q, 0);
        for (std::size_t i = 0; i < out.n_elem; ++i)
            out(i) = ratio_or_zero(n * pa.p_r * coherent(i) * coherent(i), den(i));
    }
    return out;
}

} // namespace

std::pair<arma::mat, arma::mat> full_power_downlink(const LargeScaleFading &ls, std::size_t antennas)
{
    const arma::vec row_load = arma::sum(ls.phi_a + ls.phi_b, 1) * static_cast<double>(antennas);
    arma::mat eta(ls.num_aps(), ls.num_pairs());
    for (std::size_t m = 0; m < eta.n_rows; ++m)
        eta.row(m).fill(row_load(m) > 0.0 ? 1.0 / row_load(m) : 0.0);
    return {eta, eta};
}

PowerAllocation uniform_allocation(const LargeScaleFading &ls, const SystemConfig &cfg)
{
    const auto p = normalize_powers(cfg);
    PowerAllocation pa;
    pa.eta_a_ul.ones(ls.num_pairs());
    pa.eta_b_ul.ones(ls.num_pairs());
    std::tie(pa.eta_a_dl, pa.eta_b_dl) = full_power_downlink(ls, cfg.antennas_per_ap);
    pa.p_p = p.pilot;
    pa.p_u = p.uplink;
    pa.p_r = p.relay;
    return pa;
}

arma::vec downlink_load(const LargeScaleFading &ls, const PowerAllocation &pa)
{
    return arma::sum(pa.eta_a_dl % ls.phi_b + pa.eta_b_dl % ls.phi_a, 1);
}

double downlink_power(const LargeScaleFading &ls, const PowerAllocation &pa, std::size_t antennas)
{
    const double total = static_cast<double>(antennas) * arma::accu(downlink_load(ls, pa));
    return ratio_or_zero(pa.p_r, total);
}

arma::vec sinr_mac_pair(const LargeScaleFading &ls, const PowerAllocation &pa, std::size_t antennas)
{
    check_shapes(ls, pa);
    const arma::vec den = mac_denominator(ls, pa, true);
    const arma::vec a = mac_dir_impl(ls, pa, antennas, Side::kA, den);
    const arma::vec b = mac_dir_impl(ls, pa, antennas, Side::kB, den);
    return a + b;
}

arma::vec sinr_mac_dir(const LargeScaleFading &ls, const PowerAllocation &pa, std::size_t antennas, Side x)
{
    check_shapes(ls, pa);
    return mac_dir_impl(ls, pa, antennas, x, mac_denominator(ls, pa, true));
}

arma::vec sinr_bc_dir(const LargeScaleFading &ls, const PowerAllocation &pa, std::size_t antennas, Side x)
{
    check_shapes(ls, pa);
    return bc_dir_impl(ls, pa, antennas, x, true);
}

Sinrs compute_sinrs(const LargeScaleFading &ls, const PowerAllocation &pa, std::size_t antennas,
                    bool inter_pair_interference)
{
    check_shapes(ls, pa);
    const arma::vec den = mac_denominator(ls, pa, inter_pair_interference);
    Sinrs s;
    s.mac_dir.set_size(ls.num_pairs(), 2);
    s.bc_dir.set_size(ls.num_pairs(), 2);
    s.mac_dir.col(0) = mac_dir_impl(ls, pa, antennas, Side::kA, den);
    s.mac_dir.col(1) = mac_dir_impl(ls, pa, antennas, Side::kB, den);
    s.mac_pair = s.mac_dir.col(0) + s.mac_dir.col(1);
    s.bc_dir.col(0) = bc_dir_impl(ls, pa, antennas, Side::kA, inter_pair_interference);
    s.bc_dir.col(1) = bc_dir_impl(ls, pa, antennas, Side::kB, inter_pair_interference);
    return s;
}

RateReport assemble_rate_report(const Sinrs &s, double pre_log)
{
    auto rate = [pre_log](double g) { return pre_log * std::log2(1.0 + g); };
    const std::size_t w = s.mac_pair.n_elem;
    RateReport r;
    r.gamma_mac_pair = s.mac_pair;
    r.gamma_mac_dir = s.mac_dir;
    r.gamma_bc_dir = s.bc_dir;
    r.r_mac_pair.set_size(w);
    r.r_bc_pair.set_size(w);
    r.r_pair.set_size(w);
    for (std::size_t i = 0; i < w; ++i)
    {
        r.r_mac_pair(i) = rate(s.mac_pair(i));
        const double a_to_b = std::min(rate(s.mac_dir(i, 0)), rate(s.bc_dir(i, 1)));
        const double b_to_a = std::min(rate(s.mac_dir(i, 1)), rate(s.bc_dir(i, 0)));
        r.r_bc_pair(i) = a_to_b + b_to_a;
        r.r_pair(i) = std::min(r.r_mac_pair(i), r.r_bc_pair(i));
    }
    r.sum_se = arma::accu(r.r_pair);
    return r;
}

RateReport rate_report(const LargeScaleFading &ls, const PowerAllocation &pa, const SystemConfig &cfg)
{
    const double pre_log = pre_log_factor(cfg);
    return assemble_rate_report(compute_sinrs(ls, pa, cfg.antennas_per_ap), pre_log);
}

PowerAllocation collocated_allocation(const PowerAllocation &pa)
{
    PowerAllocation out = pa;
    out.eta_a_dl = arma::sum(pa.eta_a_dl, 0);
    out.eta_b_dl = arma::sum(pa.eta_b_dl, 0);
    return out;
}

RateReport collocated_rate_report(const LargeScaleFading &ls_site, const PowerAllocation &pa_site,
                                  const SystemConfig &cfg)
{
    if (ls_site.num_aps() != 1)
        throw std::invalid_argument("collocated evaluation expects a single relay site");
    const double pre_log = pre_log_factor(cfg);
    const std::size_t antennas = cfg.num_aps * cfg.antennas_per_ap;
    return assemble_rate_report(compute_sinrs(ls_site, pa_site, antennas), pre_log);
}

double orthogonal_scheme_sum_se(const LargeScaleFading &ls, const PowerAllocation &pa, const SystemConfig &cfg)
{
    const double pre_log = pre_log_factor(cfg) / static_cast<double>(ls.num_pairs());
    return assemble_rate_report(compute_sinrs(ls, pa, cfg.antennas_per_ap, false), pre_log).sum_se;
}

double sinr_from_rate(double rate, double pre_log) { return std::exp2(rate / pre_log) - 1.0; }

} // namespace cfrelay
