// SPDX-License-Identifier: Apache-2.0

#include "cfrelay/monte_carlo.hpp"

#include "cfrelay/channel.hpp"
#include "cfrelay/parallel.hpp"
#include "cfrelay/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cfrelay
{

namespace
{

double safe_div(double num, double den) { return den > 0.0 && std::isfinite(den) ? num / den : 0.0; }

McEstimate scaled(McEstimate e, double k)
{
    e.value *= k;
    e.std_error *= k;
    return e;
}

McEstimate exact(double v) { return McEstimate{v, 0.0, 0}; }

// Sample standard deviation with (n - 1) normalization; 0 for fewer than two samples.
double sample_sd(const arma::vec &x) { return x.n_elem > 1 ? arma::stddev(x) : 0.0; }

arma::mat take_rows(const arma::mat &m, const arma::uvec &idx) { return idx.is_empty() ? m : arma::mat(m.rows(idx)); }
arma::cx_mat take_rows(const arma::cx_mat &m, const arma::uvec &idx)
{
    return idx.is_empty() ? m : arma::cx_mat(m.rows(idx));
}

// Means and variances used by the SINR plug-in, without standard errors.
double mean_of(const arma::vec &x) { return arma::mean(x); }
double var_of(const arma::cx_vec &x)
{
    if (x.n_elem < 2)
        return 0.0;
    const std::complex<double> mu = arma::mean(x);
    return arma::accu(arma::square(arma::abs(x - mu))) / static_cast<double>(x.n_elem - 1);
}
double sqmean_of(const arma::cx_vec &x) { return std::norm(arma::mean(x)); }

} // namespace

McEstimate mean_estimate(const arma::vec &x)
{
    McEstimate e;
    e.num_samples = x.n_elem;
    if (x.is_empty())
        return e;
    e.value = arma::mean(x);
    e.std_error = sample_sd(x) / std::sqrt(static_cast<double>(x.n_elem));
    return e;
}

McEstimate variance_estimate(const arma::cx_vec &x)
{
    McEstimate e;
    e.num_samples = x.n_elem;
    if (x.n_elem < 2)
        return e;
    const std::complex<double> mu = arma::mean(x);
    const arma::vec dev = arma::square(arma::abs(x - mu));
    e.value = arma::accu(dev) / static_cast<double>(x.n_elem - 1);
    e.std_error = sample_sd(dev) / std::sqrt(static_cast<double>(x.n_elem));
    return e;
}

McEstimate squared_mean_estimate(const arma::cx_vec &x)
{
    McEstimate e;
    e.num_samples = x.n_elem;
    if (x.is_empty())
        return e;
    const std::complex<double> mu = arma::mean(x);
    const double r = std::abs(mu);
    e.value = r * r;
    if (r > 0.0)
    {
        // d|mu|^2 = 2 Re(conj(mu) dmu): project the samples on the direction of mu.
        const std::complex<double> dir = mu / r;
        const arma::vec proj = arma::real(x * std::conj(dir));
        e.std_error = 2.0 * r * sample_sd(proj) / std::sqrt(static_cast<double>(x.n_elem));
    }
    return e;
}

TermTables closed_form_terms(const LargeScaleFading &ls, const PowerAllocation &pa, std::size_t antennas)
{
    const double n = static_cast<double>(antennas);
    const std::size_t w = ls.num_pairs();
    const arma::mat phi_sum = ls.phi_a + ls.phi_b;
    const arma::rowvec s_a = arma::sum(ls.phi_a, 0);
    const arma::rowvec s_b = arma::sum(ls.phi_b, 0);

    // Per-pair uplink load alpha-weighted at each AP (M x W).
    const arma::mat load = ls.alpha_a.each_row() % pa.eta_a_ul.t() + ls.alpha_b.each_row() % pa.eta_b_ul.t();
    const arma::vec total_load = arma::sum(load, 1);

    const arma::mat q_a = pa.eta_a_dl % ls.phi_b; // power on A_j's data
    const arma::mat q_b = pa.eta_b_dl % ls.phi_a; // power on B_j's data
    const double p_d = downlink_power(ls, pa, antennas);

    TermTables t;
    t.mac.resize(w);
    t.bc.resize(w);
    for (std::size_t i = 0; i < w; ++i)
    {
        auto &mac = t.mac[i];
        mac.ds_a = exact(pa.eta_a_ul(i) * n * n * s_a(i) * s_a(i));
        mac.ds_b = exact(pa.eta_b_ul(i) * n * n * s_b(i) * s_b(i));
        mac.ee_a = exact(n * pa.eta_a_ul(i) * arma::dot(ls.alpha_a.col(i), phi_sum.col(i)));
        mac.ee_b = exact(n * pa.eta_b_ul(i) * arma::dot(ls.alpha_b.col(i), phi_sum.col(i)));
        mac.iui = exact(n * arma::dot(total_load - load.col(i), phi_sum.col(i)));
        mac.noise = exact(pa.p_u > 0.0 ? n * arma::accu(phi_sum.col(i)) / pa.p_u
                                       : std::numeric_limits<double>::infinity());

        for (int side = 0; side < 2; ++side)
        {
            const arma::mat &alpha_x = side == 0 ? ls.alpha_a : ls.alpha_b;
            const arma::mat &phi_x = side == 0 ? ls.phi_a : ls.phi_b;
            const arma::mat &phi_bar = side == 0 ? ls.phi_b : ls.phi_a;
            const arma::mat &eta_x = side == 0 ? pa.eta_a_dl : pa.eta_b_dl;
            const arma::mat &eta_bar = side == 0 ? pa.eta_b_dl : pa.eta_a_dl;
            auto &bc = t.bc[i][side];
            const double coherent = arma::accu(arma::sqrt(eta_bar.col(i)) % phi_x.col(i));
            bc.ds = exact(n * n * coherent * coherent);
            bc.bu = exact(n * arma::accu(eta_bar.col(i) % alpha_x.col(i) % phi_x.col(i)));
            bc.self = exact(n * arma::accu(eta_x.col(i) % alpha_x.col(i) % phi_bar.col(i)));
            const arma::vec others_a = arma::sum(q_a, 1) - q_a.col(i);
            const arma::vec others_b = arma::sum(q_b, 1) - q_b.col(i);
            bc.iui_a = exact(n * arma::dot(alpha_x.col(i), others_a));
            bc.iui_b = exact(n * arma::dot(alpha_x.col(i), others_b));
            bc.noise = exact(p_d > 0.0 ? 1.0 / p_d : std::numeric_limits<double>::infinity());
        }
    }
    return t;
}

McSamples collect_samples(const LargeScaleFading &ls, const PowerAllocation &pa, std::size_t antennas,
                          std::size_t num_reals, std::uint64_t seed)
{
    if (num_reals < 2)
        throw std::invalid_argument("Monte-Carlo estimation needs at least two realizations");
    const std::size_t w = ls.num_pairs();
    McSamples s;
    s.num_reals = num_reals;
    s.num_pairs = w;
    s.mac_a.set_size(num_reals, w);
    s.mac_b.set_size(num_reals, w);
    s.mac_iui.set_size(num_reals, w);
    s.mac_norm.set_size(num_reals, w);
    s.bc_des.set_size(num_reals, 2 * w);
    s.bc_self.set_size(num_reals, 2 * w);
    s.bc_iui_a.set_size(num_reals, 2 * w);
    s.bc_iui_b.set_size(num_reals, 2 * w);

    const arma::mat sqrt_eta_a = arma::sqrt(pa.eta_a_dl);
    const arma::mat sqrt_eta_b = arma::sqrt(pa.eta_b_dl);

    parallel_for(num_reals, [&](std::size_t r) {
        const ChannelRealization ch = draw_realization(ls, antennas, seed, r);
        std::vector<arma::cx_mat> comb(w), prec_b(w), prec_a(w);
        for (std::size_t j = 0; j < w; ++j)
        {
            comb[j] = ch.h_hat.slice(j) + ch.g_hat.slice(j);
            // Data of B_j travels on conj(h_hat_j), data of A_j on conj(g_hat_j).
            prec_b[j] = ch.h_hat.slice(j).each_row() % arma::conv_to<arma::cx_rowvec>::from(sqrt_eta_b.col(j).t());
            prec_a[j] = ch.g_hat.slice(j).each_row() % arma::conv_to<arma::cx_rowvec>::from(sqrt_eta_a.col(j).t());
        }
        for (std::size_t i = 0; i < w; ++i)
        {
            const arma::cx_mat &a = comb[i];
            s.mac_a(r, i) = arma::cdot(a, ch.h.slice(i));
            s.mac_b(r, i) = arma::cdot(a, ch.g.slice(i));
            double iui = 0.0;
            for (std::size_t j = 0; j < w; ++j)
            {
                if (j == i)
                    continue;
                iui += pa.eta_a_ul(j) * std::norm(arma::cdot(a, ch.h.slice(j)));
                iui += pa.eta_b_ul(j) * std::norm(arma::cdot(a, ch.g.slice(j)));
            }
            s.mac_iui(r, i) = iui;
            s.mac_norm(r, i) = std::real(arma::cdot(a, a));

            for (int side = 0; side < 2; ++side)
            {
                const arma::cx_mat &rx = side == 0 ? ch.h.slice(i) : ch.g.slice(i);
                const auto &desired = side == 0 ? prec_b : prec_a;
                const auto &own = side == 0 ? prec_a : prec_b;
                const std::size_t col = side * w + i;
                s.bc_des(r, col) = arma::cdot(desired[i], rx);
                s.bc_self(r, col) = std::norm(arma::cdot(own[i], rx));
                double ia = 0.0, ib = 0.0;
                for (std::size_t j = 0; j < w; ++j)
                {
                    if (j == i)
                        continue;
                    ia += std::norm(arma::cdot(prec_a[j], rx));
                    ib += std::norm(arma::cdot(prec_b[j], rx));
                }
                s.bc_iui_a(r, col) = ia;
                s.bc_iui_b(r, col) = ib;
            }
        }
    });
    return s;
}

MacTermSet mac_terms_for_pair(const McSamples &s, const PowerAllocation &pa, std::size_t i)
{
    MacTermSet t;
    t.ds_a = scaled(squared_mean_estimate(s.mac_a.col(i)), pa.eta_a_ul(i));
    t.ds_b = scaled(squared_mean_estimate(s.mac_b.col(i)), pa.eta_b_ul(i));
    t.ee_a = scaled(variance_estimate(s.mac_a.col(i)), pa.eta_a_ul(i));
    t.ee_b = scaled(variance_estimate(s.mac_b.col(i)), pa.eta_b_ul(i));
    t.iui = mean_estimate(s.mac_iui.col(i));
    if (pa.p_u > 0.0)
        t.noise = scaled(mean_estimate(s.mac_norm.col(i)), 1.0 / pa.p_u);
    else
        t.noise = McEstimate{std::numeric_limits<double>::infinity(), 0.0, s.num_reals};
    return t;
}

TermTables estimate_terms(const McSamples &s, const PowerAllocation &pa, double p_d)
{
    TermTables t;
    t.mac.resize(s.num_pairs);
    t.bc.resize(s.num_pairs);
    for (std::size_t i = 0; i < s.num_pairs; ++i)
    {
        t.mac[i] = mac_terms_for_pair(s, pa, i);
        for (std::size_t side = 0; side < 2; ++side)
        {
            const std::size_t col = side * s.num_pairs + i;
            auto &bc = t.bc[i][side];
            bc.ds = squared_mean_estimate(s.bc_des.col(col));
            bc.bu = variance_estimate(s.bc_des.col(col));
            bc.self = mean_estimate(s.bc_self.col(col));
            bc.iui_a = mean_estimate(s.bc_iui_a.col(col));
            bc.iui_b = mean_estimate(s.bc_iui_b.col(col));
            bc.noise = McEstimate{p_d > 0.0 ? 1.0 / p_d : std::numeric_limits<double>::infinity(), 0.0, 0};
        }
    }
    return t;
}

std::vector<MacTermSet> estimate_mac_terms(const LargeScaleFading &ls, const PowerAllocation &pa,
                                           const SystemConfig &cfg, std::size_t num_reals, std::uint64_t seed)
{
    const auto s = collect_samples(ls, pa, cfg.antennas_per_ap, num_reals, seed);
    return estimate_terms(s, pa, downlink_power(ls, pa, cfg.antennas_per_ap)).mac;
}

std::vector<std::array<BcTermSet, 2>> estimate_bc_terms(const LargeScaleFading &ls, const PowerAllocation &pa,
                                                        const SystemConfig &cfg, std::size_t num_reals,
                                                        std::uint64_t seed)
{
    const auto s = collect_samples(ls, pa, cfg.antennas_per_ap, num_reals, seed);
    return estimate_terms(s, pa, downlink_power(ls, pa, cfg.antennas_per_ap)).bc;
}

Sinrs sinrs_from_samples(const McSamples &s, const PowerAllocation &pa, double p_d, const std::vector<std::size_t> &rows)
{
    const arma::uvec idx = arma::conv_to<arma::uvec>::from(rows);
    const arma::cx_mat mac_a = take_rows(s.mac_a, idx);
    const arma::cx_mat mac_b = take_rows(s.mac_b, idx);
    const arma::mat mac_iui = take_rows(s.mac_iui, idx);
    const arma::mat mac_norm = take_rows(s.mac_norm, idx);
    const arma::cx_mat bc_des = take_rows(s.bc_des, idx);
    const arma::mat bc_self = take_rows(s.bc_self, idx);
    const arma::mat bc_iui_a = take_rows(s.bc_iui_a, idx);
    const arma::mat bc_iui_b = take_rows(s.bc_iui_b, idx);

    const std::size_t w = s.num_pairs;
    Sinrs out;
    out.mac_pair.set_size(w);
    out.mac_dir.set_size(w, 2);
    out.bc_dir.set_size(w, 2);
    for (std::size_t i = 0; i < w; ++i)
    {
        const double ds_a = pa.eta_a_ul(i) * sqmean_of(mac_a.col(i));
        const double ds_b = pa.eta_b_ul(i) * sqmean_of(mac_b.col(i));
        const double noise = pa.p_u > 0.0 ? mean_of(mac_norm.col(i)) / pa.p_u : std::numeric_limits<double>::infinity();
        const double den = pa.eta_a_ul(i) * var_of(mac_a.col(i)) + pa.eta_b_ul(i) * var_of(mac_b.col(i)) +
                           mean_of(mac_iui.col(i)) + noise;
        out.mac_dir(i, 0) = safe_div(ds_a, den);
        out.mac_dir(i, 1) = safe_div(ds_b, den);
        out.mac_pair(i) = safe_div(ds_a + ds_b, den);
        for (std::size_t side = 0; side < 2; ++side)
        {
            const std::size_t col = side * w + i;
            if (!(p_d > 0.0))
            {
                out.bc_dir(i, side) = 0.0;
                continue;
            }
            const double bden = var_of(bc_des.col(col)) + mean_of(bc_self.col(col)) + mean_of(bc_iui_a.col(col)) +
                                mean_of(bc_iui_b.col(col)) + 1.0 / p_d;
            out.bc_dir(i, side) = safe_div(sqmean_of(bc_des.col(col)), bden);
        }
    }
    return out;
}

McReport run_monte_carlo(const LargeScaleFading &ls, const PowerAllocation &pa, const SystemConfig &cfg,
                         std::size_t num_reals, std::uint64_t seed, std::size_t bootstrap_resamples)
{
    const std::size_t antennas = cfg.antennas_per_ap;
    const double pre_log = pre_log_factor(cfg);
    const double p_d = downlink_power(ls, pa, antennas);
    const McSamples s = collect_samples(ls, pa, antennas, num_reals, seed);

    McReport rep;
    rep.terms = estimate_terms(s, pa, p_d);
    rep.sinrs = sinrs_from_samples(s, pa, p_d);
    rep.rates = assemble_rate_report(rep.sinrs, pre_log);
    rep.sum_se.value = rep.rates.sum_se;
    rep.sum_se.num_samples = num_reals;

    if (bootstrap_resamples > 1)
    {
        arma::vec boot(bootstrap_resamples);
        parallel_for(bootstrap_resamples, [&](std::size_t b) {
            Rng rng(seed, Stream::kBootstrap, b);
            std::vector<std::size_t> rows(num_reals);
            for (auto &r : rows)
                r = static_cast<std::size_t>(rng.uniform() * static_cast<double>(num_reals));
            boot(b) = assemble_rate_report(sinrs_from_samples(s, pa, p_d, rows), pre_log).sum_se;
        });
        rep.sum_se.std_error = arma::stddev(boot);
    }
    return rep;
}

McEstimate mc_sum_se(const LargeScaleFading &ls, const PowerAllocation &pa, const SystemConfig &cfg,
                     std::size_t num_reals, std::uint64_t seed)
{
    return run_monte_carlo(ls, pa, cfg, num_reals, seed).sum_se;
}

std::vector<IdentityCheck> verify_identities(double phi, double err, double alpha_x, std::size_t antennas,
                                             std::size_t num_reals, std::uint64_t seed)
{
    if (num_reals < 2)
        throw std::invalid_argument("verify_identities needs at least two samples");
    const double n = static_cast<double>(antennas);
    const double alpha = phi + err;
    arma::vec fourth(num_reals), cross(num_reals), gain_re(num_reals);
    arma::cx_vec gain(num_reals);
    Rng rng(seed, Stream::kInstance, 0);
    arma::cx_vec est(antennas), e(antennas), x(antennas);
    for (std::size_t k = 0; k < num_reals; ++k)
    {
        for (std::size_t a = 0; a < antennas; ++a)
        {
            est(a) = rng.complex_normal(phi);
            e(a) = rng.complex_normal(err);
            x(a) = rng.complex_normal(alpha_x);
        }
        const double sq = std::real(arma::cdot(est, est));
        fourth(k) = sq * sq;
        gain(k) = arma::cdot(est, est + e);
        gain_re(k) = std::real(gain(k));
        cross(k) = std::norm(arma::cdot(est, x));
    }

    auto make = [](std::string name, McEstimate est, double expected) {
        IdentityCheck c{std::move(name), est, expected, false};
        const double diff = std::fabs(est.value - expected);
        c.within_3se = est.std_error > 0.0 ? diff <= 3.0 * est.std_error : diff <= 1e-12 * std::max(1.0, expected);
        return c;
    };
    return {
        make("E||h_hat||^4 = N(N+1)phi^2", mean_estimate(fourth), n * (n + 1.0) * phi * phi),
        make("Var(h_hat^H h) = N alpha phi", variance_estimate(gain), n * alpha * phi),
        make("E|h_hat^H x|^2 = N phi alpha_x", mean_estimate(cross), n * phi * alpha_x),
        make("E[h_hat^H h] = N phi", mean_estimate(gain_re), n * phi),
    };
}

} // namespace cfrelay
