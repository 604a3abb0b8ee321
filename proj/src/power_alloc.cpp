// SPDX-License-Identifier: Apache-2.0

#include "cfrelay/power_alloc.hpp"
#include "cfrelay/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace cfrelay
{

SubproblemCoefficients build_coefficients(const LargeScaleFading &ls, std::size_t antennas, bool literal)
{
    const double n = static_cast<double>(antennas);
    const std::size_t w = ls.num_pairs();
    const arma::mat phi_sum = ls.phi_a + ls.phi_b;
    const arma::rowvec s = arma::sum(phi_sum, 0);
    const arma::rowvec sa = arma::sum(ls.phi_a, 0);
    const arma::rowvec sb = arma::sum(ls.phi_b, 0);
    if (arma::any(sa <= 0.0) || arma::any(sb <= 0.0))
        throw std::domain_error("degenerate pair: zero estimated-channel gain");

    SubproblemCoefficients k;
    k.a1 = (n * arma::square(sa) / s).t();
    k.a2 = (n * arma::square(sb) / s).t();
    k.a3.set_size(w, w);
    k.a4.set_size(w, w);
    for (std::size_t i = 0; i < w; ++i)
    {
        for (std::size_t j = 0; j < w; ++j)
        {
            if (literal)
            {
                k.a3(i, j) = arma::accu(ls.alpha_a.col(j)) / s(i);
                k.a4(i, j) = arma::accu(ls.alpha_b.col(j)) / s(i);
            }
            else
            {
                k.a3(i, j) = arma::dot(ls.alpha_a.col(j), phi_sum.col(i)) / s(i);
                k.a4(i, j) = arma::dot(ls.alpha_b.col(j), phi_sum.col(i)) / s(i);
            }
        }
    }

    const auto [eta_a_dl, eta_b_dl] = full_power_downlink(ls, antennas);
    const arma::vec load = arma::sum(eta_a_dl % ls.phi_b + eta_b_dl % ls.phi_a, 1);
    const arma::rowvec coh_a = arma::sum(arma::sqrt(eta_b_dl) % ls.phi_a, 0);
    const arma::rowvec coh_b = arma::sum(arma::sqrt(eta_a_dl) % ls.phi_b, 0);
    const double total = arma::accu(load);
    k.b_a = (ls.alpha_a.t() * load) / (n * arma::square(coh_a)).t();
    k.b_b = (ls.alpha_b.t() * load) / (n * arma::square(coh_b)).t();
    k.c_a = total / (n * arma::square(coh_a)).t();
    k.c_b = total / (n * arma::square(coh_b)).t();
    return k;
}

Sinrs model_sinrs(const SubproblemCoefficients &k, const arma::vec &eta_a, const arma::vec &eta_b, double p_r)
{
    const arma::vec c = k.a3 * eta_a + k.a4 * eta_b + 1.0;
    Sinrs s;
    s.mac_dir.set_size(k.num_pairs(), 2);
    s.bc_dir.set_size(k.num_pairs(), 2);
    s.mac_dir.col(0) = k.a1 % eta_a / c;
    s.mac_dir.col(1) = k.a2 % eta_b / c;
    s.mac_pair = s.mac_dir.col(0) + s.mac_dir.col(1);
    s.bc_dir.col(0) = p_r / (p_r * k.b_a + k.c_a);
    s.bc_dir.col(1) = p_r / (p_r * k.b_b + k.c_b);
    return s;
}

MonomialFit monomial_objective_fit(const arma::vec &gamma0)
{
    if (arma::any(gamma0 <= 0.0))
        throw std::domain_error("objective fit needs a positive expansion point");
    MonomialFit f;
    f.mu = gamma0 / (gamma0 + 1.0);
    f.delta = arma::exp(-f.mu % arma::log(gamma0)) % (1.0 + gamma0);
    return f;
}

AmGmSplit am_gm_split(const arma::vec &u0, const arma::vec &v0)
{
    if (arma::any(u0 < 0.0) || arma::any(v0 < 0.0) || arma::any(u0 + v0 <= 0.0))
        throw std::domain_error("arithmetic-geometric split needs a positive sum");
    AmGmSplit s;
    s.phi_a = u0 / (u0 + v0);
    s.phi_b = 1.0 - s.phi_a;
    return s;
}

XyFit xy_monomial_fit(const arma::vec &x0, const arma::vec &y0)
{
    if (arma::any(x0 <= 0.0) || arma::any(y0 <= 0.0))
        throw std::domain_error("x + y + xy fit needs a positive expansion point");
    const arma::vec f = x0 + y0 + x0 % y0;
    XyFit fit;
    fit.lambda_a = x0 % (1.0 + y0) / f;
    fit.lambda_b = y0 % (1.0 + x0) / f;
    fit.zeta = f % arma::exp(-fit.lambda_a % arma::log(x0) - fit.lambda_b % arma::log(y0));
    return fit;
}

AllocPoint expansion_point(const SubproblemCoefficients &k, const arma::vec &eta_a, const arma::vec &eta_b,
                           double p_r)
{
    const Sinrs s = model_sinrs(k, eta_a, eta_b, p_r);
    AllocPoint pt;
    pt.eta_a = eta_a;
    pt.eta_b = eta_b;
    pt.p_r = p_r;
    pt.gamma_a = arma::min(s.mac_dir.col(0), s.bc_dir.col(1));
    pt.gamma_b = arma::min(s.mac_dir.col(1), s.bc_dir.col(0));
    pt.gamma = arma::min(s.mac_pair, pt.gamma_a + pt.gamma_b + pt.gamma_a % pt.gamma_b);
    return pt;
}

double qos_threshold(double r_min, const SystemConfig &cfg)
{
    const double tc = static_cast<double>(cfg.coherence_symbols);
    const double tp = static_cast<double>(cfg.pilot_symbols);
    return std::exp2(2.0 * tc * r_min / (tc - tp)) - 1.0;
}

arma::vec pack(const AllocPoint &pt)
{
    GpLayout l{pt.eta_a.n_elem};
    arma::vec x(l.size());
    for (std::size_t i = 0; i < l.w; ++i)
    {
        x(l.eta_a(i)) = pt.eta_a(i);
        x(l.eta_b(i)) = pt.eta_b(i);
        x(l.gamma(i)) = pt.gamma(i);
        x(l.gamma_a(i)) = pt.gamma_a(i);
        x(l.gamma_b(i)) = pt.gamma_b(i);
    }
    x(l.p_r()) = pt.p_r;
    return x;
}

GpProblem build_gp_subproblem(const SubproblemCoefficients &k, const AllocPoint &pt, const AllocOptions &opt,
                              const SystemConfig &cfg)
{
    const std::size_t w = k.num_pairs();
    const GpLayout l{w};
    if (!(opt.theta > 1.0))
        throw std::invalid_argument("trust-region parameter must exceed 1");
    if (!(opt.budget > 0.0))
        throw std::invalid_argument("power budget must be positive");

    GpProblem gp;
    for (const char *name : {"eta_a", "eta_b", "gamma", "gamma_a", "gamma_b"})
        for (std::size_t i = 0; i < w; ++i)
            gp.add_variable(std::string(name) + "[" + std::to_string(i) + "]");
    gp.add_variable("p_r");

    const MonomialFit obj = monomial_objective_fit(pt.gamma);
    const AmGmSplit split = am_gm_split(k.a1 % pt.eta_a, k.a2 % pt.eta_b);
    const XyFit xy = xy_monomial_fit(pt.gamma_a, pt.gamma_b);
    const double gamma_min = opt.r_min > 0.0 ? qos_threshold(opt.r_min, cfg) : 0.0;

    for (std::size_t i = 0; i < w; ++i)
        gp.objective.pow(l.gamma(i), -obj.mu(i));

    auto tag = [](const char *name, std::size_t i) { return std::string(name) + "[" + std::to_string(i) + "]"; };
    auto trust = [&](std::size_t var, double center, const std::string &label) {
        Monomial up;
        up.coeff = 1.0 / (opt.theta * center);
        up.pow(var, 1.0);
        Monomial down;
        down.coeff = center / opt.theta;
        down.pow(var, -1.0);
        gp.add({up}, label);
        gp.add({down}, label);
    };

    for (std::size_t i = 0; i < w; ++i)
    {
        trust(l.eta_a(i), pt.eta_a(i), tag("trust_eta_a", i));
        trust(l.eta_b(i), pt.eta_b(i), tag("trust_eta_b", i));
        trust(l.gamma(i), pt.gamma(i), tag("trust_gamma", i));
        trust(l.gamma_a(i), pt.gamma_a(i), tag("trust_gamma_a", i));
        trust(l.gamma_b(i), pt.gamma_b(i), tag("trust_gamma_b", i));

        // c_i gamma_i / monomial lower bound of (a1 eta_a + a2 eta_b) <= 1.
        {
            const double fa = split.phi_a(i), fb = split.phi_b(i);
            double base = 1.0;
            Monomial inv;
            inv.pow(l.gamma(i), 1.0);
            if (fa > 0.0)
            {
                base *= std::pow(k.a1(i) / fa, -fa);
                inv.pow(l.eta_a(i), -fa);
            }
            if (fb > 0.0)
            {
                base *= std::pow(k.a2(i) / fb, -fb);
                inv.pow(l.eta_b(i), -fb);
            }
            inv.coeff = base;
            Posynomial p{inv};
            for (std::size_t j = 0; j < w; ++j)
            {
                if (k.a3(i, j) > 0.0)
                {
                    Monomial m = inv;
                    m.coeff *= k.a3(i, j);
                    p.push_back(m.pow(l.eta_a(j), 1.0));
                }
                if (k.a4(i, j) > 0.0)
                {
                    Monomial m = inv;
                    m.coeff *= k.a4(i, j);
                    p.push_back(m.pow(l.eta_b(j), 1.0));
                }
            }
            gp.add(std::move(p), tag("sinr_pair", i));
        }

        // gamma_i <= zeta gamma_a^lambda_a gamma_b^lambda_b.
        {
            Monomial m;
            m.coeff = 1.0 / xy.zeta(i);
            m.pow(l.gamma(i), 1.0).pow(l.gamma_a(i), -xy.lambda_a(i)).pow(l.gamma_b(i), -xy.lambda_b(i));
            gp.add({m}, tag("sinr_split", i));
        }

        // Direction SINRs bounded by their uplink and broadcast hops.
        auto direction = [&](std::size_t g, std::size_t eta_own, double a_own, double b_far, double c_far,
                             const std::string &label) {
            Monomial base;
            base.coeff = 1.0 / a_own;
            base.pow(g, 1.0).pow(eta_own, -1.0);
            Posynomial mac{base};
            for (std::size_t j = 0; j < w; ++j)
            {
                if (k.a3(i, j) > 0.0)
                {
                    Monomial m = base;
                    m.coeff *= k.a3(i, j);
                    mac.push_back(m.pow(l.eta_a(j), 1.0));
                }
                if (k.a4(i, j) > 0.0)
                {
                    Monomial m = base;
                    m.coeff *= k.a4(i, j);
                    mac.push_back(m.pow(l.eta_b(j), 1.0));
                }
            }
            gp.add(std::move(mac), label);
            Monomial hop1;
            hop1.coeff = b_far;
            hop1.pow(g, 1.0);
            Monomial hop2;
            hop2.coeff = c_far;
            hop2.pow(g, 1.0).pow(l.p_r(), -1.0);
            gp.add({hop1, hop2}, label);
        };
        direction(l.gamma_a(i), l.eta_a(i), k.a1(i), k.b_b(i), k.c_b(i), tag("gamma_a", i));
        direction(l.gamma_b(i), l.eta_b(i), k.a2(i), k.b_a(i), k.c_a(i), tag("gamma_b", i));

        if (gamma_min > 0.0)
        {
            Monomial q;
            q.coeff = gamma_min;
            q.pow(l.gamma(i), -1.0);
            gp.add({q}, tag("qos", i));
        }
    }

    Posynomial budget;
    for (std::size_t i = 0; i < w; ++i)
    {
        Monomial a;
        a.coeff = 1.0 / opt.budget;
        budget.push_back(a.pow(l.eta_a(i), 1.0));
        Monomial b;
        b.coeff = 1.0 / opt.budget;
        budget.push_back(b.pow(l.eta_b(i), 1.0));
    }
    Monomial r;
    r.coeff = 1.0 / opt.budget;
    budget.push_back(r.pow(l.p_r(), 1.0));
    gp.add(std::move(budget), "budget");
    return gp;
}

std::size_t constraint_families(const GpProblem &gp)
{
    std::set<std::string> labels;
    for (const auto &c : gp.constraints)
        labels.insert(c.label);
    return labels.size();
}

PowerAllocation to_power_allocation(const LargeScaleFading &ls, const SystemConfig &cfg, const arma::vec &eta_a,
                                    const arma::vec &eta_b, double p_r)
{
    const auto powers = normalize_powers(cfg);
    PowerAllocation pa;
    pa.p_p = powers.pilot;
    pa.p_u = powers.uplink;
    pa.p_r = p_r;
    pa.eta_a_ul = eta_a / powers.uplink;
    pa.eta_b_ul = eta_b / powers.uplink;
    std::tie(pa.eta_a_dl, pa.eta_b_dl) = full_power_downlink(ls, cfg.antennas_per_ap);
    return pa;
}

double allocation_sum_se(const LargeScaleFading &ls, const SystemConfig &cfg, const arma::vec &eta_a,
                         const arma::vec &eta_b, double p_r)
{
    return rate_report(ls, to_power_allocation(ls, cfg, eta_a, eta_b, p_r), cfg).sum_se;
}

namespace
{

constexpr double kAscentSlack = 1e-6;

double max_relative_change(const AllocPoint &a, const AllocPoint &b)
{
    auto rel = [](const arma::vec &x, const arma::vec &y) { return arma::max(arma::abs(x - y) / arma::abs(y)); };
    double c = std::fabs(a.p_r - b.p_r) / b.p_r;
    for (double v : {rel(a.eta_a, b.eta_a), rel(a.eta_b, b.eta_b), rel(a.gamma, b.gamma), rel(a.gamma_a, b.gamma_a),
                     rel(a.gamma_b, b.gamma_b)})
        c = std::max(c, v);
    return c;
}

void store(AllocationResult &r, const AllocPoint &pt, double se)
{
    r.eta_tilde_a = pt.eta_a;
    r.eta_tilde_b = pt.eta_b;
    r.p_r = pt.p_r;
    r.gamma = pt.gamma;
    r.gamma_a = pt.gamma_a;
    r.gamma_b = pt.gamma_b;
    r.sum_se = se;
}

} // namespace

AllocationResult optimize_power(const LargeScaleFading &ls, const SystemConfig &cfg, const AllocOptions &opt)
{
    if (!(opt.budget > 0.0))
        throw std::invalid_argument("power budget must be positive");
    if (!(opt.theta > 1.0))
        throw std::invalid_argument("trust-region parameter must exceed 1");
    if (!(opt.eps > 0.0))
        throw std::invalid_argument("stopping tolerance must be positive");

    const std::size_t w = ls.num_pairs();
    const SubproblemCoefficients k = build_coefficients(ls, cfg.antennas_per_ap, opt.literal_coefficients);
    const GpLayout l{w};
    const arma::vec start(w, arma::fill::value(opt.budget / (4.0 * double(w))));

    auto point_at = [&](const arma::vec &ea, const arma::vec &eb, double pr) {
        // The auxiliaries are refreshed from the closed form, not the GP.
        AllocPoint pt = expansion_point(k, ea, eb, pr);
        if (opt.literal_coefficients)
        {
            const RateReport rr = rate_report(ls, to_power_allocation(ls, cfg, ea, eb, pr), cfg);
            pt.gamma_a = arma::min(rr.gamma_mac_dir.col(0), rr.gamma_bc_dir.col(1));
            pt.gamma_b = arma::min(rr.gamma_mac_dir.col(1), rr.gamma_bc_dir.col(0));
            pt.gamma = arma::min(rr.gamma_mac_pair, pt.gamma_a + pt.gamma_b + pt.gamma_a % pt.gamma_b);
        }
        return pt;
    };

    AllocPoint pt = point_at(start, start, opt.budget / 2.0);
    AllocationResult res;
    res.initial_sum_se = allocation_sum_se(ls, cfg, pt.eta_a, pt.eta_b, pt.p_r);
    store(res, pt, res.initial_sum_se);
    res.history.push_back(res.initial_sum_se);

    for (std::size_t it = 1; it <= opt.max_iter; ++it)
    {
        const GpProblem gp = build_gp_subproblem(k, pt, opt, cfg);
        const GpResult sol = solve_gp(gp, pack(pt), opt.gp);
        if (sol.status != GpStatus::kOptimal)
        {
            if (sol.status == GpStatus::kInfeasible)
                res.feasible = it > 1 || opt.r_min <= 0.0 ? res.feasible : false;
            res.diagnostic = "subproblem " + to_string(sol.status) + " at iteration " + std::to_string(it) + ": " +
                             sol.message;
            return res;
        }
        arma::vec ea(w), eb(w);
        for (std::size_t i = 0; i < w; ++i)
        {
            ea(i) = sol.x(l.eta_a(i));
            eb(i) = sol.x(l.eta_b(i));
        }
        const AllocPoint next = point_at(ea, eb, sol.x(l.p_r()));
        const double se = allocation_sum_se(ls, cfg, next.eta_a, next.eta_b, next.p_r);
        if (se < res.sum_se - kAscentSlack)
        {
            res.diagnostic = "sum SE decreased at iteration " + std::to_string(it) + "; kept the previous iterate";
            return res;
        }
        const double change = max_relative_change(next, pt);
        pt = next;
        store(res, pt, se);
        res.history.push_back(se);
        res.iterations = it;
        if (change < opt.eps)
        {
            res.converged = true;
            break;
        }
    }
    if (opt.r_min > 0.0 && arma::any(res.gamma < qos_threshold(opt.r_min, cfg) * (1.0 - 1e-6)))
        res.feasible = false;
    return res;
}

AllocationResult brute_force_oracle(const LargeScaleFading &ls, const SystemConfig &cfg, double budget,
                                    std::size_t grid_points)
{
    const std::size_t w = ls.num_pairs();
    if (w > 2)
        throw std::invalid_argument("grid oracle supports at most two pairs");
    if (grid_points < 2 || grid_points > 50)
        throw std::invalid_argument("grid oracle needs 2..50 points per axis");
    if (!(budget > 0.0))
        throw std::invalid_argument("power budget must be positive");

    // Geometric grid spanning three decades below P/(4W) up to P, shifted so
    // the uniform value P/(4W) is a node.
    const double uniform = budget / (4.0 * double(w));
    const double ratio = std::pow(4.0 * double(w) * 1e3, 1.0 / double(grid_points - 1));
    const auto k0 = static_cast<std::size_t>(std::lround(std::log(1e3) / std::log(ratio)));
    arma::vec grid(grid_points);
    for (std::size_t g = 0; g < grid_points; ++g)
        grid(g) = uniform * std::pow(ratio, double(g) - double(k0));

    const SubproblemCoefficients k = build_coefficients(ls, cfg.antennas_per_ap);
    const double pre_log = pre_log_factor(cfg);
    const std::size_t axes = 2 * w;
    std::size_t total = 1;
    for (std::size_t a = 0; a < axes; ++a)
        total *= grid_points;

    // Sum SE of the coefficient model, which equals the closed form.
    auto value = [&](std::size_t idx, arma::vec &ea, arma::vec &eb, double &pr) {
        double used = 0.0;
        for (std::size_t a = 0; a < axes; ++a)
        {
            const double v = grid(idx % grid_points);
            idx /= grid_points;
            (a < w ? ea(a) : eb(a - w)) = v;
            used += v;
        }
        pr = budget - used;
        if (!(pr > 0.0))
            return -std::numeric_limits<double>::infinity();
        const AllocPoint p = expansion_point(k, ea, eb, pr);
        return pre_log * arma::accu(arma::log2(1.0 + p.gamma));
    };

    const std::size_t chunks = grid_points;
    const std::size_t per_chunk = total / chunks;
    std::vector<double> best(chunks, -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> arg(chunks, 0);
    parallel_for(chunks, [&](std::size_t c) {
        arma::vec ea(w), eb(w);
        double pr = 0.0;
        for (std::size_t idx = c * per_chunk; idx < (c + 1) * per_chunk; ++idx)
        {
            const double v = value(idx, ea, eb, pr);
            if (v > best[c])
            {
                best[c] = v;
                arg[c] = idx;
            }
        }
    });
    std::size_t winner = 0;
    for (std::size_t c = 1; c < chunks; ++c)
        if (best[c] > best[winner])
            winner = c;

    arma::vec ea(w), eb(w);
    double pr = 0.0;
    value(arg[winner], ea, eb, pr);
    AllocationResult res;
    const AllocPoint pt = expansion_point(k, ea, eb, pr);
    store(res, pt, allocation_sum_se(ls, cfg, ea, eb, pr));
    const arma::vec u(w, arma::fill::value(uniform));
    res.initial_sum_se = allocation_sum_se(ls, cfg, u, u, budget / 2.0);
    res.history.push_back(res.sum_se);
    res.converged = true;
    return res;
}

} // namespace cfrelay
