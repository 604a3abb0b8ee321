// SPDX-License-Identifier: Apache-2.0
//
// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any of them fails.

#include "cfrelay/closed_form.hpp"
#include "cfrelay/experiments.hpp"
#include "cfrelay/gp.hpp"
#include "cfrelay/monte_carlo.hpp"
#include "cfrelay/power_alloc.hpp"
#include "cfrelay/rng.hpp"
#include "cfrelay/scaling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace cfrelay;

namespace
{

struct Outcome
{
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(const char *name, const std::function<Outcome()> &fn)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try
    {
        out = fn();
    }
    catch (const std::exception &e)
    {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out.pass)
        ++failures;
    std::printf("%s %s (%.1fs): %s\n", out.pass ? "PASS" : "FAIL", name, secs, out.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char *f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

LargeScaleFading homogeneous(std::size_t m, std::size_t w, double alpha)
{
    LargeScaleFading ls;
    ls.alpha_a = arma::mat(m, w, arma::fill::value(alpha));
    ls.alpha_b = ls.alpha_a;
    return ls;
}

// alpha log-uniform in [1e-2, 1], training power log-uniform in [0.1, 10].
LargeScaleFading random_fading(Rng &rng, std::size_t m, std::size_t w)
{
    arma::mat a(m, w), b(m, w);
    for (auto &v : a)
        v = std::pow(10.0, -2.0 * rng.uniform());
    for (auto &v : b)
        v = std::pow(10.0, -2.0 * rng.uniform());
    return estimation_stats(a, b, 2.0 * double(w), std::pow(10.0, 2.0 * rng.uniform() - 1.0));
}

// Closed-form vs Monte-Carlo, term by term, and the sum SE.
Outcome closed_form_vs_monte_carlo()
{
    SystemConfig cfg;
    cfg.num_aps = 50;
    cfg.antennas_per_ap = 3;
    cfg.num_pairs = 5;
    const auto ls = draw_large_scale(cfg);
    const auto pa = uniform_allocation(ls, cfg);
    const auto mc = run_monte_carlo(ls, pa, cfg, 10000, 2024, 200);
    const auto cf = closed_form_terms(ls, pa, cfg.antennas_per_ap);
    const double exact = rate_report(ls, pa, cfg).sum_se;

    std::size_t checked = 0, outside = 0;
    std::string first_bad;
    auto check = [&](const std::string &name, const McEstimate &m, const McEstimate &c) {
        ++checked;
        // Deterministic terms (BC noise) carry zero standard error.
        const double tol = m.std_error > 0.0 ? 3.0 * m.std_error : 1e-12 * std::fabs(c.value);
        if (std::fabs(m.value - c.value) > tol)
        {
            ++outside;
            if (first_bad.empty())
                first_bad = name + fmt(" mc %.6g cf %.6g se %.3g", m.value, c.value, m.std_error);
        }
    };
    for (std::size_t i = 0; i < cfg.num_pairs; ++i)
    {
        const auto &m = mc.terms.mac[i];
        const auto &c = cf.mac[i];
        const auto p = "pair " + std::to_string(i) + " mac ";
        check(p + "ds_a", m.ds_a, c.ds_a);
        check(p + "ds_b", m.ds_b, c.ds_b);
        check(p + "ee_a", m.ee_a, c.ee_a);
        check(p + "ee_b", m.ee_b, c.ee_b);
        check(p + "iui", m.iui, c.iui);
        check(p + "noise", m.noise, c.noise);
        for (int s = 0; s < 2; ++s)
        {
            const auto &mb = mc.terms.bc[i][s];
            const auto &cb = cf.bc[i][s];
            const auto q = "pair " + std::to_string(i) + (s == 0 ? " bc A " : " bc B ");
            check(q + "ds", mb.ds, cb.ds);
            check(q + "bu", mb.bu, cb.bu);
            check(q + "self", mb.self, cb.self);
            check(q + "iui_a", mb.iui_a, cb.iui_a);
            check(q + "iui_b", mb.iui_b, cb.iui_b);
            check(q + "noise", mb.noise, cb.noise);
        }
    }
    const double diff = std::fabs(mc.sum_se.value - exact);
    const bool se_ok = diff <= 3.0 * mc.sum_se.std_error;
    Outcome out;
    out.pass = outside == 0 && se_ok;
    out.detail = std::to_string(checked - outside) + "/" + std::to_string(checked) + " terms within 3 SE; " +
                 fmt("sum SE mc %.6f closed form %.6f |diff| %.3g <= 3 x %.3g", mc.sum_se.value, exact, diff,
                     mc.sum_se.std_error);
    if (!first_bad.empty())
        out.detail += "; first outlier " + first_bad;
    return out;
}

Outcome mmse_identities()
{
    SystemConfig cfg;
    const auto ls = draw_large_scale(cfg);
    const arma::mat ra = arma::abs(ls.phi_a + ls.err_a - ls.alpha_a) / ls.alpha_a;
    const arma::mat rb = arma::abs(ls.phi_b + ls.err_b - ls.alpha_b) / ls.alpha_b;
    const double worst = std::max(ra.max(), rb.max());
    const bool exact_ok = worst <= 2.0 * std::numeric_limits<double>::epsilon();

    // Moment checks on a few representative links.
    std::size_t total = 0, within = 0;
    std::string first_bad;
    const std::vector<std::pair<double, double>> links{{0.8, 0.2}, {0.3, 0.7}, {2.5, 0.5}};
    std::uint64_t seed = 100;
    for (std::size_t n : {1u, 3u})
        for (const auto &[phi, err] : links)
            for (const auto &c : verify_identities(phi, err, 0.6, n, 100000, seed++))
            {
                ++total;
                if (c.within_3se)
                    ++within;
                else if (first_bad.empty())
                    first_bad = c.name + fmt(" est %.6g expected %.6g se %.3g", c.estimate.value, c.expected,
                                             c.estimate.std_error);
            }
    Outcome out;
    out.pass = exact_ok && within == total;
    out.detail = fmt("max |phi+e-alpha|/alpha %.3g; ", worst) + std::to_string(within) + "/" +
                 std::to_string(total) + " moment checks within 3 SE at 1e5 samples";
    if (!first_bad.empty())
        out.detail += "; first outlier " + first_bad;
    return out;
}

Outcome collocated_equivalence()
{
    Rng rng(31, Stream::kInstance);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial)
    {
        const std::size_t m = 2 + static_cast<std::size_t>(rng.uniform() * 60);
        const std::size_t w = 1 + static_cast<std::size_t>(rng.uniform() * 5);
        const auto site = random_fading(rng, 1, w);
        LargeScaleFading cf;
        cf.alpha_a = arma::repmat(site.alpha_a, m, 1);
        cf.alpha_b = arma::repmat(site.alpha_b, m, 1);
        cf.phi_a = arma::repmat(site.phi_a, m, 1);
        cf.phi_b = arma::repmat(site.phi_b, m, 1);
        cf.err_a = arma::repmat(site.err_a, m, 1);
        cf.err_b = arma::repmat(site.err_b, m, 1);

        SystemConfig cfg;
        cfg.num_aps = m;
        cfg.num_pairs = w;
        cfg.antennas_per_ap = 1 + static_cast<std::size_t>(rng.uniform() * 4);
        cfg.pilot_symbols = 2 * w;
        auto pa = uniform_allocation(cf, cfg);
        pa.p_u = std::pow(10.0, 4.0 * rng.uniform());
        pa.p_r = std::pow(10.0, 4.0 * rng.uniform());
        const auto a = rate_report(cf, pa, cfg);
        const auto b = collocated_rate_report(site, collocated_allocation(pa), cfg);
        worst = std::max(worst, std::fabs(a.sum_se - b.sum_se) / a.sum_se);
    }
    return {worst < 1e-12, fmt("max relative sum-SE difference over 20 draws %.3g (< 1e-12)", worst)};
}

Outcome interference_limitation()
{
    Rng rng(41, Stream::kInstance);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int trial = 0; trial < 20; ++trial)
    {
        const std::size_t m = 5 + static_cast<std::size_t>(rng.uniform() * 50);
        const std::size_t w = 2 + static_cast<std::size_t>(rng.uniform() * 4);
        const auto ls = random_fading(rng, m, w);
        SystemConfig cfg;
        cfg.num_aps = m;
        cfg.num_pairs = w;
        cfg.pilot_symbols = 2 * w;
        auto pa = uniform_allocation(ls, cfg);
        for (auto &v : pa.eta_a_ul)
            v = 0.05 + 0.95 * rng.uniform();
        for (auto &v : pa.eta_b_ul)
            v = 0.05 + 0.95 * rng.uniform();
        pa.p_u = 1e6;
        const arma::vec g6 = sinr_mac_pair(ls, pa, cfg.antennas_per_ap);
        pa.p_u = 1e8;
        const arma::vec g8 = sinr_mac_pair(ls, pa, cfg.antennas_per_ap);
        const arma::vec r = g8 / g6;
        lo = std::min(lo, r.min());
        hi = std::max(hi, r.max());
    }
    return {lo >= 1.0 && hi <= 1.1, fmt("gamma(1e8)/gamma(1e6) in [%.9f, %.9f] over 20 instances", lo, hi)};
}

// Exact sum SE of pilot scaling on nested homogeneous fading.
Outcome scaling_classification()
{
    SystemConfig cfg;
    const std::vector<std::size_t> ms{100, 400, 1600};
    const double octaves = std::log2(double(ms.back()) / double(ms.front()));
    std::string detail;
    bool pass = true;
    const std::vector<std::pair<double, int>> cases{{0.7, +1}, {1.0, 0}, {1.4, -1}};
    for (const auto &[a, sign] : cases)
    {
        std::vector<double> se;
        for (auto m : ms)
        {
            cfg.num_aps = m;
            ScalingParams sp;
            sp.scenario = ScalingScenario::kPilotScaling;
            sp.pilot_exp = a;
            sp.e_p = 1e8;
            se.push_back(exact_scaled_rates(homogeneous(m, cfg.num_pairs, 1e-9), sp, cfg).sum_se);
        }
        const double slope = (se.back() - se.front()) / octaves;
        const bool ok = sign > 0 ? slope > 0.0 : sign < 0 ? slope < 0.0 : std::fabs(slope) < 0.1;
        pass = pass && ok;
        detail += fmt("a=%.1f slope %+.4f bits/octave; ", a, slope);
    }

    cfg.num_aps = 50;
    cfg.num_pairs = 3;
    cfg.pilot_symbols = 6;
    const auto in = scaling_inputs(draw_large_scale(cfg), cfg);
    bool same = true;
    for (auto form : {AsymptoticForm::kPrinted, AsymptoticForm::kLowPilot})
    {
        ScalingParams p, q;
        p.scenario = q.scenario = ScalingScenario::kJointScaling;
        p.pilot_exp = 1.1;
        p.uplink_exp = p.relay_exp = 1.2;
        q.pilot_exp = 0.9;
        q.uplink_exp = q.relay_exp = 1.4;
        p.form = q.form = form;
        const auto s = scenario_c_sinrs(in, p);
        const auto t = scenario_c_sinrs(in, q);
        same = same && arma::all(s.mac_pair == t.mac_pair) && arma::all(arma::vectorise(s.mac_dir == t.mac_dir)) &&
               arma::all(arma::vectorise(s.bc_dir == t.bc_dir));
    }
    detail += same ? "split (1.1,1.2) vs (0.9,1.4) bit-identical" : "split (1.1,1.2) vs (0.9,1.4) differs";
    return {pass && same, detail};
}

Outcome finite_limit_convergence()
{
    SystemConfig cfg;
    const double e = dbm_to_watts(10.0) / noise_power(cfg);
    const double p_p = normalize_powers(cfg).pilot;
    std::vector<double> gaps;
    std::string detail;
    for (std::size_t m : {100u, 400u, 1600u})
    {
        cfg.num_aps = m;
        const auto ls = homogeneous(m, cfg.num_pairs, 1e-9);
        ScalingParams sp;
        sp.scenario = ScalingScenario::kDataScaling;
        sp.uplink_exp = sp.relay_exp = 1.0;
        sp.e_u = sp.e_r = e;
        const double exact = exact_scaled_rates(ls, sp, cfg).sum_se;
        const auto in = scaling_inputs(estimation_stats(ls.alpha_a, ls.alpha_b, double(cfg.pilot_symbols), p_p), cfg);
        const double asym = arma::accu(regime_rates(in, sp, ScalingRegime::kBalanced, cfg));
        gaps.push_back(std::fabs(exact - asym));
        detail += "M=" + std::to_string(m) + fmt(" gap %.4g; ", gaps.back());
    }
    const bool pass = gaps[1] < gaps[0] && gaps[2] < gaps[1];
    return {pass, detail + (pass ? "monotone decreasing" : "not monotone")};
}

Outcome power_allocation()
{
    SystemConfig cfg;
    cfg.num_aps = 50;
    cfg.antennas_per_ap = 2;
    cfg.num_pairs = 2;
    cfg.pilot_symbols = 4;
    const auto ls = draw_large_scale(cfg);
    AllocOptions opt;
    opt.budget = dbm_to_watts(10.0) / noise_power(cfg);
    const auto r = optimize_power(ls, cfg, opt);
    double worst_drop = 0.0;
    for (std::size_t k = 1; k < r.history.size(); ++k)
        worst_drop = std::max(worst_drop, r.history[k - 1] - r.history[k]);
    const auto grid = brute_force_oracle(ls, cfg, opt.budget, 50);
    const bool pass = r.feasible && r.sum_se >= r.initial_sum_se && worst_drop <= 1e-6 &&
                      r.sum_se >= 0.98 * grid.sum_se;
    return {pass, fmt("uniform %.6f optimized %.6f grid %.6f, largest iterate decrease %.3g", r.initial_sum_se,
                      r.sum_se, grid.sum_se, worst_drop) +
                      ", " + std::to_string(r.iterations) + " iterations"};
}

Monomial mono(double c, std::initializer_list<std::pair<std::size_t, double>> e)
{
    Monomial m;
    m.coeff = c;
    for (const auto &p : e)
        m.pow(p.first, p.second);
    return m;
}

// Exhaustive log-grid search over a box, then twice more on a finer grid
// around the best node so grid spacing does not dominate the comparison.
double grid_minimum(const GpProblem &gp, double lo, double hi, std::size_t pts)
{
    auto log_eval = [](const Monomial &m, double l0, double l1) {
        double z = std::log(m.coeff);
        for (const auto &[k, e] : m.exps)
            z += e * (k == 0 ? l0 : l1);
        return std::exp(z);
    };
    double best = std::numeric_limits<double>::infinity();
    double lo0 = std::log(lo), hi0 = std::log(hi), lo1 = lo0, hi1 = hi0;
    for (int pass = 0; pass < 3; ++pass)
    {
        const double s0 = (hi0 - lo0) / double(pts - 1), s1 = (hi1 - lo1) / double(pts - 1);
        double b0 = NAN, b1 = NAN;
        for (std::size_t i = 0; i < pts; ++i)
        {
            const double l0 = lo0 + s0 * double(i);
            for (std::size_t j = 0; j < pts; ++j)
            {
                const double l1 = lo1 + s1 * double(j);
                bool ok = true;
                for (const auto &c : gp.constraints)
                {
                    double v = 0.0;
                    for (const auto &m : c.terms)
                        v += log_eval(m, l0, l1);
                    if (v > 1.0)
                    {
                        ok = false;
                        break;
                    }
                }
                const double f = ok ? log_eval(gp.objective, l0, l1) : INFINITY;
                if (f < best)
                {
                    best = f;
                    b0 = l0;
                    b1 = l1;
                }
            }
        }
        if (std::isnan(b0))
            break;
        lo0 = std::max(std::log(lo), b0 - 2.0 * s0);
        hi0 = std::min(std::log(hi), b0 + 2.0 * s0);
        lo1 = std::max(std::log(lo), b1 - 2.0 * s1);
        hi1 = std::min(std::log(hi), b1 + 2.0 * s1);
    }
    return best;
}

Outcome gp_solver()
{
    std::string detail;
    bool pass = true;
    auto near = [](double a, double b) { return std::fabs(a - b) <= 1e-6 * std::max(1.0, std::fabs(b)); };

    {
        GpProblem gp;
        const auto x = gp.add_variable("x");
        gp.objective = mono(1.0, {{x, 1.0}});
        gp.add({mono(2.0, {{x, -1.0}})}, "lower");
        const auto r = solve_gp(gp);
        const bool ok = r.status == GpStatus::kOptimal && near(r.x(0), 2.0);
        pass = pass && ok;
        detail += fmt("min x s.t. x>=2 -> %.9g; ", r.x.n_elem ? r.x(0) : NAN);
    }
    {
        GpProblem gp;
        const auto x = gp.add_variable("x");
        const auto y = gp.add_variable("y");
        gp.objective = mono(1.0, {{x, -1.0}, {y, -1.0}});
        gp.add({mono(0.25, {{x, 1.0}}), mono(0.5, {{y, 1.0}})}, "budget");
        const auto r = solve_gp(gp);
        const bool ok = r.status == GpStatus::kOptimal && near(r.x(0), 2.0) && near(r.x(1), 1.0);
        pass = pass && ok;
        detail += fmt("min 1/(xy) s.t. x+2y<=4 -> (%.9g, %.9g); ", r.x.n_elem ? r.x(0) : NAN,
                      r.x.n_elem > 1 ? r.x(1) : NAN);
    }
    {
        GpProblem gp;
        const auto x = gp.add_variable("x");
        gp.objective = mono(1.0, {{x, 1.0}});
        gp.add({mono(2.0, {{x, -1.0}})}, "lower");
        gp.add({mono(1.0, {{x, 1.0}})}, "upper");
        const auto r = solve_gp(gp);
        const bool ok = r.status == GpStatus::kInfeasible;
        pass = pass && ok;
        detail += "x>=2, x<=1 -> " + to_string(r.status) + "; ";
    }

    Rng rng(53, Stream::kInstance);
    auto sym = [&](double s) { return s * (2.0 * rng.uniform() - 1.0); };
    double worst = 0.0, worse_than_grid = 0.0;
    int solved = 0;
    for (int trial = 0; trial < 50; ++trial)
    {
        GpProblem gp;
        gp.add_variable("x");
        gp.add_variable("y");
        gp.objective = mono(0.5 + rng.uniform(), {{0, sym(2.0)}, {1, sym(2.0)}});
        for (std::size_t v = 0; v < 2; ++v)
        {
            gp.add({mono(0.1, {{v, -1.0}})}, "box");
            gp.add({mono(0.1, {{v, 1.0}})}, "box");
        }
        for (int k = 0; k < 2; ++k)
        {
            Posynomial p;
            const int terms = 2 + int(rng.uniform() * 2.0);
            double total = 0.0;
            for (int t = 0; t < terms; ++t)
            {
                p.push_back(mono(0.1 + rng.uniform(), {{0, sym(2.0)}, {1, sym(2.0)}}));
                total += p.back().coeff;
            }
            for (auto &m : p)
                m.coeff *= 0.6 / total;
            gp.add(p, "random");
        }
        const auto r = solve_gp(gp);
        if (r.status != GpStatus::kOptimal)
            continue;
        ++solved;
        const double grid = grid_minimum(gp, 0.1, 10.0, 400);
        worst = std::max(worst, std::fabs(r.objective - grid) / grid);
        worse_than_grid = std::max(worse_than_grid, (r.objective - grid) / grid);
    }
    pass = pass && solved == 50 && worst <= 0.01;
    detail += std::to_string(solved) + "/50 random GPs solved, worst deviation from grid " +
              fmt("%.3g (solver above grid by at most %.3g)", worst, worse_than_grid);
    return {pass, detail};
}

std::string csv(const ExperimentSpec &spec, const SystemConfig &base)
{
    std::ostringstream os;
    run_experiment(spec, base).write_csv(os);
    return os.str();
}

Outcome determinism()
{
    SystemConfig base;
    ExperimentSpec mc;
    mc.name = "custom";
    mc.sweep_param = "num_aps";
    mc.sweep_values = {20, 40};
    mc.seeds = {1, 2};
    mc.monte_carlo = true;
    mc.mc_realizations = 300;
    ExperimentSpec fig;
    fig.name = "fig1";
    fig.sweep_values = {25, 50};
    std::size_t bytes = 0;
    bool same = true;
    for (const auto *spec : {&mc, &fig})
    {
        const auto a = csv(*spec, base);
        const auto b = csv(*spec, base);
        same = same && a == b && !a.empty();
        bytes += a.size();
    }
    return {same, std::to_string(bytes) + " CSV bytes over two experiments, repeated runs " +
                      (same ? "byte-identical" : "differ")};
}

Outcome baseline_orderings()
{
    SystemConfig cfg;
    cfg.num_aps = 400;
    const auto topo = generate_topology(cfg);
    const auto ls = large_scale(topo, correlated_shadowing(topo, cfg), cfg);
    const auto site = collocated_large_scale(topo, cfg, cfg.rng_seed);
    const double cf = rate_report(ls, uniform_allocation(ls, cfg), cfg).sum_se;
    const double col = collocated_rate_report(site, uniform_allocation(site, cfg), cfg).sum_se;

    cfg.num_aps = 5;
    const auto small = draw_large_scale(cfg);
    const auto pa = uniform_allocation(small, cfg);
    const double orth = orthogonal_scheme_sum_se(small, pa, cfg);
    const double two_way = rate_report(small, pa, cfg).sum_se;
    return {cf > col && orth > two_way,
            fmt("M=400 cell-free %.4f vs collocated %.4f; M=5 orthogonal %.4f vs two-way %.4f", cf, col, orth,
                two_way)};
}

} // namespace

int main()
{
    report("1 closed form vs Monte-Carlo", closed_form_vs_monte_carlo);
    report("2 MMSE identities", mmse_identities);
    report("3 collocated equivalence", collocated_equivalence);
    report("4 interference limitation", interference_limitation);
    report("5 scaling-law classification", scaling_classification);
    report("6 finite-limit convergence", finite_limit_convergence);
    report("7 power allocation", power_allocation);
    report("8 GP solver", gp_solver);
    report("9 determinism", determinism);
    report("baseline orderings", baseline_orderings);
    std::printf("%d failed\n", failures);
    return failures == 0 ? 0 : 1;
}
