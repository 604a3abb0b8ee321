// SPDX-License-Identifier: Apache-2.0

#include "cfrelay/power_alloc.hpp"
#include "cfrelay/rng.hpp"

#include "doctest.h"

#include <cmath>
#include <map>

using namespace cfrelay;

namespace
{

LargeScaleFading homogeneous(std::size_t m, std::size_t w, double alpha, double phi)
{
    LargeScaleFading ls;
    ls.alpha_a = arma::mat(m, w, arma::fill::value(alpha));
    ls.alpha_b = ls.alpha_a;
    ls.phi_a = arma::mat(m, w, arma::fill::value(phi));
    ls.phi_b = ls.phi_a;
    ls.err_a = ls.alpha_a - ls.phi_a;
    ls.err_b = ls.err_a;
    return ls;
}

SystemConfig small(std::size_t m, std::size_t n, std::size_t w)
{
    SystemConfig cfg;
    cfg.num_aps = m;
    cfg.antennas_per_ap = n;
    cfg.num_pairs = w;
    cfg.pilot_symbols = 2 * w;
    return cfg;
}

double budget_10dbm(const SystemConfig &cfg) { return dbm_to_watts(10.0) / noise_power(cfg); }

} // namespace

TEST_CASE("coefficient hand example and symmetries")
{
    const auto k = build_coefficients(homogeneous(1, 1, 1.0, 0.5), 1);
    CHECK(k.a1(0) == doctest::Approx(0.25));
    CHECK(k.a2(0) == doctest::Approx(0.25));

    const auto cfg = small(12, 2, 2);
    auto ls = draw_large_scale(cfg);
    const auto k1 = build_coefficients(ls, 2);
    std::swap(ls.alpha_a, ls.alpha_b);
    std::swap(ls.phi_a, ls.phi_b);
    std::swap(ls.err_a, ls.err_b);
    const auto k2 = build_coefficients(ls, 2);
    CHECK(arma::approx_equal(k1.a1, k2.a2, "reldiff", 1e-14));
    CHECK(arma::approx_equal(k1.a3, k2.a4, "reldiff", 1e-14));
    CHECK(arma::approx_equal(k1.b_a, k2.b_b, "reldiff", 1e-12));

    const auto kh = build_coefficients(homogeneous(7, 2, 1e-3, 4e-4), 3);
    CHECK(arma::approx_equal(kh.a3.row(0), kh.a3.row(1), "reldiff", 1e-14));

    CHECK_THROWS_AS(build_coefficients(homogeneous(3, 1, 1e-3, 0.0), 1), std::domain_error);
}

TEST_CASE("coefficient model reproduces the closed-form SINRs")
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed)
    {
        auto cfg = small(20, 2, 3);
        cfg.rng_seed = seed;
        const auto ls = draw_large_scale(cfg);
        Rng rng(seed, Stream::kInstance, 0);
        arma::vec ea(3), eb(3);
        for (auto &v : ea)
            v = 1e9 * (0.1 + rng.uniform());
        for (auto &v : eb)
            v = 1e9 * (0.1 + rng.uniform());
        const double pr = 5e9 * (0.1 + rng.uniform());
        const Sinrs model = model_sinrs(build_coefficients(ls, 2), ea, eb, pr);
        const Sinrs exact = compute_sinrs(ls, to_power_allocation(ls, cfg, ea, eb, pr), 2);
        CHECK(arma::approx_equal(model.mac_dir, exact.mac_dir, "reldiff", 1e-12));
        CHECK(arma::approx_equal(model.bc_dir, exact.bc_dir, "reldiff", 1e-12));

        // The literal coefficients drop the per-AP weighting and disagree.
        const Sinrs lit = model_sinrs(build_coefficients(ls, 2, true), ea, eb, pr);
        CHECK_FALSE(arma::approx_equal(lit.mac_dir, exact.mac_dir, "reldiff", 1e-6));
    }
}

TEST_CASE("objective monomial fit")
{
    const auto f = monomial_objective_fit(arma::vec{1.0});
    CHECK(f.mu(0) == doctest::Approx(0.5));
    CHECK(f.delta(0) == doctest::Approx(2.0));

    Rng rng(3, Stream::kInstance, 1);
    arma::vec g(100);
    for (auto &v : g)
        v = std::pow(10.0, 6.0 * rng.uniform() - 3.0);
    const auto h = monomial_objective_fit(g);
    CHECK(arma::approx_equal(h.delta % arma::exp(h.mu % arma::log(g)), 1.0 + g, "reldiff", 1e-12));
    CHECK(monomial_objective_fit(arma::vec{1e9}).mu(0) > 1.0 - 1e-8);
    CHECK_THROWS_AS(monomial_objective_fit(arma::vec{0.0}), std::domain_error);
}

TEST_CASE("arithmetic-geometric split is a global lower bound")
{
    const auto s = am_gm_split(arma::vec{2.0}, arma::vec{2.0});
    CHECK(s.phi_a(0) == doctest::Approx(0.5));
    CHECK(s.phi_b(0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(am_gm_split(arma::vec{0.0}, arma::vec{0.0}), std::domain_error);

    Rng rng(5, Stream::kInstance, 2);
    auto draw = [&] { return std::pow(10.0, 8.0 * rng.uniform() - 4.0); };
    for (int trial = 0; trial < 10000; ++trial)
    {
        const double u0 = draw(), v0 = draw();
        const auto w = am_gm_split(arma::vec{u0}, arma::vec{v0});
        const double fa = w.phi_a(0), fb = w.phi_b(0);
        auto bound = [&](double u, double v) { return std::pow(u / fa, fa) * std::pow(v / fb, fb); };
        CHECK(bound(u0, v0) == doctest::Approx(u0 + v0).epsilon(1e-12));
        const double u = draw(), v = draw();
        CHECK(bound(u, v) <= (u + v) * (1.0 + 1e-12));
    }
}

TEST_CASE("x + y + xy monomial fit")
{
    const auto f = xy_monomial_fit(arma::vec{1.0}, arma::vec{1.0});
    CHECK(f.lambda_a(0) == doctest::Approx(2.0 / 3.0));
    CHECK(f.lambda_b(0) == doctest::Approx(2.0 / 3.0));
    CHECK(f.zeta(0) == doctest::Approx(3.0));

    const auto p = xy_monomial_fit(arma::vec{0.3}, arma::vec{4.0});
    const auto q = xy_monomial_fit(arma::vec{4.0}, arma::vec{0.3});
    CHECK(p.lambda_a(0) == doctest::Approx(q.lambda_b(0)));
    CHECK(p.lambda_b(0) == doctest::Approx(q.lambda_a(0)));
    CHECK_THROWS_AS(xy_monomial_fit(arma::vec{-1.0}, arma::vec{1.0}), std::domain_error);

    Rng rng(9, Stream::kInstance, 3);
    auto draw = [&] { return std::pow(10.0, 6.0 * rng.uniform() - 3.0); };
    for (int trial = 0; trial < 10000; ++trial)
    {
        const double x0 = draw(), y0 = draw();
        const auto fit = xy_monomial_fit(arma::vec{x0}, arma::vec{y0});
        auto mono = [&](double x, double y) {
            return fit.zeta(0) * std::pow(x, fit.lambda_a(0)) * std::pow(y, fit.lambda_b(0));
        };
        CHECK(mono(x0, y0) == doctest::Approx(x0 + y0 + x0 * y0).epsilon(1e-12));
        const double x = draw(), y = draw();
        CHECK(mono(x, y) <= (x + y + x * y) * (1.0 + 1e-12));
    }
}

TEST_CASE("subproblem structure at the expansion point")
{
    for (std::size_t w : {1u, 2u, 4u})
    {
        const auto cfg = small(15, 2, w);
        const auto ls = draw_large_scale(cfg);
        const auto k = build_coefficients(ls, 2);
        AllocOptions opt;
        opt.budget = budget_10dbm(cfg);
        const arma::vec u(w, arma::fill::value(opt.budget / (4.0 * double(w))));
        const AllocPoint pt = expansion_point(k, u, u, opt.budget / 2.0);

        const GpProblem plain = build_gp_subproblem(k, pt, opt, cfg);
        CHECK(constraint_families(plain) == 9 * w + 1);
        opt.r_min = 0.01;
        const GpProblem gp = build_gp_subproblem(k, pt, opt, cfg);
        CHECK(constraint_families(gp) == 10 * w + 1);
        CHECK(gp.num_variables() == 5 * w + 1);

        const arma::vec x = pack(pt);
        std::map<std::string, double> worst;
        for (const auto &c : plain.constraints)
        {
            const double v = eval(c.terms, x);
            CHECK(v <= 1.0 + 1e-12);
            worst[c.label] = std::max(worst[c.label], v);
        }
        CHECK(worst["budget"] == doctest::Approx(1.0));
        for (std::size_t i = 0; i < w; ++i)
        {
            const std::string idx = "[" + std::to_string(i) + "]";
            CHECK(worst["trust_gamma" + idx] == doctest::Approx(1.0 / opt.theta));
            // gamma sits on the smaller of its two bounds, and each direction
            // on the smaller of its hops.
            CHECK(std::max(worst["sinr_pair" + idx], worst["sinr_split" + idx]) == doctest::Approx(1.0));
            CHECK(worst["gamma_a" + idx] == doctest::Approx(1.0));
            CHECK(worst["gamma_b" + idx] == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("subproblem solutions respect the trust region")
{
    const auto cfg = small(20, 2, 2);
    const auto ls = draw_large_scale(cfg);
    const auto k = build_coefficients(ls, 2);
    AllocOptions opt;
    opt.budget = budget_10dbm(cfg);
    const arma::vec u(2, arma::fill::value(opt.budget / 8.0));
    const AllocPoint pt = expansion_point(k, u, u, opt.budget / 2.0);
    const GpResult r = solve_gp(build_gp_subproblem(k, pt, opt, cfg), pack(pt));
    REQUIRE(r.status == GpStatus::kOptimal);
    const arma::vec x0 = pack(pt);
    const arma::vec ratio = r.x / x0;
    // p_r (last entry) is limited only by the budget.
    CHECK(arma::all(ratio.head(10) <= opt.theta * (1.0 + 1e-9)));
    CHECK(arma::all(ratio.head(10) >= (1.0 - 1e-9) / opt.theta));
}

TEST_CASE("QoS threshold inverts the rate expression")
{
    const auto cfg = small(10, 1, 2);
    CHECK(qos_threshold(0.0, cfg) == 0.0);
    const double g = qos_threshold(0.7, cfg);
    CHECK(pre_log_factor(cfg) * std::log2(1.0 + g) == doctest::Approx(0.7));
}

TEST_CASE("single pair optimum matches the grid oracle")
{
    for (std::uint64_t seed : {1u, 2u, 3u})
    {
        auto cfg = small(30, 2, 1);
        cfg.rng_seed = seed;
        const auto ls = draw_large_scale(cfg);
        AllocOptions opt;
        opt.budget = budget_10dbm(cfg);
        const auto res = optimize_power(ls, cfg, opt);
        const auto grid = brute_force_oracle(ls, cfg, opt.budget, 50);
        CHECK(res.sum_se >= res.initial_sum_se);
        CHECK(grid.sum_se >= grid.initial_sum_se);
        CHECK(res.sum_se >= 0.98 * grid.sum_se);
        CHECK(res.initial_sum_se == doctest::Approx(grid.initial_sum_se));
        for (std::size_t i = 1; i < res.history.size(); ++i)
            CHECK(res.history[i] >= res.history[i - 1] - 1e-6);
        CHECK(arma::accu(res.eta_tilde_a + res.eta_tilde_b) + res.p_r <= opt.budget * (1.0 + 1e-6));
        CHECK(res.sum_se == doctest::Approx(allocation_sum_se(ls, cfg, res.eta_tilde_a, res.eta_tilde_b, res.p_r)));
    }
}

TEST_CASE("two pair optimization improves on uniform power")
{
    const auto cfg = small(40, 2, 2);
    const auto ls = draw_large_scale(cfg);
    AllocOptions opt;
    opt.budget = budget_10dbm(cfg);
    opt.max_iter = 20;
    const auto res = optimize_power(ls, cfg, opt);
    CHECK(res.sum_se > res.initial_sum_se);
    CHECK(res.iterations > 0);
    CHECK(res.history.size() == res.iterations + 1);
    CHECK(arma::all(res.eta_tilde_a > 0.0));
    CHECK(res.p_r > 0.0);
}

TEST_CASE("unreachable QoS is reported as infeasible")
{
    const auto cfg = small(10, 1, 2);
    const auto ls = draw_large_scale(cfg);
    AllocOptions opt;
    opt.budget = budget_10dbm(cfg);
    opt.r_min = 50.0;
    const auto res = optimize_power(ls, cfg, opt);
    CHECK_FALSE(res.feasible);
    CHECK_FALSE(res.diagnostic.empty());
    CHECK(res.sum_se == doctest::Approx(res.initial_sum_se));
}

TEST_CASE("grid oracle limits and symmetry")
{
    const auto cfg = small(10, 1, 3);
    const auto ls3 = draw_large_scale(cfg);
    CHECK_THROWS_AS(brute_force_oracle(ls3, cfg, 1e9, 10), std::invalid_argument);
    const auto cfg1 = small(10, 1, 1);
    const auto ls1 = homogeneous(10, 1, 1e-9, 5e-10);
    CHECK_THROWS_AS(brute_force_oracle(ls1, cfg1, 1e9, 51), std::invalid_argument);
    const auto r = brute_force_oracle(ls1, cfg1, budget_10dbm(cfg1), 40);
    // Symmetric statistics make the objective invariant under swapping the
    // two users; the maximizer itself need not lie on the diagonal.
    CHECK(allocation_sum_se(ls1, cfg1, r.eta_tilde_b, r.eta_tilde_a, r.p_r) == doctest::Approx(r.sum_se));
    CHECK(r.sum_se >= r.initial_sum_se);
}

TEST_CASE("invalid options are rejected")
{
    const auto cfg = small(5, 1, 1);
    const auto ls = draw_large_scale(cfg);
    AllocOptions opt;
    CHECK_THROWS_AS(optimize_power(ls, cfg, opt), std::invalid_argument);
    opt.budget = 1e9;
    opt.theta = 1.0;
    CHECK_THROWS_AS(optimize_power(ls, cfg, opt), std::invalid_argument);
}
