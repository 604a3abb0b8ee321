// SPDX-License-Identifier: Apache-2.0

#include "cfrelay/core_model.hpp"

#include "cfrelay/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cfrelay
{

namespace
{

// Stream index reserved for the collocated site's shadowing draw, far above any AP index.
constexpr std::uint64_t kCollocatedSite = std::uint64_t(1) << 48;

Point uniform_point(Rng &rng, double side)
{
    Point p;
    p.x = rng.uniform() * side;
    p.y = rng.uniform() * side;
    return p;
}

std::vector<Point> all_users(const Topology &topo)
{
    std::vector<Point> users(topo.users_a);
    users.insert(users.end(), topo.users_b.begin(), topo.users_b.end());
    return users;
}

arma::vec draw_site_shadowing(const arma::mat &factor, std::uint64_t seed, std::uint64_t site)
{
    Rng rng(seed, Stream::kShadowing, site);
    arma::vec z(factor.n_cols);
    for (auto &v : z)
        v = rng.normal();
    return factor * z;
}

} // namespace

Topology generate_topology(const SystemConfig &cfg, std::uint64_t seed)
{
    cfg.validate();
    Topology topo;
    topo.side = cfg.area_side_m;
    topo.aps.reserve(cfg.num_aps);
    for (std::size_t m = 0; m < cfg.num_aps; ++m)
    {
        Rng rng(seed, Stream::kApPositions, m);
        topo.aps.push_back(uniform_point(rng, cfg.area_side_m));
    }
    for (std::size_t i = 0; i < cfg.num_pairs; ++i)
    {
        Rng ra(seed, Stream::kUserPositions, 2 * i);
        topo.users_a.push_back(uniform_point(ra, cfg.area_side_m));
        Rng rb(seed, Stream::kUserPositions, 2 * i + 1);
        topo.users_b.push_back(uniform_point(rb, cfg.area_side_m));
    }
    return topo;
}

Topology generate_topology(const SystemConfig &cfg) { return generate_topology(cfg, cfg.rng_seed); }

double torus_distance(const Point &p, const Point &q, double side)
{
    double dx = std::fabs(p.x - q.x);
    double dy = std::fabs(p.y - q.y);
    dx = std::min(dx, side - dx);
    dy = std::min(dy, side - dy);
    return std::hypot(dx, dy);
}

double path_loss_umi(double distance_m, double shadow_db)
{
    if (!(distance_m > 0.0))
        throw std::domain_error("path_loss_umi: distance must be > 0");
    return std::pow(10.0, (-30.5 - 36.7 * std::log10(distance_m) + shadow_db) / 10.0);
}

arma::mat shadow_covariance(const Topology &topo, const SystemConfig &cfg)
{
    const auto users = all_users(topo);
    const std::size_t k = users.size();
    const double var = cfg.shadow_std_db * cfg.shadow_std_db;
    arma::mat cov(k, k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b)
        {
            const double delta = torus_distance(users[a], users[b], topo.side);
            cov(a, b) = var * std::pow(2.0, -delta / cfg.shadow_decorrelation_m);
        }
    return cov;
}

arma::mat covariance_factor(const arma::mat &cov)
{
    const arma::mat sym = 0.5 * (cov + cov.t());
    arma::vec eigval;
    arma::mat eigvec;
    if (!arma::eig_sym(eigval, eigvec, sym))
        throw std::runtime_error("covariance_factor: eigendecomposition failed");
    eigval = arma::sqrt(arma::clamp(eigval, 1e-12, std::numeric_limits<double>::max()));
    return eigvec * arma::diagmat(eigval) * eigvec.t();
}

ShadowTerms correlated_shadowing(const Topology &topo, const SystemConfig &cfg, std::uint64_t seed)
{
    const std::size_t m_count = topo.aps.size();
    const std::size_t w = topo.users_a.size();
    ShadowTerms sh;
    sh.a.zeros(m_count, w);
    sh.b.zeros(m_count, w);
    if (cfg.shadow_std_db == 0.0)
        return sh;
    const arma::mat factor = covariance_factor(shadow_covariance(topo, cfg));
    for (std::size_t m = 0; m < m_count; ++m)
    {
        const arma::vec f = draw_site_shadowing(factor, seed, m);
        for (std::size_t i = 0; i < w; ++i)
        {
            sh.a(m, i) = f(i);
            sh.b(m, i) = f(w + i);
        }
    }
    return sh;
}

ShadowTerms correlated_shadowing(const Topology &topo, const SystemConfig &cfg)
{
    return correlated_shadowing(topo, cfg, cfg.rng_seed);
}

double mmse_estimate_variance(double alpha, double tau_p, double p_p)
{
    const double q = tau_p * p_p;
    if (std::isinf(q))
        return alpha;
    return q * alpha * alpha / (1.0 + q * alpha);
}

LargeScaleFading estimation_stats(const arma::mat &alpha_a, const arma::mat &alpha_b, double tau_p, double p_p)
{
    LargeScaleFading ls;
    ls.alpha_a = alpha_a;
    ls.alpha_b = alpha_b;
    ls.phi_a = alpha_a;
    ls.phi_b = alpha_b;
    ls.phi_a.transform([&](double a) { return mmse_estimate_variance(a, tau_p, p_p); });
    ls.phi_b.transform([&](double a) { return mmse_estimate_variance(a, tau_p, p_p); });
    ls.err_a = alpha_a - ls.phi_a;
    ls.err_b = alpha_b - ls.phi_b;
    return ls;
}

LargeScaleFading large_scale(const Topology &topo, const ShadowTerms &shadows, const SystemConfig &cfg)
{
    const std::size_t m_count = topo.aps.size();
    const std::size_t w = topo.users_a.size();
    arma::mat alpha_a(m_count, w), alpha_b(m_count, w);
    for (std::size_t m = 0; m < m_count; ++m)
        for (std::size_t i = 0; i < w; ++i)
        {
            const double da = std::max(torus_distance(topo.aps[m], topo.users_a[i], topo.side), cfg.min_distance_m);
            const double db = std::max(torus_distance(topo.aps[m], topo.users_b[i], topo.side), cfg.min_distance_m);
            alpha_a(m, i) = path_loss_umi(da, shadows.a(m, i));
            alpha_b(m, i) = path_loss_umi(db, shadows.b(m, i));
        }
    const auto p = normalize_powers(cfg);
    return estimation_stats(alpha_a, alpha_b, static_cast<double>(cfg.pilot_symbols), p.pilot);
}

LargeScaleFading draw_large_scale(const SystemConfig &cfg)
{
    const auto topo = generate_topology(cfg);
    return large_scale(topo, correlated_shadowing(topo, cfg), cfg);
}

LargeScaleFading collocated_large_scale(const Topology &topo, const SystemConfig &cfg, std::uint64_t seed)
{
    Topology site = topo;
    site.aps = {Point{topo.side / 2.0, topo.side / 2.0}};
    const std::size_t w = topo.users_a.size();
    ShadowTerms sh;
    sh.a.zeros(1, w);
    sh.b.zeros(1, w);
    if (cfg.shadow_std_db > 0.0)
    {
        const arma::vec f = draw_site_shadowing(covariance_factor(shadow_covariance(topo, cfg)), seed, kCollocatedSite);
        for (std::size_t i = 0; i < w; ++i)
        {
            sh.a(0, i) = f(i);
            sh.b(0, i) = f(w + i);
        }
    }
    return large_scale(site, sh, cfg);
}

} // namespace cfrelay
