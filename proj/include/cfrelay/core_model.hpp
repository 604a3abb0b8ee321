// SPDX-License-Identifier: Apache-2.0
//
// Deployment geometry and large-scale fading: uniform drops on a wrapped
// square, the urban-microcell path loss with correlated log-normal shadowing,
// and the MMSE estimate / error variances that follow from pilot training.

#ifndef CFRELAY_CORE_MODEL_HPP
#define CFRELAY_CORE_MODEL_HPP

#include "cfrelay/config.hpp"

#include <armadillo>
#include <cstdint>
#include <vector>

namespace cfrelay
{

struct Point
{
    double x = 0.0;
    double y = 0.0;
};

struct Topology
{
    double side = 0.0;
    std::vector<Point> aps;
    std::vector<Point> users_a; // user A_i of pair i
    std::vector<Point> users_b; // user B_i of pair i
};

/// Shadowing in dB, M x W per side.
struct ShadowTerms
{
    arma::mat a;
    arma::mat b;
};

/// Per-link gains alpha and the MMSE statistics phi (estimate variance) and
/// err (error variance), each M x W. phi + err == alpha link by link.
struct LargeScaleFading
{
    arma::mat alpha_a, alpha_b;
    arma::mat phi_a, phi_b;
    arma::mat err_a, err_b;

    std::size_t num_aps() const { return alpha_a.n_rows; }
    std::size_t num_pairs() const { return alpha_a.n_cols; }
};

/// AP m and user k positions come from their own keyed streams, so a
/// topology with fewer APs or pairs is a prefix of a larger one.
Topology generate_topology(const SystemConfig &cfg, std::uint64_t seed);
Topology generate_topology(const SystemConfig &cfg);

/// Minimum-image distance on a torus of the given side.
double torus_distance(const Point &p, const Point &q, double side);

/// 10^((-30.5 - 36.7 log10(d) + shadow_db) / 10). Throws std::domain_error for d <= 0.
double path_loss_umi(double distance_m, double shadow_db);

/// Joint Gaussian shadowing over the 2W users, drawn independently per AP,
/// with covariance std^2 * 2^(-delta / decorrelation) for user distance delta.
ShadowTerms correlated_shadowing(const Topology &topo, const SystemConfig &cfg, std::uint64_t seed);
ShadowTerms correlated_shadowing(const Topology &topo, const SystemConfig &cfg);

/// 2W x 2W shadow covariance (users ordered A_0..A_{W-1}, B_0..B_{W-1}).
arma::mat shadow_covariance(const Topology &topo, const SystemConfig &cfg);

/// Symmetric square root of a covariance after symmetrizing and clipping
/// eigenvalues at 1e-12, so that L * L^T reproduces the repaired matrix.
arma::mat covariance_factor(const arma::mat &cov);

/// phi = tau_p p_p alpha^2 / (1 + tau_p p_p alpha).
double mmse_estimate_variance(double alpha, double tau_p, double p_p);

/// Fills phi / err from alpha for the given training budget.
LargeScaleFading estimation_stats(const arma::mat &alpha_a, const arma::mat &alpha_b, double tau_p, double p_p);

/// Gains over torus distances (clamped below at min_distance_m) plus MMSE statistics.
LargeScaleFading large_scale(const Topology &topo, const ShadowTerms &shadows, const SystemConfig &cfg);

/// Convenience: topology, shadowing and fading from cfg.rng_seed.
LargeScaleFading draw_large_scale(const SystemConfig &cfg);

/// Single relay site at the centre of the area (one row, M = 1). Shadowing is
/// a separate correlated draw for that site.
LargeScaleFading collocated_large_scale(const Topology &topo, const SystemConfig &cfg, std::uint64_t seed);

} // namespace cfrelay

#endif
