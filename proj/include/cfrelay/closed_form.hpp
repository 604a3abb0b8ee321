// SPDX-License-Identifier: Apache-2.0
//
// Exact achievable SINRs and rates of the two-phase (MAC then BC) relaying
// scheme with MRC/MRT processing, plus the collocated and orthogonal baselines.

#ifndef CFRELAY_CLOSED_FORM_HPP
#define CFRELAY_CLOSED_FORM_HPP

#include "cfrelay/config.hpp"
#include "cfrelay/core_model.hpp"

#include <armadillo>
#include <utility>

namespace cfrelay
{

enum class Side
{
    kA = 0,
    kB = 1,
};

constexpr Side other(Side s) { return s == Side::kA ? Side::kB : Side::kA; }

struct PowerAllocation
{
    arma::vec eta_a_ul, eta_b_ul; // W, uplink coefficients in [0, 1]
    arma::mat eta_a_dl, eta_b_dl; // M x W, downlink coefficients
    double p_p = 0.0;
    double p_u = 0.0;
    double p_r = 0.0;
};

/// Per-pair SINRs. Direction matrices are W x 2 with column 0 = A, 1 = B.
struct Sinrs
{
    arma::vec mac_pair;
    arma::mat mac_dir;
    arma::mat bc_dir;
};

struct RateReport
{
    arma::vec gamma_mac_pair;
    arma::mat gamma_mac_dir; // W x 2
    arma::mat gamma_bc_dir;  // W x 2
    arma::vec r_mac_pair;
    arma::vec r_bc_pair;
    arma::vec r_pair;
    double sum_se = 0.0;
};

/// eta_mi = (N sum_j (phi_B,mj + phi_A,mj))^-1 on both sides; 0 for an AP
/// whose estimate variances are all zero.
std::pair<arma::mat, arma::mat> full_power_downlink(const LargeScaleFading &ls, std::size_t antennas);

/// Unit uplink coefficients, full-power downlink, powers from cfg.
PowerAllocation uniform_allocation(const LargeScaleFading &ls, const SystemConfig &cfg);

/// sum_m sum_j (eta_A,mj phi_B,mj + eta_B,mj phi_A,mj), per AP (M-vector).
arma::vec downlink_load(const LargeScaleFading &ls, const PowerAllocation &pa);

/// p_d = p_r / (N * total downlink load). Zero when the load is zero.
double downlink_power(const LargeScaleFading &ls, const PowerAllocation &pa, std::size_t antennas);

arma::vec sinr_mac_pair(const LargeScaleFading &ls, const PowerAllocation &pa, std::size_t antennas);
arma::vec sinr_mac_dir(const LargeScaleFading &ls, const PowerAllocation &pa, std::size_t antennas, Side x);
arma::vec sinr_bc_dir(const LargeScaleFading &ls, const PowerAllocation &pa, std::size_t antennas, Side x);

/// All SINRs. With `inter_pair_interference` false, every j != i term is
/// removed (each pair alone on its resource).
Sinrs compute_sinrs(const LargeScaleFading &ls, const PowerAllocation &pa, std::size_t antennas,
                    bool inter_pair_interference = true);

/// Rates from SINRs: R = pre_log * log2(1 + gamma), then
/// R_BC = min(R_A^MAC, R_B^BC) + min(R_B^MAC, R_A^BC), R = min(R_MAC, R_BC).
RateReport assemble_rate_report(const Sinrs &s, double pre_log);

RateReport rate_report(const LargeScaleFading &ls, const PowerAllocation &pa, const SystemConfig &cfg);

/// Pools the per-AP downlink coefficients of a distributed allocation into a
/// single site: eta_k = sum_m eta_mk (M eta_mk when all APs agree).
PowerAllocation collocated_allocation(const PowerAllocation &pa);

/// Same formulas with one relay site carrying M * N antennas. `ls_site` has one row.
RateReport collocated_rate_report(const LargeScaleFading &ls_site, const PowerAllocation &pa_site,
                                  const SystemConfig &cfg);

/// Each pair served alone on 1/W of the resources with the same training overhead.
double orthogonal_scheme_sum_se(const LargeScaleFading &ls, const PowerAllocation &pa, const SystemConfig &cfg);

/// Effective SINR of a pair given its rate: 2^(R / pre_log) - 1.
double sinr_from_rate(double rate, double pre_log);

} // namespace cfrelay

#endif
