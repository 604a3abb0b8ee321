// SPDX-License-Identifier: Apache-2.0
//
// Power-scaling laws as the number of APs M grows:
//   pilot scaling  p_p = E_p / M^a, fixed p_u and p_r;
//   data scaling   p_u = E_u / M^b, p_r = E_r / M^c, fixed p_p;
//   joint scaling  all three powers scaled.
// Uplink coefficients are 1 and the downlink coefficients uniform.

#ifndef CFRELAY_SCALING_HPP
#define CFRELAY_SCALING_HPP

#include "cfrelay/closed_form.hpp"

#include <optional>
#include <string>

namespace cfrelay
{

enum class ScalingScenario
{
    kPilotScaling,
    kDataScaling,
    kJointScaling,
};

/// kPrinted uses the gain-only expressions in which phi is replaced by alpha.
/// kLowPilot keeps the tau_p p_p alpha^2 behaviour of phi at vanishing pilot
/// power, which is the form the exact SINRs actually approach.
enum class AsymptoticForm
{
    kPrinted,
    kLowPilot,
};

struct ScalingParams
{
    ScalingScenario scenario = ScalingScenario::kDataScaling;
    double pilot_exp = 0.0; // a
    double uplink_exp = 0.0; // b
    double relay_exp = 0.0;  // c
    double e_p = 1.0;
    double e_u = 1.0;
    double e_r = 1.0;
    AsymptoticForm form = AsymptoticForm::kPrinted;

    /// Throws std::invalid_argument for negative exponents or non-positive energies.
    void validate() const;
};

/// Fading plus the fixed quantities the scenarios need.
struct ScalingInputs
{
    LargeScaleFading ls; // alpha for pilot/joint scaling, phi (at fixed p_p) for data scaling
    std::size_t antennas = 1;
    double tau_p = 1.0;
    double p_u = 0.0; // fixed uplink power (pilot scaling)
    double p_r = 0.0; // fixed relay power (pilot scaling)
};

ScalingInputs scaling_inputs(const LargeScaleFading &ls, const SystemConfig &cfg);

/// Powers (p_p, p_u, p_r) prescribed by the scenario at M APs; unscaled
/// powers are taken from `base`.
NormalizedPowers scaled_powers(const ScalingParams &sp, std::size_t num_aps, const NormalizedPowers &base);

/// M^-x with the exponent rounded to 12 decimals, so that equal exponent sums
/// written with different splits give bit-identical factors.
double scaling_factor(std::size_t num_aps, double exponent);

/// Asymptotic SINRs evaluated at the finite M of the inputs.
Sinrs scenario_a_sinrs(const ScalingInputs &in, const ScalingParams &sp);
Sinrs scenario_b_sinrs(const ScalingInputs &in, const ScalingParams &sp);
Sinrs scenario_c_sinrs(const ScalingInputs &in, const ScalingParams &sp);
Sinrs asymptotic_sinrs(const ScalingInputs &in, const ScalingParams &sp);

/// The displayed limit expressions: the finite-M forms with every M^-x
/// factor dropped (E in place of E / M^x) at the finite-limit exponents.
Sinrs scenario_a_limits(const ScalingInputs &in, const ScalingParams &sp);
Sinrs scenario_b_limits(const ScalingInputs &in, const ScalingParams &sp);
Sinrs scenario_c_limits(const ScalingInputs &in, const ScalingParams &sp);

/// Exact SINR pipeline at the scenario's powers: phi recomputed from alpha
/// for pilot/joint scaling, unit uplink and uniform downlink coefficients.
RateReport exact_scaled_rates(const LargeScaleFading &ls, const ScalingParams &sp, const SystemConfig &cfg);

/// Asymptotic SINRs pushed through the rate pipeline.
RateReport asymptotic_rates(const ScalingInputs &in, const ScalingParams &sp, const SystemConfig &cfg);

enum class LimitKind
{
    kZero,
    kFinite,
    kUnbounded,
};

std::string to_string(LimitKind k);

struct LimitClass
{
    LimitKind kind = LimitKind::kFinite;
    std::optional<double> finite_value;
};

/// Growth order M^order of the MAC and BC SINRs and the resulting class of
/// each SINR and of the per-pair rate min(R_MAC, R_BC).
struct LimitSummary
{
    double mac_order = 0.0;
    double bc_order = 0.0;
    LimitClass mac;
    LimitClass bc;
    LimitClass pair_rate;
};

LimitSummary classify_limit(const ScalingParams &sp);

/// Exponent regimes with closed-form per-pair rates as M grows.
enum class ScalingRegime
{
    kUplinkLimited,        // data scaling, b = 1, 0 <= c < 1: rate set by the MAC phase
    kDownlinkLimited,      // data scaling, 0 <= b < 1, c = 1: rate set by the BC phase
    kBalanced,             // data scaling, b = c = 1
    kPilotUplinkLimited,   // joint scaling, a + b = 1, b > c >= 0
    kPilotDownlinkLimited, // joint scaling, a + c = 1, c > b >= 0
    kPilotBalanced,        // joint scaling, a + b = 1, b = c
};

std::string to_string(ScalingRegime r);

/// Per-pair rates of the regime. Throws std::domain_error naming the violated
/// condition when the exponents do not match the regime.
arma::vec regime_rates(const ScalingInputs &in, const ScalingParams &sp, ScalingRegime regime, const SystemConfig &cfg);

/// Regime implied by the exponents, if any.
std::optional<ScalingRegime> detect_regime(const ScalingParams &sp);

/// Class of the sum SE with the regime's finite value when it is finite.
LimitClass sum_se_limit(const ScalingInputs &in, const ScalingParams &sp, const SystemConfig &cfg);

} // namespace cfrelay

#endif
