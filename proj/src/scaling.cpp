// SPDX-License-Identifier: Apache-2.0

#include "cfrelay/scaling.hpp"

#include <cmath>
#include <stdexcept>

namespace cfrelay
{

namespace
{

constexpr double kExpTol = 1e-12;

bool near(double a, double b) { return std::fabs(a - b) <= kExpTol; }

double safe_div(double num, double den) { return den > 0.0 ? num / den : 0.0; }

// Fills a Sinrs from per-side MAC numerators over a shared denominator and
// per-side BC numerators / denominators.
Sinrs build(const arma::rowvec &mac_num_a, const arma::rowvec &mac_num_b, const arma::vec &mac_den,
            const arma::rowvec &bc_num_a, const arma::vec &bc_den_a, const arma::rowvec &bc_num_b,
            const arma::vec &bc_den_b)
{
    const std::size_t w = mac_den.n_elem;
    Sinrs s;
    s.mac_pair.set_size(w);
    s.mac_dir.set_size(w, 2);
    s.bc_dir.set_size(w, 2);
    for (std::size_t i = 0; i < w; ++i)
    {
        s.mac_dir(i, 0) = safe_div(mac_num_a(i), mac_den(i));
        s.mac_dir(i, 1) = safe_div(mac_num_b(i), mac_den(i));
        s.mac_pair(i) = safe_div(mac_num_a(i) + mac_num_b(i), mac_den(i));
        s.bc_dir(i, 0) = safe_div(bc_num_a(i), bc_den_a(i));
        s.bc_dir(i, 1) = safe_div(bc_num_b(i), bc_den_b(i));
    }
    return s;
}

// Pilot scaling with pilot energy factor t (E_p / M^a, or E_p for the limit).
Sinrs pilot_scaling(const ScalingInputs &in, const AsymptoticForm form, double t)
{
    const auto &ls = in.ls;
    const double n = static_cast<double>(in.antennas);
    const double p_u = in.p_u;
    const double p_r = in.p_r;
    const arma::mat both = ls.alpha_a + ls.alpha_b;
    const arma::vec load = arma::sum(both, 1);

    if (form == AsymptoticForm::kPrinted)
    {
        const arma::rowvec s_a = arma::sum(ls.alpha_a, 0);
        const arma::rowvec s_b = arma::sum(ls.alpha_b, 0);
        const arma::vec mac_den = both.t() * (load + 1.0);
        const arma::vec bc_den_a = (p_r * ls.alpha_a + 1.0).t() * load;
        const arma::vec bc_den_b = (p_r * ls.alpha_b + 1.0).t() * load;
        return build(p_u * n * t * arma::square(s_a), p_u * n * t * arma::square(s_b), mac_den, n * p_r * t * s_a,
                     bc_den_a, n * p_r * t * s_b, bc_den_b);
    }

    const double q = in.tau_p * t;
    const arma::mat sq_a = arma::square(ls.alpha_a);
    const arma::mat sq_b = arma::square(ls.alpha_b);
    const arma::rowvec s_a = arma::sum(sq_a, 0);
    const arma::rowvec s_b = arma::sum(sq_b, 0);
    const arma::vec mac_den = (sq_a + sq_b).t() * (p_u * load + 1.0);
    const arma::vec sq_load = arma::sum(sq_a + sq_b, 1);
    const arma::vec bc_den_a = (p_r * ls.alpha_a + 1.0).t() * sq_load;
    const arma::vec bc_den_b = (p_r * ls.alpha_b + 1.0).t() * sq_load;
    return build(p_u * n * q * arma::square(s_a), p_u * n * q * arma::square(s_b), mac_den,
                 n * p_r * q * arma::square(s_a), bc_den_a, n * p_r * q * arma::square(s_b), bc_den_b);
}

// SINRs of the form N t (sum_m x_mi)^2 / sum_m (x_A + x_B)_mi for the MAC and
// N t (sum_m x_mi)^2 / sum_m sum_j (x_A + x_B)_mj for the BC.
Sinrs low_power_form(const arma::mat &x_a, const arma::mat &x_b, double n, double t_mac, double t_bc)
{
    const arma::rowvec s_a = arma::sum(x_a, 0);
    const arma::rowvec s_b = arma::sum(x_b, 0);
    const arma::vec mac_den = arma::sum(x_a + x_b, 0).t();
    const double total = arma::accu(x_a + x_b);
    const arma::vec bc_den(x_a.n_cols, arma::fill::value(total));
    return build(n * t_mac * arma::square(s_a), n * t_mac * arma::square(s_b), mac_den,
                 n * t_bc * arma::square(s_a), bc_den, n * t_bc * arma::square(s_b), bc_den);
}

Sinrs data_scaling(const ScalingInputs &in, double t_u, double t_r)
{
    return low_power_form(in.ls.phi_a, in.ls.phi_b, static_cast<double>(in.antennas), t_u, t_r);
}

Sinrs joint_scaling(const ScalingInputs &in, AsymptoticForm form, double t_u, double t_r)
{
    const double n = static_cast<double>(in.antennas);
    if (form == AsymptoticForm::kPrinted)
        return low_power_form(in.ls.alpha_a, in.ls.alpha_b, n, t_u, t_r);
    return low_power_form(arma::square(in.ls.alpha_a), arma::square(in.ls.alpha_b), n, in.tau_p * t_u,
                          in.tau_p * t_r);
}

void require_scenario(const ScalingParams &sp, ScalingScenario s, const char *what)
{
    sp.validate();
    if (sp.scenario != s)
        throw std::invalid_argument(std::string(what) + " called with a different scaling scenario");
}

LimitKind kind_of(double order)
{
    if (order > kExpTol)
        return LimitKind::kUnbounded;
    if (order < -kExpTol)
        return LimitKind::kZero;
    return LimitKind::kFinite;
}

double pre_log_of(const ScalingInputs &in, const SystemConfig &cfg)
{
    (void)in;
    return pre_log_factor(cfg);
}

} // namespace

void ScalingParams::validate() const
{
    if (pilot_exp < 0.0 || uplink_exp < 0.0 || relay_exp < 0.0)
        throw std::invalid_argument("scaling exponents must be >= 0");
    if (!(e_p >= 0.0) || !(e_u >= 0.0) || !(e_r >= 0.0))
        throw std::invalid_argument("scaling energies must be >= 0");
}

ScalingInputs scaling_inputs(const LargeScaleFading &ls, const SystemConfig &cfg)
{
    const auto p = normalize_powers(cfg);
    ScalingInputs in;
    in.ls = ls;
    in.antennas = cfg.antennas_per_ap;
    in.tau_p = static_cast<double>(cfg.pilot_symbols);
    in.p_u = p.uplink;
    in.p_r = p.relay;
    return in;
}

double scaling_factor(std::size_t num_aps, double exponent)
{
    const double rounded = std::round(exponent * 1e12) / 1e12;
    return std::pow(static_cast<double>(num_aps), -rounded);
}

NormalizedPowers scaled_powers(const ScalingParams &sp, std::size_t num_aps, const NormalizedPowers &base)
{
    sp.validate();
    NormalizedPowers p = base;
    switch (sp.scenario)
    {
    case ScalingScenario::kPilotScaling:
        p.pilot = sp.e_p * scaling_factor(num_aps, sp.pilot_exp);
        break;
    case ScalingScenario::kDataScaling:
        p.uplink = sp.e_u * scaling_factor(num_aps, sp.uplink_exp);
        p.relay = sp.e_r * scaling_factor(num_aps, sp.relay_exp);
        break;
    case ScalingScenario::kJointScaling:
        p.pilot = sp.e_p * scaling_factor(num_aps, sp.pilot_exp);
        p.uplink = sp.e_u * scaling_factor(num_aps, sp.uplink_exp);
        p.relay = sp.e_r * scaling_factor(num_aps, sp.relay_exp);
        break;
    }
    return p;
}

Sinrs scenario_a_sinrs(const ScalingInputs &in, const ScalingParams &sp)
{
    require_scenario(sp, ScalingScenario::kPilotScaling, "scenario_a_sinrs");
    return pilot_scaling(in, sp.form, sp.e_p * scaling_factor(in.ls.num_aps(), sp.pilot_exp));
}

Sinrs scenario_a_limits(const ScalingInputs &in, const ScalingParams &sp)
{
    require_scenario(sp, ScalingScenario::kPilotScaling, "scenario_a_limits");
    return pilot_scaling(in, sp.form, sp.e_p);
}

Sinrs scenario_b_sinrs(const ScalingInputs &in, const ScalingParams &sp)
{
    require_scenario(sp, ScalingScenario::kDataScaling, "scenario_b_sinrs");
    const std::size_t m = in.ls.num_aps();
    return data_scaling(in, sp.e_u * scaling_factor(m, sp.uplink_exp), sp.e_r * scaling_factor(m, sp.relay_exp));
}

Sinrs scenario_b_limits(const ScalingInputs &in, const ScalingParams &sp)
{
    require_scenario(sp, ScalingScenario::kDataScaling, "scenario_b_limits");
    return data_scaling(in, sp.e_u, sp.e_r);
}

Sinrs scenario_c_sinrs(const ScalingInputs &in, const ScalingParams &sp)
{
    require_scenario(sp, ScalingScenario::kJointScaling, "scenario_c_sinrs");
    const std::size_t m = in.ls.num_aps();
    return joint_scaling(in, sp.form, sp.e_p * sp.e_u * scaling_factor(m, sp.pilot_exp + sp.uplink_exp),
                         sp.e_p * sp.e_r * scaling_factor(m, sp.pilot_exp + sp.relay_exp));
}

Sinrs scenario_c_limits(const ScalingInputs &in, const ScalingParams &sp)
{
    require_scenario(sp, ScalingScenario::kJointScaling, "scenario_c_limits");
    return joint_scaling(in, sp.form, sp.e_p * sp.e_u, sp.e_p * sp.e_r);
}

Sinrs asymptotic_sinrs(const ScalingInputs &in, const ScalingParams &sp)
{
    switch (sp.scenario)
    {
    case ScalingScenario::kPilotScaling:
        return scenario_a_sinrs(in, sp);
    case ScalingScenario::kDataScaling:
        return scenario_b_sinrs(in, sp);
    case ScalingScenario::kJointScaling:
        break;
    }
    return scenario_c_sinrs(in, sp);
}

RateReport exact_scaled_rates(const LargeScaleFading &ls, const ScalingParams &sp, const SystemConfig &cfg)
{
    const auto p = scaled_powers(sp, ls.num_aps(), normalize_powers(cfg));
    const auto fading = estimation_stats(ls.alpha_a, ls.alpha_b, static_cast<double>(cfg.pilot_symbols), p.pilot);
    PowerAllocation pa;
    pa.eta_a_ul.ones(ls.num_pairs());
    pa.eta_b_ul.ones(ls.num_pairs());
    pa.eta_a_dl.ones(ls.num_aps(), ls.num_pairs());
    pa.eta_b_dl.ones(ls.num_aps(), ls.num_pairs());
    pa.p_p = p.pilot;
    pa.p_u = p.uplink;
    pa.p_r = p.relay;
    return assemble_rate_report(compute_sinrs(fading, pa, cfg.antennas_per_ap), pre_log_factor(cfg));
}

RateReport asymptotic_rates(const ScalingInputs &in, const ScalingParams &sp, const SystemConfig &cfg)
{
    return assemble_rate_report(asymptotic_sinrs(in, sp), pre_log_of(in, cfg));
}

std::string to_string(LimitKind k)
{
    switch (k)
    {
    case LimitKind::kZero:
        return "zero";
    case LimitKind::kFinite:
        return "finite";
    case LimitKind::kUnbounded:
        return "unbounded";
    }
    return "unknown";
}

LimitSummary classify_limit(const ScalingParams &sp)
{
    sp.validate();
    LimitSummary s;
    switch (sp.scenario)
    {
    case ScalingScenario::kPilotScaling:
        s.mac_order = 1.0 - sp.pilot_exp;
        s.bc_order = 1.0 - sp.pilot_exp;
        break;
    case ScalingScenario::kDataScaling:
        s.mac_order = 1.0 - sp.uplink_exp;
        s.bc_order = 1.0 - sp.relay_exp;
        break;
    case ScalingScenario::kJointScaling:
        s.mac_order = 1.0 - sp.pilot_exp - sp.uplink_exp;
        s.bc_order = 1.0 - sp.pilot_exp - sp.relay_exp;
        break;
    }
    s.mac.kind = kind_of(s.mac_order);
    s.bc.kind = kind_of(s.bc_order);
    s.pair_rate.kind = kind_of(std::min(s.mac_order, s.bc_order));
    return s;
}

std::string to_string(ScalingRegime r)
{
    switch (r)
    {
    case ScalingRegime::kUplinkLimited:
        return "uplink-limited";
    case ScalingRegime::kDownlinkLimited:
        return "downlink-limited";
    case ScalingRegime::kBalanced:
        return "balanced";
    case ScalingRegime::kPilotUplinkLimited:
        return "pilot-uplink-limited";
    case ScalingRegime::kPilotDownlinkLimited:
        return "pilot-downlink-limited";
    case ScalingRegime::kPilotBalanced:
        return "pilot-balanced";
    }
    return "unknown";
}

namespace
{

void require(bool ok, const std::string &condition)
{
    if (!ok)
        throw std::domain_error("regime condition violated: " + condition);
}

void check_regime(const ScalingParams &sp, ScalingRegime regime)
{
    const double a = sp.pilot_exp, b = sp.uplink_exp, c = sp.relay_exp;
    const bool data = sp.scenario == ScalingScenario::kDataScaling;
    const bool joint = sp.scenario == ScalingScenario::kJointScaling;
    switch (regime)
    {
    case ScalingRegime::kUplinkLimited:
        require(data, "data-power scaling scenario");
        require(near(b, 1.0), "uplink exponent b = 1");
        require(c < 1.0 - kExpTol, "relay exponent 0 <= c < 1");
        break;
    case ScalingRegime::kDownlinkLimited:
        require(data, "data-power scaling scenario");
        require(b < 1.0 - kExpTol, "uplink exponent 0 <= b < 1");
        require(near(c, 1.0), "relay exponent c = 1");
        break;
    case ScalingRegime::kBalanced:
        require(data, "data-power scaling scenario");
        require(near(b, 1.0), "uplink exponent b = 1");
        require(near(c, 1.0), "relay exponent c = 1");
        break;
    case ScalingRegime::kPilotUplinkLimited:
        require(joint, "joint scaling scenario");
        require(near(a + b, 1.0), "a + b = 1");
        require(b > c + kExpTol, "b > c >= 0");
        break;
    case ScalingRegime::kPilotDownlinkLimited:
        require(joint, "joint scaling scenario");
        require(near(a + c, 1.0), "a + c = 1");
        require(c > b + kExpTol, "c > b >= 0");
        break;
    case ScalingRegime::kPilotBalanced:
        require(joint, "joint scaling scenario");
        require(near(a + b, 1.0), "a + b = 1");
        require(near(b, c), "b = c");
        break;
    }
}

} // namespace

std::optional<ScalingRegime> detect_regime(const ScalingParams &sp)
{
    for (auto r : {ScalingRegime::kUplinkLimited, ScalingRegime::kDownlinkLimited, ScalingRegime::kBalanced,
                   ScalingRegime::kPilotUplinkLimited, ScalingRegime::kPilotDownlinkLimited,
                   ScalingRegime::kPilotBalanced})
    {
        try
        {
            check_regime(sp, r);
            return r;
        }
        catch (const std::domain_error &)
        {
        }
    }
    return std::nullopt;
}

arma::vec regime_rates(const ScalingInputs &in, const ScalingParams &sp, ScalingRegime regime, const SystemConfig &cfg)
{
    sp.validate();
    check_regime(sp, regime);
    const double pl = pre_log_factor(cfg);
    const Sinrs s = asymptotic_sinrs(in, sp);
    auto rate = [pl](double g) { return pl * std::log2(1.0 + g); };
    const std::size_t w = s.mac_pair.n_elem;
    arma::vec r(w);
    switch (regime)
    {
    case ScalingRegime::kUplinkLimited:
    case ScalingRegime::kPilotUplinkLimited:
        for (std::size_t i = 0; i < w; ++i)
            r(i) = rate(s.mac_pair(i));
        break;
    case ScalingRegime::kDownlinkLimited:
    case ScalingRegime::kPilotDownlinkLimited:
        for (std::size_t i = 0; i < w; ++i)
            r(i) = rate(s.bc_dir(i, 0)) + rate(s.bc_dir(i, 1));
        break;
    case ScalingRegime::kBalanced:
    case ScalingRegime::kPilotBalanced:
        r = assemble_rate_report(s, pl).r_pair;
        break;
    }
    return r;
}

LimitClass sum_se_limit(const ScalingInputs &in, const ScalingParams &sp, const SystemConfig &cfg)
{
    LimitClass out = classify_limit(sp).pair_rate;
    if (out.kind != LimitKind::kFinite)
        return out;
    if (const auto regime = detect_regime(sp))
        out.finite_value = arma::accu(regime_rates(in, sp, *regime, cfg));
    else
        out.finite_value = asymptotic_rates(in, sp, cfg).sum_se;
    return out;
}

} // namespace cfrelay
