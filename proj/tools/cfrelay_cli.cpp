// SPDX-License-Identifier: Apache-2.0
//
// cfrelay: evaluate, simulate, scale and optimize the cell-free two-way
// relaying model from the command line.
//
// Exit codes: 0 success, 1 usage or input error, 2 numerical failure.

#include "cfrelay/closed_form.hpp"
#include "cfrelay/config.hpp"
#include "cfrelay/core_model.hpp"
#include "cfrelay/experiments.hpp"
#include "cfrelay/monte_carlo.hpp"
#include "cfrelay/power_alloc.hpp"
#include "cfrelay/scaling.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

using namespace cfrelay;

namespace
{

constexpr int kUsage = 1;
constexpr int kNumerical = 2;

// Thrown when a computation finishes but its result is not usable.
struct NumericalFailure : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct Globals
{
    std::string config_path;
    std::string out_path;
    std::map<std::string, std::string> overrides;
};

SystemConfig resolve_config(const Globals &g)
{
    SystemConfig cfg;
    if (!g.config_path.empty())
        cfg = load_config(g.config_path);
    for (const auto &[k, v] : g.overrides)
        if (!v.empty())
            set_config_value(cfg, k, v);
    cfg.validate();
    return cfg;
}

void emit(const Globals &g, const std::string &text)
{
    if (g.out_path.empty())
    {
        std::cout << text;
        return;
    }
    std::ofstream os(g.out_path);
    if (!os)
        throw std::invalid_argument("cannot write '" + g.out_path + "'");
    os << text;
}

std::string rate_table(const RateReport &r)
{
    Table t;
    t.header = {"pair",          "gamma_mac_pair", "gamma_mac_a", "gamma_mac_b", "gamma_bc_a",
                "gamma_bc_b",    "rate_mac",       "rate_bc",     "rate_pair"};
    for (std::size_t i = 0; i < r.r_pair.n_elem; ++i)
        t.rows.push_back({std::to_string(i), format_value(r.gamma_mac_pair(i)), format_value(r.gamma_mac_dir(i, 0)),
                          format_value(r.gamma_mac_dir(i, 1)), format_value(r.gamma_bc_dir(i, 0)),
                          format_value(r.gamma_bc_dir(i, 1)), format_value(r.r_mac_pair(i)),
                          format_value(r.r_bc_pair(i)), format_value(r.r_pair(i))});
    t.rows.push_back({"sum", "", "", "", "", "", "", "", format_value(r.sum_se)});
    std::ostringstream os;
    t.write_csv(os);
    return os.str();
}

ScalingScenario parse_scenario(const std::string &s)
{
    if (s == "pilot")
        return ScalingScenario::kPilotScaling;
    if (s == "data")
        return ScalingScenario::kDataScaling;
    if (s == "joint")
        return ScalingScenario::kJointScaling;
    throw std::invalid_argument("scenario must be pilot, data or joint");
}

std::optional<ScalingRegime> parse_regime(const std::string &s)
{
    for (auto r : {ScalingRegime::kUplinkLimited, ScalingRegime::kDownlinkLimited, ScalingRegime::kBalanced,
                   ScalingRegime::kPilotUplinkLimited, ScalingRegime::kPilotDownlinkLimited,
                   ScalingRegime::kPilotBalanced})
        if (to_string(r) == s)
            return r;
    if (s.empty() || s == "auto")
        return std::nullopt;
    throw std::invalid_argument("unknown regime '" + s + "'");
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Cell-free massive-MIMO two-way relaying: spectral efficiency, scaling laws, power allocation"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config_path, "key = value config file")->check(CLI::ExistingFile);
    app.add_option("--out", g.out_path, "write output here instead of stdout");
    for (const auto &key : config_keys())
        app.add_option("--" + key, g.overrides[key], "override config key " + key);

    auto *describe_cmd = app.add_subcommand("describe", "print the resolved configuration and derived powers");

    auto *exact_cmd = app.add_subcommand("se-exact", "closed-form per-pair SINRs and rates (uniform power)");
    bool orthogonal = false;
    exact_cmd->add_flag("--orthogonal", orthogonal, "also report the orthogonal-scheme sum SE");

    auto *mc_cmd = app.add_subcommand("se-mc", "Monte-Carlo sum SE next to the closed form");
    std::size_t realizations = 1000;
    std::size_t bootstrap = 200;
    mc_cmd->add_option("--realizations", realizations, "channel realizations")->capture_default_str();
    mc_cmd->add_option("--bootstrap", bootstrap, "bootstrap resamples for the standard error")->capture_default_str();

    auto *scaling_cmd = app.add_subcommand("scaling", "exact vs asymptotic sum SE under power scaling");
    std::string scenario = "pilot", form = "printed", regime_name;
    double pilot_exp = 1.0, uplink_exp = 0.0, relay_exp = 0.0, e_p_dbm = 10.0, e_u_dbm = 10.0, e_r_dbm = 10.0;
    std::vector<std::size_t> ap_counts;
    scaling_cmd->add_option("--scenario", scenario, "pilot | data | joint")->capture_default_str();
    scaling_cmd->add_option("--pilot-exp", pilot_exp, "exponent a of p_p = E_p/M^a")->capture_default_str();
    scaling_cmd->add_option("--uplink-exp", uplink_exp, "exponent b of p_u = E_u/M^b")->capture_default_str();
    scaling_cmd->add_option("--relay-exp", relay_exp, "exponent c of p_r = E_r/M^c")->capture_default_str();
    scaling_cmd->add_option("--e-p-dbm", e_p_dbm, "pilot energy E_p in dBm")->capture_default_str();
    scaling_cmd->add_option("--e-u-dbm", e_u_dbm, "uplink energy E_u in dBm")->capture_default_str();
    scaling_cmd->add_option("--e-r-dbm", e_r_dbm, "relay energy E_r in dBm")->capture_default_str();
    scaling_cmd->add_option("--form", form, "printed | low-pilot asymptotic form")->capture_default_str();
    scaling_cmd->add_option("--regime", regime_name, "force a regime (default: detect)");
    scaling_cmd->add_option("--aps", ap_counts, "AP counts to evaluate (default: num_aps)");

    auto *opt_cmd = app.add_subcommand("optimize", "sum-SE power allocation by successive geometric programming");
    double budget_dbm = 10.0;
    AllocOptions alloc;
    std::size_t grid = 0;
    bool history = false;
    opt_cmd->add_option("--budget-dbm", budget_dbm, "total power budget P in dBm")->capture_default_str();
    opt_cmd->add_option("--r-min", alloc.r_min, "per-pair QoS rate in bit/s/Hz")->capture_default_str();
    opt_cmd->add_option("--theta", alloc.theta, "trust-region factor (> 1)")->capture_default_str();
    opt_cmd->add_option("--eps", alloc.eps, "relative-change stopping tolerance")->capture_default_str();
    opt_cmd->add_option("--max-iter", alloc.max_iter, "iteration limit")->capture_default_str();
    opt_cmd->add_flag("--literal-coefficients", alloc.literal_coefficients,
                      "use the unweighted interference coefficients");
    opt_cmd->add_option("--grid", grid, "also run the grid oracle with this many points per axis (W <= 2)");
    opt_cmd->add_flag("--history", history, "print the sum SE of every accepted iterate");

    auto *fig_cmd = app.add_subcommand("figures", "run a figure experiment and write CSV");
    ExperimentSpec spec;
    std::string names_help = "experiment:";
    for (const auto &n : experiment_names())
        names_help += "\n  " + n + ": " + experiment_summary(n);
    fig_cmd->add_option("experiment", spec.name, names_help)->required();
    fig_cmd->add_option("--seeds", spec.seeds, "topology seeds")->capture_default_str();
    fig_cmd->add_option("--values", spec.sweep_values, "sweep values for the experiment axis");
    fig_cmd->add_option("--param", spec.sweep_param, "config key to sweep (custom only)");
    fig_cmd->add_flag("--mc", spec.monte_carlo, "add Monte-Carlo columns (custom only)");
    fig_cmd->add_option("--realizations", spec.mc_realizations, "Monte-Carlo realizations")->capture_default_str();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try
    {
        const SystemConfig cfg = resolve_config(g);

        if (*describe_cmd)
        {
            emit(g, describe(cfg));
        }
        else if (*exact_cmd)
        {
            const auto ls = draw_large_scale(cfg);
            const auto pa = uniform_allocation(ls, cfg);
            std::string text = rate_table(rate_report(ls, pa, cfg));
            if (orthogonal)
                text += "orthogonal,,,,,,,," + format_value(orthogonal_scheme_sum_se(ls, pa, cfg)) + "\n";
            emit(g, text);
        }
        else if (*mc_cmd)
        {
            const auto ls = draw_large_scale(cfg);
            const auto pa = uniform_allocation(ls, cfg);
            const auto mc = run_monte_carlo(ls, pa, cfg, realizations, cfg.rng_seed, bootstrap);
            Table t;
            t.header = {"closed_form_sum_se", "mc_sum_se", "mc_std_error", "realizations"};
            t.rows.push_back({format_value(rate_report(ls, pa, cfg).sum_se), format_value(mc.sum_se.value),
                              format_value(mc.sum_se.std_error), std::to_string(realizations)});
            std::ostringstream os;
            t.write_csv(os);
            emit(g, os.str());
        }
        else if (*scaling_cmd)
        {
            ScalingParams sp;
            sp.scenario = parse_scenario(scenario);
            sp.pilot_exp = pilot_exp;
            sp.uplink_exp = uplink_exp;
            sp.relay_exp = relay_exp;
            const double np = noise_power(cfg);
            sp.e_p = dbm_to_watts(e_p_dbm) / np;
            sp.e_u = dbm_to_watts(e_u_dbm) / np;
            sp.e_r = dbm_to_watts(e_r_dbm) / np;
            if (form == "printed")
                sp.form = AsymptoticForm::kPrinted;
            else if (form == "low-pilot")
                sp.form = AsymptoticForm::kLowPilot;
            else
                throw std::invalid_argument("form must be printed or low-pilot");
            sp.validate();
            const auto forced = parse_regime(regime_name);
            const auto regime = forced ? forced : detect_regime(sp);
            if (forced && detect_regime(sp) != forced)
            {
                // regime_rates names the violated condition.
                try
                {
                    regime_rates(scaling_inputs(draw_large_scale(cfg), cfg), sp, *forced, cfg);
                }
                catch (const std::domain_error &e)
                {
                    throw std::invalid_argument(e.what());
                }
            }
            if (ap_counts.empty())
                ap_counts.push_back(cfg.num_aps);

            Table t;
            t.header = {"num_aps", "exact_sum_se", "asymptotic_sum_se", "limit", "regime"};
            const std::string limit = to_string(classify_limit(sp).pair_rate.kind);
            for (auto m : ap_counts)
            {
                SystemConfig c = cfg;
                c.num_aps = m;
                const auto ls = draw_large_scale(c);
                const auto powers = scaled_powers(sp, m, normalize_powers(c));
                const auto in = scaling_inputs(
                    estimation_stats(ls.alpha_a, ls.alpha_b, double(c.pilot_symbols), powers.pilot), c);
                const double asym = regime ? arma::accu(regime_rates(in, sp, *regime, c))
                                           : asymptotic_rates(in, sp, c).sum_se;
                t.rows.push_back({std::to_string(m), format_value(exact_scaled_rates(ls, sp, c).sum_se),
                                  format_value(asym), limit, regime ? to_string(*regime) : "none"});
            }
            std::ostringstream os;
            t.write_csv(os);
            emit(g, os.str());
        }
        else if (*opt_cmd)
        {
            const auto ls = draw_large_scale(cfg);
            alloc.budget = dbm_to_watts(budget_dbm) / noise_power(cfg);
            const auto r = optimize_power(ls, cfg, alloc);
            std::ostringstream os;
            os << "budget_normalized = " << format_value(alloc.budget) << '\n';
            os << "uniform_sum_se = " << format_value(r.initial_sum_se) << '\n';
            os << "optimized_sum_se = " << format_value(r.sum_se) << '\n';
            os << "iterations = " << r.iterations << '\n';
            os << "converged = " << (r.converged ? "true" : "false") << '\n';
            os << "feasible = " << (r.feasible ? "true" : "false") << '\n';
            os << "p_r = " << format_value(r.p_r) << '\n';
            for (std::size_t i = 0; i < r.eta_tilde_a.n_elem; ++i)
                os << "pair_" << i << " = eta_a " << format_value(r.eta_tilde_a(i)) << ", eta_b "
                   << format_value(r.eta_tilde_b(i)) << ", gamma " << format_value(r.gamma(i)) << '\n';
            if (!r.diagnostic.empty())
                os << "diagnostic = " << r.diagnostic << '\n';
            if (grid > 0)
                os << "grid_sum_se = " << format_value(brute_force_oracle(ls, cfg, alloc.budget, grid).sum_se)
                   << '\n';
            if (history)
                for (std::size_t k = 0; k < r.history.size(); ++k)
                    os << "history_" << k << " = " << format_value(r.history[k]) << '\n';
            emit(g, os.str());
            if (!r.feasible)
                throw NumericalFailure("power allocation infeasible: " + r.diagnostic);
        }
        else if (*fig_cmd)
        {
            const Table t = run_experiment(spec, cfg);
            std::ostringstream os;
            t.write_csv(os);
            emit(g, os.str());
        }
    }
    catch (const ConfigParseError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    catch (const std::exception &e)
    {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    }
    return 0;
}
