// SPDX-License-Identifier: Apache-2.0

#include "cfrelay/experiments.hpp"
#include "cfrelay/closed_form.hpp"
#include "cfrelay/core_model.hpp"
#include "cfrelay/monte_carlo.hpp"
#include "cfrelay/parallel.hpp"
#include "cfrelay/power_alloc.hpp"
#include "cfrelay/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace cfrelay
{

namespace
{

// One table cell per key column; metrics are numeric and get averaged over
// seeds in the summary rows.
struct Job
{
    std::vector<std::string> keys;
    std::function<std::vector<double>()> run;
};

struct Plan
{
    std::vector<std::string> key_header;
    std::size_t seed_column = 0;
    std::vector<std::string> metric_header;
    std::vector<Job> jobs;
};

const std::vector<double> kDefaultApCounts{50, 100, 200, 400};

double dbm_energy(const SystemConfig &cfg, double dbm) { return dbm_to_watts(dbm) / noise_power(cfg); }

SystemConfig with(SystemConfig cfg, const std::string &key, double value)
{
    set_config_value(cfg, key, format_value(value));
    return cfg;
}

SystemConfig seeded(SystemConfig cfg, std::uint64_t seed)
{
    cfg.rng_seed = seed;
    return cfg;
}

std::string seed_text(std::uint64_t s) { return std::to_string(s); }

const std::vector<double> &axis(const ExperimentSpec &spec, const std::vector<double> &fallback)
{
    return spec.sweep_values.empty() ? fallback : spec.sweep_values;
}

Plan plan_baselines(const ExperimentSpec &spec, const SystemConfig &base)
{
    Plan p;
    p.key_header = {"num_pairs", "num_aps", "seed"};
    p.seed_column = 2;
    p.metric_header = {"cell_free_sum_se", "collocated_sum_se", "orthogonal_sum_se"};
    for (double w : {5.0, 20.0})
    {
        for (double m : axis(spec, {25, 50, 100, 200, 400}))
        {
            for (auto seed : spec.seeds)
            {
                SystemConfig cfg = seeded(with(with(base, "num_pairs", w), "num_aps", m), seed);
                cfg.pilot_symbols = std::max<std::size_t>(cfg.pilot_symbols, 2 * cfg.num_pairs);
                p.jobs.push_back({{format_value(w), format_value(m), seed_text(seed)}, [cfg] {
                                      const Topology topo = generate_topology(cfg);
                                      const auto ls = large_scale(topo, correlated_shadowing(topo, cfg), cfg);
                                      const auto pa = uniform_allocation(ls, cfg);
                                      const auto site = collocated_large_scale(topo, cfg, cfg.rng_seed);
                                      return std::vector<double>{
                                          rate_report(ls, pa, cfg).sum_se,
                                          collocated_rate_report(site, uniform_allocation(site, cfg), cfg).sum_se,
                                          orthogonal_scheme_sum_se(ls, pa, cfg)};
                                  }});
            }
        }
    }
    return p;
}

Plan plan_power_sweep(const ExperimentSpec &spec, const SystemConfig &base)
{
    Plan p;
    p.key_header = {"num_aps", "uplink_power_dbm", "seed"};
    p.seed_column = 2;
    p.metric_header = {"closed_form_sum_se", "mc_sum_se", "mc_std_error"};
    const std::size_t reals = spec.mc_realizations;
    for (double m : {100.0, 200.0})
    {
        for (double pu : axis(spec, {-20, -10, 0, 10, 20, 30}))
        {
            for (auto seed : spec.seeds)
            {
                SystemConfig cfg = seeded(with(with(with(base, "num_aps", m), "uplink_power_dbm", pu),
                                               "pilot_power_dbm", pu),
                                          seed);
                cfg.relay_power_dbm.reset();
                p.jobs.push_back({{format_value(m), format_value(pu), seed_text(seed)}, [cfg, reals] {
                                      const auto ls = draw_large_scale(cfg);
                                      const auto pa = uniform_allocation(ls, cfg);
                                      const auto mc = mc_sum_se(ls, pa, cfg, reals, cfg.rng_seed);
                                      return std::vector<double>{rate_report(ls, pa, cfg).sum_se, mc.value,
                                                                 mc.std_error};
                                  }});
            }
        }
    }
    return p;
}

// Exact and asymptotic sum SE for one scaling setting at one M.
std::vector<double> scaling_point(const SystemConfig &cfg, const ScalingParams &sp)
{
    const auto ls = draw_large_scale(cfg);
    const double exact = exact_scaled_rates(ls, sp, cfg).sum_se;
    const auto base = normalize_powers(cfg);
    const auto powers = scaled_powers(sp, cfg.num_aps, base);
    // The asymptotic forms see the estimation quality at the scaled pilot power.
    ScalingInputs in = scaling_inputs(estimation_stats(ls.alpha_a, ls.alpha_b, double(cfg.pilot_symbols),
                                                       powers.pilot),
                                      cfg);
    double asym = 0.0;
    if (const auto regime = detect_regime(sp))
        asym = arma::accu(regime_rates(in, sp, *regime, cfg));
    else
        asym = asymptotic_rates(in, sp, cfg).sum_se;
    return {exact, asym};
}

std::string regime_text(const ScalingParams &sp)
{
    const auto r = detect_regime(sp);
    return r ? to_string(*r) : std::string("none");
}

Plan plan_scaling(const ExperimentSpec &spec, const SystemConfig &base, const std::vector<ScalingParams> &settings)
{
    Plan p;
    p.key_header = {"scenario", "pilot_exp", "uplink_exp", "relay_exp", "limit", "regime", "num_aps", "seed"};
    p.seed_column = 7;
    p.metric_header = {"exact_sum_se", "asymptotic_sum_se"};
    for (const auto &sp : settings)
    {
        const char *scen = sp.scenario == ScalingScenario::kPilotScaling   ? "pilot"
                           : sp.scenario == ScalingScenario::kDataScaling ? "data"
                                                                           : "joint";
        for (double m : axis(spec, kDefaultApCounts))
        {
            for (auto seed : spec.seeds)
            {
                const SystemConfig cfg = seeded(with(base, "num_aps", m), seed);
                p.jobs.push_back({{scen, format_value(sp.pilot_exp), format_value(sp.uplink_exp),
                                   format_value(sp.relay_exp), to_string(classify_limit(sp).pair_rate.kind),
                                   regime_text(sp), format_value(m), seed_text(seed)},
                                  [cfg, sp] { return scaling_point(cfg, sp); }});
            }
        }
    }
    return p;
}

std::vector<ScalingParams> scaling_settings(const std::string &name, const SystemConfig &cfg)
{
    const double e = dbm_energy(cfg, 10.0);
    auto make = [e](ScalingScenario s, double a, double b, double c) {
        ScalingParams sp;
        sp.scenario = s;
        sp.pilot_exp = a;
        sp.uplink_exp = b;
        sp.relay_exp = c;
        sp.e_p = sp.e_u = sp.e_r = e;
        return sp;
    };
    std::vector<ScalingParams> out;
    if (name == "fig3")
        for (double a : {0.7, 1.0, 1.4})
            out.push_back(make(ScalingScenario::kPilotScaling, a, 0.0, 0.0));
    else if (name == "fig4")
        for (auto [b, c] : {std::pair{1.0, 0.5}, std::pair{0.5, 1.0}, std::pair{1.0, 1.0}})
            out.push_back(make(ScalingScenario::kDataScaling, 0.0, b, c));
    else if (name == "fig5")
        for (auto [b, c] : {std::pair{1.2, 0.5}, std::pair{0.5, 1.2}, std::pair{0.5, 0.5}, std::pair{0.7, 0.7}})
            out.push_back(make(ScalingScenario::kDataScaling, 0.0, b, c));
    else
        for (auto [a, b, c] : {std::tuple{1.1, 1.2, 0.4}, std::tuple{0.9, 1.4, 0.6}, std::tuple{0.2, 0.3, 0.3},
                               std::tuple{0.3, 0.5, 0.5}, std::tuple{0.5, 0.5, 0.2}, std::tuple{0.5, 0.2, 0.5}})
            out.push_back(make(ScalingScenario::kJointScaling, a, b, c));
    return out;
}

Plan plan_allocation(const ExperimentSpec &spec, const SystemConfig &base)
{
    Plan p;
    p.key_header = {"pilot_power_dbm", "num_aps", "seed"};
    p.seed_column = 2;
    p.metric_header = {"uniform_sum_se", "optimized_sum_se", "improvement_pct", "iterations"};
    for (double pp : {10.0, 15.0})
    {
        for (double m : axis(spec, {50, 100, 200}))
        {
            for (auto seed : spec.seeds)
            {
                const SystemConfig cfg = seeded(with(with(base, "pilot_power_dbm", pp), "num_aps", m), seed);
                p.jobs.push_back({{format_value(pp), format_value(m), seed_text(seed)}, [cfg] {
                                      const auto ls = draw_large_scale(cfg);
                                      AllocOptions opt;
                                      opt.budget = dbm_energy(cfg, 10.0);
                                      const auto r = optimize_power(ls, cfg, opt);
                                      return std::vector<double>{
                                          r.initial_sum_se, r.sum_se,
                                          100.0 * (r.sum_se - r.initial_sum_se) / r.initial_sum_se,
                                          double(r.iterations)};
                                  }});
            }
        }
    }
    return p;
}

Plan plan_custom(const ExperimentSpec &spec, const SystemConfig &base)
{
    Plan p;
    p.key_header = {"parameter", "value", "seed"};
    p.seed_column = 2;
    p.metric_header = {"closed_form_sum_se"};
    if (spec.monte_carlo)
    {
        p.metric_header.push_back("mc_sum_se");
        p.metric_header.push_back("mc_std_error");
    }
    const bool mc = spec.monte_carlo;
    const std::size_t reals = spec.mc_realizations;
    auto add = [&](const SystemConfig &cfg, const std::string &param, const std::string &value,
                   std::uint64_t seed) {
        p.jobs.push_back({{param, value, seed_text(seed)}, [cfg, mc, reals] {
                              const auto ls = draw_large_scale(cfg);
                              const auto pa = uniform_allocation(ls, cfg);
                              std::vector<double> out{rate_report(ls, pa, cfg).sum_se};
                              if (mc)
                              {
                                  const auto e = mc_sum_se(ls, pa, cfg, reals, cfg.rng_seed);
                                  out.push_back(e.value);
                                  out.push_back(e.std_error);
                              }
                              return out;
                          }});
    };
    if (spec.sweep_values.empty())
    {
        for (auto seed : spec.seeds)
            add(seeded(base, seed), "none", "", seed);
    }
    for (double v : spec.sweep_values)
        for (auto seed : spec.seeds)
            add(seeded(with(base, spec.sweep_param, v), seed), spec.sweep_param, format_value(v), seed);
    return p;
}

} // namespace

std::string format_value(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

const std::vector<std::string> &experiment_names()
{
    static const std::vector<std::string> names{"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "custom"};
    return names;
}

std::string experiment_summary(const std::string &name)
{
    if (name == "fig1")
        return "sum SE vs M: cell-free, collocated and orthogonal baselines, W in {5, 20}";
    if (name == "fig2")
        return "sum SE vs uplink power (dBm, pilot = uplink) for M in {100, 200}, closed form and Monte-Carlo";
    if (name == "fig3")
        return "pilot-power scaling p_p = E_p/M^a, a in {0.7, 1, 1.4}: exact vs asymptotic sum SE over M";
    if (name == "fig4")
        return "data-power scaling with finite limits (b, c) in {(1, .5), (.5, 1), (1, 1)}";
    if (name == "fig5")
        return "data-power scaling with zero or unbounded limits";
    if (name == "fig6")
        return "joint pilot/data scaling: zero, unbounded and finite limits, split invariance";
    if (name == "fig7")
        return "uniform vs optimized power allocation, P = 10 dBm, p_p in {10, 15} dBm, over M";
    if (name == "custom")
        return "closed-form (optionally Monte-Carlo) sum SE, optionally swept over one config key";
    throw std::invalid_argument("unknown experiment '" + name + "'");
}

void ExperimentSpec::validate() const
{
    const auto &names = experiment_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw std::invalid_argument("unknown experiment '" + name + "'");
    if (seeds.empty())
        throw std::invalid_argument("at least one seed is required");
    for (double v : sweep_values)
        if (!std::isfinite(v))
            throw std::invalid_argument("sweep values must be finite");
    if (name == "custom" && !sweep_values.empty())
    {
        const auto &keys = config_keys();
        if (std::find(keys.begin(), keys.end(), sweep_param) == keys.end())
            throw std::invalid_argument("custom sweep needs a config key, got '" + sweep_param + "'");
    }
    if (name != "custom" && !sweep_param.empty())
        throw std::invalid_argument("figure experiments have a fixed sweep axis; omit the parameter name");
    if (mc_realizations < 2)
        throw std::invalid_argument("Monte-Carlo needs at least 2 realizations");
}

void Table::write_csv(std::ostream &os) const
{
    auto line = [&os](const std::vector<std::string> &cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            os << (i ? "," : "") << cells[i];
        os << '\n';
    };
    line(header);
    for (const auto &r : rows)
        line(r);
}

Table run_experiment(const ExperimentSpec &spec, const SystemConfig &base_in)
{
    spec.validate();
    SystemConfig base = base_in;
    for (const auto &[k, v] : spec.overrides)
        set_config_value(base, k, v);
    base.validate();

    Plan plan;
    if (spec.name == "fig1")
        plan = plan_baselines(spec, base);
    else if (spec.name == "fig2")
        plan = plan_power_sweep(spec, base);
    else if (spec.name == "fig7")
        plan = plan_allocation(spec, base);
    else if (spec.name == "custom")
        plan = plan_custom(spec, base);
    else
        plan = plan_scaling(spec, base, scaling_settings(spec.name, base));

    std::vector<std::vector<double>> results(plan.jobs.size());
    parallel_for(plan.jobs.size(), [&](std::size_t i) { results[i] = plan.jobs[i].run(); });

    Table t;
    t.header = plan.key_header;
    t.header.insert(t.header.end(), plan.metric_header.begin(), plan.metric_header.end());
    for (std::size_t i = 0; i < plan.jobs.size(); ++i)
    {
        auto row = plan.jobs[i].keys;
        for (double v : results[i])
            row.push_back(format_value(v));
        t.rows.push_back(std::move(row));
    }

    if (spec.seeds.size() < 2)
        return t;

    // Seed-averaged rows, in first-appearance order of their keys.
    std::vector<std::vector<std::string>> groups;
    std::vector<std::vector<double>> sums;
    std::vector<std::size_t> counts;
    for (std::size_t i = 0; i < plan.jobs.size(); ++i)
    {
        auto keys = plan.jobs[i].keys;
        keys[plan.seed_column] = "mean";
        std::size_t g = 0;
        while (g < groups.size() && groups[g] != keys)
            ++g;
        if (g == groups.size())
        {
            groups.push_back(keys);
            sums.emplace_back(results[i].size(), 0.0);
            counts.push_back(0);
        }
        for (std::size_t k = 0; k < results[i].size(); ++k)
            sums[g][k] += results[i][k];
        ++counts[g];
    }
    for (std::size_t g = 0; g < groups.size(); ++g)
    {
        auto row = groups[g];
        for (double s : sums[g])
            row.push_back(format_value(s / double(counts[g])));
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string describe(const SystemConfig &cfg)
{
    cfg.validate();
    const double np = noise_power(cfg);
    const auto p = normalize_powers(cfg);
    auto db = [](double x) { return format_value(10.0 * std::log10(x)); };
    std::ostringstream os;
    os << format_config(cfg);
    os << "relay_power_dbm_resolved = " << format_value(cfg.resolved_relay_power_dbm()) << '\n';
    os << "noise_power_w = " << format_value(np) << '\n';
    os << "noise_power_dbm = " << format_value(watts_to_dbm(np)) << '\n';
    os << "normalized_pilot_power = " << format_value(p.pilot) << " (" << db(p.pilot) << " dB)\n";
    os << "normalized_uplink_power = " << format_value(p.uplink) << " (" << db(p.uplink) << " dB)\n";
    os << "normalized_relay_power = " << format_value(p.relay) << " (" << db(p.relay) << " dB)\n";
    os << "pre_log_factor = " << format_value(pre_log_factor(cfg)) << '\n';
    return os.str();
}

} // namespace cfrelay
