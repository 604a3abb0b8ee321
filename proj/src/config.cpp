// SPDX-License-Identifier: Apache-2.0

#include "cfrelay/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cfrelay
{

namespace
{

std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string &key, const std::string &text)
{
    double v = 0.0;
    const char *first = text.data();
    const char *last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
        throw std::invalid_argument("invalid number for '" + key + "': '" + text + "'");
    return v;
}

std::uint64_t parse_uint(const std::string &key, const std::string &text)
{
    std::uint64_t v = 0;
    const char *first = text.data();
    const char *last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw std::invalid_argument("invalid non-negative integer for '" + key + "': '" + text + "'");
    return v;
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void SystemConfig::validate() const
{
    auto fail = [](const std::string &msg) { throw std::invalid_argument(msg); };
    if (num_aps < 1)
        fail("num_aps must be >= 1");
    if (antennas_per_ap < 1)
        fail("antennas_per_ap must be >= 1");
    if (num_pairs < 1)
        fail("num_pairs must be >= 1");
    if (!(area_side_m > 0.0))
        fail("area_side_m must be > 0");
    if (pilot_symbols < 2 * num_pairs)
        fail("pilot_symbols must be >= 2 * num_pairs for orthogonal pilots");
    if (pilot_symbols >= coherence_symbols)
        fail("pilot_symbols must be < coherence_symbols");
    if (!(bandwidth_hz > 0.0) || !(noise_temp_k > 0.0) || !(boltzmann > 0.0))
        fail("bandwidth_hz, noise_temp_k and boltzmann must be > 0");
    if (!(carrier_freq_hz > 0.0))
        fail("carrier_freq_hz must be > 0");
    if (shadow_std_db < 0.0)
        fail("shadow_std_db must be >= 0");
    if (!(shadow_decorrelation_m > 0.0))
        fail("shadow_decorrelation_m must be > 0");
    if (!(min_distance_m > 0.0))
        fail("min_distance_m must be > 0");
}

double SystemConfig::resolved_relay_power_dbm() const
{
    if (relay_power_dbm)
        return *relay_power_dbm;
    return uplink_power_dbm + 10.0 * std::log10(2.0 * static_cast<double>(num_pairs));
}

const std::vector<std::string> &config_keys()
{
    static const std::vector<std::string> keys = {
        "num_aps", "antennas_per_ap", "num_pairs", "area_side_m", "coherence_symbols",
        "pilot_symbols", "carrier_freq_hz", "bandwidth_hz", "noise_figure_db", "noise_temp_k",
        "boltzmann", "pilot_power_dbm", "uplink_power_dbm", "relay_power_dbm", "shadow_std_db",
        "shadow_decorrelation_m", "min_distance_m", "rng_seed"};
    return keys;
}

void set_config_value(SystemConfig &cfg, const std::string &key, const std::string &raw)
{
    const std::string value = trim(raw);
    if (value.empty())
        throw std::invalid_argument("empty value for '" + key + "'");

    if (key == "num_aps")
        cfg.num_aps = parse_uint(key, value);
    else if (key == "antennas_per_ap")
        cfg.antennas_per_ap = parse_uint(key, value);
    else if (key == "num_pairs")
        cfg.num_pairs = parse_uint(key, value);
    else if (key == "area_side_m")
        cfg.area_side_m = parse_double(key, value);
    else if (key == "coherence_symbols")
        cfg.coherence_symbols = parse_uint(key, value);
    else if (key == "pilot_symbols")
        cfg.pilot_symbols = parse_uint(key, value);
    else if (key == "carrier_freq_hz")
        cfg.carrier_freq_hz = parse_double(key, value);
    else if (key == "bandwidth_hz")
        cfg.bandwidth_hz = parse_double(key, value);
    else if (key == "noise_figure_db")
        cfg.noise_figure_db = parse_double(key, value);
    else if (key == "noise_temp_k")
        cfg.noise_temp_k = parse_double(key, value);
    else if (key == "boltzmann")
        cfg.boltzmann = parse_double(key, value);
    else if (key == "pilot_power_dbm")
        cfg.pilot_power_dbm = parse_double(key, value);
    else if (key == "uplink_power_dbm")
        cfg.uplink_power_dbm = parse_double(key, value);
    else if (key == "relay_power_dbm")
    {
        if (value == "auto")
            cfg.relay_power_dbm.reset();
        else
            cfg.relay_power_dbm = parse_double(key, value);
    }
    else if (key == "shadow_std_db")
        cfg.shadow_std_db = parse_double(key, value);
    else if (key == "shadow_decorrelation_m")
        cfg.shadow_decorrelation_m = parse_double(key, value);
    else if (key == "min_distance_m")
        cfg.min_distance_m = parse_double(key, value);
    else if (key == "rng_seed")
        cfg.rng_seed = parse_uint(key, value);
    else
        throw std::invalid_argument("unknown config key '" + key + "'");
}

std::string get_config_value(const SystemConfig &cfg, const std::string &key)
{
    if (key == "num_aps")
        return std::to_string(cfg.num_aps);
    if (key == "antennas_per_ap")
        return std::to_string(cfg.antennas_per_ap);
    if (key == "num_pairs")
        return std::to_string(cfg.num_pairs);
    if (key == "area_side_m")
        return fmt(cfg.area_side_m);
    if (key == "coherence_symbols")
        return std::to_string(cfg.coherence_symbols);
    if (key == "pilot_symbols")
        return std::to_string(cfg.pilot_symbols);
    if (key == "carrier_freq_hz")
        return fmt(cfg.carrier_freq_hz);
    if (key == "bandwidth_hz")
        return fmt(cfg.bandwidth_hz);
    if (key == "noise_figure_db")
        return fmt(cfg.noise_figure_db);
    if (key == "noise_temp_k")
        return fmt(cfg.noise_temp_k);
    if (key == "boltzmann")
        return fmt(cfg.boltzmann);
    if (key == "pilot_power_dbm")
        return fmt(cfg.pilot_power_dbm);
    if (key == "uplink_power_dbm")
        return fmt(cfg.uplink_power_dbm);
    if (key == "relay_power_dbm")
        return cfg.relay_power_dbm ? fmt(*cfg.relay_power_dbm) : std::string("auto");
    if (key == "shadow_std_db")
        return fmt(cfg.shadow_std_db);
    if (key == "shadow_decorrelation_m")
        return fmt(cfg.shadow_decorrelation_m);
    if (key == "min_distance_m")
        return fmt(cfg.min_distance_m);
    if (key == "rng_seed")
        return std::to_string(cfg.rng_seed);
    throw std::invalid_argument("unknown config key '" + key + "'");
}

SystemConfig parse_config(std::istream &in, SystemConfig cfg)
{
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigParseError(lineno, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigParseError(lineno, "missing key");
        try
        {
            set_config_value(cfg, key, value);
        }
        catch (const std::invalid_argument &e)
        {
            throw ConfigParseError(lineno, e.what());
        }
    }
    return cfg;
}

SystemConfig load_config(const std::string &path, SystemConfig base)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open config file '" + path + "'");
    return parse_config(in, std::move(base));
}

std::string format_config(const SystemConfig &cfg)
{
    std::ostringstream os;
    for (const auto &key : config_keys())
        os << key << " = " << get_config_value(cfg, key) << '\n';
    return os.str();
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

double noise_power(const SystemConfig &cfg)
{
    return cfg.bandwidth_hz * cfg.boltzmann * cfg.noise_temp_k * std::pow(10.0, cfg.noise_figure_db / 10.0);
}

NormalizedPowers normalize_powers(const SystemConfig &cfg)
{
    const double np = noise_power(cfg);
    NormalizedPowers p;
    p.pilot = dbm_to_watts(cfg.pilot_power_dbm) / np;
    p.uplink = dbm_to_watts(cfg.uplink_power_dbm) / np;
    p.relay = dbm_to_watts(cfg.resolved_relay_power_dbm()) / np;
    return p;
}

double pre_log_factor(std::size_t coherence_symbols, std::size_t pilot_symbols)
{
    if (pilot_symbols >= coherence_symbols)
        throw std::domain_error("pilot_symbols must be < coherence_symbols");
    const double tc = static_cast<double>(coherence_symbols);
    return (tc - static_cast<double>(pilot_symbols)) / (2.0 * tc);
}

double pre_log_factor(const SystemConfig &cfg) { return pre_log_factor(cfg.coherence_symbols, cfg.pilot_symbols); }

} // namespace cfrelay
