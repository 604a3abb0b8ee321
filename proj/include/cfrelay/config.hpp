// SPDX-License-Identifier: Apache-2.0
//
// System parameters for the cell-free two-way relaying model and the
// structured text format they are read from.

#ifndef CFRELAY_CONFIG_HPP
#define CFRELAY_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfrelay
{

/// Thrown for malformed config text. Carries the 1-based line number.
class ConfigParseError : public std::runtime_error
{
public:
    ConfigParseError(std::size_t line, const std::string &what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Powers normalized by the receiver noise power (SNR units).
struct NormalizedPowers
{
    double pilot = 0.0;  // p_p
    double uplink = 0.0; // p_u
    double relay = 0.0;  // p_r, total over all APs
};

/// Every scalar parameter of the model. Defaults reproduce the reference
/// deployment: 200 three-antenna APs, five user pairs in a 1 km square,
/// 200-symbol coherence blocks, 20 MHz bandwidth, 9 dB noise figure.
struct SystemConfig
{
    std::size_t num_aps = 200;        // M
    std::size_t antennas_per_ap = 3;  // N
    std::size_t num_pairs = 5;        // W
    double area_side_m = 1000.0;
    std::size_t coherence_symbols = 200; // tau_c
    std::size_t pilot_symbols = 10;      // tau_p
    double carrier_freq_hz = 2.0e9;
    double bandwidth_hz = 20.0e6;
    double noise_figure_db = 9.0;
    double noise_temp_k = 290.0;
    double boltzmann = 1.381e-23;
    double pilot_power_dbm = 20.0;
    double uplink_power_dbm = 20.0;
    std::optional<double> relay_power_dbm; // unset: 2W times the per-user uplink power
    double shadow_std_db = 4.0;
    double shadow_decorrelation_m = 9.0;
    double min_distance_m = 1.0;
    std::uint64_t rng_seed = 1;

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const;

    /// Relay power in dBm after resolving the 2W * p_u default.
    double resolved_relay_power_dbm() const;
};

/// Keys accepted by set_config_value, in canonical output order.
const std::vector<std::string> &config_keys();

/// Assigns one key from its textual value. Unknown keys and unparsable values
/// throw std::invalid_argument. `relay_power_dbm` accepts "auto".
void set_config_value(SystemConfig &cfg, const std::string &key, const std::string &value);

/// Canonical textual value for a key (round-trips through set_config_value).
std::string get_config_value(const SystemConfig &cfg, const std::string &key);

/// Parses `key = value` lines; '#' starts a comment. Unset keys keep defaults.
/// Throws ConfigParseError with the offending line number.
SystemConfig parse_config(std::istream &in, SystemConfig base = {});
SystemConfig load_config(const std::string &path, SystemConfig base = {});

/// Writes every key in canonical form, one per line.
std::string format_config(const SystemConfig &cfg);

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// N_P = W_c * kappa_B * T_0 * 10^(NF/10), in watts.
double noise_power(const SystemConfig &cfg);

/// Physical transmit powers divided by the noise power.
NormalizedPowers normalize_powers(const SystemConfig &cfg);

/// (tau_c - tau_p) / (2 tau_c). Throws std::domain_error if tau_p >= tau_c.
double pre_log_factor(std::size_t coherence_symbols, std::size_t pilot_symbols);
double pre_log_factor(const SystemConfig &cfg);

} // namespace cfrelay

#endif
