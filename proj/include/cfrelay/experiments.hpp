// SPDX-License-Identifier: Apache-2.0
//
// Figure experiments as deterministic CSV tables.

#ifndef CFRELAY_EXPERIMENTS_HPP
#define CFRELAY_EXPERIMENTS_HPP

#include "cfrelay/config.hpp"

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace cfrelay
{

struct ExperimentSpec
{
    std::string name;                 // fig1..fig7 or custom
    std::string sweep_param;          // custom only; figures have a fixed axis
    std::vector<double> sweep_values; // empty: experiment default (custom: no sweep)
    std::vector<std::uint64_t> seeds{1};
    std::map<std::string, std::string> overrides;
    bool monte_carlo = false;         // custom only; fig2 always runs it
    std::size_t mc_realizations = 1000;

    /// Throws std::invalid_argument for unknown names or bad sweeps.
    void validate() const;
};

const std::vector<std::string> &experiment_names();

/// One-line description per experiment, for usage text.
std::string experiment_summary(const std::string &name);

struct Table
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write_csv(std::ostream &os) const;
};

/// Formats with 9 significant digits, independent of locale.
std::string format_value(double v);

/// Runs the experiment on top of `base`. Per-seed rows come first in sweep
/// order; with several seeds one "mean" row per sweep point and series follows.
Table run_experiment(const ExperimentSpec &spec, const SystemConfig &base);

/// Resolved configuration and derived quantities, human readable.
std::string describe(const SystemConfig &cfg);

} // namespace cfrelay

#endif
