// SPDX-License-Identifier: Apache-2.0

#include "cfrelay/config.hpp"

#include "doctest.h"

#include <cmath>
#include <sstream>

using namespace cfrelay;

TEST_CASE("defaults validate and match the reference deployment")
{
    SystemConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.num_aps == 200);
    CHECK(cfg.antennas_per_ap == 3);
    CHECK(cfg.num_pairs == 5);
    CHECK(cfg.coherence_symbols == 200);
    CHECK(cfg.pilot_symbols == 10);
}

TEST_CASE("validation rejects broken invariants")
{
    SystemConfig cfg;
    cfg.pilot_symbols = 9; // < 2W
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.pilot_symbols = 200;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.num_aps = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.area_side_m = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("noise power from bandwidth, temperature and noise figure")
{
    SystemConfig cfg;
    const double expected = 20e6 * 1.381e-23 * 290.0 * std::pow(10.0, 0.9);
    CHECK(noise_power(cfg) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(noise_power(cfg) == doctest::Approx(6.36e-13).epsilon(2e-3));
    CHECK(watts_to_dbm(noise_power(cfg)) == doctest::Approx(-91.97).epsilon(1e-3));

    cfg.noise_figure_db = 0.0;
    CHECK(noise_power(cfg) == doctest::Approx(20e6 * 1.381e-23 * 290.0).epsilon(1e-15));
    const double base = noise_power(cfg);
    cfg.bandwidth_hz *= 2.0;
    CHECK(noise_power(cfg) == doctest::Approx(2.0 * base).epsilon(1e-15));
}

TEST_CASE("normalized powers")
{
    SystemConfig cfg;
    const auto p = normalize_powers(cfg);
    CHECK(p.uplink == doctest::Approx(0.1 / noise_power(cfg)).epsilon(1e-12));
    CHECK(p.uplink == doctest::Approx(1.573e11).epsilon(2e-3));
    CHECK(10.0 * std::log10(p.uplink) == doctest::Approx(111.97).epsilon(1e-4));
    CHECK(p.pilot == doctest::Approx(p.uplink));
    // Relay default: 2W times the per-user uplink power.
    CHECK(p.relay == doctest::Approx(10.0 * p.uplink).epsilon(1e-12));

    cfg.uplink_power_dbm = watts_to_dbm(noise_power(cfg));
    CHECK(normalize_powers(cfg).uplink == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dbm_to_watts(-1e9) == 0.0);
}

TEST_CASE("pre-log factor")
{
    CHECK(pre_log_factor(200, 10) == doctest::Approx(0.475));
    CHECK_THROWS_AS(pre_log_factor(10, 10), std::domain_error);
}

TEST_CASE("config text round trip")
{
    std::istringstream in("# comment\nnum_aps = 50\n  antennas_per_ap=2 # trailing\n\nrelay_power_dbm = 30\n");
    const auto cfg = parse_config(in);
    CHECK(cfg.num_aps == 50);
    CHECK(cfg.antennas_per_ap == 2);
    REQUIRE(cfg.relay_power_dbm.has_value());
    CHECK(*cfg.relay_power_dbm == 30.0);

    std::istringstream again(format_config(cfg));
    const auto back = parse_config(again);
    CHECK(format_config(back) == format_config(cfg));
}

TEST_CASE("parse errors carry the line number")
{
    std::istringstream bad_key("num_aps = 5\nnot_a_key = 3\n");
    try
    {
        parse_config(bad_key);
        FAIL("expected a parse error");
    }
    catch (const ConfigParseError &e)
    {
        CHECK(e.line() == 2);
    }
    std::istringstream bad_value("\n\nnum_pairs = two\n");
    try
    {
        parse_config(bad_value);
        FAIL("expected a parse error");
    }
    catch (const ConfigParseError &e)
    {
        CHECK(e.line() == 3);
    }
    std::istringstream no_eq("num_pairs 2\n");
    CHECK_THROWS_AS(parse_config(no_eq), ConfigParseError);
}
