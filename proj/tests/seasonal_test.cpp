#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nexus/errors.hpp"
#include "nexus/seasonal.hpp"
#include "test_support.hpp"

using nexus::DetectionParams;
using nexus::Periodogram;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> tone(int n, int period, double amplitude = 1.0, double offset = 0.0) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        out[static_cast<std::size_t>(t)] =
            offset + amplitude * std::sin(kTwoPi * t / static_cast<double>(period));
    }
    return out;
}

// Direct DFT power oracle on an explicitly detrended series, written
// separately from the library implementation.
std::vector<double> dft_power_oracle(std::vector<double> x) {
    const std::size_t n = x.size();
    double tm = static_cast<double>(n - 1) / 2.0;
    double xm = 0.0;
    for (double v : x) xm += v;
    xm /= static_cast<double>(n);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        num += (static_cast<double>(t) - tm) * (x[t] - xm);
        den += (static_cast<double>(t) - tm) * (static_cast<double>(t) - tm);
    }
    double slope = num / den;
    for (std::size_t t = 0; t < n; ++t) x[t] -= xm + slope * (static_cast<double>(t) - tm);

    std::vector<double> power(n / 2);
    for (std::size_t k = 1; k <= n / 2; ++k) {
        double re = 0.0;
        double im = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            double a = -kTwoPi * static_cast<double>(k) * static_cast<double>(t) /
                       static_cast<double>(n);
            re += x[t] * std::cos(a);
            im += x[t] * std::sin(a);
        }
        double scale = (n % 2 == 0 && k == n / 2) ? 1.0 : 2.0;
        power[k - 1] = scale * (re * re + im * im) / (static_cast<double>(n) * static_cast<double>(n));
    }
    return power;
}

} // namespace

TEST_CASE("pure annual tone peaks at one-twelfth and dwarfs every other bin") {
    std::vector<double> s = tone(120, 12);
    Periodogram pg = nexus::periodogram(s);
    REQUIRE(pg.power.size() == 60);

    std::size_t peak = 0;
    for (std::size_t i = 1; i < pg.power.size(); ++i) {
        if (pg.power[i] > pg.power[peak]) peak = i;
    }
    CHECK(pg.frequencies[peak] == doctest::Approx(1.0 / 12.0));
    for (std::size_t i = 0; i < pg.power.size(); ++i) {
        if (i == peak) continue;
        CHECK(pg.power[peak] >= 100.0 * pg.power[i]);
    }

    std::vector<double> oracle = dft_power_oracle(s);
    for (std::size_t i = 0; i < oracle.size(); ++i) {
        CHECK(pg.power[i] == doctest::Approx(oracle[i]).epsilon(1e-9));
    }
}

TEST_CASE("semiannual tone peaks at period six") {
    Periodogram pg = nexus::periodogram(tone(120, 6));
    std::size_t peak = 0;
    for (std::size_t i = 1; i < pg.power.size(); ++i) {
        if (pg.power[i] > pg.power[peak]) peak = i;
    }
    CHECK(pg.frequencies[peak] == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("constant series has essentially zero power") {
    std::vector<double> s(120, 4.2);
    Periodogram pg = nexus::periodogram(s);
    for (double p : pg.power) CHECK(p <= 1e-18);
}

TEST_CASE("power sums to the variance of the detrended series") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        nexus::Rng rng(seed + 1);
        std::size_t n = 16 + rng.next_below(200);
        std::vector<double> s(n);
        for (double& v : s) v = rng.next_gaussian() + 0.01 * rng.next_double();

        Periodogram pg = nexus::periodogram(s);
        double total = 0.0;
        for (double p : pg.power) total += p;

        // population variance of the detrended series, detrended independently
        std::vector<double> d = s;
        double tm = static_cast<double>(n - 1) / 2.0;
        double xm = 0.0;
        for (double v : d) xm += v;
        xm /= static_cast<double>(n);
        double num = 0.0;
        double den = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            num += (static_cast<double>(t) - tm) * (d[t] - xm);
            den += (static_cast<double>(t) - tm) * (static_cast<double>(t) - tm);
        }
        for (std::size_t t = 0; t < n; ++t) {
            d[t] -= xm + (num / den) * (static_cast<double>(t) - tm);
        }
        double variance = 0.0;
        for (double v : d) variance += v * v;
        variance /= static_cast<double>(n);

        CHECK(total == doctest::Approx(variance).epsilon(1e-6));
    }
}

TEST_CASE("periodogram needs at least eight points") {
    CHECK_THROWS_AS(nexus::periodogram(std::vector<double>(7, 1.0)),
                    nexus::InsufficientDataError);
}

TEST_CASE("detection finds tones and rejects noise") {
    DetectionParams params;

    CHECK(nexus::detect_seasonality(nexus::periodogram(tone(120, 12))) == 12);
    CHECK(nexus::detect_seasonality(nexus::periodogram(tone(120, 6))) == 6);

    nexus::Rng rng(2024);
    std::vector<double> noise(120);
    for (double& v : noise) v = rng.next_gaussian();
    CHECK(!nexus::detect_seasonality(nexus::periodogram(noise), params).has_value());

    DetectionParams empty;
    empty.candidate_periods = {};
    CHECK_THROWS_AS(nexus::detect_seasonality(nexus::periodogram(tone(120, 12)), empty),
                    nexus::ConfigError);

    DetectionParams unrepresentable;
    unrepresentable.candidate_periods = {500};
    CHECK_THROWS_AS(
        nexus::detect_seasonality(nexus::periodogram(tone(120, 12)), unrepresentable),
        nexus::ConfigError);
}

TEST_CASE("decomposition of a periodic pattern over a constant level") {
    const int n = 120;
    std::vector<double> s = tone(n, 12, 2.0, 10.0);
    nexus::SeasonalDecomposition d = nexus::decompose(s, 12);

    for (int t = 6; t < n - 6; ++t) {
        CHECK(d.trend[static_cast<std::size_t>(t)] == doctest::Approx(10.0).epsilon(1e-6));
        CHECK(d.remainder[static_cast<std::size_t>(t)] == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
        CHECK(d.seasonal[static_cast<std::size_t>(t)] ==
              doctest::Approx(s[static_cast<std::size_t>(t)] - 10.0).scale(1.0).epsilon(1e-6));
    }
}

TEST_CASE("constant series decomposes to zero seasonal and remainder") {
    std::vector<double> s(48, 3.0);
    nexus::SeasonalDecomposition d = nexus::decompose(s, 12);
    for (std::size_t t = 0; t < s.size(); ++t) {
        CHECK(d.seasonal[t] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
        CHECK(d.remainder[t] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    }
}

TEST_CASE("linear trend plus pattern is recovered in the interior") {
    const int n = 96;
    std::vector<double> s(n);
    for (int t = 0; t < n; ++t) {
        s[static_cast<std::size_t>(t)] =
            4.0 + 0.25 * t + 1.5 * std::sin(kTwoPi * t / 12.0);
    }
    nexus::SeasonalDecomposition d = nexus::decompose(s, 12);
    for (int t = 6; t < n - 6; ++t) {
        CHECK(d.trend[static_cast<std::size_t>(t)] ==
              doctest::Approx(4.0 + 0.25 * t).epsilon(1e-6));
    }
}

TEST_CASE("decomposition invariants: additivity, zero-mean cycle, periodicity") {
    nexus::Rng rng(88);
    std::vector<double> s(100);
    for (int t = 0; t < 100; ++t) {
        s[static_cast<std::size_t>(t)] = 5.0 + 0.1 * t +
                                         2.0 * std::sin(kTwoPi * t / 12.0) +
                                         0.3 * rng.next_gaussian();
    }
    nexus::SeasonalDecomposition d = nexus::decompose(s, 12);

    for (std::size_t t = 0; t < s.size(); ++t) {
        CHECK(d.trend[t] + d.seasonal[t] + d.remainder[t] ==
              doctest::Approx(s[t]).epsilon(1e-9));
    }
    double cycle_sum = 0.0;
    for (std::size_t t = 0; t < 12; ++t) cycle_sum += d.seasonal[t];
    CHECK(cycle_sum == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    for (std::size_t t = 12; t < s.size(); ++t) {
        CHECK(d.seasonal[t] == d.seasonal[t - 12]);
    }
}

TEST_CASE("decompose requires two full periods") {
    CHECK_THROWS_AS(nexus::decompose(std::vector<double>(23, 1.0), 12),
                    nexus::InsufficientDataError);
}

TEST_CASE("deseasonalize") {
    SUBCASE("no period is the identity") {
        std::vector<double> s = tone(50, 12, 2.0);
        CHECK(nexus::deseasonalize(s, std::nullopt) == s);
    }

    SUBCASE("pure seasonal plus constant flattens") {
        std::vector<double> s = tone(120, 12, 3.0, 7.0);
        std::vector<double> flat = nexus::deseasonalize(s, 12);
        for (std::size_t t = 6; t + 6 < flat.size(); ++t) {
            CHECK(flat[t] == doctest::Approx(7.0).epsilon(1e-6));
        }
    }

    SUBCASE("a deseasonalized tone no longer tests seasonal") {
        std::vector<double> s = tone(120, 12, 2.0, 5.0);
        std::vector<double> flat = nexus::deseasonalize(s, 12);
        CHECK(!nexus::detect_seasonality(nexus::periodogram(flat)).has_value());
    }

    SUBCASE("idempotent on exact-period series") {
        std::vector<double> s = tone(120, 12, 2.0, 5.0);
        std::vector<double> once = nexus::deseasonalize(s, 12);
        std::vector<double> twice = nexus::deseasonalize(once, 12);
        for (std::size_t t = 0; t < s.size(); ++t) {
            CHECK(std::fabs(twice[t] - once[t]) <= 1e-6);
        }
    }
}
