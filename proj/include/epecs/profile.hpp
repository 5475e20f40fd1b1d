#pragma once

// Minute-resolution profiles: VER scaling, best forecasts, forecast-error
// synthesis, net load and ramp statistics.

#include "epecs/error.hpp"
#include "epecs/scenario.hpp"
#include "epecs/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace epecs {

using Profile = std::vector<double>; ///< MW per minute, sample i = minute i

/// Block-averaged forecast. Block k covers minutes
/// [start + k*block_minutes, start + (k+1)*block_minutes).
struct ForecastSeries
{
    int block_minutes = 60;
    long start = 0;
    std::vector<double> values;
    std::size_t clamped = 0; ///< blocks hit by the [0, capacity] clamp

    std::size_t size() const { return values.size(); }
    long end() const { return start + static_cast<long>(values.size()) * block_minutes; }

    /// Value of the block covering `minute`; minutes outside the series
    /// take the nearest block.
    double at_minute(long minute) const
    {
        if (values.empty()) return 0.0;
        long k = (minute - start) / block_minutes;
        if (minute < start) k = 0;
        k = std::clamp<long>(k, 0, static_cast<long>(values.size()) - 1);
        return values[static_cast<std::size_t>(k)];
    }
};

class UndefinedVariability : public Error
{
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Deterministic random numbers

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0)
{
    return splitmix64(splitmix64(master ^ splitmix64(a)) ^ (b * 0x632be59bd9b4e019ull));
}

inline std::uint64_t seed_of(std::string_view name) { return fnv1a(name); }

/// Normal variates from mt19937_64 through Box-Muller. std::normal_distribution
/// is implementation-defined, so it is avoided to keep traces portable.
class NormalSource
{
public:
    explicit NormalSource(std::uint64_t seed) : gen_(seed) {}

    double operator()()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double th = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(th);
        has_spare_ = true;
        return r * std::cos(th);
    }

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// Basic statistics on profiles

inline double mean(const std::vector<double>& v)
{
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double rms(const std::vector<double>& v)
{
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

inline double stddev(const std::vector<double>& v)
{
    if (v.empty()) return 0.0;
    double m = mean(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

/// RMS of the forward-difference rate over RMS of the values, in 1/min.
inline double variability(const Profile& p)
{
    if (p.size() < 2) throw Error("variability needs at least two samples");
    double r = rms(p);
    if (r == 0.0) throw UndefinedVariability("variability undefined for an all-zero profile");
    double s = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) s += (p[i] - p[i - 1]) * (p[i] - p[i - 1]);
    return std::sqrt(s / static_cast<double>(p.size() - 1)) / r;
}

/// Linear interpolation of `base` at fractional minute `t`, periodic in
/// the base length.
inline double sample_periodic(const Profile& base, double t)
{
    const double n = static_cast<double>(base.size());
    double x = std::fmod(t, n);
    if (x < 0) x += n;
    auto i0 = static_cast<std::size_t>(x);
    if (i0 >= base.size()) i0 = base.size() - 1;
    std::size_t i1 = (i0 + 1) % base.size();
    double f = x - static_cast<double>(i0);
    return base[i0] * (1.0 - f) + base[i1] * f;
}

/// VER output from a unit-capacity-factor base: gamma_cf * pi * peak * base(alpha t).
inline Profile scale_ver(const Profile& base, const VerSpec& spec, double peak_load)
{
    if (base.empty()) throw Error("scale_ver: empty base profile");
    if (std::abs(mean(base) - 1.0) > 1e-6)
        throw Error("scale_ver: base profile must have unit mean");
    double alpha = 1.0;
    if (spec.variability > 0.0) {
        double a0 = 0.0;
        try {
            a0 = variability(base);
        } catch (const Error&) {
            a0 = 0.0;
        }
        if (a0 == 0.0) throw Error("scale_ver: cannot scale the variability of a constant profile");
        alpha = spec.variability / a0;
    }
    const double scale = spec.capacity_factor * spec.penetration * peak_load;
    Profile out(base.size());
    for (std::size_t t = 0; t < base.size(); ++t)
        out[t] = scale * (alpha == 1.0 ? base[t] : sample_periodic(base, alpha * static_cast<double>(t)));
    return out;
}

/// Time-scales an arbitrary profile by alpha (periodic, interpolated).
inline Profile time_scale(const Profile& base, double alpha)
{
    Profile out(base.size());
    for (std::size_t t = 0; t < base.size(); ++t) out[t] = sample_periodic(base, alpha * static_cast<double>(t));
    return out;
}

/// Block means over [kT, (k+1)T), discrete minute samples.
inline ForecastSeries best_forecast(const Profile& p, int block_minutes, long start = 0)
{
    if (block_minutes <= 0) throw Error("best_forecast: block duration must be positive");
    if (p.size() % static_cast<std::size_t>(block_minutes) != 0)
        throw Error("best_forecast: block duration must divide the profile length");
    ForecastSeries f;
    f.block_minutes = block_minutes;
    f.start = start;
    const std::size_t n = p.size() / static_cast<std::size_t>(block_minutes);
    f.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (int j = 0; j < block_minutes; ++j) s += p[k * block_minutes + j];
        f.values[k] = s / block_minutes;
    }
    return f;
}

enum class ErrorKind { day_ahead, short_term };

inline double ar1_coefficient(ErrorKind kind) { return kind == ErrorKind::day_ahead ? 0.6 : 0.3; }

/// Zero-mean, unit-variance AR(1) sequence scaled by eps * pi * peak_load.
inline std::vector<double> synthesize_error(std::uint64_t seed, double eps, double pi, double peak_load,
                                            std::size_t n_blocks, ErrorKind kind)
{
    std::vector<double> e(n_blocks, 0.0);
    const double scale = eps * pi * peak_load;
    if (scale == 0.0 || n_blocks == 0) return e;
    NormalSource z(seed);
    const double phi = ar1_coefficient(kind);
    const double innov = std::sqrt(1.0 - phi * phi);
    double prev = z();
    e[0] = prev * scale;
    for (std::size_t k = 1; k < n_blocks; ++k) {
        prev = phi * prev + innov * z();
        e[k] = prev * scale;
    }
    return e;
}

/// best_forecast(actual) - error, clamped to [0, capacity].
inline ForecastSeries make_forecast(const Profile& actual, const std::vector<double>& errors, int block_minutes,
                                    double capacity = std::numeric_limits<double>::infinity(), long start = 0)
{
    ForecastSeries f = best_forecast(actual, block_minutes, start);
    if (errors.size() != f.values.size()) throw Error("make_forecast: error block count does not match");
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        double v = f.values[k] - errors[k];
        double c = std::clamp(v, 0.0, capacity);
        if (c != v) ++f.clamped;
        f.values[k] = c;
    }
    return f;
}

inline Profile net_load(const Profile& load, const std::vector<Profile>& semi_outputs)
{
    Profile out = load;
    for (const auto& s : semi_outputs) {
        if (s.size() != load.size()) throw Error("net_load: profile lengths differ");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= s[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ramp statistics

enum class RampResolution { min1, min10, hour1, hour4 };

inline const char* to_string(RampResolution r)
{
    switch (r) {
    case RampResolution::min1: return "1min";
    case RampResolution::min10: return "10min";
    case RampResolution::hour1: return "1h";
    case RampResolution::hour4: return "4h";
    }
    return "?";
}

struct RampPoint
{
    long minute; ///< start of the interval the ramp is measured over
    double rate; ///< MW/min, signed
};

struct RampStats
{
    RampResolution resolution = RampResolution::min1;
    double max_up = 0.0;   ///< MW/min, >= 0
    double max_down = 0.0; ///< MW/min, magnitude, >= 0
    std::vector<RampPoint> series;

    /// Point with the largest upward ramp (earliest on ties).
    const RampPoint* argmax_up() const
    {
        const RampPoint* best = nullptr;
        for (const auto& p : series)
            if (!best || p.rate > best->rate) best = &p;
        return best;
    }
};

inline RampStats ramp_stats(const Profile& p, RampResolution res)
{
    RampStats rs;
    rs.resolution = res;
    auto block_ramps = [&](int block) {
        const std::size_t n = p.size() / static_cast<std::size_t>(block);
        if (n < 2) throw Error(std::string("ramp_stats: profile too short for ") + to_string(res));
        std::vector<double> avg(n);
        for (std::size_t k = 0; k < n; ++k) {
            double s = 0.0;
            for (int j = 0; j < block; ++j) s += p[k * block + j];
            avg[k] = s / block;
        }
        for (std::size_t k = 1; k < n; ++k)
            rs.series.push_back({static_cast<long>((k - 1) * block), (avg[k] - avg[k - 1]) / block});
    };
    switch (res) {
    case RampResolution::min1:
        if (p.size() < 2) throw Error("ramp_stats: profile too short for 1min");
        for (std::size_t i = 1; i < p.size(); ++i) rs.series.push_back({static_cast<long>(i - 1), p[i] - p[i - 1]});
        break;
    case RampResolution::min10: block_ramps(10); break;
    case RampResolution::hour1: block_ramps(60); break;
    case RampResolution::hour4: {
        const std::size_t window = 241; // 4 h span, inclusive endpoints
        if (p.size() < window) throw Error("ramp_stats: profile too short for 4h");
        for (std::size_t s = 0; s + window <= p.size(); s += 60) {
            auto first = p.begin() + static_cast<long>(s);
            auto last = first + static_cast<long>(window);
            auto mx = std::max_element(first, last);
            auto mn = std::min_element(first, last);
            double rate = 0.0;
            if (mx != mn && *mx != *mn) {
                double span = static_cast<double>(std::abs(mx - mn));
                rate = (*mx - *mn) / span;
                if (mx < mn) rate = -rate;
            }
            rs.series.push_back({static_cast<long>(s), rate});
        }
        break;
    }
    }
    for (const auto& pt : rs.series) {
        rs.max_up = std::max(rs.max_up, pt.rate);
        rs.max_down = std::max(rs.max_down, -pt.rate);
    }
    return rs;
}

// ---------------------------------------------------------------------------
// Built-in shapes, all normalised to unit mean over the requested length

namespace detail {

inline double hour_of_day(std::size_t minute) { return static_cast<double>(minute % 1440) / 60.0; }

inline void normalise_mean(Profile& p)
{
    double m = mean(p);
    if (m > 0.0)
        for (double& x : p) x /= m;
}

} // namespace detail

inline bool is_builtin_shape(const std::string& name)
{
    return name == "flat" || name == "daily" || name == "solar" || name == "wind" || name == "hydro";
}

inline Profile unit_shape(const std::string& name, std::size_t minutes, std::uint64_t seed = 1)
{
    using std::numbers::pi;
    Profile p(minutes, 1.0);
    if (minutes == 0) throw Error("shape length must be positive");
    if (name == "flat") return p;
    if (name == "daily") {
        for (std::size_t m = 0; m < minutes; ++m) {
            double h = detail::hour_of_day(m);
            double night = 0.60 - 0.05 * std::exp(-std::pow((h - 3.5) / 2.0, 2));
            double morning = 0.20 * std::exp(-std::pow((h - 9.5) / 2.5, 2));
            double evening = 0.32 * std::exp(-std::pow((h - 18.5) / 2.2, 2));
            double late = 0.32 * std::exp(-std::pow((h - 18.5 + 24.0) / 2.2, 2));
            p[m] = night + morning + evening + late;
        }
    } else if (name == "solar") {
        for (std::size_t m = 0; m < minutes; ++m) {
            double h = detail::hour_of_day(m);
            p[m] = (h > 6.0 && h < 18.0) ? std::pow(std::sin(pi * (h - 6.0) / 12.0), 1.3) : 0.0;
        }
    } else if (name == "wind") {
        // sum of sinusoids periodic over one week, phases from the seed
        NormalSource rng(seed);
        const int harmonics[] = {2, 5, 9, 14, 28, 56};
        const double amps[] = {0.30, 0.20, 0.12, 0.08, 0.05, 0.03};
        double phase[6];
        for (double& ph : phase) ph = 2.0 * pi * rng.uniform();
        for (std::size_t m = 0; m < minutes; ++m) {
            double x = 1.0;
            for (int i = 0; i < 6; ++i)
                x += amps[i] * std::sin(2.0 * pi * harmonics[i] * static_cast<double>(m) / 10080.0 + phase[i]);
            p[m] = std::max(0.02, x);
        }
    } else if (name == "hydro") {
        for (std::size_t m = 0; m < minutes; ++m)
            p[m] = 1.0 + 0.1 * std::sin(2.0 * pi * static_cast<double>(m) / 1440.0);
    } else {
        throw ReferenceError(name, "built-in shape list");
    }
    detail::normalise_mean(p);
    return p;
}

/// Repeats or truncates a profile to `minutes` samples.
inline Profile periodic_extend(const Profile& p, std::size_t minutes)
{
    if (p.empty()) throw Error("cannot extend an empty profile");
    Profile out(minutes);
    for (std::size_t i = 0; i < minutes; ++i) out[i] = p[i % p.size()];
    return out;
}

// ---------------------------------------------------------------------------
// Scenario-level profile resolution

inline Profile resolve_load_profile(const Scenario& s, const LoadSpec& l, std::size_t minutes)
{
    const auto& r = l.profile;
    if (!r.file.empty()) return periodic_extend(read_profile_csv(s.base_dir / r.file), minutes);
    if (!r.shape.empty()) {
        Profile p = unit_shape(r.shape, minutes, derive_seed(s.seed, seed_of("load:" + l.bubble)));
        double mx = *std::max_element(p.begin(), p.end());
        for (double& x : p) x = mx > 0.0 ? x / mx * r.scale_mw : 0.0;
        return p;
    }
    return Profile(minutes, r.scale_mw);
}

/// Peak of the aggregated system load unless the scenario pins it.
inline double system_peak_load(const Scenario& s, const std::vector<Profile>& loads)
{
    if (s.peak_load) return *s.peak_load;
    if (loads.empty()) return 0.0;
    double peak = 0.0;
    for (std::size_t t = 0; t < loads.front().size(); ++t) {
        double tot = 0.0;
        for (const auto& l : loads) tot += l[t];
        peak = std::max(peak, tot);
    }
    return peak;
}

/// Installed capacity of a VER: pi * peak load.
inline double ver_capacity(const VerSpec& v, double peak_load) { return v.penetration * peak_load; }

inline Profile resolve_semi_profile(const Scenario& s, const SemiDispatchable& sd, std::size_t minutes,
                                    double peak_load)
{
    if (sd.ver) {
        Profile base = unit_shape(sd.ver->shape, minutes, sd.ver->seed);
        return scale_ver(base, *sd.ver, peak_load);
    }
    const auto& r = sd.fixed;
    if (!r.file.empty()) return periodic_extend(read_profile_csv(s.base_dir / r.file), minutes);
    return Profile(minutes, r.scale_mw);
}

} // namespace epecs
