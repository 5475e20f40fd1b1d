#pragma once

// Statistics over a simulation trace: reserves held, curtailment, interface
// congestion, regulation use, imbalance and net-load conditions, plus the
// duration curves and histograms behind the plots.

#include "epecs/engine.hpp"
#include "epecs/profile.hpp"
#include "epecs/scenario_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace epecs {

/// Nearest-rank percentile (p in (0, 100]) of an unsorted series.
inline double percentile_nearest_rank(std::vector<double> v, double p)
{
    if (v.empty()) throw Error("percentile of an empty series");
    std::sort(v.begin(), v.end());
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(v.size())));
    rank = std::clamp<std::size_t>(rank, 1, v.size());
    return v[rank - 1];
}

struct SeriesStats
{
    double mean = 0.0, std = 0.0, min = 0.0, max = 0.0;
    double p95 = 0.0; ///< level held for 95% of the time (5th percentile)
};

inline SeriesStats series_stats(const std::vector<double>& v)
{
    if (v.empty()) throw Error("statistics of an empty series");
    SeriesStats s;
    s.mean = mean(v);
    s.std = stddev(v);
    s.min = *std::min_element(v.begin(), v.end());
    s.max = *std::max_element(v.begin(), v.end());
    s.p95 = percentile_nearest_rank(v, 5.0);
    return s;
}

struct ReserveMetrics
{
    SeriesStats lfr_up, lfr_down, rampr_up, rampr_down;
};

inline ReserveMetrics reserve_metrics(const SimulationTrace& tr)
{
    return {series_stats(tr.lfr_up), series_stats(tr.lfr_down), series_stats(tr.rampr_up),
            series_stats(tr.rampr_down)};
}

struct CurtailmentMetrics
{
    double total_gwh = 0.0;     ///< semi-dispatchable energy available
    double curtailed_gwh = 0.0;
    double pct_energy = 0.0;
    double pct_time = 0.0;
    double max_mw = 0.0;
};

inline constexpr double kMwMinToGwh = 1.0 / 60.0 / 1000.0;

inline CurtailmentMetrics curtailment_metrics(const SimulationTrace& tr)
{
    if (tr.minutes <= 0) throw Error("curtailment metrics of an empty trace");
    CurtailmentMetrics m;
    long curtailed_minutes = 0;
    for (long t = 0; t < tr.minutes; ++t) {
        const double c = tr.total_curtailment(t);
        m.total_gwh += tr.total_available(t) * kMwMinToGwh;
        m.curtailed_gwh += c * kMwMinToGwh;
        m.max_mw = std::max(m.max_mw, c);
        if (c > 1e-3) ++curtailed_minutes;
    }
    m.pct_energy = m.total_gwh > 0.0 ? 100.0 * m.curtailed_gwh / m.total_gwh : 0.0;
    m.pct_time = 100.0 * static_cast<double>(curtailed_minutes) / static_cast<double>(tr.minutes);
    return m;
}

inline bool at_limit(double flow, double limit) { return std::abs(flow) >= limit - 1e-3; }

/// Percent of minutes each interface sits at its limit.
inline std::vector<double> congestion_metrics(const SimulationTrace& tr)
{
    std::vector<double> out;
    for (std::size_t i = 0; i < tr.interfaces.size(); ++i) {
        long n = 0;
        for (long t = 0; t < tr.minutes; ++t)
            if (at_limit(tr.interface_flows[i][t], tr.interface_limits[i])) ++n;
        out.push_back(tr.minutes > 0 ? 100.0 * static_cast<double>(n) / static_cast<double>(tr.minutes) : 0.0);
    }
    return out;
}

struct RegulationMetrics
{
    double pct_exhausted = 0.0;
    double mileage_gwh = 0.0;
};

inline bool regulation_exhausted(double total, double saturation) { return std::abs(total) >= saturation - 1e-3; }

inline double mileage_mw_min(const Table& levels)
{
    double m = 0.0;
    for (const auto& g : levels)
        for (std::size_t t = 1; t < g.size(); ++t) m += std::abs(g[t] - g[t - 1]);
    return m;
}

inline RegulationMetrics regulation_metrics(const SimulationTrace& tr)
{
    if (tr.minutes <= 0) throw Error("regulation metrics of an empty trace");
    RegulationMetrics m;
    long n = 0;
    for (long t = 0; t < tr.minutes; ++t)
        if (regulation_exhausted(tr.regulation[t], tr.reg_saturation[t])) ++n;
    m.pct_exhausted = 100.0 * static_cast<double>(n) / static_cast<double>(tr.minutes);
    m.mileage_gwh = mileage_mw_min(tr.reg_level) * kMwMinToGwh;
    return m;
}

struct ImbalanceMetrics
{
    double range = 0.0;
    double std = 0.0;
};

inline ImbalanceMetrics imbalance_metrics(const std::vector<double>& imbalance)
{
    if (imbalance.empty()) throw Error("imbalance metrics of an empty series");
    auto [lo, hi] = std::minmax_element(imbalance.begin(), imbalance.end());
    return {*hi - *lo, stddev(imbalance)};
}

struct NetloadMetrics
{
    double pct_excess = 0.0;   ///< net load below the must-run minimum
    double pct_negative = 0.0;
};

inline NetloadMetrics netload_metrics(const Profile& net, double mustrun_min)
{
    if (net.empty()) return {};
    long ex = 0, neg = 0;
    for (double v : net) {
        if (v < mustrun_min) ++ex;
        if (v < 0.0) ++neg;
    }
    const double n = static_cast<double>(net.size());
    return {100.0 * static_cast<double>(ex) / n, 100.0 * static_cast<double>(neg) / n};
}

/// Actual load minus available semi-dispatchable output, per minute.
inline Profile trace_net_load(const SimulationTrace& tr)
{
    Profile p(static_cast<std::size_t>(tr.minutes));
    for (long t = 0; t < tr.minutes; ++t) p[t] = tr.load[t] - tr.total_available(t);
    return p;
}

inline std::vector<double> duration_curve(std::vector<double> v)
{
    std::sort(v.begin(), v.end(), std::greater<>());
    return v;
}

struct HistogramBin
{
    double lower = 0.0, upper = 0.0;
    long count = 0;
};

/// Contiguous bins [k*w, (k+1)*w) from the lowest to the highest value.
inline std::vector<HistogramBin> histogram(const std::vector<double>& v, double width)
{
    if (!(width > 0.0)) throw Error("histogram bin width must be positive");
    std::vector<HistogramBin> out;
    if (v.empty()) return out;
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const auto k0 = static_cast<long>(std::floor(*lo / width));
    const auto k1 = static_cast<long>(std::floor(*hi / width));
    for (long k = k0; k <= k1; ++k) out.push_back({k * width, (k + 1) * width, 0});
    for (double x : v) ++out[static_cast<std::size_t>(static_cast<long>(std::floor(x / width)) - k0)].count;
    return out;
}

struct MetricsReport
{
    std::string scenario;
    ReserveMetrics reserves;
    CurtailmentMetrics curtailment;
    std::vector<std::string> interfaces;
    std::vector<double> congestion;
    RegulationMetrics regulation;
    ImbalanceMetrics imbalance;
    NetloadMetrics netload;
    std::vector<RampStats> ramps; ///< net load, per resolution
};

inline MetricsReport compute_metrics(const SimulationTrace& tr)
{
    if (tr.minutes <= 0) throw Error("metrics of an empty trace");
    MetricsReport r;
    r.scenario = tr.scenario_name;
    r.reserves = reserve_metrics(tr);
    r.curtailment = curtailment_metrics(tr);
    r.interfaces = tr.interfaces;
    r.congestion = congestion_metrics(tr);
    r.regulation = regulation_metrics(tr);
    r.imbalance = imbalance_metrics(tr.imbalance);
    const Profile net = trace_net_load(tr);
    r.netload = netload_metrics(net, tr.mustrun_min);
    for (auto res : {RampResolution::min1, RampResolution::min10, RampResolution::hour1, RampResolution::hour4})
        if (net.size() >= (res == RampResolution::hour4 ? 241u : res == RampResolution::hour1 ? 120u : 20u))
            r.ramps.push_back(ramp_stats(net, res));
    return r;
}

inline void write_report_csv(std::ostream& os, const MetricsReport& r)
{
    os << "family,scenario,metric,value,unit\n";
    auto row = [&](const std::string& fam, const std::string& metric, double v, const std::string& unit) {
        os << fam << ',' << r.scenario << ',' << metric << ',' << format_fixed(v) << ',' << unit << '\n';
    };
    auto stats = [&](const std::string& name, const SeriesStats& s, bool with_max, const std::string& unit) {
        row("reserves", name + "_mean", s.mean, unit);
        row("reserves", name + "_std", s.std, unit);
        if (with_max) row("reserves", name + "_max", s.max, unit);
        row("reserves", name + "_min", s.min, unit);
        row("reserves", name + "_p95", s.p95, unit);
    };
    stats("lfr_up", r.reserves.lfr_up, false, "MW");
    stats("lfr_down", r.reserves.lfr_down, false, "MW");
    stats("rampr_up", r.reserves.rampr_up, true, "MW/min");
    stats("rampr_down", r.reserves.rampr_down, true, "MW/min");
    row("curtailment", "total_energy", r.curtailment.total_gwh, "GWh");
    row("curtailment", "curtailed_energy", r.curtailment.curtailed_gwh, "GWh");
    row("curtailment", "energy_curtailed", r.curtailment.pct_energy, "%");
    row("curtailment", "time_curtailed", r.curtailment.pct_time, "%");
    row("curtailment", "max_curtailment", r.curtailment.max_mw, "MW");
    for (std::size_t i = 0; i < r.interfaces.size(); ++i)
        row("congestion", r.interfaces[i] + "_time_at_limit", r.congestion[i], "%");
    row("regulation", "time_exhausted", r.regulation.pct_exhausted, "%");
    row("regulation", "mileage", r.regulation.mileage_gwh, "GWh");
    row("imbalance", "range", r.imbalance.range, "MW");
    row("imbalance", "std", r.imbalance.std, "MW");
    row("netload", "time_excess_generation", r.netload.pct_excess, "%");
    row("netload", "time_negative", r.netload.pct_negative, "%");
    for (const auto& rs : r.ramps) {
        row("ramps", std::string("max_up_") + to_string(rs.resolution), rs.max_up, "MW/min");
        row("ramps", std::string("max_down_") + to_string(rs.resolution), rs.max_down, "MW/min");
    }
}

namespace detail {

inline void write_xy(const std::filesystem::path& file, const std::string& x, const std::string& y,
                     const std::vector<double>& xs, const std::vector<double>& ys)
{
    std::ofstream os(file, std::ios::binary);
    if (!os) throw Error("cannot write " + file.string());
    os << x << ',' << y << '\n';
    for (std::size_t i = 0; i < xs.size(); ++i) os << format_fixed(xs[i]) << ',' << format_fixed(ys[i]) << '\n';
}

} // namespace detail

/// Writes report.csv, duration_<series>.csv, hist_<series>.csv and plotdata/.
inline MetricsReport write_report(const std::filesystem::path& dir, const SimulationTrace& tr)
{
    namespace fs = std::filesystem;
    const MetricsReport r = compute_metrics(tr);
    fs::create_directories(dir / "plotdata");
    {
        std::ofstream os(dir / "report.csv", std::ios::binary);
        if (!os) throw Error("cannot write " + (dir / "report.csv").string());
        write_report_csv(os, r);
    }
    std::vector<double> curtail(static_cast<std::size_t>(tr.minutes));
    for (long t = 0; t < tr.minutes; ++t) curtail[t] = tr.total_curtailment(t);
    const Profile net = trace_net_load(tr);
    const std::vector<std::pair<std::string, const std::vector<double>*>> series{
        {"curtailment", &curtail}, {"imbalance", &tr.imbalance}, {"lfr_up", &tr.lfr_up},
        {"lfr_down", &tr.lfr_down}, {"net_load", &net},          {"load", &tr.load}};
    for (const auto& [name, v] : series) {
        const auto dc = duration_curve(*v);
        std::vector<double> rank(dc.size());
        for (std::size_t i = 0; i < dc.size(); ++i) rank[i] = static_cast<double>(i + 1);
        {
            std::ofstream os(dir / ("duration_" + name + ".csv"), std::ios::binary);
            os << "rank,value\n";
            for (std::size_t i = 0; i < dc.size(); ++i) os << i + 1 << ',' << format_fixed(dc[i]) << '\n';
        }
        // percent of time on the x axis for plotting
        for (auto& x : rank) x = 100.0 * x / static_cast<double>(dc.size());
        detail::write_xy(dir / "plotdata" / ("duration_" + name + ".csv"), "percent_time", name, rank, dc);

        const double width = name == "imbalance" ? 0.1 : 10.0;
        const auto bins = histogram(*v, width);
        std::ofstream os(dir / ("hist_" + name + ".csv"), std::ios::binary);
        os << "lower,upper,count\n";
        std::vector<double> centre, count;
        for (const auto& b : bins) {
            os << format_fixed(b.lower) << ',' << format_fixed(b.upper) << ',' << b.count << '\n';
            centre.push_back(0.5 * (b.lower + b.upper));
            count.push_back(static_cast<double>(b.count));
        }
        detail::write_xy(dir / "plotdata" / ("hist_" + name + ".csv"), "bin_centre", "count", centre, count);
    }
    std::vector<double> minute(static_cast<std::size_t>(tr.minutes));
    for (long t = 0; t < tr.minutes; ++t) minute[t] = static_cast<double>(t);
    detail::write_xy(dir / "plotdata" / "imbalance_time.csv", "minute", "imbalance", minute, tr.imbalance);
    detail::write_xy(dir / "plotdata" / "net_load_time.csv", "minute", "net_load", minute, net);
    for (std::size_t i = 0; i < tr.interfaces.size(); ++i)
        detail::write_xy(dir / "plotdata" / ("flow_" + tr.interfaces[i] + ".csv"), "minute", "flow", minute,
                         tr.interface_flows[i]);
    return r;
}

} // namespace epecs
