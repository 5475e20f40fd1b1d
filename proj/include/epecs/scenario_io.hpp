#pragma once

// Text formats: the sectioned key=value scenario file and the
// `minute,value_mw` profile CSV.

#include "epecs/error.hpp"
#include "epecs/scenario.hpp"

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace epecs {

// ---------------------------------------------------------------------------
// Small text helpers shared by every CSV/text writer in the library.

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v)
{
    if (v == 0.0) return "0"; // folds -0
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

/// Fixed six-decimal text used in trace and report CSVs.
inline std::string format_fixed(double v)
{
    if (std::abs(v) < 5e-7) v = 0.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_number(std::string_view text, std::size_t line, std::string_view what = "number")
{
    std::string s(trim(text));
    if (s.empty()) throw ParseError(line, "empty " + std::string(what));
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v))
        throw ParseError(line, "invalid " + std::string(what) + " \"" + s + "\"");
    return v;
}

inline long parse_integer(std::string_view text, std::size_t line)
{
    double v = parse_number(text, line, "integer");
    if (v != std::floor(v)) throw ParseError(line, "expected an integer, got \"" + std::string(trim(text)) + "\"");
    return static_cast<long>(v);
}

/// Exact unsigned 64-bit parse; seeds do not survive a trip through double.
inline std::uint64_t parse_unsigned(std::string_view text, std::size_t line)
{
    auto s = trim(text);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(line, "expected an unsigned integer, got \"" + std::string(s) + "\"");
    return v;
}

inline bool parse_flag(std::string_view text, std::size_t line)
{
    auto s = trim(text);
    if (s == "1" || s == "true" || s == "yes") return true;
    if (s == "0" || s == "false" || s == "no") return false;
    throw ParseError(line, "expected a boolean, got \"" + std::string(s) + "\"");
}

/// 64-bit FNV-1a, used for scenario content hashes.
inline std::uint64_t fnv1a(std::string_view data)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---------------------------------------------------------------------------
// Profile CSV

inline std::vector<double> parse_profile_csv(std::istream& in, const std::string& source = "profile")
{
    std::string line;
    std::size_t lineno = 0;
    std::vector<double> values;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = trim(line);
        if (t.empty()) continue;
        if (!header) {
            if (t != "minute,value_mw")
                throw ParseError(lineno, source + ": expected header \"minute,value_mw\"");
            header = true;
            continue;
        }
        auto cells = split(t, ',');
        if (cells.size() != 2) throw ParseError(lineno, source + ": expected two columns");
        long minute = parse_integer(cells[0], lineno);
        if (minute != static_cast<long>(values.size()))
            throw ParseError(lineno, source + ": minute index " + std::to_string(minute) +
                                         " breaks the contiguous sequence (expected " +
                                         std::to_string(values.size()) + ")");
        values.push_back(parse_number(cells[1], lineno, "value"));
    }
    if (!header) throw ParseError(0, source + ": missing header \"minute,value_mw\"");
    if (values.empty()) throw ParseError(0, source + ": profile has no samples");
    return values;
}

inline std::vector<double> read_profile_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open profile file " + path.string());
    return parse_profile_csv(in, path.string());
}

inline void write_profile_csv(std::ostream& out, const std::vector<double>& values)
{
    out << "minute,value_mw\n";
    for (std::size_t i = 0; i < values.size(); ++i) out << i << ',' << format_number(values[i]) << '\n';
}

// ---------------------------------------------------------------------------
// Scenario text

namespace detail {

inline GeneratorKind parse_generator_kind(std::string_view s, std::size_t line)
{
    if (s == "dispatchable") return GeneratorKind::dispatchable;
    if (s == "must-run") return GeneratorKind::must_run;
    if (s == "fast-start") return GeneratorKind::fast_start;
    throw ParseError(line, "unknown generator kind \"" + std::string(s) + "\"");
}

inline SemiKind parse_semi_kind(std::string_view s, std::size_t line)
{
    if (s == "wind") return SemiKind::wind;
    if (s == "solar") return SemiKind::solar;
    if (s == "run-of-river-hydro" || s == "hydro") return SemiKind::hydro;
    if (s == "tie-line") return SemiKind::tie_line;
    throw ParseError(line, "unknown semi-dispatchable kind \"" + std::string(s) + "\"");
}

inline VerSpec default_ver(SemiKind kind)
{
    VerSpec v;
    switch (kind) {
    case SemiKind::wind: v.error_da = 0.12; v.error_st = 0.03; v.shape = "wind"; break;
    case SemiKind::solar: v.error_da = 0.07; v.error_st = 0.03; v.shape = "solar"; break;
    case SemiKind::hydro: v.shape = "hydro"; break;
    case SemiKind::tie_line: v.shape = "flat"; break;
    }
    return v;
}

struct PendingRef
{
    std::string name;
    std::string context;
    std::size_t line;
};

class ScenarioParser
{
public:
    explicit ScenarioParser(std::filesystem::path base) { scn_.base_dir = std::move(base); }

    Scenario parse(std::istream& in)
    {
        std::string raw;
        std::size_t lineno = 0;
        while (std::getline(in, raw)) {
            ++lineno;
            std::string_view line = raw;
            if (auto hash = line.find('#'); hash != line.npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ParseError(lineno, "unterminated section header");
                open_section(trim(line.substr(1, line.size() - 2)), lineno);
                continue;
            }
            auto eq = line.find('=');
            if (eq == line.npos) throw ParseError(lineno, "expected key = value");
            if (section_.empty()) throw ParseError(lineno, "key outside of any section");
            assign(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), lineno);
        }
        if (!have_network_) throw ParseError(0, "missing [network] section");
        finish();
        return std::move(scn_);
    }

private:
    Scenario scn_;
    bool have_network_ = false;
    std::string section_;
    std::string arg_;
    std::size_t section_line_ = 0;
    std::vector<PendingRef> refs_;
    std::set<std::string> seen_sections_;
    std::set<std::string> seen_keys_;
    bool semi_has_ver_ = false;

    void open_section(std::string_view header, std::size_t line)
    {
        close_section();
        auto words = split_words(header);
        if (words.empty()) throw ParseError(line, "empty section header");
        section_ = words[0];
        section_line_ = line;
        seen_keys_.clear();
        auto need_args = [&](std::size_t n) {
            if (words.size() != n + 1)
                throw ParseError(line, "section [" + section_ + "] expects " + std::to_string(n) + " argument(s)");
        };
        const std::string key = std::string(header);
        if (!seen_sections_.insert(key).second) throw ParseError(line, "duplicate id in section [" + key + "]");
        if (section_ == "network" || section_ == "reserves" || section_ == "timing" || section_ == "seeds") {
            need_args(0);
            if (section_ == "network") have_network_ = true;
        } else if (section_ == "bubble") {
            need_args(1);
            arg_ = words[1];
            scn_.network.bubbles.push_back(arg_);
        } else if (section_ == "branch") {
            need_args(2);
            scn_.network.branches.push_back({words[1], words[2], 1.0});
            refs_.push_back({words[1], "branch " + words[1] + "-" + words[2], line});
            refs_.push_back({words[2], "branch " + words[1] + "-" + words[2], line});
        } else if (section_ == "interface") {
            need_args(1);
            scn_.network.interfaces.push_back({words[1], {}, 0.0});
        } else if (section_ == "generator") {
            need_args(1);
            check_unique_resource(words[1], line);
            Generator g;
            g.id = words[1];
            scn_.generators.push_back(g);
        } else if (section_ == "storage") {
            need_args(1);
            check_unique_resource(words[1], line);
            Storage s;
            s.id = words[1];
            scn_.storage.push_back(s);
        } else if (section_ == "semi") {
            need_args(1);
            check_unique_resource(words[1], line);
            SemiDispatchable s;
            s.id = words[1];
            scn_.semis.push_back(s);
            semi_has_ver_ = false;
        } else if (section_ == "dr") {
            need_args(1);
            check_unique_resource(words[1], line);
            DemandResponse d;
            d.id = words[1];
            scn_.demand_response.push_back(d);
        } else if (section_ == "load") {
            need_args(1);
            LoadSpec l;
            l.bubble = words[1];
            scn_.loads.push_back(l);
            refs_.push_back({words[1], "load section", line});
        } else if (section_ == "outage") {
            need_args(1);
            OutageEvent o;
            o.id = words[1];
            scn_.outages.push_back(o);
        } else {
            throw ParseError(line, "unknown section [" + section_ + "]");
        }
    }

    void close_section()
    {
        if (section_ == "semi" && !scn_.semis.empty()) {
            auto& s = scn_.semis.back();
            if (semi_has_ver_) {
                // VER keys were merged into a default-initialized spec
            } else {
                s.ver.reset();
            }
        }
    }

    void check_unique_resource(const std::string& id, std::size_t line)
    {
        auto clash = [&](const auto& list) {
            return std::any_of(list.begin(), list.end(), [&](const auto& r) { return r.id == id; });
        };
        if (clash(scn_.generators) || clash(scn_.storage) || clash(scn_.semis) || clash(scn_.demand_response))
            throw ParseError(line, "duplicate id \"" + id + "\"");
    }

    static std::vector<std::string> split_words(std::string_view s)
    {
        std::vector<std::string> out;
        std::istringstream is{std::string(s)};
        std::string w;
        while (is >> w) out.push_back(w);
        return out;
    }

    [[noreturn]] void unknown_key(const std::string& key, std::size_t line)
    {
        throw ParseError(line, "unknown key \"" + key + "\" in [" + section_ + "]");
    }

    void assign(const std::string& key, const std::string& value, std::size_t line)
    {
        if (!seen_keys_.insert(key).second) throw ParseError(line, "duplicate key \"" + key + "\"");
        auto num = [&] { return parse_number(value, line); };
        auto integer = [&] { return parse_integer(value, line); };
        auto ref = [&](const std::string& ctx) {
            refs_.push_back({value, ctx, line});
            return value;
        };

        if (section_ == "network") {
            if (key == "name") scn_.name = value;
            else if (key == "swing") scn_.network.swing = value;
            else if (key == "loss_fraction") scn_.loss_fraction = num();
            else if (key == "peak_load") scn_.peak_load = num();
            else unknown_key(key, line);
        } else if (section_ == "bubble") {
            if (key == "super_price") scn_.super_price[arg_] = num();
            else unknown_key(key, line);
        } else if (section_ == "branch") {
            if (key == "weight") scn_.network.branches.back().weight = num();
            else unknown_key(key, line);
        } else if (section_ == "interface") {
            auto& itf = scn_.network.interfaces.back();
            if (key == "limit") itf.limit = num();
            else if (key == "members") {
                for (const auto& item : split(value, ',')) {
                    if (item.empty()) continue;
                    InterfaceMember m;
                    auto colon = item.find(':');
                    m.branch = std::string(trim(std::string_view(item).substr(0, colon)));
                    if (colon != std::string::npos) {
                        double sg = parse_number(std::string_view(item).substr(colon + 1), line, "member sign");
                        m.sign = sg < 0 ? -1 : 1;
                        if (std::abs(sg) != 1.0) throw ParseError(line, "member sign must be +1 or -1");
                    }
                    itf.members.push_back(m);
                }
            } else unknown_key(key, line);
        } else if (section_ == "generator") {
            auto& g = scn_.generators.back();
            if (key == "bubble") g.bubble = ref("generator " + g.id);
            else if (key == "kind") g.kind = parse_generator_kind(value, line);
            else if (key == "p_min") g.p_min = num();
            else if (key == "p_max") g.p_max = num();
            else if (key == "r_min") g.r_min = num();
            else if (key == "r_max") g.r_max = num();
            else if (key == "h_f") g.h_f = num();
            else if (key == "h_l") g.h_l = num();
            else if (key == "h_q") g.h_q = num();
            else if (key == "h_u") g.h_u = num();
            else if (key == "h_d") g.h_d = num();
            else if (key == "fuel_price") {
                g.fuel_price.clear();
                for (const auto& item : split(value, ',')) g.fuel_price.push_back(parse_number(item, line));
            } else if (key == "t_up") g.t_up = static_cast<int>(integer());
            else if (key == "t_down") g.t_down = static_cast<int>(integer());
            else if (key == "u_max") g.u_max = static_cast<int>(integer());
            else if (key == "regulation_capacity") g.regulation_capacity = num();
            else if (key == "online") g.online = parse_flag(value, line);
            else if (key == "initial_output") g.initial_output = num();
            else if (key == "state_hours") g.state_hours = static_cast<int>(integer());
            else unknown_key(key, line);
        } else if (section_ == "storage") {
            auto& s = scn_.storage.back();
            if (key == "bubble") s.bubble = ref("storage " + s.id);
            else if (key == "p_min") s.p_min = num();
            else if (key == "p_max") s.p_max = num();
            else if (key == "s_min") s.s_min = num();
            else if (key == "s_max") s.s_max = num();
            else if (key == "e_min") s.e_min = num();
            else if (key == "e_max") s.e_max = num();
            else if (key == "efficiency") s.efficiency = num();
            else if (key == "initial_energy") s.initial_energy = num();
            else if (key == "generating") s.generating = parse_flag(value, line);
            else if (key == "pumping") s.pumping = parse_flag(value, line);
            else unknown_key(key, line);
        } else if (section_ == "semi") {
            auto& s = scn_.semis.back();
            auto ver = [&]() -> VerSpec& {
                if (!semi_has_ver_) {
                    s.ver = default_ver(s.kind);
                    semi_has_ver_ = true;
                }
                return *s.ver;
            };
            if (key == "bubble") s.bubble = ref("semi " + s.id);
            else if (key == "kind") {
                if (semi_has_ver_) throw ParseError(line, "kind must precede VER keys");
                s.kind = parse_semi_kind(value, line);
            } else if (key == "curtailable") s.curtailable = num();
            else if (key == "threshold_price") s.threshold_price = num();
            else if (key == "profile") s.fixed.file = value;
            else if (key == "constant_mw") s.fixed.scale_mw = num();
            else if (key == "shape") ver().shape = value;
            else if (key == "penetration") ver().penetration = num();
            else if (key == "capacity_factor") ver().capacity_factor = num();
            else if (key == "variability") ver().variability = num();
            else if (key == "error_da") ver().error_da = num();
            else if (key == "error_st") ver().error_st = num();
            else if (key == "seed") ver().seed = parse_unsigned(value, line);
            else unknown_key(key, line);
            if (semi_has_ver_ && (!s.fixed.file.empty() || s.fixed.scale_mw != 0.0))
                throw ParseError(line, "semi " + s.id + " mixes a fixed profile with VER model keys");
        } else if (section_ == "dr") {
            auto& d = scn_.demand_response.back();
            if (key == "bubble") d.bubble = ref("dr " + d.id);
            else if (key == "p_min") d.p_min = num();
            else if (key == "p_max") d.p_max = num();
            else if (key == "cost") d.cost = num();
            else unknown_key(key, line);
        } else if (section_ == "load") {
            auto& l = scn_.loads.back();
            if (key == "profile") l.profile.file = value;
            else if (key == "shape") l.profile.shape = value;
            else if (key == "peak_mw" || key == "constant_mw") l.profile.scale_mw = num();
            else if (key == "curtailable") l.curtailable = num();
            else if (key == "threshold_price") l.threshold_price = num();
            else if (key == "error_da") l.error_da = num();
            else if (key == "error_st") l.error_st = num();
            else if (key == "error_rt") l.error_rt = num();
            else unknown_key(key, line);
        } else if (section_ == "reserves") {
            auto& r = scn_.reserves;
            auto per_bubble = [&](const std::string& prefix, std::map<std::string, double>& m) {
                if (key.rfind(prefix, 0) != 0) return false;
                std::string b = key.substr(prefix.size());
                refs_.push_back({b, "reserves key " + key, line});
                m[b] = num();
                return true;
            };
            if (key == "alpha_sys_tmsr") r.alpha_sys_tmsr = num();
            else if (key == "alpha_sys_tmr") r.alpha_sys_tmr = num();
            else if (key == "alpha_sys_tmor") r.alpha_sys_tmor = num();
            else if (key == "t10") r.t10 = num();
            else if (key == "t30") r.t30 = num();
            else if (key == "regulation_requirement") r.regulation_requirement = num();
            else if (key == "lfr_override") r.lfr_override = num();
            else if (per_bubble("alpha_tmsr.", r.alpha_tmsr) || per_bubble("alpha_tmr.", r.alpha_tmr) ||
                     per_bubble("alpha_tmor.", r.alpha_tmor)) {
            } else unknown_key(key, line);
        } else if (section_ == "timing") {
            auto& t = scn_.timing;
            if (key == "scuc_horizon_h") t.scuc_horizon_h = static_cast<int>(integer());
            else if (key == "scuc_step_min") t.scuc_step_min = static_cast<int>(integer());
            else if (key == "rtuc_step_min") t.rtuc_step_min = static_cast<int>(integer());
            else if (key == "rtuc_intervals") t.rtuc_intervals = static_cast<int>(integer());
            else if (key == "rtuc_period_min") t.rtuc_period_min = static_cast<int>(integer());
            else if (key == "sced_step_min") t.sced_step_min = static_cast<int>(integer());
            else if (key == "reg_step_min") t.reg_step_min = static_cast<int>(integer());
            else if (key == "segments") t.segments = static_cast<int>(integer());
            else if (key == "mip_gap") t.mip_gap = num();
            else if (key == "node_limit") t.node_limit = integer();
            else unknown_key(key, line);
        } else if (section_ == "outage") {
            auto& o = scn_.outages.back();
            if (key == "resource") o.resource = ref("outage " + o.id);
            else if (key == "start") o.start_minute = integer();
            else if (key == "duration") o.duration_min = integer();
            else if (key == "fraction") o.fraction = num();
            else unknown_key(key, line);
        } else if (section_ == "seeds") {
            if (key == "master") scn_.seed = parse_unsigned(value, line);
            else unknown_key(key, line);
        }
    }

    void finish()
    {
        close_section();
        std::set<std::string> names(scn_.network.bubbles.begin(), scn_.network.bubbles.end());
        names.insert(scn_.network.swing);
        std::set<std::string> resources;
        for (const auto& g : scn_.generators) resources.insert(g.id);
        for (const auto& s : scn_.semis) resources.insert(s.id);
        for (const auto& r : refs_) {
            bool outage = r.context.rfind("outage", 0) == 0;
            bool ok = outage ? resources.count(r.name) > 0 : names.count(r.name) > 0;
            if (r.name.empty() || !ok)
                throw ReferenceError(r.name, r.context + " (line " + std::to_string(r.line) + ")");
        }
        for (const auto& itf : scn_.network.interfaces)
            for (const auto& m : itf.members)
                if (!scn_.network.branch_index(m.branch))
                    throw ReferenceError(m.branch, "interface " + itf.name);
        std::set<std::string> loads;
        for (const auto& l : scn_.loads)
            if (!loads.insert(l.bubble).second) throw ParseError(0, "duplicate id: load " + l.bubble);
    }
};

} // namespace detail

inline Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir = {})
{
    return detail::ScenarioParser(base_dir).parse(in);
}

inline Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {})
{
    std::istringstream in(text);
    return parse_scenario(in, base_dir);
}

/// Loads a scenario file and checks that every referenced profile CSV
/// exists and parses.
inline Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open scenario file " + path.string());
    Scenario s = parse_scenario(in, path.parent_path());
    auto check = [&](const ProfileRef& r, const std::string& who) {
        if (r.file.empty()) return;
        auto values = read_profile_csv(s.base_dir / r.file);
        for (double v : values)
            if (v < 0.0) throw ParseError(0, who + ": profile " + r.file + " has negative values");
    };
    for (const auto& l : s.loads) check(l.profile, "load " + l.bubble);
    for (const auto& sd : s.semis) check(sd.fixed, "semi " + sd.id);
    return s;
}

inline std::string serialize_scenario(const Scenario& s)
{
    std::ostringstream os;
    auto kv = [&](const char* k, double v) { os << k << " = " << format_number(v) << '\n'; };
    auto ks = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };

    os << "[network]\n";
    ks("name", s.name);
    ks("swing", s.network.swing);
    kv("loss_fraction", s.loss_fraction);
    if (s.peak_load) kv("peak_load", *s.peak_load);
    for (const auto& b : s.network.bubbles) {
        os << "\n[bubble " << b << "]\n";
        if (auto it = s.super_price.find(b); it != s.super_price.end()) kv("super_price", it->second);
    }
    for (const auto& b : s.network.branches) {
        os << "\n[branch " << b.from << ' ' << b.to << "]\n";
        kv("weight", b.weight);
    }
    for (const auto& itf : s.network.interfaces) {
        os << "\n[interface " << itf.name << "]\n";
        os << "members = ";
        for (std::size_t i = 0; i < itf.members.size(); ++i)
            os << (i ? ", " : "") << itf.members[i].branch << ':' << (itf.members[i].sign < 0 ? "-1" : "+1");
        os << '\n';
        kv("limit", itf.limit);
    }
    for (const auto& g : s.generators) {
        os << "\n[generator " << g.id << "]\n";
        ks("bubble", g.bubble);
        ks("kind", to_string(g.kind));
        kv("p_min", g.p_min);
        kv("p_max", g.p_max);
        kv("r_min", g.r_min);
        kv("r_max", g.r_max);
        kv("h_f", g.h_f);
        kv("h_l", g.h_l);
        kv("h_q", g.h_q);
        kv("h_u", g.h_u);
        kv("h_d", g.h_d);
        os << "fuel_price = ";
        for (std::size_t i = 0; i < g.fuel_price.size(); ++i) os << (i ? ", " : "") << format_number(g.fuel_price[i]);
        os << '\n';
        kv("t_up", g.t_up);
        kv("t_down", g.t_down);
        kv("u_max", g.u_max);
        kv("regulation_capacity", g.regulation_capacity);
        kv("online", g.online ? 1 : 0);
        kv("initial_output", g.initial_output);
        kv("state_hours", g.state_hours);
    }
    for (const auto& st : s.storage) {
        os << "\n[storage " << st.id << "]\n";
        ks("bubble", st.bubble);
        kv("p_min", st.p_min);
        kv("p_max", st.p_max);
        kv("s_min", st.s_min);
        kv("s_max", st.s_max);
        kv("e_min", st.e_min);
        kv("e_max", st.e_max);
        kv("efficiency", st.efficiency);
        if (st.initial_energy) kv("initial_energy", *st.initial_energy);
        kv("generating", st.generating ? 1 : 0);
        kv("pumping", st.pumping ? 1 : 0);
    }
    for (const auto& sd : s.semis) {
        os << "\n[semi " << sd.id << "]\n";
        ks("bubble", sd.bubble);
        ks("kind", to_string(sd.kind));
        kv("curtailable", sd.curtailable);
        kv("threshold_price", sd.threshold_price);
        if (sd.ver) {
            ks("shape", sd.ver->shape);
            kv("penetration", sd.ver->penetration);
            kv("capacity_factor", sd.ver->capacity_factor);
            kv("variability", sd.ver->variability);
            kv("error_da", sd.ver->error_da);
            kv("error_st", sd.ver->error_st);
            os << "seed = " << sd.ver->seed << '\n';
        } else if (!sd.fixed.file.empty()) {
            ks("profile", sd.fixed.file);
        } else {
            kv("constant_mw", sd.fixed.scale_mw);
        }
    }
    for (const auto& d : s.demand_response) {
        os << "\n[dr " << d.id << "]\n";
        ks("bubble", d.bubble);
        kv("p_min", d.p_min);
        kv("p_max", d.p_max);
        kv("cost", d.cost);
    }
    for (const auto& l : s.loads) {
        os << "\n[load " << l.bubble << "]\n";
        if (!l.profile.file.empty()) ks("profile", l.profile.file);
        else if (!l.profile.shape.empty()) {
            ks("shape", l.profile.shape);
            kv("peak_mw", l.profile.scale_mw);
        } else kv("constant_mw", l.profile.scale_mw);
        kv("curtailable", l.curtailable);
        kv("threshold_price", l.threshold_price);
        kv("error_da", l.error_da);
        kv("error_st", l.error_st);
        kv("error_rt", l.error_rt);
    }
    const auto& r = s.reserves;
    os << "\n[reserves]\n";
    kv("alpha_sys_tmsr", r.alpha_sys_tmsr);
    kv("alpha_sys_tmr", r.alpha_sys_tmr);
    kv("alpha_sys_tmor", r.alpha_sys_tmor);
    for (const auto& [b, a] : r.alpha_tmsr) os << "alpha_tmsr." << b << " = " << format_number(a) << '\n';
    for (const auto& [b, a] : r.alpha_tmr) os << "alpha_tmr." << b << " = " << format_number(a) << '\n';
    for (const auto& [b, a] : r.alpha_tmor) os << "alpha_tmor." << b << " = " << format_number(a) << '\n';
    kv("t10", r.t10);
    kv("t30", r.t30);
    kv("regulation_requirement", r.regulation_requirement);
    if (r.lfr_override) kv("lfr_override", *r.lfr_override);

    const auto& t = s.timing;
    os << "\n[timing]\n";
    kv("scuc_horizon_h", t.scuc_horizon_h);
    kv("scuc_step_min", t.scuc_step_min);
    kv("rtuc_step_min", t.rtuc_step_min);
    kv("rtuc_intervals", t.rtuc_intervals);
    kv("rtuc_period_min", t.rtuc_period_min);
    kv("sced_step_min", t.sced_step_min);
    kv("reg_step_min", t.reg_step_min);
    kv("segments", t.segments);
    kv("mip_gap", t.mip_gap);
    kv("node_limit", static_cast<double>(t.node_limit));

    for (const auto& o : s.outages) {
        os << "\n[outage " << o.id << "]\n";
        ks("resource", o.resource);
        kv("start", static_cast<double>(o.start_minute));
        kv("duration", static_cast<double>(o.duration_min));
        kv("fraction", o.fraction);
    }
    os << "\n[seeds]\nmaster = " << s.seed << '\n';
    return os.str();
}

/// Content hash over the canonical serialization.
inline std::string scenario_hash(const Scenario& s)
{
    return hex64(fnv1a(serialize_scenario(s)));
}

} // namespace epecs
