// epecs command line: validate, simulate, metrics, gen-mini.
//
// Exit codes: 0 ok, 1 usage or missing input, 2 invalid scenario or
// mismatched trace, 3 runtime fault. Diagnostics go to stderr only.

#include "epecs/epecs.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace epecs;

namespace {

enum Exit { ok = 0, usage = 1, invalid = 2, fault = 3 };

struct Failure
{
    int code;
    std::string message;
};

void diag(const std::string& msg)
{
    std::string line = msg;
    for (char& c : line)
        if (c == '\n') c = ' ';
    std::cerr << "epecs: " << line << '\n';
}

Scenario load_or_fail(const std::string& path)
{
    if (!fs::exists(path)) throw Failure{usage, "scenario file not found: " + path};
    try {
        return load_scenario(path);
    } catch (const Error& e) {
        throw Failure{invalid, path + ": " + e.what()};
    }
}

void check_valid(const Scenario& s, const std::string& path, bool verbose)
{
    const auto rep = validate_scenario(s);
    if (verbose)
        for (const auto& v : rep.violations) std::cerr << path << ": " << v.severity << ": " << v.entity << ": " << v.message << '\n';
    if (rep.clean()) return;
    std::size_t errors = 0;
    const Violation* first = nullptr;
    for (const auto& v : rep.violations)
        if (v.severity == "error") {
            ++errors;
            if (!first) first = &v;
        }
    throw Failure{invalid, path + ": " + std::to_string(errors) + " validation error(s); first: " + first->entity + ": " +
                               first->message};
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const Scenario& s)
{
    if (flag) return *flag;
    if (const char* env = std::getenv("EPECS_SEED"); env && *env) {
        try {
            std::size_t used = 0;
            auto v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw Failure{usage, std::string("EPECS_SEED is not an unsigned integer: ") + env};
    }
    return s.seed;
}

int run_validate(const std::string& path, bool verbose)
{
    Scenario s = load_or_fail(path);
    check_valid(s, path, verbose);
    std::cout << path << ": valid\n";
    return ok;
}

int run_simulate(const std::vector<std::string>& paths, int days, const std::optional<std::uint64_t>& seed,
                 const std::string& out, int jobs, bool verbose)
{
    if (days < 1) throw Failure{usage, "--days must be at least 1"};
    if (jobs < 1) throw Failure{usage, "--jobs must be at least 1"};
    struct Run
    {
        std::string path;
        Scenario scenario;
        std::uint64_t seed;
        fs::path dir;
    };
    std::vector<Run> runs;
    for (const auto& p : paths) {
        Scenario s = load_or_fail(p);
        check_valid(s, p, verbose);
        const std::uint64_t sd = resolve_seed(seed, s);
        fs::path dir = paths.size() == 1 ? fs::path(out) : fs::path(out) / fs::path(p).stem();
        runs.push_back({p, std::move(s), sd, dir});
    }
    std::vector<std::optional<Failure>> failures(runs.size());
    std::mutex log;
    auto work = [&](std::size_t i) {
        const auto& r = runs[i];
        try {
            auto tr = simulate(r.scenario, days, r.seed);
            write_trace(r.dir, tr);
            if (verbose) {
                std::lock_guard<std::mutex> lock(log);
                std::cerr << r.path << ": " << tr.minutes << " minutes written to " << r.dir.string() << '\n';
            }
        } catch (const std::exception& e) {
            failures[i] = Failure{fault, r.path + ": " + e.what()};
        }
    };
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex take;
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), runs.size());
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            while (true) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lock(take);
                    if (next >= runs.size()) return;
                    i = next++;
                }
                work(i);
            }
        });
    for (auto& t : pool) t.join();
    for (auto& f : failures)
        if (f) throw *f;
    return ok;
}

int run_metrics(const std::string& trace_dir, const std::string& out, const std::string& scenario_path)
{
    if (!fs::is_directory(trace_dir)) throw Failure{usage, "trace directory not found: " + trace_dir};
    SimulationTrace tr;
    try {
        tr = read_trace(trace_dir);
    } catch (const Error& e) {
        throw Failure{invalid, trace_dir + ": " + e.what()};
    }
    if (!scenario_path.empty()) {
        Scenario s = load_or_fail(scenario_path);
        if (scenario_hash(s) != tr.scenario_hash)
            throw Failure{invalid, trace_dir + ": trace was produced from a different scenario than " + scenario_path};
    }
    try {
        write_report(out, tr);
    } catch (const Error& e) {
        throw Failure{fault, e.what()};
    }
    return ok;
}

int run_gen_mini(const std::string& out)
{
    const fs::path p(out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Failure{fault, "cannot write " + out};
    os << kMini3Text;
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Enterprise control simulator for variable energy resource integration studies"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Extra diagnostics on stderr");

    std::string scn;
    auto* validate = app.add_subcommand("validate", "Check a scenario file");
    validate->add_option("scenario", scn, "Scenario file")->required();

    std::vector<std::string> scns;
    int days = 1, jobs = 1;
    std::optional<std::uint64_t> seed;
    std::string out;
    auto* sim = app.add_subcommand("simulate", "Run the control cascade and write a trace");
    sim->add_option("scenario", scns, "Scenario file(s)")->required();
    sim->add_option("--days", days, "Days to simulate")->default_val(1);
    sim->add_option("--seed", seed, "Master seed (default: EPECS_SEED, then the scenario)");
    sim->add_option("--out", out, "Output directory")->required();
    sim->add_option("--jobs", jobs, "Scenarios run in parallel")->default_val(1);

    std::string trace_dir, metrics_out, metrics_scn;
    auto* met = app.add_subcommand("metrics", "Compute statistics from a trace directory");
    met->add_option("trace", trace_dir, "Trace directory")->required();
    met->add_option("--out", metrics_out, "Report directory")->required();
    met->add_option("--scenario", metrics_scn, "Refuse the trace unless it came from this scenario");

    std::string mini_out;
    auto* gen = app.add_subcommand("gen-mini", "Write the bundled three-bubble scenario");
    gen->add_option("--out", mini_out, "Output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        diag(e.what());
        return usage;
    }

    try {
        if (*validate) return run_validate(scn, verbose);
        if (*sim) return run_simulate(scns, days, seed, out, jobs, verbose);
        if (*met) return run_metrics(trace_dir, metrics_out, metrics_scn);
        if (*gen) return run_gen_mini(mini_out);
    } catch (const Failure& f) {
        diag(f.message);
        return f.code;
    } catch (const std::exception& e) {
        diag(e.what());
        return fault;
    }
    return usage;
}
