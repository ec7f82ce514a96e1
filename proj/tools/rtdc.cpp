#include "rtdc/gen.hpp"
#include "rtdc/mpnn.hpp"
#include "rtdc/search.hpp"
#include "rtdc/strategy.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <regex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace rtdc;

namespace {

struct SolveOptions {
    double timeout = 20.0;
    std::string heuristic;
    int max_depth = 15;
    std::uint64_t seed = 0;
    bool random_order = false;
    bool no_pruning = false;
};

void add_solver_flags(CLI::App* cmd, SolveOptions& o)
{
    cmd->add_option("--timeout", o.timeout, "Per-instance timeout in seconds (<= 0 disables)")->capture_default_str();
    cmd->add_option("--heuristic", o.heuristic, "MPNN weight file; baseline order when absent")
        ->check(CLI::ExistingFile);
    cmd->add_option("--max-depth", o.max_depth, "Deepest d-OR level that consults the heuristic")
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "Seed for random child order")->capture_default_str();
    cmd->add_flag("--random-order", o.random_order, "Visit d-OR children in random order");
    cmd->add_flag("--no-pruning", o.no_pruning, "Disable constraint check, symmetric subtrees and truth checks");
}

// The heuristic outlives the returned config.
SearchConfig make_config(const SolveOptions& o, const std::unique_ptr<MpnnHeuristic>& h)
{
    SearchConfig cfg;
    cfg.timeout = std::chrono::duration<double>(o.timeout);
    cfg.heuristic = h.get();
    cfg.max_depth = o.max_depth;
    cfg.seed = o.seed;
    cfg.child_order = o.random_order ? SearchConfig::ChildOrder::Random : SearchConfig::ChildOrder::Declaration;
    cfg.constraint_check = cfg.symmetric_subtrees = cfg.truth_checks = !o.no_pruning;
    return cfg;
}

std::unique_ptr<MpnnHeuristic> load_heuristic(const SolveOptions& o)
{
    if (o.heuristic.empty())
        return nullptr;
    return std::make_unique<MpnnHeuristic>(load_weights(o.heuristic));
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

/// Runs `job(i)` for i in [0, n) on up to `jobs` threads.
template <typename Job>
void parallel_for(std::size_t n, int jobs, Job job)
{
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++)
            job(i);
    };
    std::vector<std::thread> pool;
    for (int k = 1; k < std::max(jobs, 1); ++k)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
}

std::vector<fs::path> instance_files(const std::string& dir)
{
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

int run_solve(const std::string& input, const SolveOptions& o, const std::string& strategy_out)
{
    const Dtnu d = load_dtnu(input);
    const auto h = load_heuristic(o);
    const Verdict v = check_rtdc(d, make_config(o, h));
    std::cout << to_string(v.kind) << '\n'
              << "elapsed_ms " << std::fixed << std::setprecision(3) << v.elapsed_s * 1000.0 << '\n'
              << "nodes " << v.nodes << '\n';
    if (!strategy_out.empty() && v.strategy)
        write_file(strategy_out, strategy_to_json(d, *v.strategy) + "\n");
    return 0;
}

int run_replay(const std::string& input, const std::string& strategy, std::size_t samples, std::uint64_t seed)
{
    const Dtnu d = load_dtnu(input);
    const StrategyNode s = strategy_from_json(d, read_file(strategy));
    const auto report = simulate_execution(d, s, samples, seed);
    std::cout << report.violations << " violations\n" << report.runs << " runs\n";
    return report.violations == 0 ? 0 : 1;
}

int run_gen(std::size_t count, std::uint64_t seed, const std::string& dir)
{
    fs::create_directories(dir);
    for (std::size_t i = 0; i < count; ++i) {
        GeneratorConfig cfg;
        cfg.seed = seed + i;
        const auto path = fs::path(dir) / ("gen_" + std::to_string(cfg.seed) + ".json");
        save_dtnu(generate_dtnu(cfg), path.string());
    }
    std::cout << count << " instances written to " << dir << '\n';
    return 0;
}

int run_label(std::size_t count, std::uint64_t seed, const std::string& dir, const std::string& out,
              const LabelingConfig& lcfg, int jobs)
{
    // (instance seed, problem); from --dir the seed comes from gen_<seed>.json names.
    std::vector<std::pair<std::uint64_t, Dtnu>> items;
    if (!dir.empty()) {
        const std::regex name(R"(gen_(\d+)\.json)");
        for (const auto& p : instance_files(dir)) {
            std::smatch m;
            const std::string file = p.filename().string();
            if (!std::regex_match(file, m, name))
                throw std::runtime_error("'" + file + "' is not named gen_<seed>.json");
            items.emplace_back(std::stoull(m[1].str()), load_dtnu(p.string()));
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            GeneratorConfig cfg;
            cfg.seed = seed + i;
            items.emplace_back(cfg.seed, generate_dtnu(cfg));
        }
    }
    std::vector<std::string> lines(items.size());
    parallel_for(items.size(), jobs, [&](std::size_t i) {
        const auto& [s, d] = items[i];
        try {
            lines[i] = example_to_json(d, label_instance(d, lcfg, s)).dump();
        } catch (const DegenerateHorizon&) {
            lines[i].clear();
        }
    });
    std::ofstream f(out);
    if (!f)
        throw std::runtime_error("cannot write '" + out + "'");
    std::size_t written = 0;
    for (const auto& l : lines)
        if (!l.empty()) {
            f << l << '\n';
            ++written;
        }
    std::cout << written << " examples written to " << out << '\n';
    return 0;
}

int run_bench(const std::string& dir, const SolveOptions& o, int jobs, const std::string& out,
              const std::string& table)
{
    const auto files = instance_files(dir);
    const auto h = load_heuristic(o);
    const SearchConfig cfg = make_config(o, h);
    std::vector<Verdict> verdicts(files.size());
    parallel_for(files.size(), jobs, [&](std::size_t i) {
        verdicts[i] = check_rtdc(load_dtnu(files[i].string()), cfg);
        verdicts[i].strategy.reset();
    });

    std::ostringstream rec;
    rec << "instance,verdict,elapsed_ms,nodes\n" << std::fixed << std::setprecision(3);
    std::vector<double> solved;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const auto& v = verdicts[i];
        rec << files[i].filename().string() << ',' << to_string(v.kind) << ',' << v.elapsed_s * 1000.0 << ','
            << v.nodes << '\n';
        if (v.kind != Verdict::Kind::Timeout)
            solved.push_back(v.elapsed_s);
    }
    std::sort(solved.begin(), solved.end());
    std::ostringstream tab;
    tab << "time_s,solved_count\n0,0\n" << std::setprecision(6);
    for (std::size_t k = 0; k < solved.size(); ++k)
        tab << solved[k] << ',' << k + 1 << '\n';

    if (out.empty())
        std::cout << rec.str();
    else
        write_file(out, rec.str());
    if (!table.empty())
        write_file(table, tab.str());
    std::cout << solved.size() << '/' << files.size() << " solved\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"R-TDC solver for disjunctive temporal networks with uncertainty"};
    app.require_subcommand(1);

    SolveOptions opts;
    std::string input, strategy_out, strategy, dir, out, table;
    std::size_t samples = 1000, count = 10;
    std::uint64_t seed = 0;
    int jobs = 1;
    LabelingConfig lcfg;
    double tau = lcfg.tau.count();

    auto* solve = app.add_subcommand("solve", "Decide R-TDC controllability of one instance");
    solve->add_option("--input", input, "Instance file")->required()->check(CLI::ExistingFile);
    solve->add_option("--strategy-out", strategy_out, "Write the strategy here when one exists");
    add_solver_flags(solve, opts);

    auto* replay = app.add_subcommand("replay", "Check a strategy against sampled uncontrollable outcomes");
    replay->add_option("--input", input, "Instance file")->required()->check(CLI::ExistingFile);
    replay->add_option("--strategy", strategy, "Strategy file")->required()->check(CLI::ExistingFile);
    replay->add_option("--samples", samples, "Random samples in addition to corner draws")->capture_default_str();
    replay->add_option("--seed", seed, "Sampling seed")->capture_default_str();

    auto* gen = app.add_subcommand("gen", "Generate random instances");
    gen->add_option("--count", count, "Number of instances")->capture_default_str();
    gen->add_option("--seed", seed, "Seed of the first instance")->capture_default_str();
    gen->add_option("--dir", dir, "Output directory")->required();

    auto* label = app.add_subcommand("label", "Write a labeled training dataset (one JSON record per line)");
    label->add_option("--count", count, "Instances to generate when --dir is absent")->capture_default_str();
    label->add_option("--seed", seed, "Seed of the first generated instance")->capture_default_str();
    label->add_option("--dir", dir, "Label gen_<seed>.json instances from this directory")
        ->check(CLI::ExistingDirectory);
    label->add_option("--out", out, "Dataset file")->required();
    label->add_option("--nu", lcfg.nu, "Explorations per root child")->capture_default_str();
    label->add_option("--tau", tau, "Seconds per exploration")->capture_default_str();
    label->add_option("--label-seed", lcfg.seed, "Seed for exploration orders")->capture_default_str();
    label->add_option("--jobs", jobs, "Worker threads")->capture_default_str();

    auto* bench = app.add_subcommand("bench", "Solve every instance in a directory");
    bench->add_option("--dir", dir, "Instance directory")->required()->check(CLI::ExistingDirectory);
    bench->add_option("--out", out, "Record file (instance,verdict,elapsed_ms,nodes); stdout when absent");
    bench->add_option("--table", table, "Cumulative table (time_s,solved_count)");
    bench->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
    add_solver_flags(bench, opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve)
            return run_solve(input, opts, strategy_out);
        if (*replay)
            return run_replay(input, strategy, samples, seed);
        if (*gen)
            return run_gen(count, seed, dir);
        if (*label) {
            lcfg.tau = std::chrono::duration<double>(tau);
            return run_label(count, seed, dir, out, lcfg, jobs);
        }
        if (*bench)
            return run_bench(dir, opts, jobs, out, table);
    } catch (const MalformedStrategy& e) {
        std::cerr << "malformed strategy: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
