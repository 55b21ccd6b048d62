// Command-line front end: single missions, scheme x seed sweeps, self-checks and convergence dumps.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "isac/experiments.hpp"
#include "isac/validation.hpp"

namespace {

namespace fs = std::filesystem;
using namespace isac;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_infeasible = 2;
constexpr int exit_validation = 3;

struct Common {
    std::string config;
    std::uint64_t seed = 1;
    int frames = 0;
    std::string out = ".";
    int threads = 0;
};

ScenarioConfig load(const Common& c) {
    ScenarioConfig cfg = c.config.empty() ? ScenarioConfig{} : load_config_file(c.config);
    if (c.frames > 0) cfg.n_frames = c.frames;
    cfg.validate();
    return cfg;
}

// "1..20" or "1,4,9"
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    auto dots = text.find("..");
    if (dots != std::string::npos) {
        std::uint64_t a = std::stoull(text.substr(0, dots)), b = std::stoull(text.substr(dots + 2));
        if (b < a) throw std::invalid_argument("seeds: empty range");
        for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
        return out;
    }
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(std::stoull(item));
    if (out.empty()) throw std::invalid_argument("seeds: no seeds given");
    return out;
}

std::vector<SchemeId> parse_schemes(const std::string& text) {
    std::vector<SchemeId> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_scheme(item));
    if (out.empty()) throw std::invalid_argument("schemes: no schemes given");
    return out;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error(p.string() + ": cannot open for writing");
    return f;
}

void write_mission(const fs::path& dir, const MissionTrace& t) {
    const std::string stem = "mission_" + scheme_name(t.scheme) + "_" + std::to_string(t.seed);
    auto csv = open_out(dir / (stem + ".csv"));
    write_mission_csv(csv, t);
    auto alloc = open_out(dir / (stem + "_alloc.jsonl"));
    write_allocation_jsonl(alloc, t);
}

void add_common(CLI::App* cmd, Common& c, bool with_seed) {
    cmd->add_option("--config", c.config, "scenario JSON file")->check(CLI::ExistingFile);
    if (with_seed) cmd->add_option("--seed", c.seed, "random seed");
    cmd->add_option("--frames", c.frames, "override the number of frames")->check(CLI::PositiveNumber);
    cmd->add_option("--out", c.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UAV-assisted maritime ISAC simulator"};
    app.require_subcommand(1);

    Common common;
    std::string scheme = "proposed", schemes = "proposed", seeds = "1", trace_path;
    int trace_frame = 2;

    auto* run = app.add_subcommand("run", "run one scheme for one seed");
    add_common(run, common, true);
    run->add_option("--scheme", scheme, "proposed | ran_sub | tdma | s_line | no_sens_qos");
    run->add_option("--trace", trace_path, "append per-iteration SCA rows to this CSV");

    auto* sweep = app.add_subcommand("sweep", "run a schemes x seeds grid");
    add_common(sweep, common, false);
    sweep->add_option("--schemes", schemes, "comma-separated scheme names");
    sweep->add_option("--seeds", seeds, "range a..b or comma list");
    sweep->add_option("--threads", common.threads, "worker threads (0 = all cores)");

    auto* validate = app.add_subcommand("validate", "run the property checks");

    auto* trace = app.add_subcommand("trace", "dump SCA convergence of one frame");
    add_common(trace, common, true);
    trace->add_option("--frame", trace_frame, "frame to dump")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*validate) {
            bool ok = true;
            for (const CheckResult& r : run_property_suite()) {
                std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
                ok = ok && r.pass;
            }
            return ok ? exit_ok : exit_validation;
        }

        ScenarioConfig cfg = load(common);
        fs::create_directories(common.out);
        const fs::path dir = common.out;

        if (*run) {
            SchemeId id = parse_scheme(scheme);
            MissionTrace t = run_mission(cfg, id, common.seed);
            write_mission(dir, t);
            if (!trace_path.empty()) {
                std::ofstream f(trace_path, std::ios::app);
                if (!f) throw std::runtime_error(trace_path + ": cannot open for writing");
                write_sca_trace_csv(f, t);
            }
            std::cout << scheme_name(id) << " seed " << common.seed << ": rate_p10 " << t.aggregate.rate_p10
                      << ", mi_p10 " << t.aggregate.mi_p10 << ", out of service " << t.aggregate.oos_frames << '\n';
            return exit_ok;
        }

        if (*sweep) {
            std::vector<MissionJob> jobs;
            for (SchemeId s : parse_schemes(schemes)) {
                for (std::uint64_t seed : parse_seeds(seeds)) jobs.push_back({s, seed});
            }
            std::vector<MissionTrace> done;
            bool infeasible = false;
            for (MissionOutcome& o : run_missions(cfg, jobs, {}, common.threads)) {
                if (!o.trace) {
                    std::cerr << scheme_name(o.job.scheme) << " seed " << o.job.seed << ": " << o.error << '\n';
                    infeasible = true;
                    continue;
                }
                write_mission(dir, *o.trace);
                done.push_back(std::move(*o.trace));
            }
            auto agg = open_out(dir / "aggregate.csv");
            write_aggregate_csv(agg, done);
            return infeasible ? exit_infeasible : exit_ok;
        }

        if (*trace) {
            cfg.n_frames = trace_frame;
            MissionTrace t = run_mission(cfg, SchemeId::proposed, common.seed);
            auto f = open_out(dir / ("trace_" + std::to_string(common.seed) + "_" + std::to_string(trace_frame) + ".csv"));
            f << "k,psi,r_dl,r_cd,mi_sum,kkt_residual\n";
            f.precision(17);
            for (const TraceRow& r : t.sca_traces.back()) {
                f << r.k << ',' << r.psi << ',' << r.r_dl << ',' << r.r_cd << ',' << r.mi_sum << ',' << r.kkt << '\n';
            }
            return exit_ok;
        }
    } catch (const MissionInfeasible& e) {
        std::cerr << e.what() << '\n';
        return exit_infeasible;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}
