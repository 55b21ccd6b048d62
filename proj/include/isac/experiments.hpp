#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "isac/optimizer.hpp"

namespace isac {

enum class SchemeId { proposed, ran_sub, tdma, s_line, no_sens_qos };

const std::vector<SchemeId>& all_schemes();
std::string scheme_name(SchemeId id);
SchemeId parse_scheme(const std::string& name);  // throws std::invalid_argument

struct MissionAggregate {
    double rate_p10 = 0.0;  // 90%-likely end-to-end rate
    double mi_p10 = 0.0;    // 90%-likely weakest-target MI
    int oos_frames = 0;
};

struct MissionTrace {
    SchemeId scheme = SchemeId::proposed;
    std::uint64_t seed = 0;
    Vec3 initial_position = Vec3::Zero();
    std::vector<FrameResult> frames;
    std::vector<std::vector<double>> psi_traces;  // per frame
    std::vector<std::vector<TraceRow>> sca_traces;
    MissionAggregate aggregate;
};

struct MissionOptions {
    ElaConfig ela;
    ScaOptions sca;
    // Shared take-off result so paired schemes start from the same position.
    std::optional<InitialPosition> initial;
};

NodeLayout mission_layout(const ScenarioConfig& cfg, std::uint64_t seed);
ChannelSet mission_channels(const ScenarioConfig& cfg, std::uint64_t seed, int frame);

// Initial operating position of the proposed scheme on frame-1 channels.
InitialPosition mission_initial_position(const ScenarioConfig& cfg, std::uint64_t seed, const MissionOptions& opt = {});

// Runs cfg.n_frames frames. Throws MissionInfeasible when no initial position exists.
MissionTrace run_mission(const ScenarioConfig& cfg, SchemeId scheme, std::uint64_t seed,
                         const MissionOptions& opt = {});

MissionAggregate aggregate(const std::vector<FrameResult>& frames);

// Empirical CDF: sorted values with cumulative probability (i + 1) / n.
std::vector<std::pair<double, double>> compute_cdf(std::vector<double> values);

// Lower-interpolation percentile: sorted[floor(q (n - 1))]. q in [0, 1].
double percentile(std::vector<double> values, double q);

double median(std::vector<double> values);

struct MissionJob {
    SchemeId scheme;
    std::uint64_t seed;
};

struct MissionOutcome {
    MissionJob job;
    std::optional<MissionTrace> trace;
    std::string error;  // set when the mission is infeasible
};

// Independent missions on a thread pool; the proposed take-off result is computed once per seed
// and shared by the schemes that start from it.
std::vector<MissionOutcome> run_missions(const ScenarioConfig& cfg, const std::vector<MissionJob>& jobs,
                                         const MissionOptions& opt = {}, int threads = 0);

void write_mission_csv(std::ostream& out, const MissionTrace& trace);
void write_aggregate_csv(std::ostream& out, const std::vector<MissionTrace>& traces);
void write_sca_trace_csv(std::ostream& out, const MissionTrace& trace);

// One JSON object per frame with the position, subcarrier plan and powers.
void write_allocation_jsonl(std::ostream& out, const MissionTrace& trace);

// Re-evaluates every feasible logged frame; returns the largest absolute mismatch over rates and MI.
double recompute_mismatch(const ScenarioConfig& cfg, std::uint64_t seed, SchemeId scheme, std::istream& mission_csv,
                          std::istream& allocation_jsonl);

}  // namespace isac
