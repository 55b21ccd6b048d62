#include "isac/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace isac {

namespace {

using json = nlohmann::json;

const std::vector<std::pair<SchemeId, std::string>>& scheme_table() {
    static const std::vector<std::pair<SchemeId, std::string>> table = {
        {SchemeId::proposed, "proposed"}, {SchemeId::ran_sub, "ran_sub"},         {SchemeId::tdma, "tdma"},
        {SchemeId::s_line, "s_line"},     {SchemeId::no_sens_qos, "no_sens_qos"},
    };
    return table;
}

bool uses_initial_position(SchemeId s) { return s != SchemeId::no_sens_qos; }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from(const json& rows, int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i) {
        for (int k = 0; k < c; ++k) m(i, k) = rows.at(i).at(k).get<double>();
    }
    return m;
}

}  // namespace

const std::vector<SchemeId>& all_schemes() {
    static const std::vector<SchemeId> ids = [] {
        std::vector<SchemeId> v;
        for (const auto& [id, name] : scheme_table()) v.push_back(id);
        return v;
    }();
    return ids;
}

std::string scheme_name(SchemeId id) {
    for (const auto& [s, name] : scheme_table()) {
        if (s == id) return name;
    }
    throw std::invalid_argument("unknown scheme id");
}

SchemeId parse_scheme(const std::string& name) {
    for (const auto& [s, n] : scheme_table()) {
        if (n == name) return s;
    }
    throw std::invalid_argument("scheme: unknown scheme '" + name + "'");
}

NodeLayout mission_layout(const ScenarioConfig& cfg, std::uint64_t seed) {
    auto rng = derive_stream(seed, stream_tag::layout);
    return place_nodes(cfg, rng);
}

ChannelSet mission_channels(const ScenarioConfig& cfg, std::uint64_t seed, int frame) {
    return build_channel_set(cfg, draw_frame_fading(cfg, seed, frame), frame);
}

InitialPosition mission_initial_position(const ScenarioConfig& cfg, std::uint64_t seed, const MissionOptions& opt) {
    NodeLayout layout = mission_layout(cfg, seed);
    ChannelSet ch = mission_channels(cfg, seed, 1);
    return find_initial_position(Scene{cfg, layout, ch}, opt.ela, opt.sca);
}

MissionTrace run_mission(const ScenarioConfig& cfg, SchemeId scheme, std::uint64_t seed, const MissionOptions& opt) {
    const int M = cfg.m_subcarriers;
    const NodeLayout layout = mission_layout(cfg, seed);
    MissionTrace trace;
    trace.scheme = scheme;
    trace.seed = seed;

    Eigen::Vector2d pos = cfg.uav_takeoff_pos.head<2>();
    if (uses_initial_position(scheme)) {
        InitialPosition ip = opt.initial ? *opt.initial : mission_initial_position(cfg, seed, opt);
        pos = {ip.it.x, ip.it.y};
    }
    trace.initial_position = uav_at(cfg, pos.x(), pos.y());

    const Eigen::Vector2d centre = cfg.area_center.head<2>();
    auto ran = derive_stream(seed, stream_tag::ran_sub);
    std::vector<double> mi_history;
    SenPeSelection sel;
    for (int n = 1; n <= cfg.n_frames; ++n) {
        const ChannelSet ch = mission_channels(cfg, seed, n);
        const Scene scene{cfg, layout, ch};
        FrameOptions fo;
        fo.frame = n;
        fo.start = pos;
        fo.position_free = n >= 2 && scheme != SchemeId::s_line;
        if (scheme == SchemeId::s_line && n >= 2) {
            Eigen::Vector2d gap = centre - pos;
            double len = gap.norm();
            if (len > 0.0) fo.start = pos + gap * (std::min(len, cfg.max_step_m()) / len);
        }
        const Vec3 here = uav_at(cfg, fo.start.x(), fo.start.y());
        switch (scheme) {
            case SchemeId::ran_sub:
                fo.plan = random_mdd_plan(M, ran);
                fo.decide_split = false;
                break;
            case SchemeId::tdma:
                fo.plan = tdma_plan(M);
                fo.kind = FrameKind::tdma;
                fo.decide_split = false;
                break;
            default: {
                sel = select_sen_pe(scene, here);
                const std::size_t h = mi_history.size();
                if (scheme == SchemeId::proposed && h >= 2 && mi_history[h - 1] < mi_history[h - 2]) {
                    sel = repair_pairs(mi_history[h - 2], mi_history[h - 1], sel, sensing_traces(scene, here),
                                       pe_traces(scene, here));
                }
                fo.plan = mdd_plan(M, sel, std::vector<std::uint8_t>(M / 2, 0));
                fo.sensing = scheme != SchemeId::no_sens_qos;
                break;
            }
        }
        FrameOutcome out = optimize_frame(scene, fo, opt.sca);
        if (scheme == SchemeId::s_line) {
            pos = fo.start;
        } else {
            pos = out.result.uav_pos.head<2>();
        }
        mi_history.push_back(out.result.mi_total());
        trace.frames.push_back(std::move(out.result));
        trace.psi_traces.push_back(std::move(out.psi_trace));
        trace.sca_traces.push_back(std::move(out.trace));
    }
    trace.aggregate = aggregate(trace.frames);
    return trace;
}

MissionAggregate aggregate(const std::vector<FrameResult>& frames) {
    MissionAggregate a;
    if (frames.empty()) return a;
    std::vector<double> rate, mi;
    for (const FrameResult& f : frames) {
        rate.push_back(f.feasible ? f.r_e2e : 0.0);
        mi.push_back(f.feasible ? f.mi_min() : 0.0);
        if (!f.feasible) ++a.oos_frames;
    }
    a.rate_p10 = percentile(rate, 0.1);
    a.mi_p10 = percentile(mi, 0.1);
    return a;
}

std::vector<std::pair<double, double>> compute_cdf(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("compute_cdf: empty input");
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, double>> cdf;
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) cdf.push_back({values[i], (i + 1) / n});
    return cdf;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("percentile: empty input");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("percentile: q must lie in [0, 1]");
    std::size_t k = static_cast<std::size_t>(std::floor(q * (values.size() - 1)));
    std::nth_element(values.begin(), values.begin() + k, values.end());
    return values[k];
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty input");
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<MissionOutcome> run_missions(const ScenarioConfig& cfg, const std::vector<MissionJob>& jobs,
                                         const MissionOptions& opt, int threads) {
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    // Take-off results per seed, computed once.
    std::map<std::uint64_t, std::optional<InitialPosition>> initial;
    std::map<std::uint64_t, std::string> initial_error;
    std::vector<std::uint64_t> seeds;
    for (const MissionJob& j : jobs) {
        if (uses_initial_position(j.scheme) && !initial.count(j.seed)) {
            initial[j.seed];
            seeds.push_back(j.seed);
        }
    }
    std::mutex mu;
    auto pool = [threads](std::size_t count, const std::function<void(std::size_t)>& body) {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (int t = 0; t < threads; ++t) {
            workers.emplace_back([&] {
                for (std::size_t i; (i = next++) < count;) body(i);
            });
        }
        for (auto& w : workers) w.join();
    };
    pool(seeds.size(), [&](std::size_t i) {
        std::uint64_t seed = seeds[i];
        try {
            InitialPosition ip = mission_initial_position(cfg, seed, opt);
            std::lock_guard lock(mu);
            initial[seed] = std::move(ip);
        } catch (const MissionInfeasible& e) {
            std::lock_guard lock(mu);
            initial_error[seed] = e.what();
        }
    });

    std::vector<MissionOutcome> out(jobs.size());
    pool(jobs.size(), [&](std::size_t i) {
        const MissionJob& job = jobs[i];
        out[i].job = job;
        MissionOptions local = opt;
        if (uses_initial_position(job.scheme)) {
            if (!initial.at(job.seed)) {
                out[i].error = initial_error.at(job.seed);
                return;
            }
            local.initial = initial.at(job.seed);
        }
        try {
            out[i].trace = run_mission(cfg, job.scheme, job.seed, local);
        } catch (const MissionInfeasible& e) {
            out[i].error = e.what();
        }
    });
    return out;
}

void write_mission_csv(std::ostream& out, const MissionTrace& trace) {
    out << "frame,x,y,r_dl,r_cd,r_e2e,mi_total,mi_min_target,p_uav_used,p_tbs_used,feasible,sca_iters\n";
    for (const FrameResult& f : trace.frames) {
        out << f.frame << ',' << fmt(f.uav_pos.x()) << ',' << fmt(f.uav_pos.y()) << ',' << fmt(f.r_dl) << ','
            << fmt(f.r_cd) << ',' << fmt(f.r_e2e) << ',' << fmt(f.mi_total()) << ',' << fmt(f.mi_min()) << ','
            << fmt(f.power_used_uav) << ',' << fmt(f.power_used_tbs) << ',' << (f.feasible ? 1 : 0) << ','
            << f.sca_iters << '\n';
    }
}

void write_aggregate_csv(std::ostream& out, const std::vector<MissionTrace>& traces) {
    out << "scheme,seed,rate_p10,mi_p10,oos_frames\n";
    for (const MissionTrace& t : traces) {
        out << scheme_name(t.scheme) << ',' << t.seed << ',' << fmt(t.aggregate.rate_p10) << ','
            << fmt(t.aggregate.mi_p10) << ',' << t.aggregate.oos_frames << '\n';
    }
}

void write_sca_trace_csv(std::ostream& out, const MissionTrace& trace) {
    out << "frame,k,psi,r_dl,r_cd,mi_sum,kkt_residual\n";
    for (std::size_t n = 0; n < trace.sca_traces.size(); ++n) {
        for (const TraceRow& r : trace.sca_traces[n]) {
            out << trace.frames[n].frame << ',' << r.k << ',' << fmt(r.psi) << ',' << fmt(r.r_dl) << ','
                << fmt(r.r_cd) << ',' << fmt(r.mi_sum) << ',' << fmt(r.kkt) << '\n';
        }
    }
}

void write_allocation_jsonl(std::ostream& out, const MissionTrace& trace) {
    for (const FrameResult& f : trace.frames) {
        json pairs = json::array();
        for (const Pair& p : f.plan.pairs) pairs.push_back({p.pe, p.sen});
        json row = {
            {"frame", f.frame},
            {"x", f.uav_pos.x()},
            {"y", f.uav_pos.y()},
            {"kind", trace.scheme == SchemeId::tdma ? "tdma" : "mdd"},
            {"alpha_dl", f.plan.alpha_dl},
            {"alpha_cd", f.plan.alpha_cd},
            {"alpha_sen", f.plan.alpha_sen},
            {"alpha_pe", f.plan.alpha_pe},
            {"pairs", pairs},
            {"p_dl", matrix_json(f.powers.p_dl)},
            {"p_cd", matrix_json(f.powers.p_cd)},
            {"p_sen", matrix_json(f.powers.p_sen)},
            {"p_pe", matrix_json(f.powers.p_pe)},
        };
        out << row.dump(-1, ' ', false, json::error_handler_t::strict) << '\n';
    }
}

double recompute_mismatch(const ScenarioConfig& cfg, std::uint64_t seed, SchemeId scheme, std::istream& mission_csv,
                          std::istream& allocation_jsonl) {
    const int U = cfg.u_users, J = cfg.j_targets, M = cfg.m_subcarriers;
    const NodeLayout layout = mission_layout(cfg, seed);
    const FrameKind kind = scheme == SchemeId::tdma ? FrameKind::tdma : FrameKind::mdd;
    const Prefactors pre = kind == FrameKind::mdd ? mdd_prefactors(cfg.n_slots) : tdma_prefactors(cfg.tdma, cfg.n_slots);
    std::string line;
    std::getline(mission_csv, line);
    double worst = 0.0;
    while (std::getline(mission_csv, line)) {
        std::string alloc;
        if (!std::getline(allocation_jsonl, alloc)) throw std::runtime_error("allocation log is shorter than the mission log");
        std::vector<double> cols;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cols.push_back(std::stod(cell));
        if (cols.size() != 12) throw std::runtime_error("mission log: expected 12 columns");
        if (cols[10] == 0.0) continue;
        json a = json::parse(alloc);
        SubcarrierPlan plan;
        plan.alpha_dl = a.at("alpha_dl").get<std::vector<std::uint8_t>>();
        plan.alpha_cd = a.at("alpha_cd").get<std::vector<std::uint8_t>>();
        plan.alpha_sen = a.at("alpha_sen").get<std::vector<std::uint8_t>>();
        plan.alpha_pe = a.at("alpha_pe").get<std::vector<std::uint8_t>>();
        for (const auto& p : a.at("pairs")) plan.pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
        PowerPlan pw;
        pw.p_dl = matrix_from(a.at("p_dl"), U, M);
        pw.p_cd = matrix_from(a.at("p_cd"), U, M);
        pw.p_sen = matrix_from(a.at("p_sen"), J, M);
        pw.p_pe = matrix_from(a.at("p_pe"), J, M);
        const int frame = static_cast<int>(cols[0]);
        const ChannelSet ch = mission_channels(cfg, seed, frame);
        FrameResult r = evaluate_frame(Scene{cfg, layout, ch}, plan, pw, uav_at(cfg, cols[1], cols[2]), pre, kind);
        const double got[] = {r.r_dl, r.r_cd, r.r_e2e, r.mi_total(), r.mi_min()};
        const double logged[] = {cols[3], cols[4], cols[5], cols[6], cols[7]};
        for (int i = 0; i < 5; ++i) worst = std::max(worst, std::abs(got[i] - logged[i]));
    }
    return worst;
}

}  // namespace isac
