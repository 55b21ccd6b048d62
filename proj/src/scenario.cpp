#include "isac/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace isac {

namespace {

using json = nlohmann::json;

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key + ": " + what);
}

void require_finite(double v, const std::string& key) {
    require(std::isfinite(v), key, "must be finite");
}

Vec3 read_vec3(const json& v, const std::string& key) {
    require(v.is_array() && v.size() == 3, key, "expected an array of 3 numbers");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
        require(v[i].is_number(), key, "expected an array of 3 numbers");
        out[i] = v[i].get<double>();
    }
    return out;
}

UpaDims read_dims(const json& v, const std::string& key) {
    require(v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer(), key,
            "expected [length, width]");
    return {v[0].get<int>(), v[1].get<int>()};
}

double read_double(const json& v, const std::string& key) {
    require(v.is_number(), key, "expected a number");
    return v.get<double>();
}

int read_int(const json& v, const std::string& key) {
    require(v.is_number_integer(), key, "expected an integer");
    return v.get<int>();
}

}  // namespace

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double ScenarioConfig::p_tbs_w() const { return dbm_to_watts(p_tbs_dbm); }
double ScenarioConfig::p_uav_w() const { return dbm_to_watts(p_uav_dbm); }
double ScenarioConfig::n0_w() const { return dbm_to_watts(n0_dbm); }
double ScenarioConfig::xi_sic() const { return db_to_linear(sic_db); }

void ScenarioConfig::validate() const {
    for (auto [v, k] : {std::pair{p_tbs_dbm, "p_tbs_dbm"}, {p_uav_dbm, "p_uav_dbm"}, {n0_dbm, "n0_dbm"},
                        {k_tu, "k_tu"}, {rcs_m2, "rcs_m2"}, {fc_hz, "fc_hz"}, {bw_hz, "bw_hz"},
                        {g_tbs_tx_dbi, "g_tbs_tx_dbi"}, {g_tbs_rx_dbi, "g_tbs_rx_dbi"},
                        {g_uav_tx_dbi, "g_uav_tx_dbi"}, {g_uav_rx_dbi, "g_uav_rx_dbi"},
                        {g_ue_rx_dbi, "g_ue_rx_dbi"}, {sic_db, "sic_db"}, {r_dl_min, "r_dl_min"},
                        {r_mi_min, "r_mi_min"}, {slot_duration_s, "slot_duration_s"}, {uav_alt_m, "uav_alt_m"}}) {
        require_finite(v, k);
    }
    for (int i = 0; i < 3; ++i) {
        require_finite(tbs_pos[i], "tbs_pos");
        require_finite(uav_takeoff_pos[i], "uav_takeoff_pos");
        require_finite(area_center[i], "area_center");
    }
    require(v_max > 0.0 && std::isfinite(v_max), "v_max", "must be positive");
    require(m_subcarriers >= 4 && m_subcarriers % 4 == 0, "m_subcarriers", "M must be divisible by 4");
    require(u_users >= 1, "u_users", "must be at least 1");
    require(j_targets >= 1, "j_targets", "must be at least 1");
    require(n_frames >= 1, "n_frames", "must be at least 1");
    require(n_slots >= 4, "n_slots", "must be at least 4");
    require(slot_duration_s > 0.0, "slot_duration_s", "must be positive");
    require(area_radius_m > 0.0 && std::isfinite(area_radius_m), "area_radius_m", "must be positive");
    require(k_tu >= 0.0, "k_tu", "must be nonnegative");
    require(rcs_m2 > 0.0, "rcs_m2", "must be positive");
    require(fc_hz > bw_hz / 2 && bw_hz > 0.0, "bw_hz", "band must stay above 0 Hz");
    require(r_dl_min >= 0.0, "r_dl_min", "must be nonnegative");
    require(r_mi_min >= 0.0, "r_mi_min", "must be nonnegative");
    for (auto [d, k] : {std::pair{uav_tx, "uav_tx"}, {uav_rx, "uav_rx"}, {tbs_tx, "tbs_tx"}, {tbs_rx, "tbs_rx"}}) {
        require(d.length >= 1 && d.width >= 1, k, "UPA dimensions must be positive");
    }
    require(tbs_tx.count() >= u_users, "tbs_tx", "needs at least U elements for U coded streams");
    require(uav_rx.count() >= u_users, "uav_rx", "needs at least U elements for U coded streams");
    require(uav_tx.count() >= j_targets && tbs_rx.count() >= j_targets, "tbs_rx",
            "needs at least J elements for J perceived streams");
    require(tdma.cd >= 1 && tdma.dl >= 1 && tdma.sen >= 1 && tdma.pe >= 1 && tdma.guard >= 0, "tdma_slots",
            "every phase needs a slot");
    require(tdma.total() == n_slots, "tdma_slots", "must sum to n_slots");
}

ScenarioConfig load_config(const std::string& document) {
    ScenarioConfig cfg;
    bool blank = document.find_first_not_of(" \t\r\n") == std::string::npos;
    if (blank) {
        cfg.validate();
        return cfg;
    }
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("parse error: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("parse error: top level must be an object");

    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& k = it.key();
        const json& v = it.value();
        if (k == "p_tbs_dbm") cfg.p_tbs_dbm = read_double(v, k);
        else if (k == "p_uav_dbm") cfg.p_uav_dbm = read_double(v, k);
        else if (k == "n0_dbm") cfg.n0_dbm = read_double(v, k);
        else if (k == "v_max") cfg.v_max = read_double(v, k);
        else if (k == "k_tu") cfg.k_tu = read_double(v, k);
        else if (k == "rcs_m2") cfg.rcs_m2 = read_double(v, k);
        else if (k == "fc_hz") cfg.fc_hz = read_double(v, k);
        else if (k == "bw_hz") cfg.bw_hz = read_double(v, k);
        else if (k == "m_subcarriers") cfg.m_subcarriers = read_int(v, k);
        else if (k == "u_users") cfg.u_users = read_int(v, k);
        else if (k == "j_targets") cfg.j_targets = read_int(v, k);
        else if (k == "n_frames") cfg.n_frames = read_int(v, k);
        else if (k == "n_slots") cfg.n_slots = read_int(v, k);
        else if (k == "slot_duration_s") cfg.slot_duration_s = read_double(v, k);
        else if (k == "g_tbs_tx_dbi") cfg.g_tbs_tx_dbi = read_double(v, k);
        else if (k == "g_tbs_rx_dbi") cfg.g_tbs_rx_dbi = read_double(v, k);
        else if (k == "g_uav_tx_dbi") cfg.g_uav_tx_dbi = read_double(v, k);
        else if (k == "g_uav_rx_dbi") cfg.g_uav_rx_dbi = read_double(v, k);
        else if (k == "g_ue_rx_dbi") cfg.g_ue_rx_dbi = read_double(v, k);
        else if (k == "sic_db") cfg.sic_db = read_double(v, k);
        else if (k == "r_dl_min") cfg.r_dl_min = read_double(v, k);
        else if (k == "r_mi_min") cfg.r_mi_min = read_double(v, k);
        else if (k == "tbs_pos") cfg.tbs_pos = read_vec3(v, k);
        else if (k == "uav_takeoff_pos") cfg.uav_takeoff_pos = read_vec3(v, k);
        else if (k == "area_center") cfg.area_center = read_vec3(v, k);
        else if (k == "area_radius_m") cfg.area_radius_m = read_double(v, k);
        else if (k == "uav_alt_m") cfg.uav_alt_m = read_double(v, k);
        else if (k == "uav_tx_dims") cfg.uav_tx = read_dims(v, k);
        else if (k == "uav_rx_dims") cfg.uav_rx = read_dims(v, k);
        else if (k == "tbs_tx_dims") cfg.tbs_tx = read_dims(v, k);
        else if (k == "tbs_rx_dims") cfg.tbs_rx = read_dims(v, k);
        else if (k == "tdma_slots") {
            require(v.is_array() && v.size() == 5, k, "expected [cd, dl, sen, pe, guard]");
            for (std::size_t i = 0; i < 5; ++i) require(v[i].is_number_integer(), k, "expected integers");
            cfg.tdma = {v[0].get<int>(), v[1].get<int>(), v[2].get<int>(), v[3].get<int>(), v[4].get<int>()};
        } else if (k == "seed") {
            require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0), k,
                    "expected a nonnegative integer");
            cfg.seed = v.get<std::uint64_t>();
        } else {
            throw ConfigError(k + ": unknown key");
        }
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config(ss.str());
}

std::string dump_config(const ScenarioConfig& c) {
    auto v3 = [](const Vec3& v) { return json::array({v[0], v[1], v[2]}); };
    auto d2 = [](const UpaDims& d) { return json::array({d.length, d.width}); };
    json j = {
        {"p_tbs_dbm", c.p_tbs_dbm}, {"p_uav_dbm", c.p_uav_dbm}, {"n0_dbm", c.n0_dbm}, {"v_max", c.v_max},
        {"k_tu", c.k_tu}, {"rcs_m2", c.rcs_m2}, {"fc_hz", c.fc_hz}, {"bw_hz", c.bw_hz},
        {"m_subcarriers", c.m_subcarriers}, {"u_users", c.u_users}, {"j_targets", c.j_targets},
        {"n_frames", c.n_frames}, {"n_slots", c.n_slots}, {"slot_duration_s", c.slot_duration_s},
        {"g_tbs_tx_dbi", c.g_tbs_tx_dbi}, {"g_tbs_rx_dbi", c.g_tbs_rx_dbi}, {"g_uav_tx_dbi", c.g_uav_tx_dbi},
        {"g_uav_rx_dbi", c.g_uav_rx_dbi}, {"g_ue_rx_dbi", c.g_ue_rx_dbi}, {"sic_db", c.sic_db},
        {"r_dl_min", c.r_dl_min}, {"r_mi_min", c.r_mi_min}, {"tbs_pos", v3(c.tbs_pos)},
        {"uav_takeoff_pos", v3(c.uav_takeoff_pos)}, {"area_center", v3(c.area_center)},
        {"area_radius_m", c.area_radius_m}, {"uav_alt_m", c.uav_alt_m}, {"uav_tx_dims", d2(c.uav_tx)},
        {"uav_rx_dims", d2(c.uav_rx)}, {"tbs_tx_dims", d2(c.tbs_tx)}, {"tbs_rx_dims", d2(c.tbs_rx)},
        {"tdma_slots", json::array({c.tdma.cd, c.tdma.dl, c.tdma.sen, c.tdma.pe, c.tdma.guard})},
        {"seed", c.seed},
    };
    return j.dump(2);
}

std::mt19937_64 derive_stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
    // splitmix64 finaliser over the packed triple keeps nearby seeds decorrelated.
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t h = mix(seed);
    h = mix(h ^ purpose);
    h = mix(h ^ index);
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return std::mt19937_64(seq);
}

NodeLayout place_nodes(const ScenarioConfig& cfg, std::mt19937_64& stream) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto sample = [&] {
        double r = cfg.area_radius_m * std::sqrt(unit(stream));
        double a = 2.0 * std::numbers::pi * unit(stream);
        return Vec3(cfg.area_center.x() + r * std::cos(a), cfg.area_center.y() + r * std::sin(a), 0.0);
    };
    NodeLayout out;
    out.users.reserve(cfg.u_users);
    out.targets.reserve(cfg.j_targets);
    for (int u = 0; u < cfg.u_users; ++u) out.users.push_back(sample());
    for (int j = 0; j < cfg.j_targets; ++j) out.targets.push_back(sample());
    return out;
}

}  // namespace isac
