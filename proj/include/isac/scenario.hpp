#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace isac {

using Vec3 = Eigen::Vector3d;

struct UpaDims {
    int length = 1;
    int width = 1;
    int count() const { return length * width; }
};

// Slot split of the time-division benchmark frame. Sums to n_slots.
struct TdmaSlots {
    int cd = 2;
    int dl = 4;
    int sen = 2;
    int pe = 1;
    int guard = 1;
    int total() const { return cd + dl + sen + pe + guard; }
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
    double p_tbs_dbm = 34.0;
    double p_uav_dbm = 30.0;
    double n0_dbm = -107.0;  // per subcarrier
    double v_max = 30.0;
    double k_tu = 30.0;
    double rcs_m2 = 100.0;
    double fc_hz = 5e9;
    double bw_hz = 10e6;
    int m_subcarriers = 32;
    int u_users = 8;
    int j_targets = 4;
    int n_frames = 500;
    int n_slots = 10;
    double slot_duration_s = 0.1;

    double g_tbs_tx_dbi = 30.0;
    double g_tbs_rx_dbi = 26.0;
    double g_uav_tx_dbi = 24.0;
    double g_uav_rx_dbi = 20.0;
    double g_ue_rx_dbi = 2.0;

    double sic_db = -110.0;
    double r_dl_min = 10.0;
    double r_mi_min = 1.0;

    Vec3 tbs_pos{0.0, 0.0, 10.0};
    Vec3 uav_takeoff_pos{10.0, 0.0, 200.0};
    Vec3 area_center{1e4, 1e4, 0.0};
    double area_radius_m = 100.0;
    double uav_alt_m = 200.0;

    UpaDims uav_tx{6, 6};  // R_tx
    UpaDims uav_rx{6, 6};  // R_rx
    UpaDims tbs_tx{8, 8};  // R̄_tx
    UpaDims tbs_rx{8, 8};  // R̄_rx

    TdmaSlots tdma{};
    std::uint64_t seed = 1;

    // Throws ConfigError naming the offending key.
    void validate() const;

    double p_tbs_w() const;
    double p_uav_w() const;
    double n0_w() const;
    double xi_sic() const;
    // Largest horizontal displacement between consecutive frames.
    double max_step_m() const { return v_max * n_slots * slot_duration_s; }
};

// Parses a flat JSON object. Unknown keys are rejected; absent keys keep defaults.
ScenarioConfig load_config(const std::string& document);
ScenarioConfig load_config_file(const std::string& path);
std::string dump_config(const ScenarioConfig& cfg);

double dbm_to_watts(double dbm);
double db_to_linear(double db);

struct NodeLayout {
    std::vector<Vec3> users;
    std::vector<Vec3> targets;
};

NodeLayout place_nodes(const ScenarioConfig& cfg, std::mt19937_64& stream);

// Independent, reproducible stream for a (seed, purpose, index) triple.
std::mt19937_64 derive_stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index = 0);

namespace stream_tag {
inline constexpr std::uint64_t layout = 1;
inline constexpr std::uint64_t fading = 2;
inline constexpr std::uint64_t ran_sub = 3;
}  // namespace stream_tag

}  // namespace isac
