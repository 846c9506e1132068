// config.hpp - JSON run configuration (unknown keys rejected, defaults materialized on output)
#pragma once

#include "vdimer/process.hpp"
#include "vdimer/protocol.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vdimer {

struct DelayGrid {
    double start_fs{0.0};
    double stop_fs{600.0};
    double step_fs{100.0};

    std::vector<double> values() const;
};

struct RunConfig {
    std::string preset{"apc"};  // "apc" or "none"
    DimerParams dimer{apc_preset()};
    int n_phon{3};

    double sigma_t_fs{103.0};
    double depletion{1e-3};
    std::optional<double> eta_cm;  // field amplitude x dipole, cm^-1 per dipole unit
    bool auto_resonant{true};
    double omega_plus_cm{0.0};
    double omega_minus_cm{0.0};

    double dt_fs{0.0};  // 0 = automatic
    Frame frame{Frame::rotating};
    bool rwa{true};

    double T1_fs{200.0};
    double T2_fs{200.0};
    DelayGrid tau_grid;
    std::size_t n_orientations{2000};
    std::uint64_t seed{1};
    std::size_t bootstrap{200};
    double kappa_max{1e6};
    bool require_isolated{false};

    double t_max_fs{1000.0};
    double t_step_fs{1.0};
    BranchMeasure measure{BranchMeasure::electronic};

    std::string pair_label{"++"};
    double tau_fs{300.0};

    std::vector<double> J_values_cm{-40.0, -81.0, -162.0, -324.0, -648.0, -1150.0};
    DelayGrid rsweep_grid{0.0, 600.0, 50.0};
    std::size_t rsweep_orientations{200};

    std::filesystem::path output{"out"};
    unsigned threads{0};
    bool verbose{false};

    ProtocolSettings protocol_settings() const;
};

// Throws ConfigError on unknown keys, wrong types or invalid values.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

}  // namespace vdimer
