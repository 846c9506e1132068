// csv_io.hpp - CSV tables consumed by the plotting scripts (17 significant digits)
#pragma once

#include "vdimer/protocol.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace vdimer {

inline constexpr const char* kChiHeader =
    "tau_fs,chi_aaaa_mean,chi_aaaa_std,chi_aabb_mean,chi_aabb_std,chi_bbaa_mean,chi_bbaa_std,chi_bbbb_mean,"
    "chi_bbbb_std";
inline constexpr const char* kWitnessHeader = "T1_fs,T2_fs,wb_sim,wb_theory";
inline constexpr const char* kRSweepHeader = "r,sigma";
inline constexpr const char* kConditioningHeader = "pair_set,kappa,det";

struct WitnessRow {
    double T1{0.0};
    double T2{0.0};
    double wb_sim{0.0};
    double wb_theory{0.0};
};

struct ConditioningRow {
    std::string pair_set;
    double kappa{0.0};
    double det{0.0};
};

std::string format17(double x);

void write_chi_curve(const std::filesystem::path& path, std::span<const ChiStats> rows);
std::vector<ChiStats> read_chi_curve(const std::filesystem::path& path);

void write_witness(const std::filesystem::path& path, std::span<const WitnessRow> rows);
std::vector<WitnessRow> read_witness(const std::filesystem::path& path);

void write_rsweep(const std::filesystem::path& path, std::span<const RSweepPoint> rows);
std::vector<RSweepPoint> read_rsweep(const std::filesystem::path& path);  // J left at 0

void write_conditioning(const std::filesystem::path& path, std::span<const ConditioningRow> rows);
std::vector<ConditioningRow> read_conditioning(const std::filesystem::path& path);

}  // namespace vdimer
