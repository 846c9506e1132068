#include "vdimer/csv_io.hpp"
#include "vdimer/errors.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace vdimer {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path, const char* header) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DomainError(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) throw DomainError(path.string() + ": unexpected header '" + line + "'");
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

double parse(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw DomainError("CSV: not a number: '" + s + "'");
    return v;
}

void require_width(const std::vector<std::string>& row, std::size_t n) {
    if (row.size() != n) throw DomainError("CSV: expected " + std::to_string(n) + " columns");
}

}  // namespace

std::string format17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_chi_curve(const std::filesystem::path& path, std::span<const ChiStats> rows) {
    auto out = open_out(path);
    out << kChiHeader << '\n';
    for (const auto& r : rows) {
        out << format17(r.tau);
        for (int k = 0; k < 4; ++k) out << ',' << format17(r.mean(k)) << ',' << format17(r.std(k));
        out << '\n';
    }
}

std::vector<ChiStats> read_chi_curve(const std::filesystem::path& path) {
    std::vector<ChiStats> out;
    for (const auto& row : read_table(path, kChiHeader)) {
        require_width(row, 9);
        ChiStats c;
        c.tau = parse(row[0]);
        for (int k = 0; k < 4; ++k) {
            c.mean(k) = parse(row[static_cast<std::size_t>(1 + 2 * k)]);
            c.std(k) = parse(row[static_cast<std::size_t>(2 + 2 * k)]);
        }
        out.push_back(c);
    }
    return out;
}

void write_witness(const std::filesystem::path& path, std::span<const WitnessRow> rows) {
    auto out = open_out(path);
    out << kWitnessHeader << '\n';
    for (const auto& r : rows) {
        out << format17(r.T1) << ',' << format17(r.T2) << ',' << format17(r.wb_sim) << ',' << format17(r.wb_theory)
            << '\n';
    }
}

std::vector<WitnessRow> read_witness(const std::filesystem::path& path) {
    std::vector<WitnessRow> out;
    for (const auto& row : read_table(path, kWitnessHeader)) {
        require_width(row, 4);
        out.push_back({parse(row[0]), parse(row[1]), parse(row[2]), parse(row[3])});
    }
    return out;
}

void write_rsweep(const std::filesystem::path& path, std::span<const RSweepPoint> rows) {
    auto out = open_out(path);
    out << kRSweepHeader << '\n';
    for (const auto& r : rows) out << format17(r.r) << ',' << format17(r.sigma) << '\n';
}

std::vector<RSweepPoint> read_rsweep(const std::filesystem::path& path) {
    std::vector<RSweepPoint> out;
    for (const auto& row : read_table(path, kRSweepHeader)) {
        require_width(row, 2);
        out.push_back({0.0, parse(row[0]), parse(row[1])});
    }
    return out;
}

void write_conditioning(const std::filesystem::path& path, std::span<const ConditioningRow> rows) {
    auto out = open_out(path);
    out << kConditioningHeader << '\n';
    for (const auto& r : rows) out << r.pair_set << ',' << format17(r.kappa) << ',' << format17(r.det) << '\n';
}

std::vector<ConditioningRow> read_conditioning(const std::filesystem::path& path) {
    std::vector<ConditioningRow> out;
    for (const auto& row : read_table(path, kConditioningHeader)) {
        require_width(row, 3);
        out.push_back({row[0], parse(row[1]), parse(row[2])});
    }
    return out;
}

}  // namespace vdimer
