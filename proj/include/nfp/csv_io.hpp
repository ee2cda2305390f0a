// Diagnostics CSV: header t,mass,F,D,rho_min,rho_max and one
// 17-significant-digit row per record. Byte-deterministic for identical
// input, lossless on read-back.
#pragma once

#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfp/config.hpp"
#include "nfp/functionals.hpp"

namespace nfp {

inline constexpr const char* kDiagnosticsHeader = "t,mass,F,D,rho_min,rho_max";

inline std::string diagnostics_csv(std::span<const DiagnosticsRecord> records) {
    if (records.empty()) throw std::invalid_argument("diagnostics_csv: no records");
    std::ostringstream os;
    os << kDiagnosticsHeader << "\n";
    for (const auto& r : records)
        os << format_g17(r.t) << "," << format_g17(r.mass) << "," << format_g17(r.F) << ","
           << format_g17(r.D) << "," << format_g17(r.rho_min) << "," << format_g17(r.rho_max)
           << "\n";
    return os.str();
}

inline void write_diagnostics_csv(std::span<const DiagnosticsRecord> records,
                                  const std::string& path) {
    const std::string body = diagnostics_csv(records);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_diagnostics_csv: cannot open '" + path + "'");
    out << body;
    if (!out) throw std::runtime_error("write_diagnostics_csv: write failed for '" + path + "'");
}

inline std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_diagnostics_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kDiagnosticsHeader)
        throw std::runtime_error("read_diagnostics_csv: unexpected header in '" + path + "'");
    std::vector<DiagnosticsRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        DiagnosticsRecord r;
        double* fields[6] = {&r.t, &r.mass, &r.F, &r.D, &r.rho_min, &r.rho_max};
        std::istringstream ss(line);
        std::string tok;
        for (int k = 0; k < 6; ++k) {
            if (!std::getline(ss, tok, ','))
                throw std::runtime_error("read_diagnostics_csv: short row in '" + path + "'");
            *fields[k] = std::stod(tok);
        }
        records.push_back(r);
    }
    return records;
}

}  // namespace nfp
