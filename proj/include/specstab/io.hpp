#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "specstab/errors.hpp"
#include "specstab/simulate.hpp"
#include "specstab/spectral.hpp"

namespace specstab {

// All CSV floats are written with 17 significant digits, which round-trips
// every double exactly through strtod.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct csv_table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    bool truncated = false;
};

inline void write_csv(const std::string& path, const csv_table& table) {
    std::ofstream out(path, std::ios::binary); // binary: byte-identical output everywhere
    if (!out) throw config_error("cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < table.header.size(); ++i)
        out << (i ? "," : "") << table.header[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_g17(row[i]);
        out << '\n';
    }
    if (table.truncated) out << "TRUNCATED\n";
    if (!out) throw config_error("write failed for '" + path + "'");
}

inline csv_table read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open '" + path + "' for reading");
    csv_table table;
    std::string line;
    if (!std::getline(in, line)) throw config_error("empty CSV file '" + path + "'");
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) table.header.push_back(cell);
    while (std::getline(in, line)) {
        if (line == "TRUNCATED") {
            table.truncated = true;
            break;
        }
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) throw config_error("bad CSV number '" + cell + "' in " + path);
            row.push_back(v);
        }
        if (row.size() != table.header.size())
            throw config_error("ragged CSV row in '" + path + "'");
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline csv_table trajectory_csv(const trajectory& traj) {
    csv_table t;
    t.header = {"t", "norm_p", "norm_eps", "norm_z"};
    for (int i = 1; i <= traj.n_ctrl; ++i) t.header.push_back("u_" + std::to_string(i));
    for (int s = 0; s < traj.sample_count(); ++s) {
        std::vector<double> row = {traj.times[std::size_t(s)], traj.norm_p[std::size_t(s)],
                                   traj.norm_eps[std::size_t(s)], traj.norm_z[std::size_t(s)]};
        for (int i = 0; i < traj.n_ctrl; ++i) row.push_back(traj.u(s, i));
        t.rows.push_back(std::move(row));
    }
    t.truncated = !traj.completed;
    return t;
}

inline csv_table spectrum_csv(const spectral_basis& basis) {
    csv_table t;
    t.header = {"n", "jx", "ky", "lambda", "bly_bound", "weyl_ratio", "trace_norm_sq"};
    const double vol = basis.domain().area();
    for (int n = 1; n <= basis.count(); ++n) {
        const eigen_mode& md = basis.mode(n);
        t.rows.push_back({double(n), double(md.jx), double(md.ky), md.lambda,
                          bly_lower_bound(n, 2, vol), weyl_ratio(basis, n), md.trace_norm_sq});
    }
    return t;
}

inline csv_table sweep_csv(const std::vector<sweep_row>& rows) {
    csv_table t;
    t.header = {"n", "norm_k", "zeta_term", "ibk_pinv_norm", "ibk_norm_bound", "margin",
                "certified"};
    for (const sweep_row& r : rows) {
        if (!r.error.empty()) continue;
        t.rows.push_back({double(r.n), r.norm_k, r.zeta_term, r.ibk_pinv_norm, r.ibk_norm_bound,
                          r.margin, r.certified ? 1.0 : 0.0});
    }
    return t;
}

// key = value summary, deterministic order chosen by the caller
inline void write_summary(const std::string& path,
                          const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open '" + path + "' for writing");
    for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
    if (!out) throw config_error("write failed for '" + path + "'");
}

// Self-describing little-endian dump of the full modal states.
inline void write_state_dump(const std::string& path, const trajectory& traj) {
    static_assert(std::endian::native == std::endian::little,
                  "state dump assumes a little-endian host");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open '" + path + "' for writing");
    const char magic[8] = {'S', 'S', 'T', 'A', 'B', 'D', 'M', 'P'};
    out.write(magic, 8);
    auto put_u32 = [&out](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    put_u32(1u); // format version
    put_u32(std::uint32_t(traj.m_modes));
    put_u32(std::uint32_t(traj.state_dim));
    put_u32(std::uint32_t(traj.sample_count()));
    for (int s = 0; s < traj.sample_count(); ++s) {
        const double t = traj.times[std::size_t(s)];
        out.write(reinterpret_cast<const char*>(&t), 8);
        for (int i = 0; i < traj.state_dim; ++i) {
            const double v = traj.states(s, i);
            out.write(reinterpret_cast<const char*>(&v), 8);
        }
    }
    if (!out) throw config_error("write failed for '" + path + "'");
}

struct state_dump {
    std::uint32_t version = 0;
    std::uint32_t m_modes = 0;
    std::uint32_t state_dim = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> states;
};

inline state_dump read_state_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open '" + path + "' for reading");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "SSTABDMP", 8) != 0)
        throw config_error("'" + path + "' is not a state dump");
    auto get_u32 = [&in]() {
        std::uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    state_dump d;
    d.version = get_u32();
    d.m_modes = get_u32();
    d.state_dim = get_u32();
    const std::uint32_t samples = get_u32();
    for (std::uint32_t s = 0; s < samples; ++s) {
        double t = 0;
        in.read(reinterpret_cast<char*>(&t), 8);
        std::vector<double> row(d.state_dim);
        in.read(reinterpret_cast<char*>(row.data()), std::streamsize(8 * d.state_dim));
        if (!in) throw config_error("short read in state dump '" + path + "'");
        d.times.push_back(t);
        d.states.push_back(std::move(row));
    }
    return d;
}

inline void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw config_error("cannot create output directory '" + dir + "': " + ec.message());
}

} // namespace specstab
