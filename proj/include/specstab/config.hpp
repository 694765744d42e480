#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "specstab/errors.hpp"
#include "specstab/spectral.hpp"

namespace specstab {

// Flat key/value configuration with typed sections. The parser is strict:
// unknown sections, unknown keys, duplicate keys, and malformed values are
// all config errors, so a typo cannot silently fall back to a default.
struct run_config {
    // [domain]
    rectangle domain;
    // [modes]
    int m_modes = 120;
    int n_ctrl = 6;
    double m = 120.0;
    int tail_count = 0;   // 0 selects the default 10*N + 200
    int oversample = 4;
    int floor_points = 64;
    // [nonlinearity]
    std::string f_kind = "zero";
    double f_a = 0.0;
    double f_b = 0.0;
    double declared_l = 0.0;
    // [initial]
    std::string init_kind = "cos(x)";
    double init_amplitude = 1.0;
    int init_jx = 1;
    int init_ky = 1;
    // [partition]
    std::vector<double> vertical_lines;
    std::vector<double> horizontal_lines;
    // [observer]
    int m_sub = 40;
    std::string eps0 = "projected"; // or "zero"
    // [integrator]
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;
    double t_end = 1.0;
    int sample_count = 201;
    // [output]
    std::string out_dir = "out";
    bool dump_state = false;
    // [meta]
    std::uint64_t seed = 0;

    void validate() const {
        domain.validate();
        if (m_modes < 2) throw config_error("m_modes must be >= 2");
        if (n_ctrl < 1 || n_ctrl >= m_modes) throw config_error("need 1 <= n < m_modes");
        if (oversample < 1) throw config_error("oversample must be >= 1");
        if (floor_points < 1) throw config_error("floor_points must be >= 1");
        if (m_sub < 1) throw config_error("m_sub must be >= 1");
        if (!(t_end > 0)) throw config_error("t_end must be positive");
        if (sample_count < 2) throw config_error("sample_count must be >= 2");
        if (!(rel_tol > 0) || !(abs_tol > 0)) throw config_error("tolerances must be positive");
        if (declared_l < 0) throw config_error("declared_l must be nonnegative");
        if (init_kind != "cos(x)" && init_kind != "mode" && init_kind != "zero")
            throw config_error("initial kind must be one of: cos(x), mode, zero");
        if (eps0 != "projected" && eps0 != "zero")
            throw config_error("observer eps0 must be 'projected' or 'zero'");
        if (init_jx < 1 || init_ky < 1) throw config_error("initial mode indices must be >= 1");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double(const std::string& v, const std::string& where) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw config_error("expected a number for " + where + ", got '" + v + "'");
    return x;
}

inline long long parse_int(const std::string& v, const std::string& where) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw config_error("expected an integer for " + where + ", got '" + v + "'");
    return x;
}

inline bool parse_bool(const std::string& v, const std::string& where) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw config_error("expected true/false for " + where + ", got '" + v + "'");
}

inline std::vector<double> parse_list(const std::string& v, const std::string& where) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(item, where));
    }
    return out;
}

inline edge parse_edge(const std::string& v) {
    if (v == "left") return edge::left;
    if (v == "right") return edge::right;
    if (v == "bottom") return edge::bottom;
    if (v == "top") return edge::top;
    throw config_error("controlled_edge must be one of: left, right, bottom, top");
}

} // namespace detail

inline run_config parse_config_text(const std::string& text) {
    run_config cfg;
    std::string section;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = detail::trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        const std::string at = " (line " + std::to_string(lineno) + ")";
        if (line.front() == '[') {
            if (line.back() != ']') throw config_error("unterminated section header" + at);
            section = line.substr(1, line.size() - 2);
            static const std::set<std::string> known = {
                "domain", "modes", "nonlinearity", "initial", "partition",
                "observer", "integrator", "output", "meta"};
            if (!known.count(section)) throw config_error("unknown section [" + section + "]" + at);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw config_error("expected key = value" + at);
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (section.empty()) throw config_error("key outside any section" + at);
        const std::string full = section + "." + key;
        if (!seen.insert(full).second) throw config_error("duplicate key " + full + at);

        try {
        if (full == "domain.width") cfg.domain.width = detail::parse_double(val, full);
        else if (full == "domain.height") cfg.domain.height = detail::parse_double(val, full);
        else if (full == "domain.controlled_edge") cfg.domain.controlled_edge = detail::parse_edge(val);
        else if (full == "modes.m_modes") cfg.m_modes = int(detail::parse_int(val, full));
        else if (full == "modes.n") cfg.n_ctrl = int(detail::parse_int(val, full));
        else if (full == "modes.m") cfg.m = detail::parse_double(val, full);
        else if (full == "modes.tail_count") cfg.tail_count = int(detail::parse_int(val, full));
        else if (full == "modes.oversample") cfg.oversample = int(detail::parse_int(val, full));
        else if (full == "modes.floor_points") cfg.floor_points = int(detail::parse_int(val, full));
        else if (full == "nonlinearity.kind") cfg.f_kind = val;
        else if (full == "nonlinearity.a") cfg.f_a = detail::parse_double(val, full);
        else if (full == "nonlinearity.b") cfg.f_b = detail::parse_double(val, full);
        else if (full == "nonlinearity.declared_l") cfg.declared_l = detail::parse_double(val, full);
        else if (full == "initial.kind") cfg.init_kind = val;
        else if (full == "initial.amplitude") cfg.init_amplitude = detail::parse_double(val, full);
        else if (full == "initial.jx") cfg.init_jx = int(detail::parse_int(val, full));
        else if (full == "initial.ky") cfg.init_ky = int(detail::parse_int(val, full));
        else if (full == "partition.vertical_lines") cfg.vertical_lines = detail::parse_list(val, full);
        else if (full == "partition.horizontal_lines") cfg.horizontal_lines = detail::parse_list(val, full);
        else if (full == "observer.m_sub") cfg.m_sub = int(detail::parse_int(val, full));
        else if (full == "observer.eps0") cfg.eps0 = val;
        else if (full == "integrator.rel_tol") cfg.rel_tol = detail::parse_double(val, full);
        else if (full == "integrator.abs_tol") cfg.abs_tol = detail::parse_double(val, full);
        else if (full == "integrator.t_end") cfg.t_end = detail::parse_double(val, full);
        else if (full == "integrator.sample_count") cfg.sample_count = int(detail::parse_int(val, full));
        else if (full == "output.directory") cfg.out_dir = val;
        else if (full == "output.dump_state") cfg.dump_state = detail::parse_bool(val, full);
        else if (full == "meta.seed") cfg.seed = std::uint64_t(detail::parse_int(val, full));
        else throw config_error("unknown key " + full);
        } catch (const config_error& e) {
            // value and key errors both cite the offending line
            throw config_error(std::string(e.what()) + at);
        }
    }
    cfg.validate();
    return cfg;
}

inline run_config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

// Canonical serialization: fixed field order, full precision. Two configs
// hash equal exactly when every field matches.
inline std::string canonical_string(const run_config& c) {
    std::ostringstream out;
    char buf[40];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "domain.width=" << num(c.domain.width) << '\n'
        << "domain.height=" << num(c.domain.height) << '\n'
        << "domain.controlled_edge=" << edge_name(c.domain.controlled_edge) << '\n'
        << "modes.m_modes=" << c.m_modes << '\n'
        << "modes.n=" << c.n_ctrl << '\n'
        << "modes.m=" << num(c.m) << '\n'
        << "modes.tail_count=" << c.tail_count << '\n'
        << "modes.oversample=" << c.oversample << '\n'
        << "modes.floor_points=" << c.floor_points << '\n'
        << "nonlinearity.kind=" << c.f_kind << '\n'
        << "nonlinearity.a=" << num(c.f_a) << '\n'
        << "nonlinearity.b=" << num(c.f_b) << '\n'
        << "nonlinearity.declared_l=" << num(c.declared_l) << '\n'
        << "initial.kind=" << c.init_kind << '\n'
        << "initial.amplitude=" << num(c.init_amplitude) << '\n'
        << "initial.jx=" << c.init_jx << '\n'
        << "initial.ky=" << c.init_ky << '\n';
    out << "partition.vertical_lines=";
    for (std::size_t i = 0; i < c.vertical_lines.size(); ++i)
        out << (i ? "," : "") << num(c.vertical_lines[i]);
    out << '\n' << "partition.horizontal_lines=";
    for (std::size_t i = 0; i < c.horizontal_lines.size(); ++i)
        out << (i ? "," : "") << num(c.horizontal_lines[i]);
    out << '\n'
        << "observer.m_sub=" << c.m_sub << '\n'
        << "observer.eps0=" << c.eps0 << '\n'
        << "integrator.rel_tol=" << num(c.rel_tol) << '\n'
        << "integrator.abs_tol=" << num(c.abs_tol) << '\n'
        << "integrator.t_end=" << num(c.t_end) << '\n'
        << "integrator.sample_count=" << c.sample_count << '\n'
        << "meta.seed=" << c.seed << '\n';
    // the [output] section is deliberately absent: where results are written
    // does not identify the numerical experiment
    return out.str();
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string config_hash(const run_config& c) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_string(c))));
    return buf;
}

} // namespace specstab
