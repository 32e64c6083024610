#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "afc/errors.hpp"
#include "afc/fitting.hpp"
#include "afc/timedomain.hpp"

namespace afc {

namespace detail {

/// Full-round-trip decimal formatting (parse(format(x)) == x).
inline std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, long line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        while (used < s.size() && (s[used] == ' ' || s[used] == '\t')) ++used;
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" + s + "'",
                         line_no);
    }
}

}  // namespace detail

/// Write a reflectivity trace as CSV: '#' meta headers, then frequency_hz,power.
inline void write_trace_csv(const std::string& path, const ReflectivityTrace& trace) {
    std::ofstream f(path);
    if (!f) throw ParseError("cannot open '" + path + "' for writing");
    f << "# reflectivity trace\n";
    for (const auto& [key, value] : trace.meta) f << "# " << key << " = " << value << "\n";
    f << "# columns: frequency_hz,power\n";
    for (std::size_t i = 0; i < trace.freq.size(); ++i)
        f << detail::fmt_full(trace.freq[i]) << "," << detail::fmt_full(trace.power[i])
          << "\n";
}

/// Read a reflectivity trace CSV written by write_trace_csv (or compatible).
inline ReflectivityTrace read_trace_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open '" + path + "'");
    ReflectivityTrace t;
    std::string line;
    long line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            const auto eq = line.find('=');
            if (line.size() > 1 && eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                std::string value = line.substr(eq + 1);
                auto trim = [](std::string& s) {
                    const auto b = s.find_first_not_of(" \t");
                    const auto e = s.find_last_not_of(" \t\r");
                    s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
                };
                trim(key);
                trim(value);
                if (!key.empty()) t.meta[key] = value;
            }
            continue;
        }
        const auto cols = detail::split_csv_line(line);
        if (cols.size() != 2)
            throw ParseError("line " + std::to_string(line_no) +
                                 ": expected 2 columns, got " + std::to_string(cols.size()),
                             line_no);
        t.freq.push_back(detail::parse_double(cols[0], line_no));
        t.power.push_back(detail::parse_double(cols[1], line_no));
    }
    if (t.freq.empty()) throw ParseError("'" + path + "' contains no data rows");
    validate(t);
    return t;
}

/// Write a real spectrum as CSV: frequency_hz,value.
inline void write_spectrum_csv(const std::string& path, const FrequencyGrid& grid,
                               const std::vector<double>& values,
                               const std::string& value_name) {
    if (values.size() != grid.count)
        throw InvalidArgumentError("spectrum length does not match grid");
    std::ofstream f(path);
    if (!f) throw ParseError("cannot open '" + path + "' for writing");
    f << "# columns: frequency_hz," << value_name << "\n";
    for (std::size_t i = 0; i < grid.count; ++i)
        f << detail::fmt_full(grid.freq(i)) << "," << detail::fmt_full(values[i]) << "\n";
}

/// Read a two-column spectrum CSV (frequency_hz, value) with '#' headers.
inline std::pair<std::vector<double>, std::vector<double>> read_spectrum_csv(
    const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open '" + path + "'");
    std::vector<double> freq, val;
    std::string line;
    long line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto cols = detail::split_csv_line(line);
        if (cols.size() != 2)
            throw ParseError("line " + std::to_string(line_no) +
                                 ": expected 2 columns, got " + std::to_string(cols.size()),
                             line_no);
        freq.push_back(detail::parse_double(cols[0], line_no));
        val.push_back(detail::parse_double(cols[1], line_no));
    }
    if (freq.empty()) throw ParseError("'" + path + "' contains no data rows");
    return {freq, val};
}

/// Write a time trace as CSV: time_s,re,im,intensity.
inline void write_time_csv(const std::string& path, const Pulse& pulse) {
    std::ofstream f(path);
    if (!f) throw ParseError("cannot open '" + path + "' for writing");
    f << "# columns: time_s,re,im,intensity\n";
    for (std::size_t i = 0; i < pulse.samples.size(); ++i) {
        const cplx v = pulse.samples[i];
        f << detail::fmt_full(pulse.time(i)) << "," << detail::fmt_full(v.real()) << ","
          << detail::fmt_full(v.imag()) << "," << detail::fmt_full(std::norm(v)) << "\n";
    }
}

}  // namespace afc
