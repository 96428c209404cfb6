#pragma once

// CSV writing with RFC-4180 quoting and a block of "# key: value" lines
// carrying provenance ahead of the header row.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "emlab/gauss_quad.hpp"

namespace emlab {

#ifndef EMLAB_VERSION
#define EMLAB_VERSION "0.1.0"
#endif

inline constexpr const char* kVersion = EMLAB_VERSION;

// Shortest round-trip text for a double; NaN becomes an empty field.
inline std::string fmt_double(double x) {
    if (std::isnan(x)) return "";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string quadrature_text(const QuadratureSpec& q) {
    return "nodes_per_lobe=" + std::to_string(q.nodes_per_lobe) + " abs_tol=" + fmt_double(q.abs_tol) +
           " truncation_radius=" + fmt_double(q.truncation_radius) +
           " max_nodes_per_lobe=" + std::to_string(q.max_nodes_per_lobe) +
           " max_panels=" + std::to_string(q.max_panels);
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void meta(const std::string& key, const std::string& value) {
        std::string v = value;
        for (auto& c : v)
            if (c == '\n' || c == '\r') c = ' ';
        os_ << "# " << key << ": " << v << '\n';
    }

    void header(const std::vector<std::string>& cols) {
        ncols_ = cols.size();
        row_text(cols);
    }

    void row(const std::vector<double>& vals) {
        std::vector<std::string> s;
        s.reserve(vals.size());
        for (double v : vals) s.push_back(fmt_double(v));
        row_text(s);
    }

    void row_text(const std::vector<std::string>& cells) {
        if (ncols_ && cells.size() != ncols_) throw DomainError("CsvWriter: row width differs from header");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os_ << ',';
            os_ << csv_quote(cells[i]);
        }
        os_ << '\n';
    }

private:
    std::ostream& os_;
    std::size_t ncols_ = 0;
};

}  // namespace emlab
