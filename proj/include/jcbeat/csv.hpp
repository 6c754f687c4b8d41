#pragma once

// CSV output: header row, 17 significant digits, "nan" for missing values.

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <span>
#include <string>

namespace jcbeat::csv {

inline void write_value(std::ostream& out, double v) {
    if (std::isnan(v)) {
        out << "nan";
        return;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

inline void write_row(std::ostream& out, std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out << ',';
        write_value(out, values[i]);
    }
    out << '\n';
}

inline void write_row(std::ostream& out, std::initializer_list<double> values) {
    write_row(out, std::span<const double>(values.begin(), values.size()));
}

} // namespace jcbeat::csv
