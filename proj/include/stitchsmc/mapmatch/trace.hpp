#pragma once

#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "stitchsmc/core/errors.hpp"
#include "stitchsmc/mapmatch/route_state.hpp"

namespace stitchsmc {

// GPS trace CSV: header `t,x,y`, one observation per row, seconds and plane
// metres, timestamps strictly increasing.

namespace detail {

inline std::string strip_spaces(const std::string& s) {
    std::string out;
    for (char c : s)
        if (c != ' ' && c != '\t' && c != '\r') out.push_back(c);
    return out;
}

inline double parse_field(const std::string& field, std::size_t line_no) {
    try {
        std::size_t used = 0;
        double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw SchemaError("trace line " + std::to_string(line_no) + ": '" + field +
                          "' is not a number");
    }
}

}  // namespace detail

// Pull-based reader so a consumer can be fed one observation at a time.
class TraceReader {
public:
    explicit TraceReader(std::istream& in) : in_(&in) { read_header(); }

    std::optional<GpsObservation> next() {
        std::string line;
        while (std::getline(*in_, line)) {
            ++line_no_;
            if (detail::strip_spaces(line).empty()) continue;
            GpsObservation obs = parse_row(line);
            if (have_last_ && !(obs.t > last_t_))
                throw SchemaError("trace line " + std::to_string(line_no_) +
                                  ": timestamps must be strictly increasing");
            last_t_ = obs.t;
            have_last_ = true;
            return obs;
        }
        return std::nullopt;
    }

private:
    void read_header() {
        std::string line;
        if (!std::getline(*in_, line) || detail::strip_spaces(line) != "t,x,y")
            throw SchemaError("trace is missing the 't,x,y' header");
        line_no_ = 1;
    }

    GpsObservation parse_row(const std::string& line) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(detail::strip_spaces(field));
        if (fields.size() != 3)
            throw SchemaError("trace line " + std::to_string(line_no_) + ": expected 3 fields, got " +
                              std::to_string(fields.size()));
        GpsObservation obs;
        obs.t = detail::parse_field(fields[0], line_no_);
        obs.point.x = detail::parse_field(fields[1], line_no_);
        obs.point.y = detail::parse_field(fields[2], line_no_);
        return obs;
    }

    std::istream* in_;
    std::size_t line_no_ = 0;
    double last_t_ = 0.0;
    bool have_last_ = false;
};

inline GpsTrace read_trace(std::istream& in) {
    TraceReader reader(in);
    GpsTrace trace;
    while (auto obs = reader.next()) trace.push_back(*obs);
    return trace;
}

inline GpsTrace read_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open trace file '" + path + "'");
    return read_trace(in);
}

inline void write_trace(std::ostream& out, const GpsTrace& trace) {
    out << "t,x,y\n";
    out.precision(17);
    for (const auto& obs : trace) out << obs.t << ',' << obs.point.x << ',' << obs.point.y << '\n';
}

inline void write_trace_file(const std::string& path, const GpsTrace& trace) {
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot open trace file '" + path + "' for writing");
    write_trace(out, trace);
}

}  // namespace stitchsmc
