#pragma once

// CSV and JSON emission plus a small structural validator for the shipped
// JSON schemas (the subset used there: type, properties, required, items,
// enum).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "slowlab/errors.hpp"
#include "slowlab/integrate.hpp"

namespace slowlab {

using nlohmann::json;

// ------------------------------------------------------------- CSV

inline std::string csv_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Header row, comma separated, '.' decimal marks.
inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw Error("csv row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << csv_double(row[i]);
        out << "\n";
    }
}

inline void write_trajectory_csv(const std::string& path, const TrajectoryRecord& rec,
                                 const std::vector<std::string>& state_names) {
    std::vector<std::string> header = {"t"};
    header.insert(header.end(), state_names.begin(), state_names.end());
    header.insert(header.end(), rec.observable_names.begin(), rec.observable_names.end());
    std::vector<std::vector<double>> rows;
    rows.reserve(rec.times.size());
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        std::vector<double> row;
        row.push_back(rec.times[i]);
        for (std::size_t k = 0; k < rec.states[i].size(); ++k)
            row.push_back(rec.states[i][k]);
        for (const auto& col : rec.observables) row.push_back(col[i]);
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

// ------------------------------------------------- schema validation

namespace detail {

inline bool type_matches(const json& value, const std::string& t) {
    if (t == "object") return value.is_object();
    if (t == "array") return value.is_array();
    if (t == "string") return value.is_string();
    if (t == "number") return value.is_number();
    if (t == "integer") return value.is_number_integer();
    if (t == "boolean") return value.is_boolean();
    if (t == "null") return value.is_null();
    return false;
}

} // namespace detail

/// Structural check of `value` against `schema`; returns the first problem
/// found, or an empty string.
inline std::string schema_mismatch(const json& value, const json& schema,
                                   const std::string& where = "$") {
    if (schema.contains("type")) {
        const json& t = schema.at("type");
        bool ok = false;
        if (t.is_string()) ok = detail::type_matches(value, t.get<std::string>());
        else
            for (const auto& ti : t)
                ok = ok || detail::type_matches(value, ti.get<std::string>());
        if (!ok) return where + ": type mismatch";
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& e : schema.at("enum")) ok = ok || (e == value);
        if (!ok) return where + ": not in enum";
    }
    if (value.is_object()) {
        if (schema.contains("required"))
            for (const auto& r : schema.at("required"))
                if (!value.contains(r.get<std::string>()))
                    return where + ": missing required '" + r.get<std::string>() + "'";
        if (schema.contains("properties"))
            for (auto it = schema.at("properties").begin(); it != schema.at("properties").end(); ++it)
                if (value.contains(it.key())) {
                    const std::string sub =
                        schema_mismatch(value.at(it.key()), it.value(), where + "." + it.key());
                    if (!sub.empty()) return sub;
                }
    }
    if (value.is_array() && schema.contains("items")) {
        for (std::size_t i = 0; i < value.size(); ++i) {
            const std::string sub = schema_mismatch(value[i], schema.at("items"),
                                                    where + "[" + std::to_string(i) + "]");
            if (!sub.empty()) return sub;
        }
    }
    return "";
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open: " + path);
    json j;
    in >> j;
    return j;
}

/// Validate against a shipped schema before writing; a mismatch is a bug.
inline void write_json_checked(const std::string& path, const json& value,
                               const json& schema) {
    const std::string problem = schema_mismatch(value, schema);
    if (!problem.empty())
        throw Error("emitted JSON does not match its schema: " + problem);
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << value.dump(2) << "\n";
}

} // namespace slowlab
