// output.hpp — CSV/JSON tables and command results

#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace berrytherm::cli {

using json = nlohmann::json;

enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitCertification = 4 };

struct CommandResult {
    int exit_code = kExitOk;
    std::string output;      // goes to stdout or --out
    std::string diagnostic;  // goes to stderr
};

inline std::string fmt17(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Non-finite values become strings so the document stays valid JSON.
inline json json_number(double x) {
    if (std::isfinite(x)) return x;
    return fmt17(x);
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::string csv() const {
        std::string out;
        for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
        out += '\n';
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + fmt17(row[c]);
            out += '\n';
        }
        return out;
    }

    json to_json() const {
        json rs = json::array();
        for (const auto& row : rows) {
            json r = json::array();
            for (double x : row) r.push_back(json_number(x));
            rs.push_back(std::move(r));
        }
        return json{{"columns", columns}, {"rows", std::move(rs)}};
    }

    std::string render(const std::string& format) const { return format == "json" ? to_json().dump(2) + "\n" : csv(); }
};

}  // namespace berrytherm::cli
