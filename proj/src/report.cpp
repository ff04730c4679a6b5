#include "rowspray/report.hpp"

#include <fstream>

#include <fmt/format.h>

#include "rowspray/errors.hpp"

namespace rowspray {

void write_report(const std::string& path, const ReportEntries& entries) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot create " + path);
    for (const auto& [key, value] : entries) out << key << " = " << value << "\n";
    if (!out) throw IoError("failed writing " + path);
}

std::map<std::string, std::string> read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::map<std::string, std::string> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(fmt::format("{}:{}: expected 'key = value'", path, line_no));
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError(fmt::format("{}:{}: empty key", path, line_no));
        out[key] = value;
    }
    return out;
}

std::string format_optional(std::optional<double> value) {
    return value ? fmt::format("{}", *value) : "undefined";
}

}  // namespace rowspray
