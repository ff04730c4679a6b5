#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rowspray {

/// Plain-text key-value documents, one `key = value` per line. Used for all
/// human/machine-readable reports and for injected count files.
using ReportEntries = std::vector<std::pair<std::string, std::string>>;

void write_report(const std::string& path, const ReportEntries& entries);
std::map<std::string, std::string> read_report(const std::string& path);

std::string format_optional(std::optional<double> value);

}  // namespace rowspray
