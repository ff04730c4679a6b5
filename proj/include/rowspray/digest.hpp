#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace rowspray {

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(const std::string& text);
std::string sha256_file(const std::string& path);

}  // namespace rowspray
