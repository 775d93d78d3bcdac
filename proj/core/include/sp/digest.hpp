#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace sp {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::string_view data);
Digest sha256(std::span<const std::uint8_t> data);

std::string toHex(const Digest& digest);

}  // namespace sp
