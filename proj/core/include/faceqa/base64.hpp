#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace faceqa::base64 {

/// Standard alphabet with '=' padding.
std::string encode(std::span<const std::uint8_t> bytes);
/// Throws Error(ParseError) on characters outside the alphabet or bad padding.
std::vector<std::uint8_t> decode(std::string_view text);

}  // namespace faceqa::base64
