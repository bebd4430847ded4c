#pragma once

#include <string>
#include <string_view>

namespace mdaudit {

std::string sha256_hex(std::string_view bytes);

std::string base64_encode(std::string_view bytes);
// Throws ParseError on characters outside the alphabet or bad padding.
std::string base64_decode(std::string_view text);

}  // namespace mdaudit
