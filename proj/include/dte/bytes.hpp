// Byte buffers and hex helpers.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dte {

using Bytes = std::vector<uint8_t>;
using ByteSpan = std::span<const uint8_t>;

std::string to_hex(ByteSpan data);

/// Accepts upper or lower case, ignores whitespace; throws MalformedInput otherwise.
Bytes from_hex(std::string_view hex);

inline Bytes concat(std::initializer_list<ByteSpan> parts) {
   Bytes out;
   for(auto p : parts) {
      out.insert(out.end(), p.begin(), p.end());
   }
   return out;
}

inline ByteSpan as_bytes(std::string_view s) {
   return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

/// Overwrites memory in a way the optimizer may not elide.
void secure_zero(std::span<uint8_t> data);

/// Constant-time equality for equal-length spans; false on length mismatch.
bool constant_time_equal(ByteSpan a, ByteSpan b);

}  // namespace dte
