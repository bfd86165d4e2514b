#include "dte/bytes.hpp"

#include "dte/errors.hpp"

#include <cctype>

namespace dte {

std::string to_hex(ByteSpan data) {
   static constexpr char kDigits[] = "0123456789abcdef";
   std::string out;
   out.reserve(data.size() * 2);
   for(uint8_t b : data) {
      out.push_back(kDigits[b >> 4]);
      out.push_back(kDigits[b & 0x0f]);
   }
   return out;
}

namespace {

int nibble(char c) {
   if(c >= '0' && c <= '9') {
      return c - '0';
   }
   if(c >= 'a' && c <= 'f') {
      return c - 'a' + 10;
   }
   if(c >= 'A' && c <= 'F') {
      return c - 'A' + 10;
   }
   return -1;
}

}  // namespace

Bytes from_hex(std::string_view hex) {
   Bytes out;
   int pending = -1;
   for(char c : hex) {
      if(std::isspace(static_cast<unsigned char>(c))) {
         continue;
      }
      const int v = nibble(c);
      if(v < 0) {
         throw MalformedInput("invalid hex character");
      }
      if(pending < 0) {
         pending = v;
      } else {
         out.push_back(static_cast<uint8_t>((pending << 4) | v));
         pending = -1;
      }
   }
   if(pending >= 0) {
      throw MalformedInput("odd number of hex digits");
   }
   return out;
}

void secure_zero(std::span<uint8_t> data) {
   volatile uint8_t* p = data.data();
   for(size_t i = 0; i != data.size(); ++i) {
      p[i] = 0;
   }
}

bool constant_time_equal(ByteSpan a, ByteSpan b) {
   if(a.size() != b.size()) {
      return false;
   }
   uint8_t diff = 0;
   for(size_t i = 0; i != a.size(); ++i) {
      diff |= a[i] ^ b[i];
   }
   return diff == 0;
}

}  // namespace dte
