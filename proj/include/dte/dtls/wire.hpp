// Big-endian readers and writers for TLS presentation-language structures.
#pragma once

#include "dte/bytes.hpp"

#include <cstdint>

namespace dte::dtls {

class WireWriter {
 public:
   void u8(uint8_t v) { m_out.push_back(v); }
   void u16(uint16_t v) { uint_be(v, 2); }
   void u24(uint32_t v) { uint_be(v, 3); }
   void u48(uint64_t v) { uint_be(v, 6); }
   void raw(ByteSpan b) { m_out.insert(m_out.end(), b.begin(), b.end()); }

   /// Length-prefixed vector; the prefix is len_bytes wide. UsageError if it does not fit.
   void vec(size_t len_bytes, ByteSpan b);

   const Bytes& bytes() const { return m_out; }
   Bytes take() { return std::move(m_out); }

 private:
   void uint_be(uint64_t v, size_t n);
   Bytes m_out;
};

/// Every read past the end throws MalformedInput.
class WireReader {
 public:
   explicit WireReader(ByteSpan in) : m_in(in) {}

   uint8_t u8() { return static_cast<uint8_t>(uint_be(1)); }
   uint16_t u16() { return static_cast<uint16_t>(uint_be(2)); }
   uint32_t u24() { return static_cast<uint32_t>(uint_be(3)); }
   uint64_t u48() { return uint_be(6); }
   ByteSpan raw(size_t n);
   /// Length-prefixed vector with the length restricted to [min_len, max_len].
   ByteSpan vec(size_t len_bytes, size_t min_len, size_t max_len);

   size_t remaining() const { return m_in.size() - m_pos; }
   bool empty() const { return remaining() == 0; }
   /// MalformedInput if bytes are left over.
   void finish() const;

 private:
   uint64_t uint_be(size_t n);
   ByteSpan m_in;
   size_t m_pos = 0;
};

}  // namespace dte::dtls
