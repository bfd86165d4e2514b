#include "dte/dtls/wire.hpp"

#include "dte/errors.hpp"

namespace dte::dtls {

void WireWriter::uint_be(uint64_t v, size_t n) {
   for(size_t i = n; i-- > 0;) {
      m_out.push_back(static_cast<uint8_t>(v >> (8 * i)));
   }
}

void WireWriter::vec(size_t len_bytes, ByteSpan b) {
   if(len_bytes < 8 && b.size() >> (8 * len_bytes) != 0) {
      throw UsageError("vector too long for its length prefix");
   }
   uint_be(b.size(), len_bytes);
   raw(b);
}

uint64_t WireReader::uint_be(size_t n) {
   if(remaining() < n) {
      throw MalformedInput("truncated field");
   }
   uint64_t v = 0;
   for(size_t i = 0; i < n; ++i) {
      v = (v << 8) | m_in[m_pos++];
   }
   return v;
}

ByteSpan WireReader::raw(size_t n) {
   if(remaining() < n) {
      throw MalformedInput("truncated field");
   }
   auto out = m_in.subspan(m_pos, n);
   m_pos += n;
   return out;
}

ByteSpan WireReader::vec(size_t len_bytes, size_t min_len, size_t max_len) {
   const size_t n = static_cast<size_t>(uint_be(len_bytes));
   if(n < min_len || n > max_len) {
      throw MalformedInput("vector length out of range");
   }
   return raw(n);
}

void WireReader::finish() const {
   if(!empty()) {
      throw MalformedInput("trailing bytes");
   }
}

}  // namespace dte::dtls
