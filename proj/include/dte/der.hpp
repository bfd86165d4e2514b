// Strict DER reading and the small subset of DER writing the certificate
// tooling needs.
#pragma once

#include "dte/bigint.hpp"

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace dte::der {

enum Tag : uint8_t {
   kBoolean = 0x01,
   kInteger = 0x02,
   kBitString = 0x03,
   kOctetString = 0x04,
   kNull = 0x05,
   kOid = 0x06,
   kUtf8String = 0x0c,
   kPrintableString = 0x13,
   kUtcTime = 0x17,
   kGeneralizedTime = 0x18,
   kSequence = 0x30,
   kSet = 0x31,
};

constexpr uint8_t context(unsigned n, bool constructed = true) {
   return static_cast<uint8_t>(0x80 | (constructed ? 0x20 : 0) | n);
}

struct Element {
   uint8_t tag = 0;
   ByteSpan contents;
   ByteSpan raw;  // tag, length and contents exactly as encoded
};

/// Sequential reader over a run of DER elements. Every structural problem
/// (indefinite or non-minimal length, overrun, high tag numbers) throws MalformedInput.
class Reader {
 public:
   explicit Reader(ByteSpan data) : m_data(data) {}

   bool empty() const { return m_pos == m_data.size(); }
   uint8_t peek_tag() const;

   Element next();
   Element expect(uint8_t tag);

   /// Contents of the next element (which must carry `tag`) as a new reader.
   Reader enter(uint8_t tag) { return Reader(expect(tag).contents); }

   /// Throws MalformedInput if unread bytes remain.
   void finish() const;

   /// Non-negative INTEGER with minimal encoding that fits in BigUint.
   BigUint read_uint();
   bool read_bool();
   std::string read_oid();
   /// BIT STRING with zero unused bits.
   ByteSpan read_bit_string();
   /// UTCTime or GeneralizedTime in the DER "Z" form, as seconds since 1970.
   int64_t read_time();

 private:
   ByteSpan m_data;
   size_t m_pos = 0;
};

Bytes tlv(uint8_t tag, ByteSpan contents);
Bytes sequence(std::initializer_list<ByteSpan> parts);
Bytes integer(const BigUint& v);
Bytes boolean(bool v);
Bytes oid(std::string_view dotted);
Bytes bit_string(ByteSpan bits);
Bytes octet_string(ByteSpan data);
Bytes utf8_string(std::string_view s);
/// UTCTime for years 1950..2049, GeneralizedTime otherwise.
Bytes time(int64_t unix_seconds);

int64_t days_from_civil(int64_t y, unsigned m, unsigned d);

}  // namespace dte::der
