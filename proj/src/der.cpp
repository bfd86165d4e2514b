#include "dte/der.hpp"

#include "dte/errors.hpp"

#include <cstdio>

namespace dte::der {

namespace {

[[noreturn]] void malformed(const char* what) {
   throw MalformedInput(std::string("DER: ") + what);
}

unsigned digits(std::string_view s, size_t off, size_t n) {
   unsigned v = 0;
   for(size_t i = off; i < off + n; ++i) {
      if(s[i] < '0' || s[i] > '9') {
         malformed("non-digit in time");
      }
      v = v * 10 + static_cast<unsigned>(s[i] - '0');
   }
   return v;
}

Bytes encode_length(size_t len) {
   if(len < 0x80) {
      return Bytes{static_cast<uint8_t>(len)};
   }
   Bytes be;
   for(size_t v = len; v > 0; v >>= 8) {
      be.insert(be.begin(), static_cast<uint8_t>(v));
   }
   be.insert(be.begin(), static_cast<uint8_t>(0x80 | be.size()));
   return be;
}

}  // namespace

// Howard Hinnant's civil-calendar algorithm.
int64_t days_from_civil(int64_t y, unsigned m, unsigned d) {
   y -= m <= 2;
   const int64_t era = (y >= 0 ? y : y - 399) / 400;
   const unsigned yoe = static_cast<unsigned>(y - era * 400);
   const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
   const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
   return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

uint8_t Reader::peek_tag() const {
   if(empty()) {
      malformed("unexpected end of data");
   }
   return m_data[m_pos];
}

Element Reader::next() {
   const size_t start = m_pos;
   const size_t avail = m_data.size() - m_pos;
   if(avail < 2) {
      malformed("truncated header");
   }
   const uint8_t tag = m_data[m_pos];
   if((tag & 0x1f) == 0x1f) {
      malformed("high tag numbers are not supported");
   }
   size_t pos = m_pos + 1;
   size_t len = m_data[pos++];
   if(len == 0x80) {
      malformed("indefinite length");
   }
   if(len > 0x80) {
      const size_t n = len & 0x7f;
      if(n > 4 || pos + n > m_data.size()) {
         malformed("bad length-of-length");
      }
      if(m_data[pos] == 0) {
         malformed("non-minimal length");
      }
      len = 0;
      for(size_t i = 0; i < n; ++i) {
         len = (len << 8) | m_data[pos++];
      }
      if(len < 0x80) {
         malformed("non-minimal length");
      }
   }
   if(len > m_data.size() - pos) {
      malformed("length exceeds input");
   }
   m_pos = pos + len;
   return Element{tag, m_data.subspan(pos, len), m_data.subspan(start, m_pos - start)};
}

Element Reader::expect(uint8_t tag) {
   if(peek_tag() != tag) {
      malformed("unexpected tag");
   }
   return next();
}

void Reader::finish() const {
   if(!empty()) {
      malformed("trailing data");
   }
}

BigUint Reader::read_uint() {
   auto c = expect(kInteger).contents;
   if(c.empty()) {
      malformed("empty INTEGER");
   }
   if(c[0] & 0x80) {
      malformed("negative INTEGER");
   }
   if(c.size() > 1 && c[0] == 0 && !(c[1] & 0x80)) {
      malformed("non-minimal INTEGER");
   }
   if(c.size() > BigUint::kLimbs * 8 + 1) {
      malformed("INTEGER too large");
   }
   return BigUint::from_bytes(c);
}

bool Reader::read_bool() {
   auto c = expect(kBoolean).contents;
   if(c.size() != 1 || (c[0] != 0x00 && c[0] != 0xff)) {
      malformed("bad BOOLEAN");
   }
   return c[0] == 0xff;
}

std::string Reader::read_oid() {
   auto c = expect(kOid).contents;
   if(c.empty() || (c.back() & 0x80)) {
      malformed("bad OID");
   }
   std::string out;
   uint64_t v = 0;
   bool first = true;
   bool at_start = true;
   for(uint8_t b : c) {
      if(at_start && b == 0x80) {
         malformed("non-minimal OID arc");
      }
      if(v > (uint64_t(1) << 56)) {
         malformed("OID arc too large");
      }
      v = (v << 7) | (b & 0x7f);
      at_start = false;
      if(b & 0x80) {
         continue;
      }
      if(first) {
         const uint64_t a = v < 80 ? v / 40 : 2;
         out = std::to_string(a) + "." + std::to_string(v - 40 * a);
         first = false;
      } else {
         out += "." + std::to_string(v);
      }
      v = 0;
      at_start = true;
   }
   return out;
}

ByteSpan Reader::read_bit_string() {
   auto c = expect(kBitString).contents;
   if(c.empty() || c[0] != 0) {
      malformed("BIT STRING with unused bits");
   }
   return c.subspan(1);
}

int64_t Reader::read_time() {
   const auto e = next();
   std::string_view s(reinterpret_cast<const char*>(e.contents.data()), e.contents.size());
   int64_t year;
   size_t off;
   if(e.tag == kUtcTime) {
      if(s.size() != 13) {
         malformed("UTCTime must be YYMMDDHHMMSSZ");
      }
      const unsigned yy = digits(s, 0, 2);
      year = yy < 50 ? 2000 + yy : 1900 + yy;
      off = 2;
   } else if(e.tag == kGeneralizedTime) {
      if(s.size() != 15) {
         malformed("GeneralizedTime must be YYYYMMDDHHMMSSZ");
      }
      year = digits(s, 0, 4);
      off = 4;
   } else {
      malformed("expected a time");
   }
   if(s.back() != 'Z') {
      malformed("time must be UTC");
   }
   const unsigned mon = digits(s, off, 2), day = digits(s, off + 2, 2);
   const unsigned hh = digits(s, off + 4, 2), mm = digits(s, off + 6, 2), ss = digits(s, off + 8, 2);
   if(mon < 1 || mon > 12 || day < 1 || day > 31 || hh > 23 || mm > 59 || ss > 59) {
      malformed("time field out of range");
   }
   return days_from_civil(year, mon, day) * 86400 + hh * 3600 + mm * 60 + ss;
}

Bytes tlv(uint8_t tag, ByteSpan contents) {
   Bytes out{tag};
   auto len = encode_length(contents.size());
   out.insert(out.end(), len.begin(), len.end());
   out.insert(out.end(), contents.begin(), contents.end());
   return out;
}

Bytes sequence(std::initializer_list<ByteSpan> parts) {
   return tlv(kSequence, concat(parts));
}

Bytes integer(const BigUint& v) {
   Bytes be = v.is_zero() ? Bytes{0} : v.to_bytes((v.bitlen() + 7) / 8);
   if(be[0] & 0x80) {
      be.insert(be.begin(), 0);
   }
   return tlv(kInteger, be);
}

Bytes boolean(bool v) {
   const uint8_t b = v ? 0xff : 0x00;
   return tlv(kBoolean, ByteSpan(&b, 1));
}

Bytes oid(std::string_view dotted) {
   std::vector<uint64_t> arcs;
   size_t pos = 0;
   while(pos <= dotted.size()) {
      size_t dot = dotted.find('.', pos);
      if(dot == std::string_view::npos) {
         dot = dotted.size();
      }
      arcs.push_back(std::stoull(std::string(dotted.substr(pos, dot - pos))));
      pos = dot + 1;
   }
   if(arcs.size() < 2) {
      throw UsageError("OID needs at least two arcs");
   }
   Bytes body;
   auto put = [&](uint64_t v) {
      Bytes tmp{static_cast<uint8_t>(v & 0x7f)};
      for(v >>= 7; v > 0; v >>= 7) {
         tmp.insert(tmp.begin(), static_cast<uint8_t>(0x80 | (v & 0x7f)));
      }
      body.insert(body.end(), tmp.begin(), tmp.end());
   };
   put(arcs[0] * 40 + arcs[1]);
   for(size_t i = 2; i < arcs.size(); ++i) {
      put(arcs[i]);
   }
   return tlv(kOid, body);
}

Bytes bit_string(ByteSpan bits) {
   Bytes body{0};
   body.insert(body.end(), bits.begin(), bits.end());
   return tlv(kBitString, body);
}

Bytes octet_string(ByteSpan data) {
   return tlv(kOctetString, data);
}

Bytes utf8_string(std::string_view s) {
   return tlv(kUtf8String, as_bytes(s));
}

Bytes time(int64_t t) {
   int64_t days = t >= 0 ? t / 86400 : (t - 86399) / 86400;
   int64_t secs = t - days * 86400;
   // civil_from_days
   days += 719468;
   const int64_t era = (days >= 0 ? days : days - 146096) / 146097;
   const unsigned doe = static_cast<unsigned>(days - era * 146097);
   const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
   int64_t y = static_cast<int64_t>(yoe) + era * 400;
   const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
   const unsigned mp = (5 * doy + 2) / 153;
   const unsigned d = doy - (153 * mp + 2) / 5 + 1;
   const unsigned m = mp < 10 ? mp + 3 : mp - 9;
   y += m <= 2;
   char buf[32];
   const int hh = static_cast<int>(secs / 3600), mm = static_cast<int>(secs / 60 % 60), ss = static_cast<int>(secs % 60);
   if(y >= 1950 && y <= 2049) {
      std::snprintf(buf, sizeof(buf), "%02d%02u%02u%02d%02d%02dZ", static_cast<int>(y % 100), m, d, hh, mm, ss);
      return tlv(kUtcTime, as_bytes(buf));
   }
   std::snprintf(buf, sizeof(buf), "%04d%02u%02u%02d%02d%02dZ", static_cast<int>(y), m, d, hh, mm, ss);
   return tlv(kGeneralizedTime, as_bytes(buf));
}

}  // namespace dte::der
