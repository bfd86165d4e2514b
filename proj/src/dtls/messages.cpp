#include "dte/dtls/messages.hpp"

#include "dte/dtls/wire.hpp"
#include "dte/errors.hpp"

namespace dte::dtls {

namespace {

bool known_handshake_type(uint8_t t) {
   switch(t) {
      case 1: case 2: case 3: case 11: case 12: case 13: case 14: case 15: case 16: case 20: return true;
      default: return false;
   }
}

void write_extensions(WireWriter& w, const std::vector<Extension>& exts) {
   WireWriter inner;
   for(const auto& e : exts) {
      inner.u16(e.type);
      inner.vec(2, e.data);
   }
   w.vec(2, inner.bytes());
}

// Absent extension block and an empty one are distinct on the wire; both decode to no extensions.
std::vector<Extension> read_extensions(WireReader& r) {
   std::vector<Extension> out;
   if(r.empty()) {
      return out;
   }
   WireReader inner(r.vec(2, 0, 0xffff));
   while(!inner.empty()) {
      Extension e;
      e.type = inner.u16();
      auto data = inner.vec(2, 0, 0xffff);
      e.data.assign(data.begin(), data.end());
      for(const auto& seen : out) {
         if(seen.type == e.type) {
            throw MalformedInput("duplicate extension");
         }
      }
      out.push_back(std::move(e));
   }
   return out;
}

Random read_random(WireReader& r) {
   Random out;
   auto b = r.raw(32);
   std::copy(b.begin(), b.end(), out.begin());
   return out;
}

Bytes to_bytes(ByteSpan s) {
   return Bytes(s.begin(), s.end());
}

}  // namespace

std::string_view handshake_type_name(HandshakeType t) {
   switch(t) {
      case HandshakeType::ClientHello: return "ClientHello";
      case HandshakeType::ServerHello: return "ServerHello";
      case HandshakeType::HelloVerifyRequest: return "HelloVerifyRequest";
      case HandshakeType::Certificate: return "Certificate";
      case HandshakeType::ServerKeyExchange: return "ServerKeyExchange";
      case HandshakeType::CertificateRequest: return "CertificateRequest";
      case HandshakeType::ServerHelloDone: return "ServerHelloDone";
      case HandshakeType::CertificateVerify: return "CertificateVerify";
      case HandshakeType::ClientKeyExchange: return "ClientKeyExchange";
      case HandshakeType::Finished: return "Finished";
   }
   return "?";
}

Bytes HandshakeMessage::encode() const {
   WireWriter w;
   w.u8(static_cast<uint8_t>(header.type));
   w.u24(header.length);
   w.u16(header.message_seq);
   w.u24(header.fragment_offset);
   w.u24(header.fragment_length);
   w.raw(body);
   return w.take();
}

HandshakeMessage make_message(HandshakeType type, uint16_t seq, Bytes body) {
   if(body.size() >= (size_t(1) << 24)) {
      throw UsageError("handshake message too long");
   }
   HandshakeMessage m;
   m.header.type = type;
   m.header.length = static_cast<uint32_t>(body.size());
   m.header.message_seq = seq;
   m.header.fragment_offset = 0;
   m.header.fragment_length = m.header.length;
   m.body = std::move(body);
   return m;
}

std::vector<HandshakeMessage> parse_handshake_messages(ByteSpan payload) {
   std::vector<HandshakeMessage> out;
   WireReader r(payload);
   if(r.empty()) {
      throw MalformedInput("empty handshake record");
   }
   while(!r.empty()) {
      HandshakeMessage m;
      const uint8_t type = r.u8();
      if(!known_handshake_type(type)) {
         throw MalformedInput("unknown handshake type");
      }
      m.header.type = static_cast<HandshakeType>(type);
      m.header.length = r.u24();
      m.header.message_seq = r.u16();
      m.header.fragment_offset = r.u24();
      m.header.fragment_length = r.u24();
      if(m.header.fragment_offset != 0 || m.header.fragment_length != m.header.length) {
         throw MalformedInput("fragmented handshake messages are not supported");
      }
      m.body = to_bytes(r.raw(m.header.length));
      out.push_back(std::move(m));
   }
   return out;
}

Bytes encode_u16_list(size_t len_bytes, const std::vector<uint16_t>& v) {
   WireWriter inner;
   for(uint16_t x : v) {
      inner.u16(x);
   }
   WireWriter w;
   w.vec(len_bytes, inner.bytes());
   return w.take();
}

std::vector<uint16_t> decode_u16_list(ByteSpan data, size_t len_bytes) {
   WireReader r(data);
   WireReader list(r.vec(len_bytes, 2, 0xfffe));
   r.finish();
   if(list.remaining() % 2 != 0) {
      throw MalformedInput("odd-length 16-bit list");
   }
   std::vector<uint16_t> out;
   while(!list.empty()) {
      out.push_back(list.u16());
   }
   return out;
}

Bytes ClientHello::encode() const {
   WireWriter w;
   w.u16(version);
   w.raw(random);
   w.vec(1, session_id);
   w.vec(1, cookie);
   w.raw(encode_u16_list(2, cipher_suites));
   w.vec(1, compression_methods);
   write_extensions(w, extensions);
   return w.take();
}

ClientHello ClientHello::decode(ByteSpan body) {
   WireReader r(body);
   ClientHello ch;
   ch.version = r.u16();
   ch.random = read_random(r);
   ch.session_id = to_bytes(r.vec(1, 0, 32));
   ch.cookie = to_bytes(r.vec(1, 0, 255));
   WireReader suites(r.vec(2, 2, 0xfffe));
   if(suites.remaining() % 2 != 0) {
      throw MalformedInput("odd cipher suite list");
   }
   while(!suites.empty()) {
      ch.cipher_suites.push_back(suites.u16());
   }
   ch.compression_methods = to_bytes(r.vec(1, 1, 255));
   ch.extensions = read_extensions(r);
   r.finish();
   return ch;
}

Bytes HelloVerifyRequest::encode() const {
   WireWriter w;
   w.u16(version);
   w.vec(1, cookie);
   return w.take();
}

HelloVerifyRequest HelloVerifyRequest::decode(ByteSpan body) {
   WireReader r(body);
   HelloVerifyRequest h;
   h.version = r.u16();
   h.cookie = to_bytes(r.vec(1, 0, 255));
   r.finish();
   return h;
}

Bytes ServerHello::encode() const {
   WireWriter w;
   w.u16(version);
   w.raw(random);
   w.vec(1, session_id);
   w.u16(cipher_suite);
   w.u8(compression_method);
   write_extensions(w, extensions);
   return w.take();
}

ServerHello ServerHello::decode(ByteSpan body) {
   WireReader r(body);
   ServerHello sh;
   sh.version = r.u16();
   sh.random = read_random(r);
   sh.session_id = to_bytes(r.vec(1, 0, 32));
   sh.cipher_suite = r.u16();
   sh.compression_method = r.u8();
   sh.extensions = read_extensions(r);
   r.finish();
   return sh;
}

Bytes CertificateMsg::encode() const {
   WireWriter list;
   for(const auto& c : chain) {
      list.vec(3, c);
   }
   WireWriter w;
   w.vec(3, list.bytes());
   return w.take();
}

CertificateMsg CertificateMsg::decode(ByteSpan body) {
   WireReader r(body);
   WireReader list(r.vec(3, 0, 0xffffff));
   r.finish();
   CertificateMsg m;
   while(!list.empty()) {
      m.chain.push_back(to_bytes(list.vec(3, 1, 0xffffff)));
   }
   return m;
}

Bytes ServerKeyExchange::params() const {
   WireWriter w;
   w.u8(curve_type);
   w.u16(named_curve);
   w.vec(1, point);
   return w.take();
}

Bytes ServerKeyExchange::encode() const {
   WireWriter w;
   w.raw(params());
   w.u16(sig_alg);
   w.vec(2, signature);
   return w.take();
}

ServerKeyExchange ServerKeyExchange::decode(ByteSpan body) {
   WireReader r(body);
   ServerKeyExchange s;
   s.curve_type = r.u8();
   s.named_curve = r.u16();
   s.point = to_bytes(r.vec(1, 1, 255));
   s.sig_alg = r.u16();
   s.signature = to_bytes(r.vec(2, 0, 0xffff));
   r.finish();
   return s;
}

Bytes CertificateRequest::encode() const {
   WireWriter w;
   w.vec(1, certificate_types);
   w.raw(encode_u16_list(2, sig_algs));
   w.vec(2, authorities);
   return w.take();
}

CertificateRequest CertificateRequest::decode(ByteSpan body) {
   WireReader r(body);
   CertificateRequest c;
   c.certificate_types = to_bytes(r.vec(1, 1, 255));
   WireReader algs(r.vec(2, 2, 0xfffe));
   if(algs.remaining() % 2 != 0) {
      throw MalformedInput("odd signature algorithm list");
   }
   while(!algs.empty()) {
      c.sig_algs.push_back(algs.u16());
   }
   c.authorities = to_bytes(r.vec(2, 0, 0xffff));
   r.finish();
   return c;
}

Bytes ClientKeyExchange::encode() const {
   WireWriter w;
   w.vec(1, point);
   return w.take();
}

ClientKeyExchange ClientKeyExchange::decode(ByteSpan body) {
   WireReader r(body);
   ClientKeyExchange c;
   c.point = to_bytes(r.vec(1, 1, 255));
   r.finish();
   return c;
}

Bytes CertificateVerify::encode() const {
   WireWriter w;
   w.u16(sig_alg);
   w.vec(2, signature);
   return w.take();
}

CertificateVerify CertificateVerify::decode(ByteSpan body) {
   WireReader r(body);
   CertificateVerify c;
   c.sig_alg = r.u16();
   c.signature = to_bytes(r.vec(2, 0, 0xffff));
   r.finish();
   return c;
}

}  // namespace dte::dtls
