// Handshake message bodies for ECDHE-ECDSA-AES128-GCM-SHA256 over DTLS 1.2.
//
// Decoders enforce structure only (lengths, vector bounds, no trailing bytes);
// the handshake decides whether the negotiated values are acceptable.
#pragma once

#include "dte/bytes.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace dte::dtls {

enum class HandshakeType : uint8_t {
   ClientHello = 1,
   ServerHello = 2,
   HelloVerifyRequest = 3,
   Certificate = 11,
   ServerKeyExchange = 12,
   CertificateRequest = 13,
   ServerHelloDone = 14,
   CertificateVerify = 15,
   ClientKeyExchange = 16,
   Finished = 20,
};

std::string_view handshake_type_name(HandshakeType t);

inline constexpr uint16_t kCipherSuite = 0xC02B;  // ECDHE_ECDSA_WITH_AES_128_GCM_SHA256
inline constexpr uint16_t kSigEcdsaSha256 = 0x0403;
inline constexpr uint8_t kCertTypeEcdsaSign = 64;
inline constexpr uint8_t kNamedCurve = 3;
inline constexpr uint16_t kExtSupportedGroups = 0x000a;
inline constexpr uint16_t kExtPointFormats = 0x000b;
inline constexpr uint16_t kExtSignatureAlgorithms = 0x000d;
inline constexpr size_t kHandshakeHeaderLen = 12;
inline constexpr size_t kVerifyDataLen = 12;

using Random = std::array<uint8_t, 32>;

/// msg_type || length(3) || message_seq(2) || fragment_offset(3) || fragment_length(3)
struct HandshakeHeader {
   HandshakeType type{};
   uint32_t length = 0;
   uint16_t message_seq = 0;
   uint32_t fragment_offset = 0;
   uint32_t fragment_length = 0;
};

struct HandshakeMessage {
   HandshakeHeader header;
   Bytes body;

   /// Header plus body, exactly as carried and as hashed into the transcript.
   Bytes encode() const;
};

/// Unfragmented message (offset 0, fragment_length = length).
HandshakeMessage make_message(HandshakeType type, uint16_t seq, Bytes body);

/// Splits a handshake record payload into messages. MalformedInput for a
/// truncated header, unknown type, or any fragment that is not the whole message.
std::vector<HandshakeMessage> parse_handshake_messages(ByteSpan payload);

struct Extension {
   uint16_t type = 0;
   Bytes data;
};

struct ClientHello {
   uint16_t version = 0;
   Random random{};
   Bytes session_id;
   Bytes cookie;
   std::vector<uint16_t> cipher_suites;
   Bytes compression_methods;
   std::vector<Extension> extensions;

   Bytes encode() const;
   static ClientHello decode(ByteSpan body);
};

struct HelloVerifyRequest {
   uint16_t version = 0;
   Bytes cookie;

   Bytes encode() const;
   static HelloVerifyRequest decode(ByteSpan body);
};

struct ServerHello {
   uint16_t version = 0;
   Random random{};
   Bytes session_id;
   uint16_t cipher_suite = 0;
   uint8_t compression_method = 0;
   std::vector<Extension> extensions;

   Bytes encode() const;
   static ServerHello decode(ByteSpan body);
};

struct CertificateMsg {
   std::vector<Bytes> chain;

   Bytes encode() const;
   static CertificateMsg decode(ByteSpan body);
};

struct ServerKeyExchange {
   uint8_t curve_type = 0;
   uint16_t named_curve = 0;
   Bytes point;  // SEC1 encoding
   uint16_t sig_alg = 0;
   Bytes signature;  // DER

   /// curve_type || named_curve || point<1..255>: the ServerECDHParams.
   Bytes params() const;
   Bytes encode() const;
   static ServerKeyExchange decode(ByteSpan body);
};

struct CertificateRequest {
   Bytes certificate_types;
   std::vector<uint16_t> sig_algs;
   Bytes authorities;  // raw DistinguishedName list, normally empty

   Bytes encode() const;
   static CertificateRequest decode(ByteSpan body);
};

struct ClientKeyExchange {
   Bytes point;

   Bytes encode() const;
   static ClientKeyExchange decode(ByteSpan body);
};

struct CertificateVerify {
   uint16_t sig_alg = 0;
   Bytes signature;

   Bytes encode() const;
   static CertificateVerify decode(ByteSpan body);
};

/// Extension helpers for the three extensions this engine exchanges.
Bytes encode_u16_list(size_t len_bytes, const std::vector<uint16_t>& v);
std::vector<uint16_t> decode_u16_list(ByteSpan data, size_t len_bytes);

}  // namespace dte::dtls
