// DTLS 1.2 record layer: framing, AES-128-GCM protection and replay detection.
#pragma once

#include "dte/aes_gcm.hpp"
#include "dte/bytes.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace dte::dtls {

enum class ContentType : uint8_t {
   ChangeCipherSpec = 20,
   Alert = 21,
   Handshake = 22,
   ApplicationData = 23,
};

inline constexpr uint16_t kVersion = 0xFEFD;  // {254, 253}
inline constexpr size_t kRecordHeaderLen = 13;
inline constexpr size_t kMaxPlaintext = size_t(1) << 14;
inline constexpr size_t kMaxRecordLen = kMaxPlaintext + 256;
inline constexpr uint64_t kSequenceLimit = uint64_t(1) << 48;
inline constexpr size_t kExplicitNonceLen = 8;
inline constexpr size_t kTagLen = 16;

struct RecordHeader {
   ContentType type{};
   uint16_t version = kVersion;
   uint16_t epoch = 0;
   uint64_t sequence = 0;
   uint16_t length = 0;

   void write(Bytes& out) const;
   /// nullopt for short input, an unknown content type, a foreign version or
   /// a length above kMaxRecordLen.
   static std::optional<RecordHeader> parse(ByteSpan in);
};

/// 64-record sliding window over one epoch's sequence numbers.
class ReplayWindow {
 public:
   static constexpr uint64_t kSize = 64;

   /// True if the sequence number is fresh (not yet seen and not below the window).
   bool is_fresh(uint64_t seq) const;
   /// Call only after the record authenticated.
   void accept(uint64_t seq);

 private:
   bool m_any = false;
   uint64_t m_top = 0;     // highest accepted sequence number
   uint64_t m_bitmap = 0;  // bit i set: m_top - i accepted
};

enum class DropReason : uint8_t { Malformed, UnknownEpoch, Replay, BadTag };
std::string_view drop_reason_name(DropReason r);

struct Record {
   ContentType type{};
   uint16_t epoch = 0;
   uint64_t sequence = 0;
   Bytes payload;  // plaintext
};

/// Either a record or the reason it was dropped.
struct DecodeOutcome {
   std::optional<Record> record;
   DropReason reason = DropReason::Malformed;

   bool dropped() const { return !record; }
};

struct RecordStats {
   uint64_t sent = 0;
   uint64_t accepted = 0;
   std::array<uint64_t, 4> dropped{};  // indexed by DropReason

   uint64_t drops(DropReason r) const { return dropped[static_cast<size_t>(r)]; }
};

/**
 * One endpoint's record state. Epoch 0 is plaintext; installing keys moves the
 * corresponding direction to epoch 1 and resets its sequence number.
 */
class RecordLayer {
 public:
   /// UsageError above kMaxPlaintext; SessionFailure once the sequence space is exhausted.
   Bytes encode(ContentType type, ByteSpan payload);

   /// Consumes one record from the front of `datagram`. A malformed header
   /// consumes the rest of the datagram, since record boundaries are lost.
   DecodeOutcome decode(ByteSpan& datagram);

   void install_write_key(const sym::AeadKey& key);
   void install_read_key(const sym::AeadKey& key);

   uint16_t write_epoch() const { return m_write_epoch; }
   uint16_t read_epoch() const { return m_read_epoch; }
   uint64_t next_write_sequence() const { return m_write_seq; }
   const RecordStats& stats() const { return m_stats; }

   /// Test hook for the sequence-exhaustion bound.
   void set_next_write_sequence(uint64_t s) { m_write_seq = s; }

 private:
   struct Direction {
      std::optional<sym::AesGcm> gcm;
      std::array<uint8_t, 4> salt{};
   };

   DecodeOutcome drop(DropReason r);

   uint16_t m_write_epoch = 0;
   uint64_t m_write_seq = 0;
   uint16_t m_read_epoch = 0;
   ReplayWindow m_window;
   Direction m_write, m_read;
   RecordStats m_stats;
};

/// Additional data for a protected record: epoch||seq, type, version, plaintext length.
std::array<uint8_t, 13> record_aad(const RecordHeader& h, size_t plaintext_len);

}  // namespace dte::dtls
