// DTLS 1.2 handshake controller (mutual ECDHE-ECDSA authentication) and the
// application-data phase, driven as an explicit table-based state machine.
#pragma once

#include "dte/counters.hpp"
#include "dte/dtls/messages.hpp"
#include "dte/dtls/micro_stack.hpp"
#include "dte/dtls/record.hpp"
#include "dte/x509.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>

namespace dte::dtls {

enum class Role : uint8_t { Client, Server };
enum class Mode : uint8_t { Full, Cached };

enum class State : uint8_t {
   Init,
   CookieWait,      // client: ClientHello sent, expecting HelloVerifyRequest; server: cookie issued
   HelloSent,       // client: ClientHello with cookie sent
   HelloExchanged,  // hellos agreed; server has sent its whole flight
   CertsVerified,   // peer certificate accepted
   KeyExchange,     // peer ECDHE share received
   CertRequested,   // client: CertificateRequest received
   FinishedWait,    // own flight done, waiting for the peer's ChangeCipherSpec
   CipherChanged,   // peer switched to epoch 1, waiting for its Finished
   Established,
   Failed,
};

enum class Event : uint8_t {
   Start,
   ClientHello,        // without a valid cookie
   ClientHelloCookie,  // carrying the cookie this server issued
   HelloVerifyRequest,
   ServerHello,
   Certificate,
   ServerKeyExchange,
   CertificateRequest,
   ServerHelloDone,
   ClientKeyExchange,
   CertificateVerify,
   ChangeCipherSpec,
   Finished,
};

std::string_view role_name(Role r);
std::string_view mode_name(Mode m);
std::string_view state_name(State s);
std::string_view event_name(Event e);

struct Transition {
   Role role;
   State from;
   Event event;
   State to;
};

/// Every legal transition. Anything absent is an unexpected message and fails the session.
std::span<const Transition> transition_table();
std::optional<State> next_state(Role role, State from, Event event);

enum class AlertDescription : uint8_t {
   UnexpectedMessage = 10,
   HandshakeFailure = 40,
   BadCertificate = 42,
   CertificateExpired = 45,
   IllegalParameter = 47,
   UnknownCa = 48,
   DecodeError = 50,
   DecryptError = 51,
   InternalError = 80,
};

std::string_view alert_name(AlertDescription a);

/// Master secret and the AES-128-GCM key block. Zeroized on destruction.
struct SecurityParams {
   std::array<uint8_t, 48> master_secret{};
   sym::AeadKey client_write;
   sym::AeadKey server_write;

   SecurityParams() = default;
   SecurityParams(const SecurityParams&) = default;
   SecurityParams& operator=(const SecurityParams&) = default;
   ~SecurityParams();
};

/// master = PRF(premaster, "master secret", cr||sr, 48);
/// key_block = PRF(master, "key expansion", sr||cr, 40) = ck(16) sk(16) csalt(4) ssalt(4).
SecurityParams derive_keys(ByteSpan premaster, const Random& client_random, const Random& server_random);

/// PRF(master, label, transcript_hash)[0..12].
std::array<uint8_t, kVerifyDataLen> finished_verify_data(const SecurityParams& sp, std::string_view label,
                                                         const sym::Digest256& transcript_hash);

struct EndpointConfig {
   Role role = Role::Client;
   Mode mode = Mode::Full;  // client only: Cached consults the certificate cache
   std::shared_ptr<const ecc::CurveParams> curve;
   std::shared_ptr<const pki::KeyPair> key;  // long-term signing key
   Bytes certificate;                        // own DER certificate, issued by the peer's anchor
   std::shared_ptr<const pki::Certificate> trust_anchor;
   Bytes seed;             // DRBG entropy for this session
   int64_t now = 0;        // validation time for certificates (seconds since 1970)
   std::string peer_address;  // server: the client's address, bound into the cookie
   Bytes cookie_secret;    // server: HMAC key for cookies; drawn from the DRBG when empty
   ecc::CombCache* comb_cache = nullptr;
   pki::CertCache* cert_cache = nullptr;  // required for Mode::Cached
};

class Session {
 public:
   explicit Session(EndpointConfig cfg);
   ~Session();
   Session(const Session&) = delete;
   Session& operator=(const Session&) = delete;

   /**
    * Processes the inbound datagrams (the peer's flight) and returns this
    * endpoint's next flight as one datagram, or nothing. The client's first
    * call takes no input. UsageError once the session is Established or Failed.
    */
   std::vector<Bytes> step(std::span<const Bytes> inbound);

   /// Server: the address of the client, bound into the cookie.
   void set_peer_address(std::string address) { m_cfg.peer_address = std::move(address); }

   Role role() const { return m_cfg.role; }
   Mode mode() const { return m_cfg.mode; }
   State state() const { return m_state; }
   bool established() const { return m_state == State::Established; }
   bool failed() const { return m_state == State::Failed; }
   const std::string& failure_reason() const { return m_failure; }
   std::optional<AlertDescription> alert_sent() const { return m_alert_sent; }
   std::optional<AlertDescription> alert_received() const { return m_alert_received; }
   bool peer_finished_verified() const { return m_peer_finished_ok; }
   bool used_cached_certificate() const { return m_used_cached_cert; }

   /// UsageError before keys are derived.
   const SecurityParams& security() const;
   sym::Digest256 transcript_digest() const;
   const Random& client_random() const { return m_client_random; }
   const Random& server_random() const { return m_server_random; }
   /// Subject of the verified (or cached) peer certificate.
   const Bytes& peer_subject() const { return m_peer_subject; }
   /// The peer's certificate DER as received.
   const Bytes& peer_certificate() const { return m_peer_cert_der; }

   /// UsageError unless Established.
   Bytes seal_app_data(ByteSpan payload);
   /// nullopt when the datagram is dropped (malformed, replayed, bad tag, not application data).
   std::optional<Bytes> open_app_data(ByteSpan datagram);

   /// Operation counts attributed to this session's handshake and application-data phases.
   const metrics::OpCounters& handshake_counters() const { return m_hs_counters; }
   const metrics::OpCounters& app_counters() const { return m_app_counters; }

   const MicroStack& micro_stack() const { return m_stack; }
   const RecordLayer& records() const { return m_records; }

 private:
   class Abort;

   void handle_record(const Record& rec);
   void handle_message(const HandshakeMessage& msg);
   Event classify(const HandshakeMessage& msg);
   void fail(AlertDescription alert, std::string reason);
   void transcript_add(const HandshakeMessage& msg);
   void send_handshake(HandshakeType type, Bytes body, bool in_transcript = true);
   void send_change_cipher_spec();
   sym::Digest256 transcript_hash() const;
   void require_keys() const;

   // client side
   void client_start();
   void client_hello_verify(const HandshakeMessage& msg);
   void client_server_hello(const HandshakeMessage& msg);
   void client_certificate(const HandshakeMessage& msg);
   void client_server_key_exchange(const HandshakeMessage& msg);
   void client_certificate_request(const HandshakeMessage& msg);
   void client_flight_five();
   void send_client_hello(bool in_transcript);

   // server side
   void server_client_hello(const HandshakeMessage& msg, bool cookie_ok);
   void server_flight_four();
   void server_certificate(const HandshakeMessage& msg);
   void server_client_key_exchange(const HandshakeMessage& msg);
   void server_certificate_verify(const HandshakeMessage& msg);
   void server_flight_six();

   // both
   void accept_peer_certificate(ByteSpan body, bool allow_cache);
   void verify_peer_finished(const HandshakeMessage& msg);
   void send_finished();
   Bytes cookie_for(const Random& client_random) const;
   void compute_premaster_and_keys(const ecc::AffinePoint& peer_share, ByteSpan own_scalar);
   void release_ephemeral();

   EndpointConfig m_cfg;
   State m_state = State::Init;
   std::unique_ptr<sym::HmacDrbg> m_drbg;
   RecordLayer m_records;
   MicroStack m_stack;
   sym::Sha256 m_transcript;

   Random m_client_random{};
   Random m_server_random{};
   Bytes m_cookie;
   uint16_t m_send_seq = 0;
   uint16_t m_recv_seq = 0;

   std::optional<ecc::AffinePoint> m_peer_key;       // long-term, from the certificate
   std::optional<ecc::AffinePoint> m_peer_ephemeral;
   std::optional<MicroStack::Frame> m_ephemeral;     // own ECDHE scalar, held across flights
   std::optional<ecc::AffinePoint> m_own_ephemeral;
   std::optional<SecurityParams> m_security;
   Bytes m_peer_subject;
   Bytes m_peer_cert_der;
   bool m_used_cached_cert = false;
   bool m_peer_finished_ok = false;

   std::vector<Bytes> m_flight;  // records queued for the outbound datagram
   std::string m_failure;
   std::optional<AlertDescription> m_alert_sent, m_alert_received;

   metrics::OpCounters m_hs_counters;
   metrics::OpCounters m_app_counters;
};

/// Role-checked wrappers over Session::step.
std::vector<Bytes> client_step(Session& s, std::span<const Bytes> inbound);
std::vector<Bytes> server_step(Session& s, std::span<const Bytes> inbound);

}  // namespace dte::dtls
