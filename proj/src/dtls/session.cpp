#include "dte/dtls/session.hpp"

#include "dte/dtls/wire.hpp"
#include "dte/errors.hpp"

#include <algorithm>
#include <array>

namespace dte::dtls {

using metrics::CounterScope;

namespace {

constexpr Transition kTransitions[] = {
   {Role::Client, State::Init, Event::Start, State::CookieWait},
   {Role::Client, State::CookieWait, Event::HelloVerifyRequest, State::HelloSent},
   {Role::Client, State::HelloSent, Event::ServerHello, State::HelloExchanged},
   {Role::Client, State::HelloExchanged, Event::Certificate, State::CertsVerified},
   {Role::Client, State::CertsVerified, Event::ServerKeyExchange, State::KeyExchange},
   {Role::Client, State::KeyExchange, Event::CertificateRequest, State::CertRequested},
   {Role::Client, State::CertRequested, Event::ServerHelloDone, State::FinishedWait},
   {Role::Client, State::FinishedWait, Event::ChangeCipherSpec, State::CipherChanged},
   {Role::Client, State::CipherChanged, Event::Finished, State::Established},

   {Role::Server, State::Init, Event::ClientHello, State::CookieWait},
   {Role::Server, State::CookieWait, Event::ClientHello, State::CookieWait},
   {Role::Server, State::CookieWait, Event::ClientHelloCookie, State::HelloExchanged},
   {Role::Server, State::HelloExchanged, Event::Certificate, State::CertsVerified},
   {Role::Server, State::CertsVerified, Event::ClientKeyExchange, State::KeyExchange},
   {Role::Server, State::KeyExchange, Event::CertificateVerify, State::FinishedWait},
   {Role::Server, State::FinishedWait, Event::ChangeCipherSpec, State::CipherChanged},
   {Role::Server, State::CipherChanged, Event::Finished, State::Established},
};

constexpr std::string_view kClientFinished = "client finished";
constexpr std::string_view kServerFinished = "server finished";

template <typename T>
bool contains(const std::vector<T>& v, T x) {
   return std::find(v.begin(), v.end(), x) != v.end();
}

bool contains(const Bytes& v, uint8_t x) {
   return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

class Session::Abort : public Error {
 public:
   Abort(AlertDescription a, const std::string& why) : Error(why), alert(a) {}
   AlertDescription alert;
};

std::string_view role_name(Role r) {
   return r == Role::Client ? "client" : "server";
}

std::string_view mode_name(Mode m) {
   return m == Mode::Full ? "full" : "cached";
}

std::string_view state_name(State s) {
   switch(s) {
      case State::Init: return "INIT";
      case State::CookieWait: return "COOKIE_WAIT";
      case State::HelloSent: return "HELLO_SENT";
      case State::HelloExchanged: return "HELLO_EXCHANGED";
      case State::CertsVerified: return "CERTS_VERIFIED";
      case State::KeyExchange: return "KEY_EXCHANGE";
      case State::CertRequested: return "CERT_REQUESTED";
      case State::FinishedWait: return "FINISHED_WAIT";
      case State::CipherChanged: return "CIPHER_CHANGED";
      case State::Established: return "ESTABLISHED";
      case State::Failed: return "FAILED";
   }
   return "?";
}

std::string_view event_name(Event e) {
   switch(e) {
      case Event::Start: return "start";
      case Event::ClientHello: return "ClientHello";
      case Event::ClientHelloCookie: return "ClientHello+cookie";
      case Event::HelloVerifyRequest: return "HelloVerifyRequest";
      case Event::ServerHello: return "ServerHello";
      case Event::Certificate: return "Certificate";
      case Event::ServerKeyExchange: return "ServerKeyExchange";
      case Event::CertificateRequest: return "CertificateRequest";
      case Event::ServerHelloDone: return "ServerHelloDone";
      case Event::ClientKeyExchange: return "ClientKeyExchange";
      case Event::CertificateVerify: return "CertificateVerify";
      case Event::ChangeCipherSpec: return "ChangeCipherSpec";
      case Event::Finished: return "Finished";
   }
   return "?";
}

std::string_view alert_name(AlertDescription a) {
   switch(a) {
      case AlertDescription::UnexpectedMessage: return "unexpected_message";
      case AlertDescription::HandshakeFailure: return "handshake_failure";
      case AlertDescription::BadCertificate: return "bad_certificate";
      case AlertDescription::CertificateExpired: return "certificate_expired";
      case AlertDescription::IllegalParameter: return "illegal_parameter";
      case AlertDescription::UnknownCa: return "unknown_ca";
      case AlertDescription::DecodeError: return "decode_error";
      case AlertDescription::DecryptError: return "decrypt_error";
      case AlertDescription::InternalError: return "internal_error";
   }
   return "unknown_alert";
}

std::span<const Transition> transition_table() {
   return kTransitions;
}

std::optional<State> next_state(Role role, State from, Event event) {
   for(const auto& t : kTransitions) {
      if(t.role == role && t.from == from && t.event == event) {
         return t.to;
      }
   }
   return std::nullopt;
}

SecurityParams::~SecurityParams() {
   secure_zero(master_secret);
   secure_zero(client_write.key);
   secure_zero(client_write.salt);
   secure_zero(server_write.key);
   secure_zero(server_write.salt);
}

SecurityParams derive_keys(ByteSpan premaster, const Random& client_random, const Random& server_random) {
   SecurityParams sp;
   Bytes master = sym::tls_prf_sha256(premaster, as_bytes("master secret"), concat({client_random, server_random}), 48);
   std::copy(master.begin(), master.end(), sp.master_secret.begin());
   secure_zero(master);

   Bytes kb = sym::tls_prf_sha256(sp.master_secret, as_bytes("key expansion"), concat({server_random, client_random}), 40);
   auto it = kb.begin();
   std::copy_n(it, 16, sp.client_write.key.begin());
   std::copy_n(it + 16, 16, sp.server_write.key.begin());
   std::copy_n(it + 32, 4, sp.client_write.salt.begin());
   std::copy_n(it + 36, 4, sp.server_write.salt.begin());
   secure_zero(kb);
   return sp;
}

std::array<uint8_t, kVerifyDataLen> finished_verify_data(const SecurityParams& sp, std::string_view label,
                                                         const sym::Digest256& transcript_hash) {
   const Bytes v = sym::tls_prf_sha256(sp.master_secret, as_bytes(label), transcript_hash, kVerifyDataLen);
   std::array<uint8_t, kVerifyDataLen> out{};
   std::copy(v.begin(), v.end(), out.begin());
   return out;
}

Session::Session(EndpointConfig cfg) : m_cfg(std::move(cfg)) {
   if(!m_cfg.curve || !m_cfg.key || !m_cfg.trust_anchor || m_cfg.certificate.empty()) {
      throw UsageError("session needs a curve, a key, a certificate and a trust anchor");
   }
   if(m_cfg.comb_cache == nullptr) {
      throw UsageError("session needs a comb cache");
   }
   if(m_cfg.mode == Mode::Cached && (m_cfg.role != Role::Client || m_cfg.cert_cache == nullptr)) {
      throw UsageError("cached mode is a client mode and needs a certificate cache");
   }
   if(m_cfg.curve->kind() != ecc::CurveKind::Weierstrass || m_cfg.curve->tls_id() == 0) {
      throw UnsupportedCurve("curve has no TLS named-curve identifier: " + m_cfg.curve->id());
   }
   if(m_cfg.seed.empty()) {
      throw UsageError("session needs a DRBG seed");
   }
   m_drbg = std::make_unique<sym::HmacDrbg>(m_cfg.seed, as_bytes(role_name(m_cfg.role)), as_bytes("dtls session"));
   if(m_cfg.role == Role::Client) {
      m_drbg->generate_into(m_client_random);
   } else if(m_cfg.cookie_secret.empty()) {
      m_cfg.cookie_secret = m_drbg->generate(32);
   }
}

Session::~Session() {
   secure_zero(m_cfg.cookie_secret);
   m_ephemeral.reset();
}

std::vector<Bytes> Session::step(std::span<const Bytes> inbound) {
   if(m_state == State::Established || m_state == State::Failed) {
      throw UsageError("handshake already finished");
   }
   CounterScope scope("dtls handshake");
   m_flight.clear();
   try {
      if(m_cfg.role == Role::Client && m_state == State::Init) {
         client_start();
      }
      for(const auto& datagram : inbound) {
         ByteSpan rest = datagram;
         while(!rest.empty() && m_state != State::Failed && m_state != State::Established) {
            auto out = m_records.decode(rest);
            if(!out.dropped()) {
               handle_record(*out.record);
            }
         }
      }
   } catch(const Abort& a) {
      fail(a.alert, a.what());
   } catch(const MalformedInput& e) {
      fail(AlertDescription::DecodeError, e.what());
   } catch(const ValidationError& e) {
      fail(AlertDescription::IllegalParameter, e.what());
   } catch(const UnsupportedAlgorithm& e) {
      fail(AlertDescription::HandshakeFailure, e.what());
   } catch(const UnsupportedCurve& e) {
      fail(AlertDescription::HandshakeFailure, e.what());
   } catch(const InternalError& e) {
      fail(AlertDescription::InternalError, e.what());
      m_hs_counters += scope.close();
      throw;
   }
   m_hs_counters += scope.close();

   std::vector<Bytes> out;
   if(!m_flight.empty()) {
      Bytes datagram;
      for(const auto& r : m_flight) {
         datagram.insert(datagram.end(), r.begin(), r.end());
      }
      out.push_back(std::move(datagram));
      m_flight.clear();
   }
   return out;
}

void Session::fail(AlertDescription alert, std::string reason) {
   m_state = State::Failed;
   m_failure = std::move(reason);
   release_ephemeral();
   m_flight.clear();
   const uint8_t body[2] = {2, static_cast<uint8_t>(alert)};  // fatal
   try {
      m_flight.push_back(m_records.encode(ContentType::Alert, body));
      m_alert_sent = alert;
   } catch(const SessionFailure&) {
      // no sequence numbers left to carry the alert
   }
}

void Session::release_ephemeral() {
   m_ephemeral.reset();
}

void Session::handle_record(const Record& rec) {
   switch(rec.type) {
      case ContentType::Handshake:
         for(const auto& msg : parse_handshake_messages(rec.payload)) {
            handle_message(msg);
            if(m_state == State::Failed || m_state == State::Established) {
               break;
            }
         }
         return;
      case ContentType::ChangeCipherSpec: {
         if(rec.payload.size() != 1 || rec.payload[0] != 1) {
            throw Abort(AlertDescription::DecodeError, "malformed ChangeCipherSpec");
         }
         auto next = next_state(m_cfg.role, m_state, Event::ChangeCipherSpec);
         if(!next) {
            throw Abort(AlertDescription::UnexpectedMessage, "unexpected ChangeCipherSpec");
         }
         require_keys();
         m_records.install_read_key(m_cfg.role == Role::Client ? m_security->server_write : m_security->client_write);
         m_state = *next;
         return;
      }
      case ContentType::Alert:
         m_state = State::Failed;
         release_ephemeral();
         if(rec.payload.size() == 2) {
            m_alert_received = static_cast<AlertDescription>(rec.payload[1]);
            m_failure = "peer sent alert " + std::string(alert_name(*m_alert_received));
         } else {
            m_failure = "peer sent a malformed alert";
         }
         return;
      case ContentType::ApplicationData:
         return;  // not before the handshake completes
   }
}

Event Session::classify(const HandshakeMessage& msg) {
   switch(msg.header.type) {
      case HandshakeType::ClientHello: return Event::ClientHello;
      case HandshakeType::ServerHello: return Event::ServerHello;
      case HandshakeType::HelloVerifyRequest: return Event::HelloVerifyRequest;
      case HandshakeType::Certificate: return Event::Certificate;
      case HandshakeType::ServerKeyExchange: return Event::ServerKeyExchange;
      case HandshakeType::CertificateRequest: return Event::CertificateRequest;
      case HandshakeType::ServerHelloDone: return Event::ServerHelloDone;
      case HandshakeType::CertificateVerify: return Event::CertificateVerify;
      case HandshakeType::ClientKeyExchange: return Event::ClientKeyExchange;
      case HandshakeType::Finished: return Event::Finished;
   }
   throw Abort(AlertDescription::UnexpectedMessage, "unknown handshake message");
}

void Session::handle_message(const HandshakeMessage& msg) {
   if(msg.header.message_seq != m_recv_seq) {
      throw Abort(AlertDescription::UnexpectedMessage, "handshake message out of sequence");
   }
   Event event = classify(msg);
   bool cookie_ok = false;
   if(event == Event::ClientHello && m_cfg.role == Role::Server && m_state == State::CookieWait) {
      const auto ch = ClientHello::decode(msg.body);
      cookie_ok = constant_time_equal(ch.cookie, cookie_for(ch.random));
      if(cookie_ok) {
         event = Event::ClientHelloCookie;
      }
   }
   const auto next = next_state(m_cfg.role, m_state, event);
   if(!next) {
      throw Abort(AlertDescription::UnexpectedMessage,
                  "unexpected " + std::string(handshake_type_name(msg.header.type)) + " in " +
                      std::string(state_name(m_state)));
   }
   ++m_recv_seq;

   // Checks that read the transcript see it without this message.
   bool in_transcript = true;
   if(m_cfg.role == Role::Client) {
      switch(event) {
         case Event::HelloVerifyRequest: client_hello_verify(msg); in_transcript = false; break;
         case Event::ServerHello: client_server_hello(msg); break;
         case Event::Certificate: client_certificate(msg); break;
         case Event::ServerKeyExchange: client_server_key_exchange(msg); break;
         case Event::CertificateRequest: client_certificate_request(msg); break;
         case Event::ServerHelloDone:
            if(!msg.body.empty()) {
               throw Abort(AlertDescription::DecodeError, "ServerHelloDone with a body");
            }
            break;
         case Event::Finished: verify_peer_finished(msg); break;
         default: throw Abort(AlertDescription::UnexpectedMessage, "unexpected message");
      }
   } else {
      switch(event) {
         case Event::ClientHello:
         case Event::ClientHelloCookie:
            server_client_hello(msg, cookie_ok);
            in_transcript = cookie_ok;
            break;
         case Event::Certificate: server_certificate(msg); break;
         case Event::ClientKeyExchange: server_client_key_exchange(msg); break;
         case Event::CertificateVerify: server_certificate_verify(msg); break;
         case Event::Finished: verify_peer_finished(msg); break;
         default: throw Abort(AlertDescription::UnexpectedMessage, "unexpected message");
      }
   }
   if(in_transcript) {
      transcript_add(msg);
   }
   m_state = *next;

   // Responses that must follow the message into the transcript.
   if(m_cfg.role == Role::Client) {
      if(event == Event::HelloVerifyRequest) {
         send_client_hello(true);
      } else if(event == Event::ServerHelloDone) {
         client_flight_five();
      }
   } else {
      if(event == Event::ClientHello) {
         HelloVerifyRequest hvr{kVersion, cookie_for(ClientHello::decode(msg.body).random)};
         send_handshake(HandshakeType::HelloVerifyRequest, hvr.encode(), false);
      } else if(event == Event::ClientHelloCookie) {
         server_flight_four();
      } else if(event == Event::Finished) {
         server_flight_six();
      }
   }
}

void Session::transcript_add(const HandshakeMessage& msg) {
   m_transcript.update(msg.encode());
}

sym::Digest256 Session::transcript_hash() const {
   sym::Sha256 fork = m_transcript;
   return fork.final();
}

sym::Digest256 Session::transcript_digest() const {
   return transcript_hash();
}

void Session::send_handshake(HandshakeType type, Bytes body, bool in_transcript) {
   const auto msg = make_message(type, m_send_seq++, std::move(body));
   if(in_transcript) {
      transcript_add(msg);
   }
   m_flight.push_back(m_records.encode(ContentType::Handshake, msg.encode()));
}

void Session::send_change_cipher_spec() {
   const uint8_t one = 1;
   m_flight.push_back(m_records.encode(ContentType::ChangeCipherSpec, ByteSpan(&one, 1)));
   m_records.install_write_key(m_cfg.role == Role::Client ? m_security->client_write : m_security->server_write);
}

void Session::send_finished() {
   const bool client = m_cfg.role == Role::Client;
   MicroStack::Frame vd(m_stack, kVerifyDataLen);
   const auto v = finished_verify_data(*m_security, client ? kClientFinished : kServerFinished, transcript_hash());
   std::copy(v.begin(), v.end(), vd.data());
   send_handshake(HandshakeType::Finished, Bytes(vd.bytes().begin(), vd.bytes().end()));
}

void Session::verify_peer_finished(const HandshakeMessage& msg) {
   require_keys();
   if(msg.body.size() != kVerifyDataLen) {
      throw Abort(AlertDescription::DecodeError, "Finished of the wrong length");
   }
   const bool client = m_cfg.role == Role::Client;
   MicroStack::Frame expect(m_stack, kVerifyDataLen);
   const auto v = finished_verify_data(*m_security, client ? kServerFinished : kClientFinished, transcript_hash());
   std::copy(v.begin(), v.end(), expect.data());
   if(!constant_time_equal(expect.bytes(), msg.body)) {
      throw Abort(AlertDescription::DecryptError, "Finished verify_data mismatch");
   }
   m_peer_finished_ok = true;
}

void Session::require_keys() const {
   if(!m_security) {
      throw Abort(AlertDescription::UnexpectedMessage, "keys not yet established");
   }
}

const SecurityParams& Session::security() const {
   if(!m_security) {
      throw UsageError("keys not derived yet");
   }
   return *m_security;
}

Bytes Session::cookie_for(const Random& client_random) const {
   sym::HmacSha256 h(m_cfg.cookie_secret);
   h.update(as_bytes(m_cfg.peer_address));
   h.update(client_random);
   return sym::to_bytes(h.final());
}

void Session::accept_peer_certificate(ByteSpan body, bool allow_cache) {
   const auto msg = CertificateMsg::decode(body);
   if(msg.chain.size() != 1) {
      throw Abort(AlertDescription::BadCertificate, "expected exactly one certificate");
   }
   const Bytes& der = msg.chain.front();
   m_peer_cert_der = der;
   const bool use_cache = allow_cache && m_cfg.mode == Mode::Cached;
   if(use_cache) {
      if(auto info = m_cfg.cert_cache->check(der)) {
         if(info->curve->id() != m_cfg.curve->id()) {
            throw Abort(AlertDescription::HandshakeFailure, "cached certificate key on another curve");
         }
         m_peer_key = info->public_key;
         m_peer_subject = info->subject;
         m_used_cached_cert = true;
         return;
      }
   }

   pki::Certificate cert;
   try {
      cert = pki::x509_parse(der);
   } catch(const MalformedInput& e) {
      throw Abort(AlertDescription::BadCertificate, e.what());
   } catch(const UnsupportedAlgorithm& e) {
      throw Abort(AlertDescription::BadCertificate, e.what());
   } catch(const UnsupportedCurve& e) {
      throw Abort(AlertDescription::BadCertificate, e.what());
   } catch(const ValidationError& e) {
      throw Abort(AlertDescription::BadCertificate, e.what());
   }
   if(cert.curve->id() != m_cfg.curve->id()) {
      throw Abort(AlertDescription::HandshakeFailure, "peer key is not on the negotiated curve");
   }
   switch(pki::verify_chain(cert, *m_cfg.trust_anchor, m_cfg.now, *m_cfg.comb_cache)) {
      case pki::CertStatus::Ok: break;
      case pki::CertStatus::Expired:
      case pki::CertStatus::NotYetValid:
         throw Abort(AlertDescription::CertificateExpired, "peer certificate outside its validity period");
      case pki::CertStatus::IssuerMismatch:
         throw Abort(AlertDescription::UnknownCa, "peer certificate not issued by the trust anchor");
      case pki::CertStatus::BadSignature:
      case pki::CertStatus::WrongCurve:
         throw Abort(AlertDescription::BadCertificate, "peer certificate signature invalid");
   }
   m_peer_key = cert.key();
   m_peer_subject = cert.subject;
   if(use_cache) {
      m_cfg.cert_cache->insert(cert);
   }
}

void Session::compute_premaster_and_keys(const ecc::AffinePoint& peer_share, ByteSpan own_scalar) {
   const BigUint d = BigUint::from_bytes(own_scalar);
   const auto x = pki::ecdhe_shared(d, peer_share, *m_cfg.comb_cache);
   MicroStack::Frame premaster(m_stack, m_cfg.curve->field().byte_len());
   const Bytes xb = x.to_bytes();
   std::copy(xb.begin(), xb.end(), premaster.data());
   m_security = derive_keys(premaster.bytes(), m_client_random, m_server_random);
}

// ---- client ----

void Session::client_start() {
   const auto next = next_state(m_cfg.role, m_state, Event::Start);
   send_client_hello(false);  // the cookie-less hello stays out of the transcript
   m_state = *next;
}

void Session::send_client_hello(bool in_transcript) {
   ClientHello ch;
   ch.version = kVersion;
   ch.random = m_client_random;
   ch.cookie = m_cookie;
   ch.cipher_suites = {kCipherSuite};
   ch.compression_methods = {0};
   ch.extensions = {
      {kExtSupportedGroups, encode_u16_list(2, {m_cfg.curve->tls_id()})},
      {kExtPointFormats, Bytes{1, 0}},
      {kExtSignatureAlgorithms, encode_u16_list(2, {kSigEcdsaSha256})},
   };
   send_handshake(HandshakeType::ClientHello, ch.encode(), in_transcript);
}

void Session::client_hello_verify(const HandshakeMessage& msg) {
   const auto hvr = HelloVerifyRequest::decode(msg.body);
   if(hvr.version != kVersion) {
      throw Abort(AlertDescription::HandshakeFailure, "unsupported protocol version");
   }
   if(hvr.cookie.empty()) {
      throw Abort(AlertDescription::IllegalParameter, "empty cookie");
   }
   m_cookie = hvr.cookie;
}

void Session::client_server_hello(const HandshakeMessage& msg) {
   const auto sh = ServerHello::decode(msg.body);
   if(sh.version != kVersion) {
      throw Abort(AlertDescription::HandshakeFailure, "unsupported protocol version");
   }
   if(sh.cipher_suite != kCipherSuite || sh.compression_method != 0) {
      throw Abort(AlertDescription::IllegalParameter, "server chose an unoffered suite or compression");
   }
   for(const auto& e : sh.extensions) {
      if(e.type != kExtPointFormats) {
         throw Abort(AlertDescription::UnexpectedMessage, "unsolicited extension");
      }
      WireReader r(e.data);
      const auto formats = r.vec(1, 1, 255);
      r.finish();
      if(std::find(formats.begin(), formats.end(), uint8_t{0}) == formats.end()) {
         throw Abort(AlertDescription::IllegalParameter, "uncompressed points not supported by server");
      }
   }
   m_server_random = sh.random;
}

void Session::client_certificate(const HandshakeMessage& msg) {
   accept_peer_certificate(msg.body, true);
}

void Session::client_server_key_exchange(const HandshakeMessage& msg) {
   const auto ske = ServerKeyExchange::decode(msg.body);
   if(ske.curve_type != kNamedCurve || ske.named_curve != m_cfg.curve->tls_id()) {
      throw Abort(AlertDescription::IllegalParameter, "server ECDHE parameters on an unoffered curve");
   }
   if(ske.sig_alg != kSigEcdsaSha256) {
      throw Abort(AlertDescription::IllegalParameter, "unoffered signature algorithm");
   }
   auto share = ecc::AffinePoint::decode(*m_cfg.curve, ske.point);
   ecc::validate_public_point(share);
   const auto sig = pki::EcdsaSignature::from_der(ske.signature);

   const Bytes params = ske.params();
   MicroStack::Frame signed_data(m_stack, 64 + params.size());
   std::copy(m_client_random.begin(), m_client_random.end(), signed_data.data());
   std::copy(m_server_random.begin(), m_server_random.end(), signed_data.data() + 32);
   std::copy(params.begin(), params.end(), signed_data.data() + 64);
   if(!pki::ecdsa_verify(*m_peer_key, sym::sha256(signed_data.bytes()), sig, *m_cfg.comb_cache)) {
      throw Abort(AlertDescription::DecryptError, "ServerKeyExchange signature invalid");
   }
   m_peer_ephemeral = share;
}

void Session::client_certificate_request(const HandshakeMessage& msg) {
   const auto cr = CertificateRequest::decode(msg.body);
   if(!contains(cr.certificate_types, kCertTypeEcdsaSign) || !contains(cr.sig_algs, kSigEcdsaSha256)) {
      throw Abort(AlertDescription::HandshakeFailure, "no acceptable client certificate type");
   }
}

void Session::client_flight_five() {
   auto& cache = *m_cfg.comb_cache;
   const size_t scalar_len = (m_cfg.curve->order().bitlen() + 7) / 8;
   MicroStack::Frame eph(m_stack, scalar_len);
   {
      const BigUint d = pki::random_scalar(*m_cfg.curve, *m_drbg);
      const Bytes db = d.to_bytes(scalar_len);
      std::copy(db.begin(), db.end(), eph.data());
      m_own_ephemeral = ecc::ecsm_comb(d, m_cfg.curve->generator(), cache);
   }

   send_handshake(HandshakeType::Certificate, CertificateMsg{{m_cfg.certificate}}.encode());
   send_handshake(HandshakeType::ClientKeyExchange, ClientKeyExchange{m_own_ephemeral->encode()}.encode());
   compute_premaster_and_keys(*m_peer_ephemeral, eph.bytes());

   {
      MicroStack::Frame digest(m_stack, 32);
      const auto h = transcript_hash();
      std::copy(h.begin(), h.end(), digest.data());
      const auto sig = pki::ecdsa_sign(*m_cfg.key, h, *m_drbg, cache).to_der();
      send_handshake(HandshakeType::CertificateVerify, CertificateVerify{kSigEcdsaSha256, sig}.encode());
   }
   send_change_cipher_spec();
   send_finished();
}

// ---- server ----

void Session::server_client_hello(const HandshakeMessage& msg, bool cookie_ok) {
   const auto ch = ClientHello::decode(msg.body);
   if(ch.version != kVersion) {
      throw Abort(AlertDescription::HandshakeFailure, "unsupported protocol version");
   }
   if(!contains(ch.cipher_suites, kCipherSuite) || !contains(ch.compression_methods, uint8_t{0})) {
      throw Abort(AlertDescription::HandshakeFailure, "no common cipher suite");
   }
   bool groups = false, formats = false, sigs = false;
   for(const auto& e : ch.extensions) {
      switch(e.type) {
         case kExtSupportedGroups: groups = contains(decode_u16_list(e.data, 2), m_cfg.curve->tls_id()); break;
         case kExtSignatureAlgorithms: sigs = contains(decode_u16_list(e.data, 2), kSigEcdsaSha256); break;
         case kExtPointFormats: {
            WireReader r(e.data);
            const auto f = r.vec(1, 1, 255);
            r.finish();
            formats = std::find(f.begin(), f.end(), uint8_t{0}) != f.end();
            break;
         }
         default: throw Abort(AlertDescription::IllegalParameter, "unsupported extension");
      }
   }
   if(!groups || !formats || !sigs) {
      throw Abort(AlertDescription::HandshakeFailure, "client does not offer the configured curve and signature");
   }
   if(cookie_ok) {
      m_client_random = ch.random;
   }
}

void Session::server_flight_four() {
   auto& cache = *m_cfg.comb_cache;
   m_drbg->generate_into(m_server_random);

   ServerHello sh;
   sh.version = kVersion;
   sh.random = m_server_random;
   sh.cipher_suite = kCipherSuite;
   sh.compression_method = 0;
   sh.extensions = {{kExtPointFormats, Bytes{1, 0}}};
   send_handshake(HandshakeType::ServerHello, sh.encode());
   send_handshake(HandshakeType::Certificate, CertificateMsg{{m_cfg.certificate}}.encode());

   const size_t scalar_len = (m_cfg.curve->order().bitlen() + 7) / 8;
   m_ephemeral.emplace(m_stack, scalar_len);
   {
      const BigUint d = pki::random_scalar(*m_cfg.curve, *m_drbg);
      const Bytes db = d.to_bytes(scalar_len);
      std::copy(db.begin(), db.end(), m_ephemeral->data());
      m_own_ephemeral = ecc::ecsm_comb(d, m_cfg.curve->generator(), cache);
   }

   ServerKeyExchange ske;
   ske.curve_type = kNamedCurve;
   ske.named_curve = m_cfg.curve->tls_id();
   ske.point = m_own_ephemeral->encode();
   ske.sig_alg = kSigEcdsaSha256;
   {
      const Bytes params = ske.params();
      MicroStack::Frame signed_data(m_stack, 64 + params.size());
      std::copy(m_client_random.begin(), m_client_random.end(), signed_data.data());
      std::copy(m_server_random.begin(), m_server_random.end(), signed_data.data() + 32);
      std::copy(params.begin(), params.end(), signed_data.data() + 64);
      ske.signature = pki::ecdsa_sign(*m_cfg.key, sym::sha256(signed_data.bytes()), *m_drbg, cache).to_der();
   }
   send_handshake(HandshakeType::ServerKeyExchange, ske.encode());

   CertificateRequest cr;
   cr.certificate_types = {kCertTypeEcdsaSign};
   cr.sig_algs = {kSigEcdsaSha256};
   send_handshake(HandshakeType::CertificateRequest, cr.encode());
   send_handshake(HandshakeType::ServerHelloDone, {});
}

void Session::server_certificate(const HandshakeMessage& msg) {
   accept_peer_certificate(msg.body, false);
}

void Session::server_client_key_exchange(const HandshakeMessage& msg) {
   const auto cke = ClientKeyExchange::decode(msg.body);
   auto share = ecc::AffinePoint::decode(*m_cfg.curve, cke.point);
   ecc::validate_public_point(share);
   m_peer_ephemeral = share;
   compute_premaster_and_keys(share, m_ephemeral->bytes());
   release_ephemeral();
}

void Session::server_certificate_verify(const HandshakeMessage& msg) {
   const auto cv = CertificateVerify::decode(msg.body);
   if(cv.sig_alg != kSigEcdsaSha256) {
      throw Abort(AlertDescription::IllegalParameter, "unoffered signature algorithm");
   }
   const auto sig = pki::EcdsaSignature::from_der(cv.signature);
   if(!pki::ecdsa_verify(*m_peer_key, transcript_hash(), sig, *m_cfg.comb_cache)) {
      throw Abort(AlertDescription::DecryptError, "CertificateVerify signature invalid");
   }
}

void Session::server_flight_six() {
   send_change_cipher_spec();
   send_finished();
}

// ---- application data ----

Bytes Session::seal_app_data(ByteSpan payload) {
   if(!established()) {
      throw UsageError("application data before the handshake completed");
   }
   CounterScope scope("dtls application data");
   Bytes out = m_records.encode(ContentType::ApplicationData, payload);
   m_app_counters += scope.close();
   return out;
}

std::optional<Bytes> Session::open_app_data(ByteSpan datagram) {
   if(!established()) {
      throw UsageError("application data before the handshake completed");
   }
   CounterScope scope("dtls application data");
   std::optional<Bytes> result;
   while(!datagram.empty() && !result) {
      auto out = m_records.decode(datagram);
      if(out.dropped()) {
         continue;
      }
      if(out.record->type == ContentType::ApplicationData) {
         result = std::move(out.record->payload);
      } else if(out.record->type == ContentType::Alert) {
         handle_record(*out.record);
         break;
      }
   }
   m_app_counters += scope.close();
   return result;
}

std::vector<Bytes> client_step(Session& s, std::span<const Bytes> inbound) {
   if(s.role() != Role::Client) {
      throw UsageError("client_step on a server session");
   }
   return s.step(inbound);
}

std::vector<Bytes> server_step(Session& s, std::span<const Bytes> inbound) {
   if(s.role() != Role::Server) {
      throw UsageError("server_step on a client session");
   }
   return s.step(inbound);
}

}  // namespace dte::dtls
