#include "dte/counters.hpp"
#include "dte/dtls/wire.hpp"
#include "dte/errors.hpp"
#include "dtls_fixture.hpp"

#include <gtest/gtest.h>
#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/kdf.h>

#include <algorithm>
#include <random>
#include <set>
#include <thread>

using namespace dte;
using namespace dte::dtls;
using metrics::Op;

namespace {

sym::AeadKey test_key(uint8_t b) {
   sym::AeadKey k;
   k.key.fill(b);
   k.salt = {0xa0, 0xa1, 0xa2, b};
   return k;
}

// Pair of record layers keyed for one direction a -> b.
struct Pipe {
   RecordLayer a, b;
   explicit Pipe(bool keyed) {
      if(keyed) {
         a.install_write_key(test_key(7));
         b.install_read_key(test_key(7));
      }
   }
};

Bytes openssl_tls_prf(ByteSpan secret, std::string_view label, ByteSpan seed, size_t n) {
   EVP_KDF* kdf = EVP_KDF_fetch(nullptr, "TLS1-PRF", nullptr);
   EVP_KDF_CTX* ctx = EVP_KDF_CTX_new(kdf);
   char digest[] = "SHA256";
   const Bytes full_seed = concat({as_bytes(label), seed});
   OSSL_PARAM params[] = {
      OSSL_PARAM_construct_utf8_string(OSSL_KDF_PARAM_DIGEST, digest, 0),
      OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_SECRET, const_cast<uint8_t*>(secret.data()), secret.size()),
      OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_SEED, const_cast<uint8_t*>(full_seed.data()), full_seed.size()),
      OSSL_PARAM_construct_end(),
   };
   Bytes out(n);
   EXPECT_EQ(EVP_KDF_derive(ctx, out.data(), n, params), 1);
   EVP_KDF_CTX_free(ctx);
   EVP_KDF_free(kdf);
   return out;
}

}  // namespace

TEST(RecordLayerTest, PlaintextFraming) {
   RecordLayer r;
   const Bytes payload = from_hex("0102030405");
   const Bytes wire = r.encode(ContentType::Handshake, payload);
   ASSERT_EQ(wire.size(), 13u + 5u);
   EXPECT_EQ(to_hex(ByteSpan(wire).first(13)), "16fefd00000000000000000005");
   EXPECT_EQ(Bytes(wire.begin() + 13, wire.end()), payload);
   const Bytes second = r.encode(ContentType::Alert, payload);
   EXPECT_EQ(to_hex(ByteSpan(second).first(13)), "15fefd00000000000000010005");
   EXPECT_THROW(r.encode(ContentType::Handshake, Bytes(kMaxPlaintext + 1)), UsageError);
   EXPECT_NO_THROW(r.encode(ContentType::Handshake, Bytes(kMaxPlaintext)));
}

TEST(RecordLayerTest, ProtectedRecordsMatchIndependentGcm) {
   Pipe p(true);
   for(size_t n : {0, 1, 16, 100, 1024}) {
      Bytes pt(n);
      for(size_t i = 0; i < n; ++i) {
         pt[i] = static_cast<uint8_t>(i * 7);
      }
      const uint64_t seq = p.a.next_write_sequence();
      const Bytes wire = p.a.encode(ContentType::ApplicationData, pt);
      ASSERT_EQ(wire.size(), kRecordHeaderLen + 8 + n + 16);

      // Rebuild nonce and additional data from the layout and seal with OpenSSL.
      Bytes es = from_hex("0001");
      for(int i = 5; i >= 0; --i) {
         es.push_back(static_cast<uint8_t>(seq >> (8 * i)));
      }
      EXPECT_EQ(Bytes(wire.begin() + 3, wire.begin() + 11), es);
      EXPECT_EQ(Bytes(wire.begin() + 13, wire.begin() + 21), es);  // explicit nonce = epoch || seq
      const auto key = test_key(7);
      const Bytes nonce = concat({key.salt, es});
      const Bytes aad = concat({es, Bytes{23, 0xfe, 0xfd, uint8_t(n >> 8), uint8_t(n)}});
      EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
      EVP_EncryptInit_ex(ctx, EVP_aes_128_gcm(), nullptr, key.key.data(), nonce.data());
      int len = 0;
      EVP_EncryptUpdate(ctx, nullptr, &len, aad.data(), static_cast<int>(aad.size()));
      Bytes ct(n + 16);
      if(n > 0) {
         EVP_EncryptUpdate(ctx, ct.data(), &len, pt.data(), static_cast<int>(n));
      }
      EVP_EncryptFinal_ex(ctx, ct.data() + n, &len);
      EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_GET_TAG, 16, ct.data() + n);
      EVP_CIPHER_CTX_free(ctx);
      EXPECT_EQ(Bytes(wire.begin() + 21, wire.end()), ct) << n;

      ByteSpan in = wire;
      auto out = p.b.decode(in);
      ASSERT_FALSE(out.dropped());
      EXPECT_EQ(out.record->payload, pt);
      EXPECT_TRUE(in.empty());
   }
}

TEST(RecordLayerTest, DropOutcomes) {
   Pipe p(true);
   const Bytes good = p.a.encode(ContentType::ApplicationData, as_bytes("hello"));
   ByteSpan in = good;
   ASSERT_FALSE(p.b.decode(in).dropped());
   in = good;
   EXPECT_EQ(p.b.decode(in).reason, DropReason::Replay);

   Bytes flipped = p.a.encode(ContentType::ApplicationData, as_bytes("world"));
   flipped.back() ^= 0x01;
   in = flipped;
   EXPECT_EQ(p.b.decode(in).reason, DropReason::BadTag);
   // the authentic copy of that record still arrives: the window only advances on success
   flipped.back() ^= 0x01;
   in = flipped;
   auto ok = p.b.decode(in);
   ASSERT_FALSE(ok.dropped());
   EXPECT_EQ(ok.record->payload, Bytes(as_bytes("world").begin(), as_bytes("world").end()));

   Bytes future = p.a.encode(ContentType::ApplicationData, as_bytes("x"));
   future[4] = 2;  // epoch 2
   in = future;
   EXPECT_EQ(p.b.decode(in).reason, DropReason::UnknownEpoch);

   Bytes bad_version = p.a.encode(ContentType::ApplicationData, as_bytes("x"));
   bad_version[2] = 0xfe;
   in = bad_version;
   EXPECT_EQ(p.b.decode(in).reason, DropReason::Malformed);
   EXPECT_TRUE(in.empty());

   Bytes truncated = p.a.encode(ContentType::ApplicationData, as_bytes("x"));
   truncated.pop_back();
   in = truncated;
   EXPECT_EQ(p.b.decode(in).reason, DropReason::Malformed);

   EXPECT_EQ(p.b.stats().drops(DropReason::BadTag), 1u);
   EXPECT_EQ(p.b.stats().drops(DropReason::Replay), 1u);
}

TEST(RecordLayerTest, SequenceExhaustion) {
   RecordLayer r;
   r.set_next_write_sequence(kSequenceLimit - 1);
   EXPECT_NO_THROW(r.encode(ContentType::Handshake, Bytes{1}));
   EXPECT_THROW(r.encode(ContentType::Handshake, Bytes{1}), SessionFailure);
}

TEST(RecordLayerTest, ReplayWindowAgainstReferenceModel) {
   std::mt19937_64 rng(11);
   for(int trial = 0; trial < 200; ++trial) {
      // fresh numbers plus duplicates, shuffled within a horizon smaller than the window
      std::vector<uint64_t> seqs;
      const uint64_t base = rng() % 1000;
      for(uint64_t s = base; s < base + 150; ++s) {
         seqs.push_back(s);
         if(rng() % 3 == 0) {
            seqs.push_back(s);
         }
      }
      for(size_t i = 0; i + 1 < seqs.size(); ++i) {
         const size_t j = i + rng() % std::min<size_t>(40, seqs.size() - i);
         std::swap(seqs[i], seqs[j]);
      }
      ReplayWindow w;
      std::set<uint64_t> seen;
      uint64_t top = 0;
      for(uint64_t s : seqs) {
         const bool expect_fresh = !seen.contains(s) && (seen.empty() || s + ReplayWindow::kSize > top);
         ASSERT_EQ(w.is_fresh(s), expect_fresh) << "trial " << trial << " seq " << s;
         if(expect_fresh) {
            w.accept(s);
            seen.insert(s);
            top = std::max(top, s);
         }
      }
      // every fresh in-window record was accepted exactly once
      for(uint64_t s = top - std::min<uint64_t>(top, 63); s <= top; ++s) {
         ASSERT_FALSE(w.is_fresh(s));
      }
   }
}

TEST(RecordLayerTest, DecodeFuzzYieldsTypedOutcomes) {
   Pipe p(true);
   std::vector<Bytes> seeds;
   for(size_t n : {0, 5, 64, 300}) {
      seeds.push_back(p.a.encode(ContentType::ApplicationData, Bytes(n, 0x5a)));
   }
   RecordLayer plain;
   seeds.push_back(plain.encode(ContentType::Handshake, Bytes(40, 0x11)));
   std::mt19937_64 rng(12);
   size_t accepted = 0, dropped = 0;
   for(int i = 0; i < 10000; ++i) {
      Bytes d = seeds[rng() % seeds.size()];
      const int edits = 1 + static_cast<int>(rng() % 3);
      for(int e = 0; e < edits && !d.empty(); ++e) {
         switch(rng() % 4) {
            case 0: d[rng() % d.size()] ^= static_cast<uint8_t>(1u << (rng() % 8)); break;
            case 1: d[rng() % d.size()] = static_cast<uint8_t>(rng()); break;
            case 2: d.resize(rng() % d.size()); break;
            default: d.insert(d.begin() + static_cast<long>(rng() % d.size()), static_cast<uint8_t>(rng()));
         }
      }
      RecordLayer reader;  // fresh window each time so replays do not mask parsing
      if(i % 2 == 0) {
         reader.install_read_key(test_key(7));
      }
      ByteSpan in = d;
      while(!in.empty()) {
         auto out = reader.decode(in);
         out.dropped() ? ++dropped : ++accepted;
      }
   }
   EXPECT_GT(dropped, 0u);
   EXPECT_GT(accepted + dropped, 10000u / 2);
}

TEST(MicroStackTest, LifoOverflowAndWatermark) {
   MicroStack s;
   auto a = s.push(100);
   auto b = s.push(200);
   EXPECT_EQ(s.used(), 300u);
   EXPECT_THROW(s.pop(a), UsageError);
   s.pop(b);
   s.pop(a);
   EXPECT_EQ(s.used(), 0u);
   EXPECT_EQ(s.peak(), 300u);
   EXPECT_THROW(s.push(MicroStack::kCapacity + 1), InternalError);
   {
      MicroStack::Frame f(s, MicroStack::kCapacity);
      EXPECT_THROW(s.push(1), InternalError);
   }
   EXPECT_EQ(s.used(), 0u);
   EXPECT_EQ(s.peak(), MicroStack::kCapacity);
}

TEST(KeySchedule, MatchesIndependentPrfAndSplit) {
   const Bytes premaster = from_hex("1122334455667788991011121314151617181920212223242526272829303132");
   Random cr, sr;
   for(size_t i = 0; i < 32; ++i) {
      cr[i] = static_cast<uint8_t>(i);
      sr[i] = static_cast<uint8_t>(0x80 + i);
   }
   const auto sp = derive_keys(premaster, cr, sr);
   const Bytes master = openssl_tls_prf(premaster, "master secret", concat({cr, sr}), 48);
   EXPECT_EQ(Bytes(sp.master_secret.begin(), sp.master_secret.end()), master);
   const Bytes kb = openssl_tls_prf(master, "key expansion", concat({sr, cr}), 40);
   EXPECT_EQ(to_hex(sp.client_write.key), to_hex(ByteSpan(kb).subspan(0, 16)));
   EXPECT_EQ(to_hex(sp.server_write.key), to_hex(ByteSpan(kb).subspan(16, 16)));
   EXPECT_EQ(to_hex(sp.client_write.salt), to_hex(ByteSpan(kb).subspan(32, 4)));
   EXPECT_EQ(to_hex(sp.server_write.salt), to_hex(ByteSpan(kb).subspan(36, 4)));

   const sym::Digest256 th = sym::sha256(as_bytes("transcript"));
   const auto vd = finished_verify_data(sp, "client finished", th);
   EXPECT_EQ(to_hex(vd), to_hex(openssl_tls_prf(master, "client finished", th, 12)));

   for(auto* r : {&cr, &sr}) {
      (*r)[5] ^= 1;
      const auto other = derive_keys(premaster, cr, sr);
      EXPECT_NE(other.master_secret, sp.master_secret);
      EXPECT_NE(other.client_write.key, sp.client_write.key);
      EXPECT_NE(other.server_write.key, sp.server_write.key);
      EXPECT_NE(other.client_write.salt, sp.client_write.salt);
      EXPECT_NE(other.server_write.salt, sp.server_write.salt);
      (*r)[5] ^= 1;
   }
}

TEST(StateMachine, TableModelCheck) {
   constexpr Event kAll[] = {Event::Start, Event::ClientHello, Event::ClientHelloCookie, Event::HelloVerifyRequest,
                             Event::ServerHello, Event::Certificate, Event::ServerKeyExchange,
                             Event::CertificateRequest, Event::ServerHelloDone, Event::ClientKeyExchange,
                             Event::CertificateVerify, Event::ChangeCipherSpec, Event::Finished};
   for(const auto& t : transition_table()) {
      EXPECT_NE(t.from, State::Failed);
      EXPECT_NE(t.from, State::Established);
   }
   const std::vector<Event> client_path = {Event::Start, Event::HelloVerifyRequest, Event::ServerHello,
                                           Event::Certificate, Event::ServerKeyExchange, Event::CertificateRequest,
                                           Event::ServerHelloDone, Event::ChangeCipherSpec, Event::Finished};
   const std::vector<Event> server_path = {Event::ClientHello, Event::ClientHelloCookie, Event::Certificate,
                                           Event::ClientKeyExchange, Event::CertificateVerify,
                                           Event::ChangeCipherSpec, Event::Finished};
   // Exhaustive enumeration of event strings up to length 12; an event without a
   // transition fails the session, so only legal prefixes are extended.
   for(Role role : {Role::Client, Role::Server}) {
      size_t explored = 0, reached = 0;
      std::vector<std::pair<State, std::vector<Event>>> stack{{State::Init, {}}};
      while(!stack.empty()) {
         auto [state, path] = stack.back();
         stack.pop_back();
         if(state == State::Established) {
            ++reached;
            // drop repeated cookie-less hellos, which the server answers with a fresh cookie
            std::vector<Event> canon;
            for(Event e : path) {
               if(!(role == Role::Server && e == Event::ClientHello && !canon.empty())) {
                  canon.push_back(e);
               }
            }
            EXPECT_EQ(canon, role == Role::Client ? client_path : server_path);
            continue;
         }
         if(path.size() == 12) {
            continue;
         }
         for(Event e : kAll) {
            ++explored;
            if(auto next = next_state(role, state, e)) {
               auto p = path;
               p.push_back(e);
               stack.emplace_back(*next, p);
            }
         }
      }
      EXPECT_GT(reached, 0u);
      EXPECT_GT(explored, 100u);
   }
}

class HandshakeOnCurve : public ::testing::TestWithParam<std::string> {};

TEST_P(HandshakeOnCurve, LoopbackEstablishes) {
   test::Endpoints ep(GetParam());
   const auto out = ep.run();
   ASSERT_TRUE(out.both_established()) << ep.client->failure_reason() << " / " << ep.server->failure_reason();
   EXPECT_EQ(ep.client->security().master_secret, ep.server->security().master_secret);
   EXPECT_EQ(ep.client->transcript_digest(), ep.server->transcript_digest());
   EXPECT_TRUE(ep.client->peer_finished_verified());
   EXPECT_TRUE(ep.server->peer_finished_verified());
   EXPECT_EQ(out.flights, 6u);
   for(const auto* s : {ep.client.get(), ep.server.get()}) {
      EXPECT_EQ(s->micro_stack().used(), 0u);
      EXPECT_EQ(s->micro_stack().depth(), 0u);
      EXPECT_GT(s->micro_stack().peak(), 0u);
      EXPECT_LE(s->micro_stack().peak(), MicroStack::kCapacity);
   }
   EXPECT_EQ(pki::name_to_string(ep.client->peer_subject()), "server.dte");
   EXPECT_EQ(pki::name_to_string(ep.server->peer_subject()), "client.dte");

   const Bytes msg(1024, 0x3c);
   auto opened = ep.server->open_app_data(ep.client->seal_app_data(msg));
   ASSERT_TRUE(opened);
   EXPECT_EQ(*opened, msg);
   opened = ep.client->open_app_data(ep.server->seal_app_data(as_bytes("reply")));
   ASSERT_TRUE(opened);
   EXPECT_EQ(opened->size(), 5u);
}

INSTANTIATE_TEST_SUITE_P(NamedCurves, HandshakeOnCurve,
                         ::testing::Values("secp160r1", "secp192r1", "secp224r1", "secp256r1"));

TEST(Handshake, DeterministicUnderFixedSeeds) {
   test::Endpoints a("secp192r1"), b("secp192r1");
   ASSERT_TRUE(a.run().both_established());
   ASSERT_TRUE(b.run().both_established());
   EXPECT_EQ(a.client->transcript_digest(), b.client->transcript_digest());
   EXPECT_EQ(a.client->handshake_counters(), b.client->handshake_counters());
   test::Endpoints c("secp192r1", Mode::Full, nullptr, 2);
   ASSERT_TRUE(c.run().both_established());
   EXPECT_NE(a.client->security().master_secret, c.client->security().master_secret);
}

TEST(Handshake, CachedModeSavesExactlyOneVerify) {
   pki::CertCache certs;
   test::Endpoints full("secp256r1");
   ASSERT_TRUE(full.run().both_established());
   test::Endpoints prime("secp256r1", Mode::Cached, &certs);
   ASSERT_TRUE(prime.run().both_established());
   EXPECT_FALSE(prime.client->used_cached_certificate());
   EXPECT_EQ(certs.size(), 1u);
   test::Endpoints cached("secp256r1", Mode::Cached, &certs);
   ASSERT_TRUE(cached.run().both_established());
   EXPECT_TRUE(cached.client->used_cached_certificate());

   auto verifies = [](const test::Endpoints& e) {
      return e.client->handshake_counters()[Op::EcdsaVerify] + e.server->handshake_counters()[Op::EcdsaVerify];
   };
   EXPECT_EQ(verifies(full), 4u);
   EXPECT_EQ(verifies(prime), 4u);
   EXPECT_EQ(verifies(cached), 3u);
   EXPECT_EQ(full.client->handshake_counters()[Op::EcdsaVerify] -
                 cached.client->handshake_counters()[Op::EcdsaVerify], 1u);
   EXPECT_EQ(cached.client->handshake_counters()[Op::CertCacheHit], 1u);
}

TEST(Handshake, TamperedServerKeyExchangeStopsClientBeforeFlightFive) {
   test::Endpoints ep("secp192r1");
   std::vector<Bytes> client_out;
   ep.link.set_tap([&](Role sender, size_t, Bytes& d) {
      if(sender == Role::Client) {
         client_out.push_back(d);
         return;
      }
      for(const auto& s : test::message_spans(d)) {
         if(!s.is_record_body && d[s.offset] == static_cast<uint8_t>(HandshakeType::ServerKeyExchange)) {
            d[s.offset + s.length - 3] ^= 0x01;  // inside the signature
         }
      }
   });
   const auto out = ep.run();
   EXPECT_EQ(out.client_state, State::Failed);
   EXPECT_NE(out.server_state, State::Established);
   ASSERT_EQ(client_out.size(), 3u);  // ClientHello, ClientHello+cookie, then only the alert
   const auto h = RecordHeader::parse(client_out.back());
   ASSERT_TRUE(h);
   EXPECT_EQ(h->type, ContentType::Alert);
   EXPECT_EQ(client_out.back().size(), kRecordHeaderLen + 2);
   EXPECT_EQ(ep.client->alert_sent(), AlertDescription::DecryptError);
}

TEST(Handshake, EveryTamperedMessageFailsTheHandshake) {
   // Reference run: collect every datagram and the messages inside it.
   std::vector<Bytes> datagrams;
   {
      test::Endpoints ep("secp160r1");
      ep.link.set_tap([&](Role, size_t, Bytes& d) { datagrams.push_back(d); });
      ASSERT_TRUE(ep.run().both_established());
   }
   ASSERT_EQ(datagrams.size(), 6u);
   std::mt19937_64 rng(13);
   size_t cases = 0;
   for(size_t di = 0; di < datagrams.size(); ++di) {
      for(const auto& span : test::message_spans(datagrams[di])) {
         std::set<size_t> positions = {span.offset, span.offset + span.length - 1};
         if(!span.is_record_body) {
            for(size_t h = 1; h < kHandshakeHeaderLen; ++h) {
               positions.insert(span.offset + h);
            }
         }
         for(int k = 0; k < 4; ++k) {
            positions.insert(span.offset + rng() % span.length);
         }
         for(size_t pos : positions) {
            test::Endpoints ep("secp160r1");
            ep.link.set_tap([&](Role, size_t index, Bytes& d) {
               if(index == di) {
                  d[pos] ^= static_cast<uint8_t>(1u << (pos % 8));
               }
            });
            const auto out = ep.run();
            EXPECT_FALSE(out.both_established()) << "datagram " << di << " byte " << pos;
            EXPECT_THROW(ep.client->seal_app_data(Bytes{1}), UsageError);
            ++cases;
         }
      }
   }
   EXPECT_GT(cases, 150u);
}

TEST(Handshake, ReorderedOrDuplicatedMessagesFail) {
   // Swap the first two records of the server's main flight.
   test::Endpoints ep("secp160r1");
   ep.link.set_tap([](Role sender, size_t index, Bytes& d) {
      if(sender == Role::Server && index == 3) {
         auto h1 = RecordHeader::parse(d);
         const size_t l1 = kRecordHeaderLen + h1->length;
         auto h2 = RecordHeader::parse(ByteSpan(d).subspan(l1));
         const size_t l2 = kRecordHeaderLen + h2->length;
         Bytes swapped(d.begin() + static_cast<long>(l1), d.begin() + static_cast<long>(l1 + l2));
         swapped.insert(swapped.end(), d.begin(), d.begin() + static_cast<long>(l1));
         std::copy(swapped.begin(), swapped.end(), d.begin());
      }
   });
   auto out = ep.run();
   EXPECT_EQ(out.client_state, State::Failed);
   EXPECT_EQ(ep.client->alert_sent(), AlertDescription::UnexpectedMessage);

   // Deliver the client's second hello twice: the replay window drops the copy.
   test::Endpoints dup("secp160r1");
   dup.link.set_tap([](Role sender, size_t index, Bytes& d) {
      if(sender == Role::Client && index == 2) {
         const Bytes copy = d;
         d.insert(d.end(), copy.begin(), copy.end());
      }
   });
   EXPECT_TRUE(dup.run().both_established());
   EXPECT_EQ(dup.server->records().stats().drops(DropReason::Replay), 1u);
}

TEST(Handshake, CertificateFailures) {
   const auto& set = test::credentials("secp192r1");
   // a different CA as the client's anchor
   ecc::CombCache other_cache;
   sym::HmacDrbg other_drbg(as_bytes("other ca"), {}, {});
   const auto other = generate_credentials(set.curve, other_drbg, other_cache, test::kNotBefore, test::kNotAfter);
   {
      ecc::CombCache cc, sc;
      auto c = endpoint_config(set, Role::Client, Bytes(32, 1), test::kNow, cc);
      c.trust_anchor = other.anchor;
      Session client(c), server(endpoint_config(set, Role::Server, Bytes(32, 2), test::kNow, sc));
      LoopbackLink link;
      run_loopback(client, server, link);
      EXPECT_TRUE(client.failed());
      EXPECT_EQ(client.alert_sent(), AlertDescription::BadCertificate);
      EXPECT_EQ(server.alert_received(), AlertDescription::BadCertificate);
   }
   // the client presents a certificate from the other CA
   {
      ecc::CombCache cc, sc;
      auto c = endpoint_config(set, Role::Client, Bytes(32, 1), test::kNow, cc);
      c.key = other.client.key;
      c.certificate = other.client.certificate;
      Session client(c), server(endpoint_config(set, Role::Server, Bytes(32, 2), test::kNow, sc));
      LoopbackLink link;
      run_loopback(client, server, link);
      EXPECT_TRUE(server.failed());
      EXPECT_TRUE(client.failed());
   }
   // validation time after expiry
   {
      ecc::CombCache cc, sc;
      Session client(endpoint_config(set, Role::Client, Bytes(32, 1), test::kNotAfter + 1, cc));
      Session server(endpoint_config(set, Role::Server, Bytes(32, 2), test::kNow, sc));
      LoopbackLink link;
      run_loopback(client, server, link);
      EXPECT_EQ(client.alert_sent(), AlertDescription::CertificateExpired);
   }
   // curve disagreement
   {
      const auto& p256 = test::credentials("secp256r1");
      ecc::CombCache cc, sc;
      Session client(endpoint_config(p256, Role::Client, Bytes(32, 1), test::kNow, cc));
      Session server(endpoint_config(set, Role::Server, Bytes(32, 2), test::kNow, sc));
      LoopbackLink link;
      run_loopback(client, server, link);
      EXPECT_EQ(server.alert_sent(), AlertDescription::HandshakeFailure);
      EXPECT_TRUE(client.failed());
   }
}

TEST(Handshake, StepContracts) {
   test::Endpoints ep("secp160r1");
   EXPECT_THROW(server_step(*ep.client, {}), UsageError);
   EXPECT_THROW(ep.client->seal_app_data(Bytes{}), UsageError);
   EXPECT_THROW((void)ep.client->security(), UsageError);
   ASSERT_TRUE(ep.run().both_established());
   EXPECT_THROW(ep.client->step({}), UsageError);
}

TEST(AppData, RoundTripReplayTamperAndEmpty) {
   test::Endpoints ep("secp160r1");
   ASSERT_TRUE(ep.run().both_established());
   const Bytes empty_record = ep.client->seal_app_data(Bytes{});
   EXPECT_EQ(empty_record.size(), kRecordHeaderLen + 8 + 16);
   auto opened = ep.server->open_app_data(empty_record);
   ASSERT_TRUE(opened);
   EXPECT_TRUE(opened->empty());
   EXPECT_FALSE(ep.server->open_app_data(empty_record));  // replay

   Bytes rec = ep.client->seal_app_data(as_bytes("sensor reading 42"));
   rec[kRecordHeaderLen + 9] ^= 0x80;
   EXPECT_FALSE(ep.server->open_app_data(rec));
   EXPECT_TRUE(ep.server->established());
   rec[kRecordHeaderLen + 9] ^= 0x80;
   opened = ep.server->open_app_data(rec);
   ASSERT_TRUE(opened);
   EXPECT_EQ(std::string(opened->begin(), opened->end()), "sensor reading 42");

   const auto before = ep.client->app_counters();
   (void)ep.client->seal_app_data(Bytes(1024, 1));
   const auto d = ep.client->app_counters() - before;
   EXPECT_EQ(d[Op::AesBlock], 65u);    // 64 keystream blocks + tag mask
   EXPECT_EQ(d[Op::GhashBlock], 66u);  // additional data + 64 + lengths
   EXPECT_EQ(d[Op::BytesSealed], 1024u);
}

TEST(AppData, NoncesNeverRepeat) {
   test::Endpoints ep("secp160r1");
   std::set<std::pair<int, Bytes>> nonces;
   size_t protected_records = 0;
   ep.link.set_tap([&](Role sender, size_t, Bytes& d) {
      size_t off = 0;
      while(off + kRecordHeaderLen <= d.size()) {
         auto h = RecordHeader::parse(ByteSpan(d).subspan(off));
         if(h->epoch == 1) {
            Bytes explicit_nonce(d.begin() + static_cast<long>(off + kRecordHeaderLen),
                                 d.begin() + static_cast<long>(off + kRecordHeaderLen + 8));
            EXPECT_TRUE(nonces.emplace(static_cast<int>(sender), explicit_nonce).second);
            ++protected_records;
         }
         off += kRecordHeaderLen + h->length;
      }
   });
   ASSERT_TRUE(ep.run().both_established());
   for(int i = 0; i < 300; ++i) {
      ep.link.client_end().send(ep.client->seal_app_data(Bytes(i % 50, uint8_t(i))));
      ep.link.server_end().send(ep.server->seal_app_data(Bytes(i % 70, uint8_t(i))));
   }
   EXPECT_EQ(protected_records, 602u);
   // the two directions use different keys and salts
   EXPECT_NE(ep.client->security().client_write.key, ep.client->security().server_write.key);
   EXPECT_NE(ep.client->security().client_write.salt, ep.client->security().server_write.salt);
}

TEST(Transport, UdpMatchesLoopbackTranscript) {
   const auto& set = test::credentials("secp160r1");
   ecc::CombCache cc, sc;
   UdpTransport server_t("127.0.0.1", 0, 10000);
   UdpTransport client_t("127.0.0.1", 0, 10000);
   client_t.connect("127.0.0.1", server_t.local_port());
   Session client(endpoint_config(set, Role::Client, Bytes(32, 1), test::kNow, cc));
   Session server(endpoint_config(set, Role::Server, Bytes(32, 101), test::kNow, sc));
   std::exception_ptr server_error;
   std::thread th([&] {
      try {
         run_endpoint(server, server_t);
      } catch(...) {
         server_error = std::current_exception();
      }
   });
   run_endpoint(client, client_t);
   th.join();
   ASSERT_FALSE(server_error);
   ASSERT_TRUE(client.established());
   ASSERT_TRUE(server.established());
   client_t.send(client.seal_app_data(as_bytes("over udp")));
   auto d = server_t.receive();
   ASSERT_TRUE(d);
   auto opened = server.open_app_data(*d);
   ASSERT_TRUE(opened);
   EXPECT_EQ(opened->size(), 8u);

   // same seeds and the same client address over the in-memory link
   test::Endpoints ep("secp160r1");
   LoopbackLink link("127.0.0.1:" + std::to_string(client_t.local_port()));
   ASSERT_TRUE(run_loopback(*ep.client, *ep.server, link).both_established());
   EXPECT_EQ(ep.client->transcript_digest(), client.transcript_digest());
   EXPECT_EQ(ep.client->security().master_secret, client.security().master_secret);
}
