#include "dte/scenarios.hpp"

#include "dte/dtls/credentials.hpp"
#include "dte/dtls/transport.hpp"
#include "dte/errors.hpp"
#include "dte/merkle.hpp"

#include <map>
#include <mutex>

namespace dte::scenarios {

using metrics::CounterScope;
using metrics::CountingPaused;
using metrics::Scenario;

namespace {

sym::HmacDrbg seeded(const std::string& seed, std::string_view purpose) {
   return sym::HmacDrbg(as_bytes(seed), {}, as_bytes(purpose));
}

std::shared_ptr<const ecc::CurveParams> named(const std::string& id) { return ecc::CurveRegistry::builtin().find(id); }

Bytes session_seed(const std::string& seed, std::string_view role) {
   auto d = seeded(seed, role);
   return d.generate(32);
}

struct Pair {
   ecc::CombCache client_cache, server_cache;
   std::unique_ptr<dtls::Session> client, server;
};

// Fresh endpoints whose comb caches hold only the generator.
std::unique_ptr<Pair> make_pair(const std::string& curve_id, dtls::Mode mode, pki::CertCache* certs,
                                const std::string& seed) {
   const auto& set = cached_credentials(curve_id, "credentials");
   auto p = std::make_unique<Pair>();
   {
      CountingPaused quiet;
      p->client_cache.get_or_build(set.curve->generator());
      p->server_cache.get_or_build(set.curve->generator());
   }
   auto c = dtls::endpoint_config(set, dtls::Role::Client, session_seed(seed, "client"), kSessionTime, p->client_cache);
   c.mode = mode;
   c.cert_cache = certs;
   p->client = std::make_unique<dtls::Session>(c);
   p->server = std::make_unique<dtls::Session>(
      dtls::endpoint_config(set, dtls::Role::Server, session_seed(seed, "server"), kSessionTime, p->server_cache));
   return p;
}

void establish(Pair& p) {
   dtls::LoopbackLink link;
   const auto out = dtls::run_loopback(*p.client, *p.server, link);
   if(!out.both_established()) {
      throw SessionFailure("handshake did not complete: client " + p.client->failure_reason() + "; server " +
                           p.server->failure_reason());
   }
}

}  // namespace

std::string_view method_name(EcsmMethod m) {
   switch(m) {
      case EcsmMethod::CombHit: return "comb (cached table)";
      case EcsmMethod::CombMiss: return "comb (table built)";
      case EcsmMethod::CombJacobian: return "jacobian comb (cached table)";
      case EcsmMethod::DoubleAndAdd: return "affine double-and-add";
      case EcsmMethod::Jacobian: return "jacobian double-and-add";
   }
   return "?";
}

const dtls::CredentialSet& cached_credentials(const std::string& curve_id, const std::string& seed) {
   static std::mutex mu;
   static std::map<std::pair<std::string, std::string>, dtls::CredentialSet> sets;
   std::lock_guard lock(mu);
   auto key = std::pair{curve_id, seed};
   auto it = sets.find(key);
   if(it == sets.end()) {
      CountingPaused quiet;
      ecc::CombCache cache;
      auto drbg = seeded(seed, "credentials " + curve_id);
      it = sets.emplace(key, dtls::generate_credentials(named(curve_id), drbg, cache, kCredentialNotBefore,
                                                        kCredentialNotAfter))
              .first;
   }
   return it->second;
}

Scenario ecsm(const std::string& curve_id, EcsmMethod method, size_t scalars, const std::string& seed) {
   auto curve = named(curve_id);
   const auto& g = curve->generator();
   std::vector<BigUint> ks;
   ecc::CombCache cache;
   {
      CountingPaused quiet;
      auto drbg = seeded(seed, "ecsm scalars");
      for(size_t i = 0; i < scalars; ++i) {
         ks.push_back(pki::random_scalar(*curve, drbg));
      }
      cache.get_or_build(g);
   }
   Scenario s{"ecsm." + curve_id, "curve=" + curve_id + " scalars=" + std::to_string(scalars) + " seed=" + seed,
              "ecsm method", std::string(method_name(method)), {}, scalars};
   CounterScope scope("ecsm");
   for(const auto& k : ks) {
      switch(method) {
         case EcsmMethod::CombHit: ecc::ecsm_comb(k, g, cache); break;
         case EcsmMethod::CombMiss: {
            ecc::CombCache cold;
            ecc::ecsm_comb(k, g, cold);
            break;
         }
         case EcsmMethod::CombJacobian: ecc::ecsm_comb_jacobian(k, g, cache); break;
         case EcsmMethod::DoubleAndAdd: ecc::ecsm_double_and_add(k, g); break;
         case EcsmMethod::Jacobian: ecc::ecsm_jacobian(k, g); break;
      }
   }
   s.counters = scope.close();
   return s;
}

Scenario handshake(const std::string& curve_id, dtls::Mode mode, const std::string& seed) {
   pki::CertCache certs;
   if(mode == dtls::Mode::Cached) {
      CountingPaused quiet;
      auto prime = make_pair(curve_id, mode, &certs, seed + "/prime");
      establish(*prime);
   }
   auto p = make_pair(curve_id, mode, &certs, seed);
   establish(*p);
   if(mode == dtls::Mode::Cached && !p->client->used_cached_certificate()) {
      throw InternalError("cached handshake did not use the certificate cache");
   }
   return Scenario{"handshake." + curve_id, "curve=" + curve_id + " side=client seed=" + seed, "server authentication",
                   std::string(dtls::mode_name(mode)), p->client->handshake_counters(), 1};
}

Scenario app_data(const std::string& curve_id, size_t kib, const std::string& seed) {
   auto p = make_pair(curve_id, dtls::Mode::Full, nullptr, seed);
   establish(*p);
   const Bytes chunk(1024, 0xa5);
   const auto before = p->client->app_counters();
   for(size_t i = 0; i < kib; ++i) {
      auto opened = p->server->open_app_data(p->client->seal_app_data(chunk));
      if(!opened || *opened != chunk) {
         throw InternalError("application data did not round-trip");
      }
   }
   return Scenario{"appdata." + curve_id, "curve=" + curve_id + " kib=" + std::to_string(kib) + " seed=" + seed,
                   "record size", "1024 B", p->client->app_counters() - before, 1};
}

Scenario ecmqv(const std::string& curve_id, const std::string& seed) {
   auto curve = named(curve_id);
   ecc::CombCache cache;
   auto drbg = seeded(seed, "ecmqv");
   std::optional<pki::KeyPair> a_static, b_static;
   {
      CountingPaused quiet;
      a_static = pki::KeyPair::generate(curve, drbg, cache);
      b_static = pki::KeyPair::generate(curve, drbg, cache);
   }
   Scenario s{"ecmqv." + curve_id, "curve=" + curve_id + " seed=" + seed, "application", "ecmqv", {}, 1};
   CounterScope scope("ecmqv");
   const auto a_eph = pki::KeyPair::generate(curve, drbg, cache);
   const auto b_eph = pki::KeyPair::generate(curve, drbg, cache);
   const auto za = pki::ecmqv_shared(*a_static, a_eph, b_static->public_point(), b_eph.public_point(), cache);
   const auto zb = pki::ecmqv_shared(*b_static, b_eph, a_static->public_point(), a_eph.public_point(), cache);
   s.counters = scope.close();
   if(!(za == zb)) {
      throw InternalError("ECMQV parties derived different keys");
   }
   return s;
}

Scenario schnorr(const std::string& curve_id, const std::string& seed) {
   auto curve = named(curve_id);
   ecc::CombCache cache;
   auto drbg = seeded(seed, "schnorr");
   std::optional<pki::KeyPair> key;
   BigUint challenge;
   {
      CountingPaused quiet;
      key = pki::KeyPair::generate(curve, drbg, cache);
      challenge = pki::random_scalar(*curve, drbg);
   }
   Scenario s{"schnorr." + curve_id, "curve=" + curve_id + " seed=" + seed, "application", "schnorr", {}, 1};
   CounterScope scope("schnorr");
   const auto commit = pki::schnorr_commit(*key, drbg, cache);
   const auto response = pki::schnorr_respond(*key, commit.r, challenge);
   const bool ok = pki::schnorr_verify(key->public_point(), commit.t, challenge, response, cache);
   s.counters = scope.close();
   if(!ok) {
      throw InternalError("Schnorr transcript did not verify");
   }
   return s;
}

Scenario merkle(size_t leaves, const std::string& seed) {
   if(leaves == 0) {
      throw UsageError("merkle benchmark needs at least one leaf");
   }
   std::vector<Bytes> data;
   {
      CountingPaused quiet;
      auto drbg = seeded(seed, "merkle leaves");
      for(size_t i = 0; i < leaves; ++i) {
         data.push_back(drbg.generate(64));
      }
   }
   Scenario s{"merkle", "leaves=" + std::to_string(leaves) + " seed=" + seed, "application", "merkle", {}, 1};
   CounterScope scope("merkle");
   (void)pki::merkle_root(data);
   s.counters = scope.close();
   return s;
}

}  // namespace dte::scenarios
