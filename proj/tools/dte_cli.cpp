// dte: credentials, handshakes, benchmarks and known-answer runs.
#include "dte/dtls/credentials.hpp"
#include "dte/dtls/transport.hpp"
#include "dte/errors.hpp"
#include "dte/kat.hpp"
#include "dte/scenarios.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace dte;
using metrics::Category;
using metrics::Metric;
using metrics::Op;
using metrics::Report;
using metrics::Table;
using scenarios::EcsmMethod;

enum Exit : int { kOk = 0, kInternal = 1, kUsage = 2, kIo = 3, kProtocol = 4, kKatFailure = 5 };

constexpr const char* kNamedCurves[] = {"secp160r1", "secp192r1", "secp224r1", "secp256r1"};

struct Options {
   std::string curve = "secp256r1";
   std::string mode = "full";
   std::string role = "loopback";
   std::string transport = "loopback";
   std::string host = "127.0.0.1";
   uint16_t port = 4433;
   uint16_t client_port = 0;
   std::string seed = "000102030405060708090a0b0c0d0e0f";
   std::string report;
   std::string vectors = "vectors";
   std::string creds;
   std::string fingerprints;
   std::string target;
   size_t scalars = 16;
   size_t leaves = 1024;
   size_t kib = 1;
};

const metrics::EnergyModel& model() {
   static const auto m = metrics::EnergyModel::paper_default();
   return m;
}

std::string fmt(double v, const char* f = "%.4g") {
   char buf[64];
   std::snprintf(buf, sizeof(buf), f, v);
   return buf;
}

std::string u64(uint64_t v) { return std::to_string(v); }

void emit(const Report& r, const Options& o) {
   const std::string out = r.text() + "# metrics\n" + r.machine();
   std::cout << out;
   if(!o.report.empty()) {
      std::ofstream f(o.report, std::ios::trunc);
      f << out;
      if(!f) {
         throw IoError("cannot write report " + o.report);
      }
   }
}

// Counter and energy table for a single scenario.
void add_scenario(Report& r, const metrics::Scenario& s, const std::string& prefix) {
   const auto e = metrics::scenario_energy(s, model());
   Table t{s.value + "  [" + s.config + "]", {"quantity", "per run"}, {}};
   for(Op op : {Op::PointAdd, Op::PointDouble, Op::ModMul, Op::MulIteration, Op::ModInvEuclid, Op::ModInvFermat,
                Op::EcdsaSign, Op::EcdsaVerify, Op::EcdhShared, Op::EcmqvShared, Op::SchnorrRespond, Op::AesBlock,
                Op::GhashBlock, Op::ShaCompress, Op::MerkleHash, Op::X509Parse, Op::CertCacheHit, Op::BytesSealed}) {
      if(s.counters[op] != 0) {
         t.rows.push_back({std::string(metrics::op_name(op)), fmt(double(s.counters[op]) / double(s.runs), "%.1f")});
      }
   }
   t.rows.push_back({"modeled energy", metrics::format_joules(e.total)});
   t.rows.push_back({"  ecc share", fmt(100 * e.share(Category::Ecc), "%.2f%%")});
   r.add(std::move(t));
   r.add(Metric{prefix + ".energy", e.total, "J", "modeled"});
   r.add(Metric{prefix + ".ecc_share", e.share(Category::Ecc), "fraction", "modeled"});
}

Bytes seed_bytes(const Options& o) {
   Bytes b = from_hex(o.seed);
   if(b.empty()) {
      throw UsageError("seed must be non-empty hex");
   }
   return b;
}

dtls::Mode parse_mode(const std::string& m) {
   if(m == "full") {
      return dtls::Mode::Full;
   }
   if(m == "cached") {
      return dtls::Mode::Cached;
   }
   throw UsageError("mode must be full or cached");
}

std::string fingerprint_path(const Options& o) {
   if(!o.fingerprints.empty()) {
      return o.fingerprints;
   }
   return (o.creds.empty() ? std::string(".") : o.creds) + "/fingerprints.txt";
}

const dtls::CredentialSet& credentials(const Options& o, ecc::CombCache& cache) {
   static std::optional<dtls::CredentialSet> loaded;
   if(o.creds.empty()) {
      return scenarios::cached_credentials(o.curve, o.seed);
   }
   if(!loaded) {
      loaded = dtls::load_credentials(o.creds, cache);
   }
   return *loaded;
}

int cmd_keygen(const Options& o) {
   if(o.creds.empty()) {
      throw UsageError("keygen needs --creds <dir>");
   }
   auto curve = ecc::CurveRegistry::builtin().find(o.curve);
   ecc::CombCache cache;
   sym::HmacDrbg drbg(seed_bytes(o), {}, as_bytes("keygen " + o.curve));
   const auto set = dtls::generate_credentials(curve, drbg, cache, scenarios::kCredentialNotBefore,
                                               scenarios::kCredentialNotAfter);
   dtls::save_credentials(set, o.creds);
   for(const auto* name : {"ca", "server", "client"}) {
      const auto& cred = std::string(name) == "ca" ? set.ca : std::string(name) == "server" ? set.server : set.client;
      const auto cert = pki::x509_parse(cred.certificate);
      std::cout << name << ": " << pki::name_to_string(cert.subject) << "  fingerprint "
                << to_hex(pki::fingerprint(cred.certificate)) << "\n";
   }
   std::cout << "wrote " << o.creds << " (" << o.curve << ")\n";
   return kOk;
}

struct Endpoint {
   ecc::CombCache comb;
   std::unique_ptr<dtls::Session> session;
};

std::unique_ptr<Endpoint> make_endpoint(const Options& o, dtls::Role role, pki::CertCache* certs, dtls::Mode mode) {
   auto ep = std::make_unique<Endpoint>();
   const auto& set = credentials(o, ep->comb);
   {
      metrics::CountingPaused quiet;
      ep->comb.get_or_build(set.curve->generator());
   }
   auto cfg = dtls::endpoint_config(set, role, seed_bytes(o), scenarios::kSessionTime, ep->comb);
   if(role == dtls::Role::Client) {
      cfg.mode = mode;
      cfg.cert_cache = certs;
   }
   ep->session = std::make_unique<dtls::Session>(cfg);
   return ep;
}

int report_failure(const dtls::Session& s) {
   std::cerr << dtls::role_name(s.role()) << ": " << dtls::state_name(s.state());
   if(s.alert_sent()) {
      std::cerr << ", sent alert " << dtls::alert_name(*s.alert_sent());
   }
   if(s.alert_received()) {
      std::cerr << ", received alert " << dtls::alert_name(*s.alert_received());
   }
   if(!s.failure_reason().empty()) {
      std::cerr << " (" << s.failure_reason() << ")";
   }
   std::cerr << "\n";
   return kProtocol;
}

metrics::Scenario as_scenario(const dtls::Session& s, const Options& o, dtls::Mode mode) {
   return metrics::Scenario{"handshake", "curve=" + o.curve + " side=" + std::string(dtls::role_name(s.role())) +
                                             " seed=" + o.seed,
                            "server authentication", std::string(dtls::mode_name(mode)), s.handshake_counters(), 1};
}

void add_session_summary(Report& r, const dtls::Session& s) {
   Table t{std::string(dtls::role_name(s.role())) + " session", {"item", "value"}, {}};
   t.rows.push_back({"state", std::string(dtls::state_name(s.state()))});
   t.rows.push_back({"peer", pki::name_to_string(s.peer_subject())});
   t.rows.push_back({"peer finished verified", s.peer_finished_verified() ? "yes" : "no"});
   t.rows.push_back({"cached certificate used", s.used_cached_certificate() ? "yes" : "no"});
   t.rows.push_back({"transcript sha256", to_hex(s.transcript_digest())});
   t.rows.push_back({"micro stack peak", u64(s.micro_stack().peak()) + " / " + u64(dtls::MicroStack::kCapacity) + " B"});
   t.rows.push_back({"micro stack in use", u64(s.micro_stack().used()) + " B"});
   r.add(std::move(t));
}

int cmd_handshake(const Options& o) {
   const dtls::Mode mode = parse_mode(o.mode);
   const std::string fp_file = fingerprint_path(o);
   pki::CertCache certs = mode == dtls::Mode::Cached ? dtls::load_cert_cache(fp_file) : pki::CertCache();
   Report r("handshake " + o.curve + " " + o.mode + " (" + o.transport + ")", model());

   std::unique_ptr<Endpoint> client, server;
   if(o.transport == "loopback") {
      if(o.role != "loopback") {
         throw UsageError("the loopback transport runs both roles; use --role loopback");
      }
      client = make_endpoint(o, dtls::Role::Client, &certs, mode);
      server = make_endpoint(o, dtls::Role::Server, nullptr, mode);
      dtls::LoopbackLink link(o.client_port ? "127.0.0.1:" + std::to_string(o.client_port) : "127.0.0.1:4433");
      const auto out = dtls::run_loopback(*client->session, *server->session, link);
      if(!out.both_established()) {
         report_failure(*client->session);
         return report_failure(*server->session);
      }
   } else if(o.transport == "udp") {
      if(o.role == "server") {
         server = make_endpoint(o, dtls::Role::Server, nullptr, mode);
         dtls::UdpTransport t(o.host, o.port, 30000);
         std::cerr << "listening on " << o.host << ":" << t.local_port() << "\n";
         dtls::run_endpoint(*server->session, t);
         if(!server->session->established()) {
            return report_failure(*server->session);
         }
      } else if(o.role == "client") {
         client = make_endpoint(o, dtls::Role::Client, &certs, mode);
         dtls::UdpTransport t("127.0.0.1", o.client_port, 10000);
         t.connect(o.host, o.port);
         dtls::run_endpoint(*client->session, t);
         if(!client->session->established()) {
            return report_failure(*client->session);
         }
      } else {
         throw UsageError("udp needs --role client or --role server");
      }
   } else {
      throw UsageError("transport must be loopback or udp");
   }

   std::cout << "ESTABLISHED\n";
   for(auto* ep : {client.get(), server.get()}) {
      if(ep) {
         add_session_summary(r, *ep->session);
      }
   }
   if(client) {
      const auto& s = *client->session;
      const auto scenario = as_scenario(s, o, mode);
      add_scenario(r, scenario, "handshake.client");
      r.add(Metric{"handshake.client.ecdsa_verify", double(s.handshake_counters()[Op::EcdsaVerify]), "count",
                   "counted"});
      if(mode == dtls::Mode::Cached) {
         if(s.used_cached_certificate()) {
            // Same seeds without the cache, for the verify delta and energy ratio.
            auto ref_client = make_endpoint(o, dtls::Role::Client, nullptr, dtls::Mode::Full);
            auto ref_server = make_endpoint(o, dtls::Role::Server, nullptr, dtls::Mode::Full);
            dtls::LoopbackLink link;
            if(!dtls::run_loopback(*ref_client->session, *ref_server->session, link).both_established()) {
               throw InternalError("reference full handshake failed");
            }
            const auto full = as_scenario(*ref_client->session, o, dtls::Mode::Full);
            r.add(metrics::compare_report(full, scenario, model(), "handshake.full_vs_cached"));
            r.add(Metric{"handshake.ecdsa_verify_delta",
                         double(full.counters[Op::EcdsaVerify]) - double(scenario.counters[Op::EcdsaVerify]), "count",
                         "counted: full minus cached"});
         } else {
            std::cout << "certificate cache primed (" << fp_file << "); rerun with --mode cached to use it\n";
         }
         dtls::save_cert_cache(certs, fp_file);
      }
   }
   if(server) {
      add_scenario(r, as_scenario(*server->session, o, mode), "handshake.server");
   }
   emit(r, o);
   return kOk;
}

int bench_ecsm(const Options& o, Report& r) {
   Table sweep{"ECSM sweep (" + std::to_string(o.scalars) + " random scalars per cell)",
               {"curve", "p bits", "comb hit", "comb build+use", "jacobian comb", "affine d&a", "jacobian d&a"},
               {}};
   for(const char* id : kNamedCurves) {
      const auto bits = ecc::CurveRegistry::builtin().find(id)->field().bitlen();
      std::vector<std::string> row{id, u64(bits)};
      for(auto m : {EcsmMethod::CombHit, EcsmMethod::CombMiss, EcsmMethod::CombJacobian, EcsmMethod::DoubleAndAdd,
                    EcsmMethod::Jacobian}) {
         const double e = metrics::scenario_energy(scenarios::ecsm(id, m, o.scalars, o.seed), model()).total;
         row.push_back(metrics::format_joules(e));
         r.add(Metric{"ecsm." + std::string(id) + "." + std::string(scenarios::method_name(m)), e, "J", "modeled"});
      }
      sweep.rows.push_back(row);
   }
   r.add(std::move(sweep));
   const auto hit = scenarios::ecsm(o.curve, EcsmMethod::CombHit, o.scalars, o.seed);
   const auto da = scenarios::ecsm(o.curve, EcsmMethod::DoubleAndAdd, o.scalars, o.seed);
   r.add(metrics::compare_report(da, hit, model(), "ecsm.comb_vs_double_and_add"));
   r.add(metrics::compare_report(scenarios::ecsm(o.curve, EcsmMethod::CombJacobian, o.scalars, o.seed), hit, model(),
                                 "ecsm.jacobian_vs_affine_comb"));
   r.add(metrics::compare_report(scenarios::ecsm(o.curve, EcsmMethod::Jacobian, o.scalars, o.seed), da, model(),
                                 "ecsm.jacobian_vs_affine_double_and_add"));
   r.add(metrics::compare_report(scenarios::ecsm(o.curve, EcsmMethod::CombMiss, o.scalars, o.seed), hit, model(),
                                 "ecsm.table_build_vs_hit"));
   r.add_weight_table();
   return kOk;
}

int cmd_bench(const Options& o) {
   Report r("bench " + o.target, model());
   if(o.target == "ecsm") {
      bench_ecsm(o, r);
   } else if(o.target == "ecmqv") {
      add_scenario(r, scenarios::ecmqv(o.curve, o.seed), "ecmqv." + o.curve);
      std::cout << "ECMQV keys agree\n";
   } else if(o.target == "schnorr") {
      add_scenario(r, scenarios::schnorr(o.curve, o.seed), "schnorr." + o.curve);
      std::cout << "Schnorr transcript verifies\n";
   } else if(o.target == "merkle") {
      const auto s = scenarios::merkle(o.leaves, o.seed);
      add_scenario(r, s, "merkle");
      r.add(Metric{"merkle.node_hashes", double(s.counters[Op::MerkleHash]), "count", "counted"});
   } else if(o.target == "appdata") {
      const auto s = scenarios::app_data(o.curve, o.kib, o.seed);
      add_scenario(r, s, "appdata." + o.curve);
      const double per_byte = metrics::scenario_energy(s, model()).total / double(1024 * o.kib);
      r.add(Table{"application data", {"quantity", "value"}, {{"bytes sealed", u64(s.counters[Op::BytesSealed])},
                                                              {"energy per byte", metrics::format_joules(per_byte)}}});
      r.add(Metric{"appdata.energy_per_byte", per_byte, "J/B", "modeled"});
   } else {
      throw UsageError("unknown bench target '" + o.target + "' (ecsm, ecmqv, schnorr, merkle, appdata)");
   }
   emit(r, o);
   return kOk;
}

int cmd_kat(const Options& o) {
   const auto sum = kat::run_directory(o.vectors);
   for(const auto& f : sum.files) {
      if(!f.error.empty()) {
         std::cout << f.file << ": ERROR " << f.error << "\n";
         continue;
      }
      std::cout << f.file << ": " << f.passed << " passed, " << f.failed << " failed\n";
      for(const auto& msg : f.failures) {
         std::cout << "  " << msg << "\n";
      }
   }
   std::cout << "total: " << sum.passed() << " passed, " << sum.failed() << " failed, " << sum.errors()
             << " unreadable\n";
   if(sum.passed() + sum.failed() == 0 && sum.errors() == 0) {
      std::cout << "warning: no vectors found in " << o.vectors << "\n";
   }
   if(sum.errors() > 0 && sum.failed() == 0) {
      return kIo;
   }
   return sum.ok() ? kOk : kKatFailure;
}

}  // namespace

int main(int argc, char** argv) {
   CLI::App app{"DTLS engine: credentials, handshakes, benchmarks and known-answer tests"};
   app.require_subcommand(1);
   app.set_config("--config", "", "key=value configuration file");
   Options o;
   app.add_option("--curve", o.curve, "named curve")->capture_default_str();
   app.add_option("--mode", o.mode, "full | cached")->capture_default_str();
   app.add_option("--role", o.role, "client | server | loopback")->capture_default_str();
   app.add_option("--transport", o.transport, "loopback | udp")->capture_default_str();
   app.add_option("--host", o.host, "udp address (server binds, client connects)")->capture_default_str();
   app.add_option("--port", o.port, "udp port")->capture_default_str();
   app.add_option("--client-port", o.client_port,
                  "client's udp port; in loopback, the client address the server sees")
      ->capture_default_str();
   app.add_option("--seed", o.seed, "DRBG seed (hex)")->capture_default_str();
   app.add_option("--report", o.report, "also write the report to this file");
   app.add_option("--vectors", o.vectors, "known-answer vector directory")->capture_default_str();
   app.add_option("--creds", o.creds, "credential directory (generated in memory from the seed if absent)");
   app.add_option("--fingerprints", o.fingerprints, "certificate cache file (default <creds>/fingerprints.txt)");
   app.add_option("--scalars", o.scalars, "random scalars per ECSM benchmark cell")->capture_default_str();
   app.add_option("--leaves", o.leaves, "Merkle leaves")->capture_default_str();
   app.add_option("--kib", o.kib, "application data to stream, in KiB")->capture_default_str();

   auto* keygen = app.add_subcommand("keygen", "write CA, server and client credentials to --creds");
   auto* handshake = app.add_subcommand("handshake", "run a DTLS handshake");
   auto* bench = app.add_subcommand("bench", "counted benchmarks with modeled energy");
   bench->add_option("target", o.target, "ecsm | ecmqv | schnorr | merkle | appdata")->required();
   auto* katcmd = app.add_subcommand("kat", "run known-answer vectors from --vectors");
   for(auto* sub : {keygen, handshake, bench, katcmd}) {
      sub->fallthrough();
   }

   try {
      app.parse(argc, argv);
   } catch(const CLI::ParseError& e) {
      const int rc = app.exit(e);
      return rc == 0 ? kOk : kUsage;
   }

   try {
      ecc::CurveRegistry::builtin().find(o.curve);
      if(*keygen) {
         return cmd_keygen(o);
      }
      if(*handshake) {
         return cmd_handshake(o);
      }
      if(*bench) {
         return cmd_bench(o);
      }
      return cmd_kat(o);
   } catch(const UsageError& e) {
      std::cerr << "usage error: " << e.what() << "\n";
      return kUsage;
   } catch(const UnsupportedCurve& e) {
      std::cerr << "usage error: " << e.what() << "\n";
      return kUsage;
   } catch(const IoError& e) {
      std::cerr << "i/o error: " << e.what() << "\n";
      return kIo;
   } catch(const MalformedInput& e) {
      std::cerr << "malformed input: " << e.what() << "\n";
      return kIo;
   } catch(const SessionFailure& e) {
      std::cerr << "protocol failure: " << e.what() << "\n";
      return kProtocol;
   } catch(const std::exception& e) {
      std::cerr << "internal error: " << e.what() << "\n";
      return kInternal;
   }
}
