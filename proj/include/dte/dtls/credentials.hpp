// CA, server and client credentials for handshakes, with on-disk storage.
#pragma once

#include "dte/dtls/session.hpp"

#include <filesystem>

namespace dte::dtls {

struct Credential {
   std::shared_ptr<const pki::KeyPair> key;
   Bytes certificate;  // DER
};

struct CredentialSet {
   std::shared_ptr<const ecc::CurveParams> curve;
   Credential ca, server, client;
   std::shared_ptr<const pki::Certificate> anchor;  // parsed CA certificate
};

/// Self-signed CA plus server and client leaves it issued, all on one curve.
CredentialSet generate_credentials(std::shared_ptr<const ecc::CurveParams> curve, sym::HmacDrbg& drbg,
                                   ecc::CombCache& cache, int64_t not_before, int64_t not_after);

/// Writes {ca,server,client}.der and .key (text: curve and private scalar in hex). IoError on failure.
void save_credentials(const CredentialSet& set, const std::filesystem::path& dir);
/// Reads a directory written by save_credentials and checks every key against its certificate.
CredentialSet load_credentials(const std::filesystem::path& dir, ecc::CombCache& cache);

/// Cached server-certificate entries as text ([entry] sections with fingerprint,
/// subject, curve and public key), so a later process can run in cached mode.
void save_cert_cache(const pki::CertCache& cache, const std::filesystem::path& file);
/// Missing file -> empty cache. Malformed entries raise MalformedInput.
pki::CertCache load_cert_cache(const std::filesystem::path& file);

/// Endpoint configuration for one side of a handshake between the set's server and client.
EndpointConfig endpoint_config(const CredentialSet& set, Role role, ByteSpan seed, int64_t now,
                               ecc::CombCache& comb_cache);

}  // namespace dte::dtls
