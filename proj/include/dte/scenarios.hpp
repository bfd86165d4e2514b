// Counted workloads behind the comparison reports and benchmarks. Setup work
// (credentials, comb tables for the generator, scalar sampling) runs outside
// the counted region; only the contrasted operation is tallied.
#pragma once

#include "dte/dtls/credentials.hpp"
#include "dte/report.hpp"

#include <string>

namespace dte::scenarios {

enum class EcsmMethod { CombHit, CombMiss, CombJacobian, DoubleAndAdd, Jacobian };

std::string_view method_name(EcsmMethod m);

/// k*G for `scalars` uniformly drawn scalars (DRBG seeded from `seed`).
/// CombHit uses a cache already holding G's table; CombMiss builds the table
/// inside the counted region each time. CombJacobian also starts from a
/// cached table.
metrics::Scenario ecsm(const std::string& curve_id, EcsmMethod method, size_t scalars, const std::string& seed);

/// Client-side counters of one loopback handshake. The client starts from a
/// comb cache holding only the generator's table. In cached mode a priming
/// handshake (not counted) first stores the server certificate.
metrics::Scenario handshake(const std::string& curve_id, dtls::Mode mode, const std::string& seed);

/// Client-side counters for sealing `kib` 1 KiB records on an established session.
metrics::Scenario app_data(const std::string& curve_id, size_t kib, const std::string& seed);

/// One ECMQV agreement per party; throws InternalError if the keys differ.
metrics::Scenario ecmqv(const std::string& curve_id, const std::string& seed);

/// One Schnorr identification round (commit, respond, verify); throws if it fails to verify.
metrics::Scenario schnorr(const std::string& curve_id, const std::string& seed);

/// Root of `leaves` 64-byte leaves.
metrics::Scenario merkle(size_t leaves, const std::string& seed);

/// Fixed validation time used by generated credentials and their sessions.
inline constexpr int64_t kCredentialNotBefore = 1700000000;
inline constexpr int64_t kCredentialNotAfter = 2000000000;
inline constexpr int64_t kSessionTime = 1800000000;

/// Credentials generated once per (curve, seed) and reused.
const dtls::CredentialSet& cached_credentials(const std::string& curve_id, const std::string& seed);

}  // namespace dte::scenarios
