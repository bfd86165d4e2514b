// Elliptic curve scalar multiplication: the comb method over affine points
// with zero-less signed-digit recoding and a small precomputation cache, plus
// the Montgomery ladder and two baselines kept for cost comparison.
#pragma once

#include "dte/curve.hpp"
#include "dte/sha256.hpp"

#include <cstdint>
#include <list>
#include <memory>
#include <vector>

namespace dte::ecc {

struct ZsdScalar {
   std::vector<int8_t> digits;  // each -1 or +1, least significant first
   unsigned t = 0;
   unsigned c = 0;  // k + c == sum(digits[i] * 2^i)
};

/// Requires k >= 1 and k + c < 2^t. Digit count is always t.
ZsdScalar zsd_recode(const BigUint& k, unsigned t);

constexpr unsigned kDefaultCombWidth = 4;

/// Columns d = ceil((bitlen(n) + 1) / w); the recoded scalar has t = w * d digits.
unsigned comb_columns(const CurveParams& curve, unsigned w);

using BaseId = sym::Digest256;

/// Hash of the curve id and the SEC1 encoding of P (not counted as work).
BaseId base_id(const AffinePoint& p);

struct CombTable {
   BaseId base_id{};
   const CurveParams* curve = nullptr;
   unsigned w = 0;
   unsigned d = 0;
   /// entries[j] = sum_i s_i * 2^(i*d) * P, s_{w-1} = +1 and s_i = +1 iff bit i of j is set.
   std::vector<AffinePoint> entries;

   /// Storage the table would occupy as packed affine coordinates.
   size_t modeled_bytes() const;
};

/// w in [1, 8]; d = ceil(t / w). Throws UsageError for infinity or a non-Weierstrass curve.
CombTable comb_precompute(const AffinePoint& p, unsigned w, unsigned t);

/**
 * LRU cache of comb tables keyed by base_id. Not internally synchronized:
 * callers sharing one cache must serialize access.
 */
class CombCache {
 public:
   static constexpr size_t kCapacity = 6;

   explicit CombCache(unsigned w = kDefaultCombWidth, size_t capacity = kCapacity);

   /// Hit: refreshes recency and counts only a cache hit. Miss: precomputes,
   /// inserts, and evicts the least recently used table when full.
   std::shared_ptr<const CombTable> get_or_build(const AffinePoint& p);

   /// Inserts under an explicit key (preloading, and fault injection in tests).
   void put(const BaseId& key, std::shared_ptr<const CombTable> table);

   bool contains(const AffinePoint& p) const;
   size_t size() const { return m_entries.size(); }
   size_t capacity() const { return m_capacity; }
   unsigned width() const { return m_w; }
   size_t modeled_bytes() const;
   void clear() { m_entries.clear(); }

 private:
   struct Entry {
      BaseId key;
      std::shared_ptr<const CombTable> table;
   };

   unsigned m_w;
   size_t m_capacity;
   std::list<Entry> m_entries;  // most recently used first
};

/// k*P for 1 <= k < n. The sequence of counted operations depends only on the
/// curve and the cache state, never on k. A table whose base does not match P
/// raises InternalError.
AffinePoint ecsm_comb(const BigUint& k, const AffinePoint& p, CombCache& cache);
AffinePoint ecsm_comb(const BigUint& k, const AffinePoint& p, const CombTable& table);

/// Textbook left-to-right double-and-add in affine coordinates.
AffinePoint ecsm_double_and_add(const BigUint& k, const AffinePoint& p);

/// Double-and-add in Jacobian coordinates with one Fermat inversion at the end.
AffinePoint ecsm_jacobian(const BigUint& k, const AffinePoint& p);

/// The comb of ecsm_comb (same recoding, table and operation sequence) with a
/// Jacobian accumulator, mixed additions and one Fermat inversion at the end.
AffinePoint ecsm_comb_jacobian(const BigUint& k, const AffinePoint& p, CombCache& cache);

/**
 * x-coordinate of k*P on a Montgomery curve with an x-only ladder of exactly
 * bitlen(n) steps. Rejects x values not on the curve or of small order
 * (ValidationError) and non-Montgomery curves (UsageError).
 */
FieldElement ecsm_montgomery(const BigUint& k, const FieldElement& x_p, const CurveParams& curve);

}  // namespace dte::ecc
