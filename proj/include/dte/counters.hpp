// Primitive-operation tallies threaded through every primitive.
//
// Each thread owns a monotonic tally. A CounterScope snapshots it on entry and
// reports the exact delta; scopes nest and must close in LIFO order.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dte::metrics {

enum class Op : uint8_t {
   ModAdd,
   ModSub,
   ModMul,
   MulIteration,   // one bit-serial step of the interleaved multiplier
   CondSubtract,   // conditional subtraction evaluated inside the multiplier
   ModInvEuclid,
   InvBits,        // bitlen(p) per Euclid inversion; the unit the inverter is priced in
   ModInvFermat,
   PointAdd,
   PointDouble,
   LadderStep,
   CombPrecompute,
   CombCacheHit,
   CombCacheMiss,
   EcsmComb,
   EcsmDoubleAdd,
   EcsmJacobian,
   EcsmCombJacobian,
   EcsmLadder,
   AesBlock,
   GhashBlock,
   ShaCompress,
   Hmac,
   DrbgGenerate,
   EcdsaSign,
   EcdsaVerify,
   EcdhShared,
   EcmqvShared,
   SchnorrRespond,
   MerkleHash,     // one node or leaf hash of a Merkle tree
   X509Parse,
   CertCacheHit,
   CertCacheMiss,
   BytesSealed,
   BytesOpened,
   kCount,
};

inline constexpr size_t kOpCount = static_cast<size_t>(Op::kCount);

std::string_view op_name(Op op);

/// True for event-like kinds that appear in operation traces; quantity
/// counters (iterations, bits, bytes) are tallied but not traced.
bool is_traced(Op op);

struct OpCounters {
   std::array<uint64_t, kOpCount> tally{};

   uint64_t operator[](Op op) const { return tally[static_cast<size_t>(op)]; }
   uint64_t& operator[](Op op) { return tally[static_cast<size_t>(op)]; }

   bool all_zero() const;

   OpCounters& operator+=(const OpCounters& other);
   friend OpCounters operator+(OpCounters a, const OpCounters& b) { return a += b; }
   friend OpCounters operator-(const OpCounters& a, const OpCounters& b);
   friend bool operator==(const OpCounters&, const OpCounters&) = default;
};

/// Adds n to the calling thread's tally (and to the traces of open tracing scopes).
void count(Op op, uint64_t n = 1);

/// Snapshot of the calling thread's monotonic tally.
OpCounters thread_totals();

class CounterScope {
 public:
   explicit CounterScope(std::string label, bool record_trace = false);
   ~CounterScope();

   CounterScope(const CounterScope&) = delete;
   CounterScope& operator=(const CounterScope&) = delete;

   /// Delta since construction (or up to close()).
   OpCounters diff() const;

   /// Ends the scope; throws UsageError if a nested scope is still open.
   OpCounters close();

   const std::string& label() const { return m_label; }
   const std::vector<Op>& trace() const { return m_trace; }
   bool tracing() const { return m_tracing; }

 private:
   friend void count(Op, uint64_t);

   std::string m_label;
   OpCounters m_start;
   OpCounters m_end;
   bool m_tracing;
   bool m_open = true;
   std::vector<Op> m_trace;
};

/// Suspends counting on this thread, e.g. for registry validation or cache keys.
class CountingPaused {
 public:
   CountingPaused();
   ~CountingPaused();
   CountingPaused(const CountingPaused&) = delete;
   CountingPaused& operator=(const CountingPaused&) = delete;
};

}  // namespace dte::metrics
