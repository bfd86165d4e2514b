#include "dte/counters.hpp"

#include "dte/errors.hpp"

#include <algorithm>

namespace dte::metrics {

namespace {

struct ThreadState {
   OpCounters totals;
   std::vector<CounterScope*> open;
   int paused = 0;
   int tracing = 0;
};

thread_local ThreadState t_state;

constexpr std::array<std::string_view, kOpCount> kNames = {
   "mod_add",       "mod_sub",         "mod_mul",          "mul_iteration",   "cond_subtract",
   "mod_inv_euclid", "inv_bits",       "mod_inv_fermat",   "point_add",       "point_double",
   "ladder_step",   "comb_precompute", "comb_cache_hit",   "comb_cache_miss", "ecsm_comb",
   "ecsm_double_and_add", "ecsm_jacobian", "ecsm_comb_jacobian", "ecsm_ladder",  "aes_block",       "ghash_block",
   "sha_compress",  "hmac",            "drbg_generate",    "ecdsa_sign",      "ecdsa_verify",
   "ecdh_shared",   "ecmqv_shared",    "schnorr_respond",  "merkle_hash",     "x509_parse",
   "cert_cache_hit", "cert_cache_miss", "bytes_sealed",    "bytes_opened",
};

}  // namespace

std::string_view op_name(Op op) {
   return kNames[static_cast<size_t>(op)];
}

bool is_traced(Op op) {
   switch(op) {
      case Op::MulIteration:
      case Op::CondSubtract:
      case Op::InvBits:
      case Op::BytesSealed:
      case Op::BytesOpened:
         return false;
      default:
         return true;
   }
}

bool OpCounters::all_zero() const {
   return std::all_of(tally.begin(), tally.end(), [](uint64_t v) { return v == 0; });
}

OpCounters& OpCounters::operator+=(const OpCounters& other) {
   for(size_t i = 0; i != kOpCount; ++i) {
      tally[i] += other.tally[i];
   }
   return *this;
}

OpCounters operator-(const OpCounters& a, const OpCounters& b) {
   OpCounters r;
   for(size_t i = 0; i != kOpCount; ++i) {
      r.tally[i] = a.tally[i] - b.tally[i];
   }
   return r;
}

void count(Op op, uint64_t n) {
   auto& st = t_state;
   if(st.paused != 0) {
      return;
   }
   st.totals[op] += n;
   if(st.tracing != 0 && is_traced(op)) {
      for(auto* scope : st.open) {
         if(scope->m_tracing) {
            scope->m_trace.insert(scope->m_trace.end(), n, op);
         }
      }
   }
}

OpCounters thread_totals() {
   return t_state.totals;
}

CounterScope::CounterScope(std::string label, bool record_trace) :
      m_label(std::move(label)), m_start(t_state.totals), m_tracing(record_trace) {
   t_state.open.push_back(this);
   if(m_tracing) {
      ++t_state.tracing;
   }
}

CounterScope::~CounterScope() {
   if(m_open) {
      auto& open = t_state.open;
      open.erase(std::remove(open.begin(), open.end(), this), open.end());
      if(m_tracing) {
         --t_state.tracing;
      }
   }
}

OpCounters CounterScope::diff() const {
   return (m_open ? t_state.totals : m_end) - m_start;
}

OpCounters CounterScope::close() {
   if(!m_open) {
      throw UsageError("counter scope '" + m_label + "' already closed");
   }
   auto& open = t_state.open;
   if(open.empty() || open.back() != this) {
      throw UsageError("unbalanced counter scope: '" + m_label + "' closed while '" +
                       (open.empty() ? std::string("?") : open.back()->m_label) + "' is still open");
   }
   open.pop_back();
   if(m_tracing) {
      --t_state.tracing;
   }
   m_end = t_state.totals;
   m_open = false;
   return m_end - m_start;
}

CountingPaused::CountingPaused() {
   ++t_state.paused;
}

CountingPaused::~CountingPaused() {
   --t_state.paused;
}

}  // namespace dte::metrics
