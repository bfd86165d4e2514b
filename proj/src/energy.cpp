#include "dte/energy.hpp"

#include "dte/errors.hpp"

#include <cstdio>

namespace dte::metrics {

std::string_view category_name(Category c) {
   switch(c) {
      case Category::Ecc: return "ecc";
      case Category::Symmetric: return "symmetric";
      case Category::Other: return "other";
   }
   return "?";
}

EnergyModel EnergyModel::empty() { return EnergyModel(); }

double EnergyModel::field_units(const OpCounters& c) {
   return kUnitsPerMulIteration * double(c[Op::MulIteration]) +
          kUnitsPerAddSub * double(c[Op::ModAdd] + c[Op::ModSub]) +
          kUnitsPerInvertedBit * double(c[Op::InvBits]);
}

void EnergyModel::set(Op op, double joules, Category category, std::string provenance) {
   if(!(joules >= 0)) {
      throw UsageError("energy weight for " + std::string(op_name(op)) + " must be non-negative");
   }
   m_weights[static_cast<size_t>(op)] = Weight{joules, category, std::move(provenance)};
}

void EnergyModel::unset(Op op) { m_weights[static_cast<size_t>(op)].joules.reset(); }

void EnergyModel::apply_unit(double unit) {
   m_unit = unit;
   const std::string fitted = "fitted: secp256r1 comb ECSM (cached table) = 6.34 uJ";
   set(Op::MulIteration, unit * kUnitsPerMulIteration, Category::Ecc, fitted);
   set(Op::ModAdd, unit * kUnitsPerAddSub, Category::Ecc, fitted);
   set(Op::ModSub, unit * kUnitsPerAddSub, Category::Ecc, fitted);
   set(Op::InvBits, unit * kUnitsPerInvertedBit, Category::Ecc, fitted);
}

EnergyModel EnergyModel::paper_default() {
   EnergyModel m;
   // Quantities priced through their parts, and pure events.
   for(Op op : {Op::ModMul, Op::CondSubtract, Op::ModInvEuclid, Op::ModInvFermat, Op::PointAdd, Op::PointDouble,
                Op::LadderStep, Op::CombPrecompute, Op::CombCacheHit, Op::CombCacheMiss, Op::EcsmComb,
                Op::EcsmDoubleAdd, Op::EcsmJacobian, Op::EcsmCombJacobian, Op::EcsmLadder, Op::EcdsaSign, Op::EcdsaVerify, Op::EcdhShared,
                Op::EcmqvShared, Op::SchnorrRespond}) {
      m.set(op, 0, Category::Ecc, "priced through field operations");
   }
   for(Op op : {Op::Hmac, Op::DrbgGenerate, Op::MerkleHash}) {
      m.set(op, 0, Category::Symmetric, "priced through SHA-256 compressions");
   }
   for(Op op : {Op::X509Parse, Op::CertCacheHit, Op::CertCacheMiss, Op::BytesSealed, Op::BytesOpened}) {
      m.set(op, 0, Category::Other, "control flow, not priced");
   }
   m.set(Op::AesBlock, kAesBlockJoules, Category::Symmetric, "published: AES 6.21 nJ per block");
   m.set(Op::GhashBlock, kAesBlockJoules, Category::Symmetric,
         "assumed: GHASH block priced as one AES block (6.21 nJ)");
   m.set(Op::ShaCompress, kShaCompressJoules, Category::Symmetric,
         "published: SHA-256 24.3 nJ, taken per 64-byte compression");
   m.apply_unit(kDefaultUnitJoules);
   return m;
}

EnergyModel EnergyModel::calibrate(const OpCounters& reference, double target_joules) {
   const double units = field_units(reference);
   if(units <= 0 || !(target_joules > 0)) {
      throw UsageError("calibration reference has no field work");
   }
   EnergyModel m = paper_default();
   m.apply_unit(target_joules / units);
   return m;
}

std::string EnergyModel::describe() const {
   char buf[512];
   std::snprintf(buf, sizeof(buf),
                 "# energy model (modeled, not measured)\n"
                 "#   ECSM anchor      %.2f uJ  secp256r1 comb, cached table (published)\n"
                 "#   AES block        %.2f nJ  (published)\n"
                 "#   GHASH block      %.2f nJ  (assumed equal to AES block)\n"
                 "#   SHA compression  %.2f nJ  (published, per 64-byte block)\n"
                 "#   field unit       %.4f pJ  = 1 multiplier iteration = 1 add/sub = 1/%g inverted bit\n",
                 kEcsm256Joules * 1e6, kAesBlockJoules * 1e9, weight(Op::GhashBlock).joules.value_or(0) * 1e9,
                 kShaCompressJoules * 1e9, m_unit * 1e12, kUnitsPerInvertedBit);
   return buf;
}

EnergyEstimate energy_estimate(const OpCounters& counters, const EnergyModel& model) {
   EnergyEstimate e;
   std::string missing;
   for(size_t i = 0; i < kOpCount; ++i) {
      const Op op = static_cast<Op>(i);
      if(counters[op] == 0) {
         continue;
      }
      const Weight& w = model.weight(op);
      if(!w.joules) {
         missing += (missing.empty() ? "" : ", ") + std::string(op_name(op));
         continue;
      }
      const double j = *w.joules * double(counters[op]);
      e.by_op[i] = j;
      e.by_category[static_cast<size_t>(w.category)] += j;
      e.total += j;
   }
   if(!missing.empty()) {
      throw UsageError("no energy weight for counter kind(s): " + missing);
   }
   return e;
}

}  // namespace dte::metrics
