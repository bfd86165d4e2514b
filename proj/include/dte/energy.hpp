// Energy model: a weight per counter kind, priced in joules.
//
// Field-level work is priced in abstract units (one multiplier iteration, one
// add/sub, two units per inverted bit) times a single scale factor fitted so
// that one comb scalar multiplication on secp256r1 with a cached table costs
// 6.34 uJ. AES and SHA weights are taken per block / compression directly.
// Everything else is event bookkeeping and weighs zero. The result is a
// model: it reproduces ratios and shares, not silicon measurements.
#pragma once

#include "dte/counters.hpp"

#include <array>
#include <optional>
#include <string>

namespace dte::metrics {

enum class Category : uint8_t { Ecc, Symmetric, Other };
inline constexpr size_t kCategoryCount = 3;

std::string_view category_name(Category c);

struct Weight {
   std::optional<double> joules;  // empty: kind is not priced, which makes it an error to encounter
   Category category = Category::Other;
   std::string provenance;
};

class EnergyModel {
 public:
   // Published anchors.
   static constexpr double kEcsm256Joules = 6.34e-6;
   static constexpr double kAesBlockJoules = 6.21e-9;
   static constexpr double kShaCompressJoules = 24.3e-9;

   // Abstract units per counted quantity below the ECSM level.
   static constexpr double kUnitsPerMulIteration = 1.0;
   static constexpr double kUnitsPerAddSub = 1.0;
   static constexpr double kUnitsPerInvertedBit = 2.0;  // binary Euclid runs ~2 * bitlen(p) steps

   /// Joules per unit fitted against the reference comb ECSM (see calibrate()).
   static constexpr double kDefaultUnitJoules = 6.34e-6 / 186069.0;

   /// Paper-calibrated defaults with the stored unit energy.
   static EnergyModel paper_default();
   /// Defaults with the unit energy fitted so `reference` costs `target_joules`.
   static EnergyModel calibrate(const OpCounters& reference, double target_joules);
   /// Weight table with every kind unpriced.
   static EnergyModel empty();

   /// Field-level units in a counter set (the quantity the unit energy scales).
   static double field_units(const OpCounters& c);

   void set(Op op, double joules, Category category, std::string provenance);
   void unset(Op op);
   const Weight& weight(Op op) const { return m_weights[static_cast<size_t>(op)]; }
   double unit_joules() const { return m_unit; }

   /// Calibration header: the anchors and the fitted unit, one line each.
   std::string describe() const;

 private:
   void apply_unit(double unit);

   std::array<Weight, kOpCount> m_weights{};
   double m_unit = 0;
};

struct EnergyEstimate {
   double total = 0;
   std::array<double, kCategoryCount> by_category{};
   std::array<double, kOpCount> by_op{};

   double of(Category c) const { return by_category[static_cast<size_t>(c)]; }
   double share(Category c) const { return total > 0 ? of(c) / total : 0; }
};

/// Dot product of counters and weights. Throws UsageError listing every kind
/// that has a nonzero tally but no weight.
EnergyEstimate energy_estimate(const OpCounters& counters, const EnergyModel& model);

}  // namespace dte::metrics
