// Helpers shared between the curve and ECSM translation units.
#pragma once

#include "dte/curve.hpp"

namespace dte::ecc::detail {

/// Left-to-right double-and-add for any k >= 0 (k may be >= n).
AffinePoint multiply_unchecked(const BigUint& k, const AffinePoint& p);

/// Montgomery x-only ladder over `steps` bits of k; nullopt when the result is infinity.
std::optional<FieldElement> ladder_x(const CurveParams& curve, const BigUint& k, const FieldElement& x, unsigned steps);

}  // namespace dte::ecc::detail
