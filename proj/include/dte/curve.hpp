// Curve registry and affine group law over prime fields.
#pragma once

#include "dte/field.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dte::ecc {

using field::FieldElement;
using field::PrimeModulus;

enum class CurveKind { Weierstrass, Montgomery };

/// Raw registry record before validation.
struct CurveDefinition {
   std::string id;
   CurveKind kind = CurveKind::Weierstrass;
   BigUint p, a, b, gx, gy, n;
   unsigned cofactor = 1;
   uint16_t tls_id = 0;  // NamedCurve code point, 0 if not usable in DTLS
   std::string oid;      // dotted named-curve OID, empty if none
};

class CurveParams;

/// Affine point or the point at infinity. Always tied to a curve; the curve
/// must outlive the point (registry curves live for the whole program).
class AffinePoint {
 public:
   static AffinePoint infinity(const CurveParams& curve) { return AffinePoint(curve); }

   /// Throws ValidationError if (x, y) is not on the curve.
   static AffinePoint from_affine(const CurveParams& curve, const FieldElement& x, const FieldElement& y);

   /// No on-curve check; for formulas whose output is on the curve by construction.
   static AffinePoint unchecked(const CurveParams& curve, const FieldElement& x, const FieldElement& y) {
      return AffinePoint(curve, x, y);
   }

   /// SEC1 uncompressed: 0x04 || X || Y (infinity encodes as a single 0x00).
   Bytes encode() const;

   /// Inverse of encode(); rejects compressed/hybrid forms (MalformedInput) and
   /// points off the curve (ValidationError).
   static AffinePoint decode(const CurveParams& curve, ByteSpan sec1);

   bool at_infinity() const { return m_infinity; }
   const FieldElement& x() const { return m_x; }
   const FieldElement& y() const { return m_y; }
   const CurveParams& curve() const { return *m_curve; }

   friend bool operator==(const AffinePoint& a, const AffinePoint& b);

 private:
   explicit AffinePoint(const CurveParams& curve) : m_curve(&curve), m_infinity(true) {}
   AffinePoint(const CurveParams& curve, const FieldElement& x, const FieldElement& y) :
         m_curve(&curve), m_x(x), m_y(y), m_infinity(false) {}

   const CurveParams* m_curve;
   FieldElement m_x, m_y;
   bool m_infinity;
};

/**
 * Validated curve parameters. Instances are pinned in memory (field elements
 * and the generator refer back into them), so they are only handed out through
 * shared_ptr from create().
 */
class CurveParams {
   struct Passkey {};

 public:
   /// Validates primality of p and n, the discriminant, that G is on the curve,
   /// and that n*G is the point at infinity. Throws UsageError on failure.
   static std::shared_ptr<const CurveParams> create(const CurveDefinition& def);

   CurveParams(Passkey, const CurveDefinition& def);
   CurveParams(const CurveParams&) = delete;
   CurveParams& operator=(const CurveParams&) = delete;

   const std::string& id() const { return m_id; }
   CurveKind kind() const { return m_kind; }
   const PrimeModulus& field() const { return m_field; }
   /// Scalars live in Z_n, which is a prime field as well.
   const PrimeModulus& scalar_field() const { return m_order; }
   const BigUint& order() const { return m_order.value(); }
   unsigned cofactor() const { return m_cofactor; }
   /// Weierstrass a, b or Montgomery A, B.
   const FieldElement& a() const { return m_a; }
   const FieldElement& b() const { return m_b; }
   const AffinePoint& generator() const { return *m_generator; }
   uint16_t tls_id() const { return m_tls_id; }
   const std::string& oid() const { return m_oid; }

   bool is_on_curve(const AffinePoint& p) const;

 private:
   std::string m_id;
   CurveKind m_kind;
   PrimeModulus m_field;
   PrimeModulus m_order;
   unsigned m_cofactor;
   FieldElement m_a, m_b;
   std::optional<AffinePoint> m_generator;
   uint16_t m_tls_id;
   std::string m_oid;
};

class CurveRegistry {
 public:
   /// Registry compiled from data/curves.conf; validated once, on first use.
   static const CurveRegistry& builtin();

   /// Parses the registry text format ([id] sections; p, a, b, gx, gy, n in hex).
   static CurveRegistry parse(std::string_view text);

   /// Throws UnsupportedCurve when absent.
   std::shared_ptr<const CurveParams> find(std::string_view id) const;
   std::shared_ptr<const CurveParams> find_tls(uint16_t tls_id) const;
   std::shared_ptr<const CurveParams> find_oid(std::string_view oid) const;

   std::vector<std::string> ids() const;

 private:
   std::vector<std::shared_ptr<const CurveParams>> m_curves;
};

// Weierstrass group law in affine coordinates; each add/double costs one Euclid inversion.
AffinePoint point_add(const AffinePoint& p, const AffinePoint& q);
AffinePoint point_double(const AffinePoint& p);
AffinePoint point_negate(const AffinePoint& p);

/// On-curve, not infinity, and h*P != infinity. Throws ValidationError.
void validate_public_point(const AffinePoint& p);

}  // namespace dte::ecc
