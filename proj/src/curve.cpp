#include "dte/curve.hpp"

#include "dte/counters.hpp"
#include "dte/errors.hpp"
#include "dte/textconf.hpp"
#include "ecc_internal.hpp"

namespace dte::ecc {

extern const std::string_view kBuiltinCurvesConf;

using metrics::count;
using metrics::Op;

namespace {

void require_weierstrass(const CurveParams& c) {
   if(c.kind() != CurveKind::Weierstrass) {
      throw UsageError("affine group law is only defined here for Weierstrass curves");
   }
}

void require_same_curve(const AffinePoint& p, const AffinePoint& q) {
   if(&p.curve() != &q.curve()) {
      throw UsageError("points belong to different curves");
   }
}

}  // namespace

AffinePoint AffinePoint::from_affine(const CurveParams& curve, const FieldElement& x, const FieldElement& y) {
   AffinePoint p(curve, x, y);
   if(!curve.is_on_curve(p)) {
      throw ValidationError("point is not on curve " + curve.id());
   }
   return p;
}

Bytes AffinePoint::encode() const {
   if(m_infinity) {
      return Bytes{0x00};
   }
   Bytes out{0x04};
   auto xb = m_x.to_bytes();
   auto yb = m_y.to_bytes();
   out.insert(out.end(), xb.begin(), xb.end());
   out.insert(out.end(), yb.begin(), yb.end());
   return out;
}

AffinePoint AffinePoint::decode(const CurveParams& curve, ByteSpan sec1) {
   const size_t w = curve.field().byte_len();
   if(sec1.size() != 1 + 2 * w || sec1[0] != 0x04) {
      throw MalformedInput("expected an uncompressed SEC1 point");
   }
   auto x = FieldElement::from_bytes(curve.field(), sec1.subspan(1, w));
   auto y = FieldElement::from_bytes(curve.field(), sec1.subspan(1 + w, w));
   return from_affine(curve, x, y);
}

bool operator==(const AffinePoint& a, const AffinePoint& b) {
   if(&a.curve() != &b.curve()) {
      return false;
   }
   if(a.m_infinity || b.m_infinity) {
      return a.m_infinity == b.m_infinity;
   }
   return a.m_x == b.m_x && a.m_y == b.m_y;
}

std::shared_ptr<const CurveParams> CurveParams::create(const CurveDefinition& def) {
   metrics::CountingPaused paused;
   auto curve = std::make_shared<const CurveParams>(Passkey{}, def);
   const auto& G = curve->generator();
   if(!curve->is_on_curve(G)) {
      throw UsageError("generator of " + def.id + " is not on the curve");
   }
   if(curve->kind() == CurveKind::Weierstrass) {
      if(!detail::multiply_unchecked(def.n, G).at_infinity()) {
         throw UsageError("n*G is not infinity on " + def.id);
      }
   } else {
      if(detail::ladder_x(*curve, def.n, G.x(), def.n.bitlen()).has_value()) {
         throw UsageError("n*G is not infinity on " + def.id);
      }
   }
   return curve;
}

CurveParams::CurveParams(Passkey, const CurveDefinition& def) :
      m_id(def.id),
      m_kind(def.kind),
      m_field(def.p),
      m_order(def.n),
      m_cofactor(def.cofactor),
      m_a(FieldElement::from_uint(m_field, def.a)),
      m_b(FieldElement::from_uint(m_field, def.b)),
      m_tls_id(def.tls_id),
      m_oid(def.oid) {
   if(m_cofactor == 0) {
      throw UsageError("cofactor must be positive");
   }
   if(m_kind == CurveKind::Weierstrass) {
      // 4a^3 + 27b^2 != 0
      auto four = FieldElement::reduce(m_field, BigUint(4));
      auto tw7 = FieldElement::reduce(m_field, BigUint(27));
      auto disc = four * m_a * m_a * m_a + tw7 * m_b * m_b;
      if(disc.is_zero()) {
         throw UsageError("singular curve " + m_id);
      }
   } else {
      // B(A^2 - 4) != 0
      auto four = FieldElement::reduce(m_field, BigUint(4));
      if((m_b * (m_a * m_a - four)).is_zero()) {
         throw UsageError("singular Montgomery curve " + m_id);
      }
   }
   m_generator = AffinePoint::unchecked(*this, FieldElement::from_uint(m_field, def.gx),
                                        FieldElement::from_uint(m_field, def.gy));
}

bool CurveParams::is_on_curve(const AffinePoint& p) const {
   if(&p.curve() != this) {
      return false;
   }
   if(p.at_infinity()) {
      return true;
   }
   const auto& x = p.x();
   const auto& y = p.y();
   if(m_kind == CurveKind::Weierstrass) {
      return y * y == x * x * x + m_a * x + m_b;
   }
   return m_b * y * y == x * x * x + m_a * x * x + x;
}

const CurveRegistry& CurveRegistry::builtin() {
   static const CurveRegistry registry = parse(kBuiltinCurvesConf);
   return registry;
}

CurveRegistry CurveRegistry::parse(std::string_view text) {
   CurveRegistry reg;
   for(const auto& sec : parse_conf(text)) {
      CurveDefinition def;
      def.id = sec.name;
      const auto& kind = sec.at("kind");
      if(kind == "weierstrass") {
         def.kind = CurveKind::Weierstrass;
      } else if(kind == "montgomery") {
         def.kind = CurveKind::Montgomery;
      } else {
         throw MalformedInput("unknown curve kind '" + kind + "'");
      }
      def.p = BigUint::from_hex(sec.at("p"));
      def.a = BigUint::from_hex(sec.at("a"));
      def.b = BigUint::from_hex(sec.at("b"));
      def.gx = BigUint::from_hex(sec.at("gx"));
      def.gy = BigUint::from_hex(sec.at("gy"));
      def.n = BigUint::from_hex(sec.at("n"));
      def.cofactor = static_cast<unsigned>(std::stoul(sec.at("h"), nullptr, 16));
      if(sec.has("tls_id")) {
         def.tls_id = static_cast<uint16_t>(std::stoul(sec.at("tls_id"), nullptr, 16));
      }
      if(sec.has("oid")) {
         def.oid = sec.at("oid");
      }
      for(const auto& existing : reg.m_curves) {
         if(existing->id() == def.id) {
            throw MalformedInput("duplicate curve id " + def.id);
         }
      }
      reg.m_curves.push_back(CurveParams::create(def));
   }
   return reg;
}

std::shared_ptr<const CurveParams> CurveRegistry::find(std::string_view id) const {
   for(const auto& c : m_curves) {
      if(c->id() == id) {
         return c;
      }
   }
   throw UnsupportedCurve("unknown curve '" + std::string(id) + "'");
}

std::shared_ptr<const CurveParams> CurveRegistry::find_tls(uint16_t tls_id) const {
   for(const auto& c : m_curves) {
      if(tls_id != 0 && c->tls_id() == tls_id) {
         return c;
      }
   }
   throw UnsupportedCurve("unsupported named curve " + std::to_string(tls_id));
}

std::shared_ptr<const CurveParams> CurveRegistry::find_oid(std::string_view oid) const {
   for(const auto& c : m_curves) {
      if(!oid.empty() && c->oid() == oid) {
         return c;
      }
   }
   throw UnsupportedCurve("unsupported curve OID " + std::string(oid));
}

std::vector<std::string> CurveRegistry::ids() const {
   std::vector<std::string> out;
   for(const auto& c : m_curves) {
      out.push_back(c->id());
   }
   return out;
}

AffinePoint point_negate(const AffinePoint& p) {
   if(p.at_infinity()) {
      return p;
   }
   return AffinePoint::unchecked(p.curve(), p.x(), -p.y());
}

AffinePoint point_double(const AffinePoint& p) {
   require_weierstrass(p.curve());
   count(Op::PointDouble);
   if(p.at_infinity() || p.y().is_zero()) {
      return AffinePoint::infinity(p.curve());
   }
   const auto& x = p.x();
   const auto& y = p.y();
   auto xx = x * x;
   auto num = xx + xx + xx + p.curve().a();
   auto lambda = num * field::mod_inv_euclid(y + y);
   auto x3 = lambda * lambda - x - x;
   auto y3 = lambda * (x - x3) - y;
   return AffinePoint::unchecked(p.curve(), x3, y3);
}

AffinePoint point_add(const AffinePoint& p, const AffinePoint& q) {
   require_same_curve(p, q);
   require_weierstrass(p.curve());
   count(Op::PointAdd);
   if(p.at_infinity()) {
      return q;
   }
   if(q.at_infinity()) {
      return p;
   }
   if(p.x() == q.x()) {
      if(p.y() == q.y()) {
         return point_double(p);
      }
      return AffinePoint::infinity(p.curve());
   }
   auto lambda = (q.y() - p.y()) * field::mod_inv_euclid(q.x() - p.x());
   auto x3 = lambda * lambda - p.x() - q.x();
   auto y3 = lambda * (p.x() - x3) - p.y();
   return AffinePoint::unchecked(p.curve(), x3, y3);
}

void validate_public_point(const AffinePoint& p) {
   if(p.at_infinity()) {
      throw ValidationError("public point is the point at infinity");
   }
   if(!p.curve().is_on_curve(p)) {
      throw ValidationError("public point is not on the curve");
   }
   if(p.curve().kind() != CurveKind::Weierstrass) {
      throw ValidationError("public points must be on a Weierstrass curve");
   }
   if(p.curve().cofactor() > 1) {
      AffinePoint acc = AffinePoint::infinity(p.curve());
      for(unsigned i = 0; i < p.curve().cofactor(); ++i) {
         acc = point_add(acc, p);
      }
      if(acc.at_infinity()) {
         throw ValidationError("public point lies in the small-order subgroup");
      }
   }
}

}  // namespace dte::ecc
