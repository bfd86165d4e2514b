#include "dte/ecsm.hpp"

#include "dte/counters.hpp"
#include "dte/errors.hpp"
#include "ecc_internal.hpp"

#include <algorithm>
#include <bit>

namespace dte::ecc {

using metrics::count;
using metrics::Op;

namespace {

void check_scalar(const BigUint& k, const CurveParams& curve) {
   if(k.is_zero() || k >= curve.order()) {
      throw UsageError("scalar must satisfy 1 <= k < n");
   }
}

void check_base(const AffinePoint& p) {
   if(p.curve().kind() != CurveKind::Weierstrass) {
      throw UsageError("comb and double-and-add need a Weierstrass curve");
   }
   if(p.at_infinity()) {
      throw UsageError("base point is the point at infinity");
   }
   if(!p.curve().is_on_curve(p)) {
      throw UsageError("base point is not on the curve");
   }
}

// -P or the table entry itself, with the negation always computed.
AffinePoint signed_entry(const AffinePoint& e, bool negate) {
   FieldElement y = e.y();
   FieldElement ny = -y;
   field::conditional_swap(y, ny, negate);
   return AffinePoint::unchecked(e.curve(), e.x(), y);
}

}  // namespace

ZsdScalar zsd_recode(const BigUint& k, unsigned t) {
   if(k.is_zero()) {
      throw UsageError("ZSD recoding needs k >= 1");
   }
   if(t == 0 || t > 300) {
      throw UsageError("ZSD digit count out of range");
   }
   ZsdScalar z;
   z.t = t;
   z.c = k.is_odd() ? 2 : 1;
   BigUint kp;
   if(BigUint::add(kp, k, BigUint(z.c)) != 0 || kp.bitlen() > t) {
      throw UsageError("scalar too large for the ZSD digit count");
   }
   z.digits.resize(t);
   for(unsigned i = 0; i + 1 < t; ++i) {
      z.digits[i] = static_cast<int8_t>(2 * static_cast<int>(kp.bit(i + 1)) - 1);
   }
   z.digits[t - 1] = 1;
   return z;
}

unsigned comb_columns(const CurveParams& curve, unsigned w) {
   if(w == 0) {
      throw UsageError("comb width must be positive");
   }
   return (curve.order().bitlen() + 1 + w - 1) / w;
}

BaseId base_id(const AffinePoint& p) {
   metrics::CountingPaused paused;
   sym::Sha256 h;
   h.update(p.curve().id());
   const uint8_t sep = 0;
   h.update(ByteSpan(&sep, 1));
   h.update(p.encode());
   return h.final();
}

size_t CombTable::modeled_bytes() const {
   if(curve == nullptr) {
      return 0;
   }
   return entries.size() * 2 * curve->field().byte_len();
}

CombTable comb_precompute(const AffinePoint& p, unsigned w, unsigned t) {
   check_base(p);
   if(w < 1 || w > 8) {
      throw UsageError("comb width must be in [1, 8]");
   }
   if(t < w) {
      throw UsageError("comb needs at least w digits");
   }
   count(Op::CombPrecompute);
   CombTable table;
   table.base_id = base_id(p);
   table.curve = &p.curve();
   table.w = w;
   table.d = (t + w - 1) / w;

   // rows[i] = 2^(i*d) * P and twice[i] = 2 * rows[i]
   std::vector<AffinePoint> rows{p};
   std::vector<AffinePoint> twice;
   for(unsigned i = 1; i < w; ++i) {
      AffinePoint r = rows.back();
      for(unsigned j = 0; j < table.d; ++j) {
         r = point_double(r);
         if(j == 0) {
            twice.push_back(r);
         }
      }
      rows.push_back(r);
   }

   const size_t n = size_t(1) << (w - 1);
   table.entries.reserve(n);
   // Pattern 0 is rows[w-1] - sum(rows[0..w-2]); setting bit b adds 2 * rows[b].
   AffinePoint e0 = rows[w - 1];
   for(unsigned i = 0; i + 1 < w; ++i) {
      e0 = point_add(e0, point_negate(rows[i]));
   }
   table.entries.push_back(e0);
   for(size_t j = 1; j < n; ++j) {
      const unsigned b = std::bit_width(j) - 1;
      table.entries.push_back(point_add(table.entries[j ^ (size_t(1) << b)], twice[b]));
   }
   return table;
}

CombCache::CombCache(unsigned w, size_t capacity) : m_w(w), m_capacity(capacity) {
   if(w < 1 || w > 8 || capacity == 0) {
      throw UsageError("invalid comb cache geometry");
   }
}

std::shared_ptr<const CombTable> CombCache::get_or_build(const AffinePoint& p) {
   const BaseId key = base_id(p);
   for(auto it = m_entries.begin(); it != m_entries.end(); ++it) {
      if(it->key == key) {
         count(Op::CombCacheHit);
         m_entries.splice(m_entries.begin(), m_entries, it);
         return m_entries.front().table;
      }
   }
   count(Op::CombCacheMiss);
   const unsigned d = comb_columns(p.curve(), m_w);
   auto table = std::make_shared<const CombTable>(comb_precompute(p, m_w, m_w * d));
   put(key, table);
   return table;
}

void CombCache::put(const BaseId& key, std::shared_ptr<const CombTable> table) {
   std::erase_if(m_entries, [&](const Entry& e) { return e.key == key; });
   m_entries.push_front(Entry{key, std::move(table)});
   while(m_entries.size() > m_capacity) {
      m_entries.pop_back();
   }
}

bool CombCache::contains(const AffinePoint& p) const {
   const BaseId key = base_id(p);
   return std::any_of(m_entries.begin(), m_entries.end(), [&](const Entry& e) { return e.key == key; });
}

size_t CombCache::modeled_bytes() const {
   size_t total = 0;
   for(const auto& e : m_entries) {
      total += e.table->modeled_bytes();
   }
   return total;
}

namespace {

// Signed table entry selected by column `col` of the recoded scalar.
AffinePoint comb_column_point(const CombTable& table, const ZsdScalar& z, unsigned col) {
   const unsigned w = table.w;
   const unsigned d = table.d;
   const int top = z.digits[col + (w - 1) * d];
   size_t j = 0;
   for(unsigned row = 0; row + 1 < w; ++row) {
      // sign relative to the top digit, which the table fixes at +1
      if(z.digits[col + row * d] == top) {
         j |= size_t(1) << row;
      }
   }
   return signed_entry(table.entries[j], top < 0);
}

// -c*P. Both candidates are formed on every call.
AffinePoint comb_correction(const AffinePoint& p, const ZsdScalar& z) {
   const AffinePoint p2 = point_double(p);
   const AffinePoint& alt = p2.at_infinity() ? p : p2;  // only for bases of order two
   FieldElement cx = p.x();
   FieldElement cx2 = alt.x();
   FieldElement cy = -p.y();
   FieldElement cy2 = -alt.y();
   field::conditional_swap(cx, cx2, z.c == 2);
   field::conditional_swap(cy, cy2, z.c == 2);
   return p2.at_infinity() && z.c == 2 ? AffinePoint::infinity(p.curve()) : AffinePoint::unchecked(p.curve(), cx, cy);
}

// Table lookup and recoding shared by both comb variants.
std::pair<std::shared_ptr<const CombTable>, ZsdScalar> comb_setup(const BigUint& k, const AffinePoint& p,
                                                                  CombCache& cache) {
   check_base(p);
   check_scalar(k, p.curve());
   auto table = cache.get_or_build(p);
   if(table->w * table->d < comb_columns(p.curve(), table->w) * table->w) {
      throw InternalError("comb table too narrow for this curve");
   }
   return {table, zsd_recode(k, table->w * table->d)};
}

}  // namespace

AffinePoint ecsm_comb(const BigUint& k, const AffinePoint& p, CombCache& cache) {
   check_base(p);
   check_scalar(k, p.curve());
   auto table = cache.get_or_build(p);
   return ecsm_comb(k, p, *table);
}

AffinePoint ecsm_comb(const BigUint& k, const AffinePoint& p, const CombTable& table) {
   check_base(p);
   check_scalar(k, p.curve());
   if(table.curve != &p.curve() || table.base_id != base_id(p) ||
      table.entries.size() != (size_t(1) << (table.w - 1))) {
      throw InternalError("comb table does not belong to this base point");
   }
   count(Op::EcsmComb);
   const unsigned w = table.w;
   const unsigned d = table.d;
   if(w * d < comb_columns(p.curve(), w) * w) {
      throw InternalError("comb table too narrow for this curve");
   }
   const ZsdScalar z = zsd_recode(k, w * d);

   AffinePoint q = AffinePoint::infinity(p.curve());
   for(unsigned col = d; col-- > 0;) {
      q = point_double(q);
      q = point_add(q, comb_column_point(table, z, col));
   }
   return point_add(q, comb_correction(p, z));
}

namespace detail {

AffinePoint multiply_unchecked(const BigUint& k, const AffinePoint& p) {
   AffinePoint q = AffinePoint::infinity(p.curve());
   for(unsigned i = k.bitlen(); i-- > 0;) {
      q = point_double(q);
      if(k.bit(i)) {
         q = point_add(q, p);
      }
   }
   return q;
}

}  // namespace detail

AffinePoint ecsm_double_and_add(const BigUint& k, const AffinePoint& p) {
   check_base(p);
   check_scalar(k, p.curve());
   count(Op::EcsmDoubleAdd);
   return detail::multiply_unchecked(k, p);
}

namespace {

struct Jacobian {
   FieldElement x, y, z;
   bool inf;
};

Jacobian jac_double(const Jacobian& p, const FieldElement& a) {
   count(Op::PointDouble);
   if(p.inf || p.y.is_zero()) {
      return Jacobian{p.x, p.y, p.z, true};
   }
   const auto xx = p.x * p.x;
   const auto yy = p.y * p.y;
   const auto yyyy = yy * yy;
   const auto zz = p.z * p.z;
   const auto t = p.x + yy;
   auto s = t * t - xx - yyyy;
   s = s + s;
   const auto m = xx + xx + xx + a * (zz * zz);
   const auto x3 = m * m - s - s;
   auto y8 = yyyy + yyyy;
   y8 = y8 + y8;
   y8 = y8 + y8;
   const auto y3 = m * (s - x3) - y8;
   const auto yz = p.y + p.z;
   const auto z3 = yz * yz - yy - zz;
   return Jacobian{x3, y3, z3, false};
}

// Mixed addition: q is affine (Z = 1).
Jacobian jac_add_affine(const Jacobian& p, const AffinePoint& q, const FieldElement& a) {
   count(Op::PointAdd);
   if(q.at_infinity()) {
      return p;
   }
   if(p.inf) {
      return Jacobian{q.x(), q.y(), FieldElement::one(q.x().modulus()), false};
   }
   const auto z1z1 = p.z * p.z;
   const auto u2 = q.x() * z1z1;
   const auto s2 = q.y() * (p.z * z1z1);
   const auto h = u2 - p.x;
   auto r = s2 - p.y;
   if(h.is_zero()) {
      if(r.is_zero()) {
         return jac_double(p, a);
      }
      return Jacobian{p.x, p.y, p.z, true};
   }
   r = r + r;
   const auto hh = h * h;
   auto i = hh + hh;
   i = i + i;
   const auto j = h * i;
   const auto v = p.x * i;
   const auto x3 = r * r - j - v - v;
   const auto yj = p.y * j;
   const auto y3 = r * (v - x3) - yj - yj;
   const auto zh = p.z + h;
   const auto z3 = zh * zh - z1z1 - hh;
   return Jacobian{x3, y3, z3, false};
}

}  // namespace

AffinePoint ecsm_jacobian(const BigUint& k, const AffinePoint& p) {
   check_base(p);
   check_scalar(k, p.curve());
   count(Op::EcsmJacobian);
   const auto& a = p.curve().a();
   Jacobian q{p.x(), p.y(), FieldElement::one(p.curve().field()), false};
   for(unsigned i = k.bitlen() - 1; i-- > 0;) {
      q = jac_double(q, a);
      if(k.bit(i)) {
         q = jac_add_affine(q, p, a);
      }
   }
   if(q.inf) {
      return AffinePoint::infinity(p.curve());
   }
   const auto zinv = field::mod_inv_fermat(q.z);
   const auto zinv2 = zinv * zinv;
   return AffinePoint::unchecked(p.curve(), q.x * zinv2, q.y * (zinv2 * zinv));
}

AffinePoint ecsm_comb_jacobian(const BigUint& k, const AffinePoint& p, CombCache& cache) {
   const auto [table, z] = comb_setup(k, p, cache);
   count(Op::EcsmCombJacobian);
   const auto& a = p.curve().a();
   Jacobian q{p.x(), p.y(), FieldElement::one(p.curve().field()), true};
   for(unsigned col = table->d; col-- > 0;) {
      q = jac_double(q, a);
      q = jac_add_affine(q, comb_column_point(*table, z, col), a);
   }
   const AffinePoint corr = comb_correction(p, z);
   if(!corr.at_infinity()) {
      q = jac_add_affine(q, corr, a);
   }
   if(q.inf) {
      return AffinePoint::infinity(p.curve());
   }
   const auto zinv = field::mod_inv_fermat(q.z);
   const auto zinv2 = zinv * zinv;
   return AffinePoint::unchecked(p.curve(), q.x * zinv2, q.y * (zinv2 * zinv));
}

namespace detail {

std::optional<FieldElement> ladder_x(const CurveParams& curve, const BigUint& k, const FieldElement& x,
                                     unsigned steps) {
   const PrimeModulus& f = curve.field();
   const auto two = FieldElement::reduce(f, BigUint(2));
   const auto four = FieldElement::reduce(f, BigUint(4));
   // (A + 2) / 4; Euclid inversion of a constant, same cost for every k
   const auto a24 = (curve.a() + two) * field::mod_inv_euclid(four);

   auto x2 = FieldElement::one(f);
   auto z2 = FieldElement::zero(f);
   auto x3 = x;
   auto z3 = FieldElement::one(f);
   bool swap = false;
   for(unsigned t = steps; t-- > 0;) {
      count(Op::LadderStep);
      const bool bit = k.bit(t);
      swap = swap != bit;
      field::conditional_swap(x2, x3, swap);
      field::conditional_swap(z2, z3, swap);
      swap = bit;

      const auto a = x2 + z2;
      const auto aa = a * a;
      const auto b = x2 - z2;
      const auto bb = b * b;
      const auto e = aa - bb;
      const auto c = x3 + z3;
      const auto d = x3 - z3;
      const auto da = d * a;
      const auto cb = c * b;
      const auto s = da + cb;
      const auto m = da - cb;
      x3 = s * s;
      z3 = x * (m * m);
      x2 = aa * bb;
      z2 = e * (bb + a24 * e);
   }
   field::conditional_swap(x2, x3, swap);
   field::conditional_swap(z2, z3, swap);
   if(z2.is_zero()) {
      return std::nullopt;
   }
   return x2 * field::mod_inv_euclid(z2);
}

}  // namespace detail

FieldElement ecsm_montgomery(const BigUint& k, const FieldElement& x_p, const CurveParams& curve) {
   if(curve.kind() != CurveKind::Montgomery) {
      throw UsageError("Montgomery ladder needs a Montgomery curve");
   }
   check_scalar(k, curve);
   if(!(x_p.modulus() == curve.field())) {
      throw UsageError("x coordinate is not in the curve's field");
   }
   if(x_p.is_zero()) {
      throw ValidationError("x = 0 is a point of order two");
   }
   const auto rhs = x_p * x_p * x_p + curve.a() * x_p * x_p + x_p;
   if(!field::is_square(rhs * field::mod_inv_euclid(curve.b()))) {
      throw ValidationError("x coordinate is not on the curve");
   }
   count(Op::EcsmLadder);
   auto r = detail::ladder_x(curve, k, x_p, curve.order().bitlen());
   if(!r) {
      throw ValidationError("ladder input has small order");
   }
   return *r;
}

}  // namespace dte::ecc
