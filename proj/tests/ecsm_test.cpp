#include "dte/counters.hpp"
#include "dte/ecsm.hpp"
#include "dte/errors.hpp"
#include "ecc_oracle.hpp"

#include <gtest/gtest.h>

using namespace dte;
using namespace dte::ecc;
using dte::test::MCurve;
using dte::test::MPoint;
using metrics::Op;

namespace {

const char* const kNamed[] = {"secp160r1", "secp192r1", "secp224r1", "secp256r1"};

std::shared_ptr<const CurveParams> curve(const char* id) {
   return CurveRegistry::builtin().find(id);
}

mpz_class zsd_value(const ZsdScalar& z) {
   mpz_class v = 0;
   for(unsigned i = z.t; i-- > 0;) {
      v = 2 * v + z.digits[i];
   }
   return v;
}

AffinePoint repeated_addition(unsigned k, const AffinePoint& p) {
   AffinePoint r = AffinePoint::infinity(p.curve());
   for(unsigned i = 0; i < k; ++i) {
      r = point_add(r, p);
   }
   return r;
}

struct OpSummary {
   metrics::OpCounters counts;
   std::vector<Op> trace;
};

template <typename F>
OpSummary observe(F&& f) {
   metrics::CounterScope scope("observe", true);
   f();
   return OpSummary{scope.close(), scope.trace()};
}

}  // namespace

TEST(ZsdRecode, HandCheckedExamples) {
   auto z = zsd_recode(BigUint(4), 3);
   EXPECT_EQ(z.c, 1u);
   EXPECT_EQ(z.digits, (std::vector<int8_t>{-1, 1, 1}));
   z = zsd_recode(BigUint(5), 3);
   EXPECT_EQ(z.c, 2u);
   EXPECT_EQ(z.digits, (std::vector<int8_t>{1, 1, 1}));
}

TEST(ZsdRecode, ReconstructsScalarWithFixedLength) {
   std::mt19937_64 rng(31);
   for(const char* id : kNamed) {
      auto c = curve(id);
      const unsigned t = kDefaultCombWidth * comb_columns(*c, kDefaultCombWidth);
      for(int i = 0; i < 500; ++i) {
         BigUint k = test::random_scalar(rng, c->order());
         auto z = zsd_recode(k, t);
         ASSERT_EQ(z.digits.size(), t);
         for(auto d : z.digits) {
            ASSERT_TRUE(d == 1 || d == -1);
         }
         ASSERT_EQ(zsd_value(z) - z.c, test::to_mpz(k));
      }
      // extremes of the scalar range
      for(BigUint k : {BigUint(1), BigUint(2), c->order() - BigUint(1), c->order() - BigUint(2)}) {
         auto z = zsd_recode(k, t);
         ASSERT_EQ(zsd_value(z) - z.c, test::to_mpz(k));
      }
   }
   for(unsigned k = 1; k < 200; ++k) {
      auto z = zsd_recode(BigUint(k), 9);
      ASSERT_EQ(zsd_value(z) - z.c, k);
   }
}

TEST(ZsdRecode, RangeErrors) {
   EXPECT_THROW(zsd_recode(BigUint(0), 8), UsageError);
   EXPECT_THROW(zsd_recode(BigUint(7), 3), UsageError);  // 7 + 2 needs four digits
   EXPECT_NO_THROW(zsd_recode(BigUint(6), 3));
}

TEST(CombPrecompute, DegenerateAndSmallTables) {
   auto c = curve("toy101");
   const auto& G = c->generator();
   auto t1 = comb_precompute(G, 1, 5);
   ASSERT_EQ(t1.entries.size(), 1u);
   EXPECT_EQ(t1.entries[0], G);

   auto t2 = comb_precompute(G, 2, 2);
   ASSERT_EQ(t2.d, 1u);
   ASSERT_EQ(t2.entries.size(), 2u);
   const auto g2 = point_add(G, G);
   EXPECT_EQ(t2.entries[0], point_add(point_negate(G), g2));
   EXPECT_EQ(t2.entries[1], point_add(G, g2));
}

TEST(CombPrecompute, EntriesMatchSignPatternDefinition) {
   auto c = curve("secp224r1");
   MCurve m(*c);
   const auto& G = c->generator();
   for(unsigned w : {2u, 3u, 4u, 5u}) {
      const unsigned t = w * comb_columns(*c, w);
      auto table = comb_precompute(G, w, t);
      ASSERT_EQ(table.entries.size(), size_t(1) << (w - 1));
      for(size_t j = 0; j < table.entries.size(); ++j) {
         mpz_class coeff = 0;
         for(unsigned i = 0; i < w; ++i) {
            const int s = (i == w - 1 || ((j >> i) & 1)) ? 1 : -1;
            coeff += s * (mpz_class(1) << (i * table.d));
         }
         coeff %= test::to_mpz(c->order());
         if(coeff < 0) {
            coeff += test::to_mpz(c->order());
         }
         ASSERT_EQ(table.entries[j], m.to(m.mul(coeff, m.from(G)))) << "w=" << w << " j=" << j;
         ASSERT_TRUE(c->is_on_curve(table.entries[j]));
      }
   }
   EXPECT_THROW(comb_precompute(AffinePoint::infinity(*c), 4, 232), UsageError);
   EXPECT_THROW(comb_precompute(G, 9, 232), UsageError);
}

TEST(CombPrecompute, ModeledSizeFitsCacheBudget) {
   auto c = curve("secp256r1");
   CombCache cache;
   auto table = cache.get_or_build(c->generator());
   EXPECT_EQ(table->modeled_bytes(), 512u);
   MCurve m(*c);
   std::mt19937_64 rng(32);
   for(int i = 0; i < 5; ++i) {
      auto P = m.to(m.mul(test::to_mpz(test::random_scalar(rng, c->order())), m.from(c->generator())));
      cache.get_or_build(P);
   }
   EXPECT_EQ(cache.size(), 6u);
   EXPECT_LE(cache.modeled_bytes(), 4096u);
}

TEST(EcsmComb, SimpleScalars) {
   for(const char* id : kNamed) {
      auto c = curve(id);
      const auto& G = c->generator();
      CombCache cache;
      EXPECT_EQ(ecsm_comb(BigUint(1), G, cache), G);
      EXPECT_EQ(ecsm_comb(BigUint(2), G, cache), point_double(G));
      EXPECT_EQ(ecsm_comb(c->order() - BigUint(1), G, cache), point_negate(G));
      EXPECT_EQ(ecsm_comb(c->order() - BigUint(2), G, cache), point_negate(point_double(G)));
      EXPECT_THROW(ecsm_comb(BigUint(0), G, cache), UsageError);
      EXPECT_THROW(ecsm_comb(c->order(), G, cache), UsageError);
      EXPECT_THROW(ecsm_double_and_add(c->order(), G), UsageError);
      EXPECT_THROW(ecsm_jacobian(BigUint(0), G), UsageError);
   }
}

TEST(EcsmComb, AgreesWithBaselinesAndOracle) {
   std::mt19937_64 rng(33);
   for(const char* id : kNamed) {
      auto c = curve(id);
      MCurve m(*c);
      const auto& G = c->generator();
      CombCache cache;
      // a second, non-generator base as for peer public keys
      const auto Q = m.to(m.mul(test::to_mpz(test::random_scalar(rng, c->order())), m.from(G)));
      for(int i = 0; i < 40; ++i) {
         BigUint k = test::random_scalar(rng, c->order());
         for(const auto& P : {G, Q}) {
            auto expect = m.to(m.mul(test::to_mpz(k), m.from(P)));
            ASSERT_EQ(ecsm_comb(k, P, cache), expect) << id;
            ASSERT_EQ(ecsm_double_and_add(k, P), expect) << id;
            ASSERT_EQ(ecsm_jacobian(k, P), expect) << id;
            ASSERT_EQ(ecsm_comb_jacobian(k, P, cache), expect) << id;
         }
      }
   }
}

TEST(EcsmComb, ExhaustiveOnToyCurves) {
   for(const char* id : {"toy101", "toy97c2"}) {
      auto c = curve(id);
      const auto& G = c->generator();
      const unsigned n = static_cast<unsigned>(c->order().limb(0));
      for(unsigned w : {1u, 2u, 3u, 4u}) {
         CombCache cache(w);
         for(unsigned k = 1; k < n; ++k) {
            auto expect = repeated_addition(k, G);
            ASSERT_EQ(ecsm_comb(BigUint(k), G, cache), expect) << id << " k=" << k << " w=" << w;
            ASSERT_EQ(ecsm_double_and_add(BigUint(k), G), expect);
            ASSERT_EQ(ecsm_jacobian(BigUint(k), G), expect);
            ASSERT_EQ(ecsm_comb_jacobian(BigUint(k), G, cache), expect) << id << " k=" << k << " w=" << w;
         }
      }
   }
}

TEST(EcsmBaselines, ExpansionAndCostShape) {
   auto c = curve("secp256r1");
   const auto& G = c->generator();
   EXPECT_EQ(ecsm_double_and_add(BigUint(1), G), G);
   EXPECT_EQ(ecsm_jacobian(BigUint(1), G), G);
   EXPECT_EQ(ecsm_double_and_add(BigUint(5), G), point_add(point_double(point_double(G)), G));

   std::mt19937_64 rng(34);
   auto s = observe([&] { ecsm_jacobian(test::random_scalar(rng, c->order()), G); });
   EXPECT_EQ(s.counts[Op::ModInvFermat], 1u);
   EXPECT_EQ(s.counts[Op::ModInvEuclid], 0u);
   EXPECT_EQ(s.counts[Op::EcsmJacobian], 1u);

   CombCache cache;
   cache.get_or_build(G);
   auto a = observe([&] { ecsm_comb(test::random_scalar(rng, c->order()), G, cache); });
   auto j = observe([&] { ecsm_comb_jacobian(test::random_scalar(rng, c->order()), G, cache); });
   EXPECT_EQ(j.counts[Op::ModInvFermat], 1u);
   EXPECT_EQ(j.counts[Op::ModInvEuclid], 1u);  // the affine 2P of the shared correction step
   EXPECT_EQ(j.counts[Op::PointAdd], a.counts[Op::PointAdd]);
   EXPECT_EQ(j.counts[Op::PointDouble], a.counts[Op::PointDouble]);
}

TEST(CombCache, HitSkipsPrecomputationAndIsBitIdentical) {
   auto c = curve("secp256r1");
   const auto& G = c->generator();
   CombCache cache;
   auto miss = observe([&] { cache.get_or_build(G); });
   EXPECT_EQ(miss.counts[Op::CombCacheMiss], 1u);
   EXPECT_GT(miss.counts[Op::PointDouble], 0u);
   std::shared_ptr<const CombTable> hit_table;
   auto hit = observe([&] { hit_table = cache.get_or_build(G); });
   EXPECT_EQ(hit.counts[Op::CombCacheHit], 1u);
   EXPECT_EQ(hit.counts[Op::PointAdd] + hit.counts[Op::PointDouble], 0u);
   EXPECT_EQ(hit.counts[Op::ModMul] + hit.counts[Op::ModInvEuclid], 0u);

   auto fresh = comb_precompute(G, 4, 4 * comb_columns(*c, 4));
   ASSERT_EQ(fresh.entries.size(), hit_table->entries.size());
   for(size_t j = 0; j < fresh.entries.size(); ++j) {
      EXPECT_EQ(fresh.entries[j].encode(), hit_table->entries[j].encode());
   }
   EXPECT_EQ(fresh.base_id, hit_table->base_id);
}

TEST(CombCache, LeastRecentlyUsedEviction) {
   auto c = curve("secp160r1");
   const auto& G = c->generator();
   std::vector<AffinePoint> bases{G};
   for(int i = 0; i < 7; ++i) {
      bases.push_back(point_add(bases.back(), G));
   }
   CombCache cache;
   for(int i = 0; i < 7; ++i) {
      cache.get_or_build(bases[i]);
   }
   EXPECT_EQ(cache.size(), 6u);
   EXPECT_FALSE(cache.contains(bases[0]));
   for(int i = 1; i < 7; ++i) {
      EXPECT_TRUE(cache.contains(bases[i]));
   }
   // touching bases[1] makes bases[2] the stalest
   cache.get_or_build(bases[1]);
   cache.get_or_build(bases[7]);
   EXPECT_TRUE(cache.contains(bases[1]));
   EXPECT_FALSE(cache.contains(bases[2]));
}

TEST(CombCache, PoisonedEntryIsInternalError) {
   auto c = curve("secp192r1");
   const auto& G = c->generator();
   const auto other = point_double(G);
   CombCache cache;
   auto wrong = cache.get_or_build(other);
   cache.put(base_id(G), wrong);
   EXPECT_THROW(ecsm_comb(BigUint(3), G, cache), InternalError);
}

TEST(EcsmComb, OperationTraceIsScalarIndependent) {
   std::mt19937_64 rng(35);
   for(const char* id : kNamed) {
      auto c = curve(id);
      const auto& G = c->generator();
      CombCache cache;
      cache.get_or_build(G);
      const unsigned d = comb_columns(*c, kDefaultCombWidth);
      std::optional<OpSummary> first;
      for(int i = 0; i < 100; ++i) {
         // alternate parities so both correction values are exercised
         BigUint k = test::random_scalar(rng, c->order());
         if((i % 2 == 0) != k.is_odd()) {
            k = k == BigUint(1) ? BigUint(2) : k - BigUint(1);
         }
         auto s = observe([&] { ecsm_comb(k, G, cache); });
         if(!first) {
            first = s;
            EXPECT_EQ(s.counts[Op::PointDouble], d + 1);
            EXPECT_EQ(s.counts[Op::PointAdd], d + 1);
            continue;
         }
         ASSERT_EQ(s.counts, first->counts) << id << " scalar " << k.to_hex();
         ASSERT_EQ(s.trace, first->trace) << id;
      }
   }
}

namespace {

// Weierstrass model of a Montgomery curve By^2 = x^3 + Ax^2 + x.
struct MontgomeryOracle {
   MCurve w;
   mpz_class A, B, p;

   explicit MontgomeryOracle(const CurveParams& c) :
         w(0, 0, 0), A(test::to_mpz(c.a().value())), B(test::to_mpz(c.b().value())), p(test::to_mpz(c.field().value())) {
      MCurve f(p, 0, 0);
      mpz_class a = f.mod((3 - A * A) * f.inv(3 * B * B));
      mpz_class b = f.mod((2 * A * A * A - 9 * A) * f.inv(27 * B * B * B));
      w = MCurve(p, a, b);
   }

   MPoint to_weierstrass(const mpz_class& u, const mpz_class& v) const {
      return MPoint{w.mod(u * w.inv(B) + A * w.inv(3 * B)), w.mod(v * w.inv(B)), false};
   }

   mpz_class to_u(const MPoint& P) const { return w.mod(B * P.x - A * w.inv(3)); }
};

}  // namespace

TEST(EcsmMontgomery, MatchesBirationalOracleOnToyCurve) {
   auto c = curve("toymont101");
   MontgomeryOracle o(*c);
   const auto& G = c->generator();
   const auto g = o.to_weierstrass(test::to_mpz(G.x().value()), test::to_mpz(G.y().value()));
   ASSERT_TRUE(o.w.mul(test::to_mpz(c->order()), g).inf);
   const unsigned n = static_cast<unsigned>(c->order().limb(0));
   for(unsigned base = 1; base < n; ++base) {
      const auto P = o.w.mul(base, g);
      const auto xp = FieldElement::from_uint(c->field(), test::from_mpz(o.to_u(P)));
      for(unsigned k = 1; k < n; ++k) {
         auto expect = o.to_u(o.w.mul(k, P));
         ASSERT_EQ(test::to_mpz(ecsm_montgomery(BigUint(k), xp, *c).value()), expect) << base << " " << k;
      }
   }
}

TEST(EcsmMontgomery, MatchesBirationalOracleOnCurve25519) {
   auto c = curve("curve25519");
   MontgomeryOracle o(*c);
   const auto& G = c->generator();
   const auto g = o.to_weierstrass(test::to_mpz(G.x().value()), test::to_mpz(G.y().value()));
   std::mt19937_64 rng(36);
   EXPECT_EQ(ecsm_montgomery(BigUint(1), G.x(), *c), G.x());
   for(int i = 0; i < 10; ++i) {
      BigUint k = test::random_scalar(rng, c->order());
      auto expect = o.to_u(o.w.mul(test::to_mpz(k), g));
      ASSERT_EQ(test::to_mpz(ecsm_montgomery(k, G.x(), *c).value()), expect);
   }
}

TEST(EcsmMontgomery, PublishedX25519PublicKey) {
   // Alice's key pair from the X25519 specification; base point 9 has prime
   // order n, so the clamped scalar can be reduced modulo n.
   auto c = curve("curve25519");
   auto sk = from_hex("77076d0a7318a57d3c16c17251b26645df4c2f87ebc0992ab177fba51db92c2a");
   sk[0] &= 248;
   sk[31] &= 127;
   sk[31] |= 64;
   std::reverse(sk.begin(), sk.end());
   mpz_class k = test::to_mpz(BigUint::from_bytes(sk)) % test::to_mpz(c->order());
   auto u = ecsm_montgomery(test::from_mpz(k), c->generator().x(), *c).to_bytes();
   std::reverse(u.begin(), u.end());
   EXPECT_EQ(to_hex(u), "8520f0098930a754748b7ddcb43ef75a0dbf3a0d26381af4eba4a98eaa9b4e6a");
}

TEST(EcsmMontgomery, RejectsBadInputsAndHasUniformTrace) {
   auto c = curve("curve25519");
   const auto& x = c->generator().x();
   EXPECT_THROW(ecsm_montgomery(BigUint(5), FieldElement::zero(c->field()), *c), ValidationError);
   // x = 2 lies on the quadratic twist of Curve25519
   EXPECT_THROW(ecsm_montgomery(BigUint(5), FieldElement::from_uint(c->field(), BigUint(2)), *c), ValidationError);
   auto w = curve("secp256r1");
   EXPECT_THROW(ecsm_montgomery(BigUint(5), w->generator().x(), *w), UsageError);

   std::mt19937_64 rng(37);
   auto a = observe([&] { ecsm_montgomery(test::random_scalar(rng, c->order()), x, *c); });
   auto b = observe([&] { ecsm_montgomery(BigUint(3), x, *c); });
   EXPECT_EQ(a.counts[Op::LadderStep], c->order().bitlen());
   EXPECT_EQ(a.counts, b.counts);
   EXPECT_EQ(a.trace, b.trace);
}
