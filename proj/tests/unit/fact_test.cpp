#include <gtest/gtest.h>

#include <set>

#include "geoforge/common/error.hpp"
#include "geoforge/kernel/fact.hpp"

using namespace geoforge;

namespace {

std::optional<PointId> letters(std::string_view s) {
  if (s.size() == 1 && s[0] >= 'a' && s[0] <= 'z') return static_cast<PointId>(s[0] - 'a');
  return std::nullopt;
}

}  // namespace

TEST(Fact, CongSymmetry) {
  const Fact a = parse_fact("cong a b c d", letters);
  EXPECT_EQ(canonical(a), canonical(parse_fact("cong b a d c", letters)));
  EXPECT_EQ(canonical(a), canonical(parse_fact("cong c d a b", letters)));
  EXPECT_NE(canonical(a), canonical(parse_fact("cong a c b d", letters)));
}

TEST(Fact, VariantsShareCanonicalForm) {
  for (const char* text : {"eqangle a b c d e f g h", "eqratio a b a c d e d f", "cyclic a b c d", "midp m a b",
                           "circle o a b c", "para a b c d", "coll a b c", "sameside a b c d e f"}) {
    const Fact f = parse_fact(text, letters);
    const Fact c = canonical(f);
    for (const auto& v : variants(f)) {
      Fact g = f;
      g.args = v;
      EXPECT_EQ(canonical(g), c) << text;
    }
  }
}

TEST(Fact, VariantCounts) {
  EXPECT_EQ(variants(parse_fact("coll a b c", letters)).size(), 6u);
  EXPECT_EQ(variants(parse_fact("cyclic a b c d", letters)).size(), 24u);
  EXPECT_EQ(variants(parse_fact("perp a b c d", letters)).size(), 8u);
  EXPECT_EQ(variants(parse_fact("eqangle a b c d e f g h", letters)).size(), 128u);
}

TEST(Fact, EqangleOrientationMatters) {
  // angle(AB, CD) = angle(EF, GH) is not the same statement as angle(CD, AB) = angle(EF, GH).
  EXPECT_NE(canonical(parse_fact("eqangle a b c d e f g h", letters)),
            canonical(parse_fact("eqangle c d a b e f g h", letters)));
  EXPECT_EQ(canonical(parse_fact("eqangle a b c d e f g h", letters)),
            canonical(parse_fact("eqangle a b e f c d g h", letters)));
}

TEST(Fact, SurfaceSpellings) {
  const Fact f = parse_fact("eqratio3 a b c d o o", letters);
  EXPECT_EQ(f.pred, Pred::eqratio);
  EXPECT_EQ(format_fact(f, std::vector<std::string>{"a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l", "m",
                                                     "n", "o"}),
            "eqratio o a o c o b o d");
  EXPECT_EQ(parse_fact("eqangle6 a b c d e f g h", letters).pred, Pred::eqangle);
}

TEST(Fact, Meaningfulness) {
  EXPECT_FALSE(is_meaningful(parse_fact("para a b a b", letters)));
  EXPECT_FALSE(is_meaningful(parse_fact("cong a a c d", letters)));
  EXPECT_FALSE(is_meaningful(parse_fact("eqangle a b c d a b c d", letters)));
  EXPECT_FALSE(is_meaningful(parse_fact("eqangle a b a b c d c d", letters)));
  EXPECT_TRUE(is_meaningful(parse_fact("eqangle a b c d c d a b", letters)));
  EXPECT_FALSE(is_meaningful(parse_fact("coll a a b", letters)));
}

TEST(Fact, ParseErrors) {
  try {
    parse_fact("parallel a b c d", letters);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownPredicate);
  }
  try {
    parse_fact("para a b c", letters);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ArityMismatch);
  }
  try {
    parse_fact("para a b c D1", letters);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UndefinedPoint);
  }
}
