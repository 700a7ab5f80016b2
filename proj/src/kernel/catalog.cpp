#include "geoforge/kernel/catalog.hpp"

#include <array>

namespace geoforge {

namespace {

using K = TemplateKind;

constexpr std::array kCatalog = {
    TemplateInfo{"angle_bisector", 1, 3, 0, K::Locus, "X on the internal bisector of angle ABC"},
    TemplateInfo{"angle_mirror", 1, 3, 0, K::Locus, "X such that BC bisects angle ABX"},
    TemplateInfo{"centroid", 4, 3, 0, K::Determined, "X, Y, Z midpoints of BC, CA, AB and I the centroid of ABC"},
    TemplateInfo{"circle", 1, 3, 0, K::Determined, "X the circumcenter of triangle ABC"},
    TemplateInfo{"eq_quadrangle", 4, 0, 0, K::Seed, "quadrilateral ABCD with AD = BC"},
    TemplateInfo{"eq_trapezoid", 4, 0, 0, K::Seed, "isosceles trapezoid ABCD with AB parallel to CD and AD = BC"},
    TemplateInfo{"eq_triangle", 1, 2, 0, K::Determined, "X such that XBC is equilateral"},
    TemplateInfo{"eqangle2", 1, 3, 0, K::Determined, "X such that angle BAX = angle XCB"},
    TemplateInfo{"eqangle3", 1, 5, 0, K::Locus, "X such that angle AXB = angle EDF"},
    TemplateInfo{"eqdia_quadrangle", 4, 0, 0, K::Seed, "quadrilateral ABCD with AC = BD"},
    TemplateInfo{"eqdistance", 1, 3, 0, K::Locus, "X such that XA = BC"},
    TemplateInfo{"excenter", 1, 3, 0, K::Determined, "X the excenter of triangle ABC opposite A"},
    TemplateInfo{"foot", 1, 3, 0, K::Determined, "X the foot of the perpendicular from A to BC"},
    TemplateInfo{"ieq_triangle", 3, 0, 0, K::Seed, "equilateral triangle ABC"},
    TemplateInfo{"incenter", 1, 3, 0, K::Determined, "X the incenter of triangle ABC"},
    TemplateInfo{"intersection_lc", 1, 3, 0, K::Determined,
                 "X the second intersection of line AB with the circle centered O through B (args A O B)"},
    TemplateInfo{"intersection_ll", 1, 4, 0, K::Determined, "X the intersection of lines AB and CD"},
    TemplateInfo{"intersection_lp", 1, 5, 0, K::Determined,
                 "X the intersection of line AB with the line through C parallel to MN"},
    TemplateInfo{"intersection_lt", 1, 5, 0, K::Determined,
                 "X the intersection of line AB with the line through C perpendicular to DE"},
    TemplateInfo{"intersection_pp", 1, 6, 0, K::Determined, "X such that XA is parallel to BC and XD is parallel to EF"},
    TemplateInfo{"intersection_tt", 1, 6, 0, K::Determined,
                 "X such that XA is perpendicular to BC and XD is perpendicular to EF"},
    TemplateInfo{"iso_triangle", 3, 0, 0, K::Seed, "triangle ABC with AB = AC"},
    TemplateInfo{"isquare", 4, 0, 0, K::Seed, "square ABCD"},
    TemplateInfo{"lc_tangent", 1, 2, 0, K::Locus, "X such that AX is perpendicular to OA (args A O)"},
    TemplateInfo{"midpoint", 1, 2, 0, K::Determined, "X the midpoint of AB"},
    TemplateInfo{"mirror", 1, 2, 0, K::Determined, "X such that B is the midpoint of AX"},
    TemplateInfo{"ninepoints", 4, 3, 0, K::Determined,
                 "X, Y, Z midpoints of BC, CA, AB and I the circumcenter of XYZ"},
    TemplateInfo{"nsquare", 1, 2, 0, K::Determined, "X such that XAB is a right isosceles triangle at A"},
    TemplateInfo{"on_aline", 1, 5, 0, K::Locus, "X such that angle XAB = angle CDE"},
    TemplateInfo{"on_bline", 1, 2, 0, K::Locus, "X on the perpendicular bisector of AB"},
    TemplateInfo{"on_circle", 1, 2, 0, K::Locus, "X on the circle centered O through A (args O A)"},
    TemplateInfo{"on_circum", 1, 3, 0, K::Locus, "X on the circumcircle of ABC"},
    TemplateInfo{"on_dia", 1, 2, 0, K::Locus, "X such that AX is perpendicular to BX"},
    TemplateInfo{"on_line", 1, 2, 0, K::Locus, "X on line AB"},
    TemplateInfo{"on_pline", 1, 3, 0, K::Locus, "X such that XA is parallel to BC"},
    TemplateInfo{"on_tline", 1, 3, 0, K::Locus, "X such that XA is perpendicular to BC"},
    TemplateInfo{"orthocenter", 1, 3, 0, K::Determined, "X the orthocenter of ABC"},
    TemplateInfo{"parallelogram", 1, 3, 0, K::Determined, "X such that ABCX is a parallelogram"},
    TemplateInfo{"r_trapezoid", 4, 0, 0, K::Seed, "right trapezoid ABCD with AB parallel to CD and AD perpendicular to AB"},
    TemplateInfo{"r_triangle", 3, 0, 0, K::Seed, "right triangle ABC with the right angle at A"},
    TemplateInfo{"rectangle", 4, 0, 0, K::Seed, "rectangle ABCD"},
    TemplateInfo{"reflect", 1, 3, 0, K::Determined, "X the reflection of A about line BC"},
    TemplateInfo{"risos", 3, 0, 0, K::Seed, "right isosceles triangle ABC with the right angle at A"},
    TemplateInfo{"s_angle", 1, 2, 1, K::Locus, "X such that angle ABX = alpha (degrees)"},
    TemplateInfo{"segment", 2, 0, 0, K::Seed, "segment AB"},
    TemplateInfo{"shift", 1, 3, 0, K::Determined, "X such that XB = CD and XC = BD (args B C D)"},
    TemplateInfo{"square", 2, 2, 0, K::Determined, "X, Y such that ABXY is a square"},
    TemplateInfo{"tangent", 2, 3, 0, K::Determined,
                 "X, Y the touch points of the tangents from A to the circle centered O through B (args A O B)"},
    TemplateInfo{"trapezoid", 4, 0, 0, K::Seed, "trapezoid ABCD with AB parallel to CD"},
    TemplateInfo{"triangle", 3, 0, 0, K::Seed, "triangle ABC"},
};

}  // namespace

std::span<const TemplateInfo> catalog() { return kCatalog; }

const TemplateInfo* find_template(std::string_view name) {
  for (const auto& t : kCatalog)
    if (t.name == name) return &t;
  return nullptr;
}

}  // namespace geoforge
