#pragma once

#include <span>
#include <string_view>

namespace geoforge {

enum class TemplateKind {
  Seed,        // defines its points from nothing
  Determined,  // fixes the new point(s) given existing points
  Locus,       // constrains one new point to a line or circle; may be paired
};

struct TemplateInfo {
  std::string_view name;
  int new_points;  // points introduced by the clause
  int arity;       // already-defined point arguments
  int params;      // numeric parameters (s_angle's angle, in degrees)
  TemplateKind kind;
  std::string_view doc;
};

std::span<const TemplateInfo> catalog();
const TemplateInfo* find_template(std::string_view name);

}  // namespace geoforge
