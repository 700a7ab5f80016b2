#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "geoforge/forge/forge.hpp"
#include "geoforge/kernel/diagram.hpp"
#include "geoforge/renderer/text.hpp"

namespace geoforge {

struct RenderedText {
  std::string statement;
  std::array<std::string, 4> options;  // "A. ..." in label order
};

// Throws Error(MissingTemplate).
RenderedText render_text(const Problem& problem, Lang lang);

struct RenderConfig {
  double size = 512.0;  // square canvas, px
  double margin = 36.0;
  double font = 14.0;
  int label_passes = 8;  // cap on label placement sweeps
};

// Premise segments and circles, points with labels, option segments not in
// the premise dashed, and marks for the premise's cong (ticks), para
// (arrows), perp (squares) and vertex eqangle (arcs) facts. Deterministic.
std::string render_diagram(const Problem& problem, const Diagram& diagram, const RenderConfig& config = {});

struct Violation {
  std::string check;  // readability, validity or alignment
  std::string detail;
};

struct RenderReport {
  bool readability_ok = true;
  bool validity_ok = true;
  bool alignment_ok = true;
  std::vector<Violation> violations;

  bool ok() const { return readability_ok && validity_ok && alignment_ok; }
};

// Machine proxies for the manual figure review, read back from the SVG:
// readability: label boxes do not overlap, cover other points or sit closer
//   than 1.5% of the canvas diagonal;
// validity: every premise fact holds at kTolTrue on the drawn coordinates;
// alignment: every point named in either language is labeled, every premise
//   segment is drawn, and every mark states a premise fact that holds.
RenderReport verify_render(const Problem& problem, const Diagram& diagram, std::string_view svg,
                           const RenderConfig& config = {});

}  // namespace geoforge
