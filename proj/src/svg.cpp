#include "s2g/svg.hpp"

#include <iomanip>
#include <sstream>

namespace s2g::viz {

namespace {

struct Stroke {
  const char* cls;
  const char* color;
  const char* extra;
};

constexpr Stroke kAgree{"agree", "#222222", ""};
constexpr Stroke kMissed{"missed", "#d62728", " stroke-dasharray=\"6 4\""};
constexpr Stroke kExtra{"extra", "#1f77b4", ""};

}  // namespace

std::string render_triangulation_svg(const PointSet& points, const EdgeLabels& truth,
                                     const EdgeLabels& pred) {
  if (points.dim != 2) throw DimensionError("render_triangulation_svg: points must be 2-D");
  if (truth.n != points.n || pred.n != points.n) {
    throw DimensionError("render_triangulation_svg: edge labels do not match point count");
  }
  const double margin = 16.0;
  const double span = kViewport - 2.0 * margin;
  auto sx = [&](double x) { return margin + x * span; };
  auto sy = [&](double y) { return kViewport - margin - y * span; };

  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"512\" height=\"512\" viewBox=\"0 0 512 512\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"512\" height=\"512\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < points.n; ++i)
    for (std::size_t j = i + 1; j < points.n; ++j) {
      const bool t = truth(i, j), p = pred(i, j);
      if (!t && !p) continue;
      const Stroke& s = t && p ? kAgree : (t ? kMissed : kExtra);
      os << "<line class=\"" << s.cls << "\" x1=\"" << sx(points(i, 0)) << "\" y1=\"" << sy(points(i, 1))
         << "\" x2=\"" << sx(points(j, 0)) << "\" y2=\"" << sy(points(j, 1)) << "\" stroke=\"" << s.color
         << "\" stroke-width=\"1.5\"" << s.extra << "/>\n";
    }
  for (std::size_t i = 0; i < points.n; ++i) {
    os << "<circle cx=\"" << sx(points(i, 0)) << "\" cy=\"" << sy(points(i, 1))
       << "\" r=\"3\" fill=\"black\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace s2g::viz
