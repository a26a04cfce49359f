#include "sinai/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sinai/error.hpp"

namespace sinai {

namespace {

constexpr double kWidth = 960, kHeight = 420, kPad = 48;

struct Frame {
  double x0, x1, y0, y1;
  double sx(double x) const { return kPad + (x - x0) / (x1 - x0) * (kWidth - 2 * kPad); }
  double sy(double y) const { return kHeight - kPad - (y - y0) / (y1 - y0) * (kHeight - 2 * kPad); }
};

void header(std::ostringstream& os) {
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void axes(std::ostringstream& os, const Frame& fr, const std::string& x_label, const std::string& y_label) {
  os << "<g stroke=\"#444\" fill=\"none\">"
     << "<line x1=\"" << kPad << "\" y1=\"" << kHeight - kPad << "\" x2=\"" << kWidth - kPad << "\" y2=\""
     << kHeight - kPad << "\"/>"
     << "<line x1=\"" << kPad << "\" y1=\"" << kPad << "\" x2=\"" << kPad << "\" y2=\"" << kHeight - kPad << "\"/></g>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">" << x_label
     << "</text>\n";
  os << "<text x=\"14\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 14 " << kHeight / 2
     << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
  os << "<text x=\"" << kPad << "\" y=\"" << kHeight - kPad + 16 << "\" text-anchor=\"start\">" << fr.x0
     << "</text><text x=\"" << kWidth - kPad << "\" y=\"" << kHeight - kPad + 16 << "\" text-anchor=\"end\">"
     << fr.x1 << "</text>\n";
  os << "<text x=\"" << kPad - 4 << "\" y=\"" << kHeight - kPad << "\" text-anchor=\"end\">" << fr.y0
     << "</text><text x=\"" << kPad - 4 << "\" y=\"" << kPad + 4 << "\" text-anchor=\"end\">" << fr.y1
     << "</text>\n";
}

}  // namespace

std::string landscape_svg(const SampledFunction& f, const StableLandscape& land, double eps) {
  require(f.size() >= 2, "nothing to plot");
  const auto& m = land.marks;
  // Show the stretch from h^{--} to h^{++} with a margin.
  const std::size_t lo = m.hh_minus, hi = m.hh_plus;
  const double span = f.position(hi) - f.position(lo);
  Frame fr{f.position(lo) - 0.05 * span, f.position(hi) + 0.05 * span, 0, 0};
  std::size_t a = f.first_at_or_above(fr.x0).value_or(0), b = f.last_at_or_below(fr.x1).value_or(f.size() - 1);
  fr.y0 = fr.y1 = f.value(a);
  for (std::size_t i = a; i <= b; ++i) {
    fr.y0 = std::min(fr.y0, f.value(i));
    fr.y1 = std::max(fr.y1, f.value(i));
  }
  if (fr.y1 == fr.y0) fr.y1 = fr.y0 + 1;

  std::ostringstream os;
  header(os);
  for (const WellRecord& w : land.wells) {
    if (w.right < a || w.left > b) continue;
    os << "<rect x=\"" << fr.sx(f.position(w.left)) << "\" y=\"" << kPad << "\" width=\""
       << fr.sx(f.position(w.right)) - fr.sx(f.position(w.left)) << "\" height=\"" << kHeight - 2 * kPad
       << "\" fill=\"#e8f0fa\" stroke=\"#9bb7d4\"/>\n";
    const Neighborhood n = neighborhood(f, w, eps * land.t.log_t);
    os << "<rect x=\"" << fr.sx(f.position(n.left)) << "\" y=\"" << fr.sy(f.value(w.bottom) + eps * land.t.log_t)
       << "\" width=\"" << std::max(1.0, fr.sx(f.position(n.right)) - fr.sx(f.position(n.left)))
       << "\" height=\"" << fr.sy(f.value(w.bottom)) - fr.sy(f.value(w.bottom) + eps * land.t.log_t)
       << "\" fill=\"#f6d7a7\" opacity=\"0.8\"/>\n";
  }
  os << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"";
  const std::size_t stride = std::max<std::size_t>(1, (b - a + 1) / 4000);
  for (std::size_t i = a; i <= b; i += stride) os << fr.sx(f.position(i)) << ',' << fr.sy(f.value(i)) << ' ';
  os << "\"/>\n";
  for (std::size_t s : land.stable_points) {
    if (s < a || s > b) continue;
    os << "<circle cx=\"" << fr.sx(f.position(s)) << "\" cy=\"" << fr.sy(f.value(s))
       << "\" r=\"4\" fill=\"#1f5fa8\"/>\n";
  }
  for (std::size_t p : land.peaks) {
    if (p < a || p > b) continue;
    const double x = fr.sx(f.position(p)), y = fr.sy(f.value(p));
    os << "<polygon points=\"" << x - 4 << ',' << y + 3 << ' ' << x + 4 << ',' << y + 3 << ' ' << x << ','
       << y - 5 << "\" fill=\"#b23a2e\"/>\n";
  }
  const double mx = fr.sx(f.position(land.m_t)), my = fr.sy(f.value(land.m_t));
  os << "<circle cx=\"" << mx << "\" cy=\"" << my << "\" r=\"7\" fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"2\"/>\n"
     << "<text x=\"" << mx + 9 << "\" y=\"" << my + 14 << "\">m_t</text>\n";
  os << "<line x1=\"" << fr.sx(0) << "\" y1=\"" << kPad << "\" x2=\"" << fr.sx(0) << "\" y2=\"" << kHeight - kPad
     << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  axes(os, fr, "x", "potential");
  os << "<text x=\"" << kWidth - kPad << "\" y=\"" << kPad - 12
     << "\" text-anchor=\"end\">log t = " << land.t.log_t << ", eps = " << eps << "</text>\n</svg>\n";
  return os.str();
}

std::string histogram_svg(const std::vector<double>& edges, const std::vector<HistogramSeries>& series,
                          const std::string& x_label) {
  require(edges.size() >= 2, "histogram needs at least one bin");
  static const char* colors[] = {"#1f5fa8", "#b23a2e", "#2e8b57", "#8a5a9e", "#c07a12"};
  double top = 0.0;
  std::vector<double> totals;
  for (const auto& s : series) {
    require(s.counts.size() + 1 == edges.size(), "histogram counts do not match the bins");
    double n = 0;
    for (auto c : s.counts) n += static_cast<double>(c);
    totals.push_back(std::max(n, 1.0));
    for (auto c : s.counts) top = std::max(top, static_cast<double>(c) / totals.back());
  }
  Frame fr{edges.front(), edges.back(), 0.0, top > 0 ? top * 1.05 : 1.0};
  std::ostringstream os;
  header(os);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = colors[k % 5];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << fr.sx(edges[0])
       << ',' << fr.sy(0) << ' ';
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      const double y = fr.sy(static_cast<double>(series[k].counts[i]) / totals[k]);
      os << fr.sx(edges[i]) << ',' << y << ' ' << fr.sx(edges[i + 1]) << ',' << y << ' ';
    }
    os << fr.sx(edges.back()) << ',' << fr.sy(0) << "\"/>\n";
    os << "<text x=\"" << kWidth - kPad << "\" y=\"" << kPad + 16 * static_cast<double>(k)
       << "\" text-anchor=\"end\" fill=\"" << color << "\">" << series[k].label << "</text>\n";
  }
  axes(os, fr, x_label, "fraction of trials");
  os << "</svg>\n";
  return os.str();
}

}  // namespace sinai
