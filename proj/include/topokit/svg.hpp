#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace topokit::svg {

// Minimal static charts: axes, ticks at the extremes, bars or polylines.

namespace detail {

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double width = 640, height = 400, left = 60, right = 20, top = 40, bottom = 50;
  double plot_w() const { return width - left - right; }
  double plot_h() const { return height - top - bottom; }
};

inline void open(std::ostringstream& os, const Frame& f, const std::string& title, const std::string& xlabel,
                 const std::string& ylabel) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << f.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
  const double x0 = f.left, y0 = f.top + f.plot_h();
  os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 + f.plot_w() << "\" y2=\"" << y0
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << x0 << "\" y1=\"" << f.top << "\" x2=\"" << x0 << "\" y2=\"" << y0 << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << x0 + f.plot_w() / 2 << "\" y=\"" << f.height - 10 << "\" text-anchor=\"middle\">"
     << escape(xlabel) << "</text>\n";
  os << "<text x=\"15\" y=\"" << f.top + f.plot_h() / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
     << f.top + f.plot_h() / 2 << ")\">" << escape(ylabel) << "</text>\n";
}

inline void ticks(std::ostringstream& os, const Frame& f, double xmin, double xmax, double ymin, double ymax) {
  const double y0 = f.top + f.plot_h();
  os << "<text x=\"" << f.left << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\">" << num(xmin) << "</text>\n";
  os << "<text x=\"" << f.left + f.plot_w() << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\">" << num(xmax)
     << "</text>\n";
  os << "<text x=\"" << f.left - 5 << "\" y=\"" << y0 << "\" text-anchor=\"end\">" << num(ymin) << "</text>\n";
  os << "<text x=\"" << f.left - 5 << "\" y=\"" << f.top + 4 << "\" text-anchor=\"end\">" << num(ymax) << "</text>\n";
}

}  // namespace detail

// Histogram with bins [k*w, (k+1)*w).
inline std::string histogram(const std::string& title, const std::vector<double>& counts, double bin_width,
                             const std::string& xlabel = "lifetime", const std::string& ylabel = "frequency") {
  detail::Frame f;
  std::ostringstream os;
  detail::open(os, f, title, xlabel, ylabel);
  const double ymax = counts.empty() ? 1.0 : std::max(1.0, *std::max_element(counts.begin(), counts.end()));
  const double bw = counts.empty() ? f.plot_w() : f.plot_w() / static_cast<double>(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double h = f.plot_h() * counts[k] / ymax;
    os << "<rect x=\"" << detail::num(f.left + bw * static_cast<double>(k)) << "\" y=\""
       << detail::num(f.top + f.plot_h() - h) << "\" width=\"" << detail::num(bw * 0.9) << "\" height=\""
       << detail::num(h) << "\" fill=\"steelblue\"/>\n";
  }
  detail::ticks(os, f, 0.0, bin_width * static_cast<double>(counts.size()), 0.0, ymax);
  os << "</svg>\n";
  return os.str();
}

inline std::string line_chart(const std::string& title, const std::vector<double>& xs, const std::vector<double>& ys,
                              const std::string& xlabel = "step", const std::string& ylabel = "value") {
  detail::Frame f;
  std::ostringstream os;
  detail::open(os, f, title, xlabel, ylabel);
  if (!xs.empty() && xs.size() == ys.size()) {
    const auto [xlo, xhi] = std::minmax_element(xs.begin(), xs.end());
    const auto [ylo, yhi] = std::minmax_element(ys.begin(), ys.end());
    const double xspan = *xhi > *xlo ? *xhi - *xlo : 1.0;
    const double yspan = *yhi > *ylo ? *yhi - *ylo : 1.0;
    os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double px = f.left + f.plot_w() * (xs[k] - *xlo) / xspan;
      const double py = f.top + f.plot_h() * (1.0 - (ys[k] - *ylo) / yspan);
      os << (k ? " " : "") << detail::num(px) << ',' << detail::num(py);
    }
    os << "\"/>\n";
    detail::ticks(os, f, *xlo, *xhi, *ylo, *yhi);
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace topokit::svg
