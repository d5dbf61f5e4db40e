#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "rbme/errors.hpp"
#include "rbme/harness.hpp"
#include "rbme/numfmt.hpp"

namespace rbme {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 50.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Series {
  std::vector<double> x;
  std::vector<double> y;
};

std::string fmt(double v) {
  // two decimals keeps output stable across platforms
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  out << v;
  return out.str();
}

struct LogAxis {
  double lo = 0.0;
  double hi = 0.0;
  double pixel_lo = 0.0;
  double pixel_hi = 0.0;

  double map(double v) const {
    const double t = (std::log10(v) - lo) / (hi - lo);
    return pixel_lo + t * (pixel_hi - pixel_lo);
  }
};

LogAxis make_axis(double min_v, double max_v, double pixel_lo, double pixel_hi) {
  double lo = std::log10(min_v);
  double hi = std::log10(max_v);
  if (hi - lo < 1e-9) {
    lo -= 0.5;
    hi += 0.5;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  return {lo, hi, pixel_lo, pixel_hi};
}

}  // namespace

std::string render_svg(const std::vector<ExperimentRow>& rows, std::string_view x_param) {
  if (rows.empty()) throw InsufficientDataError("render_svg: no rows");

  std::map<std::string, std::map<double, std::vector<double>>> grouped;
  for (const auto& r : rows) grouped[r.estimator][grid_value(r.point, x_param)].push_back(r.error_l2);

  std::map<std::string, Series> series;
  double xmin = HUGE_VAL, xmax = -HUGE_VAL, ymin = HUGE_VAL, ymax = -HUGE_VAL;
  for (const auto& [name, groups] : grouped) {
    Series s;
    for (const auto& [x, errors] : groups) {
      const double m = median(errors);
      if (!(x > 0.0) || !(m > 0.0)) continue;
      s.x.push_back(x);
      s.y.push_back(m);
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, m);
      ymax = std::max(ymax, m);
    }
    series.emplace(name, std::move(s));
  }
  if (!(xmin <= xmax)) throw InsufficientDataError("render_svg: no positive points to plot on log axes");

  const LogAxis ax = make_axis(xmin, xmax, kLeft, kWidth - kRight);
  const LogAxis ay = make_axis(ymin, ymax, kHeight - kBottom, kTop);

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\"" << fmt(kHeight)
      << "\" viewBox=\"0 0 " << fmt(kWidth) << ' ' << fmt(kHeight) << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << fmt(kWidth) << "\" height=\"" << fmt(kHeight) << "\" fill=\"white\"/>\n";
  out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kHeight - kBottom) << "\" x2=\"" << fmt(kWidth - kRight)
      << "\" y2=\"" << fmt(kHeight - kBottom) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft) << "\" y2=\""
      << fmt(kHeight - kBottom) << "\" stroke=\"black\"/>\n";

  // decade ticks when they fall inside the range, else the data extremes
  auto ticks = [](const LogAxis& a, double min_v, double max_v) {
    std::vector<double> t;
    for (int e = static_cast<int>(std::ceil(a.lo)); e <= static_cast<int>(std::floor(a.hi)); ++e)
      t.push_back(std::pow(10.0, e));
    if (t.empty()) {
      t.push_back(min_v);
      if (max_v != min_v) t.push_back(max_v);
    }
    return t;
  };
  for (double t : ticks(ax, xmin, xmax)) {
    const double px = ax.map(t);
    out << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(kHeight - kBottom) << "\" x2=\"" << fmt(px) << "\" y2=\""
        << fmt(kHeight - kBottom + 5) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(kHeight - kBottom + 18)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << format_double(t) << "</text>\n";
  }
  for (double t : ticks(ay, ymin, ymax)) {
    const double py = ay.map(t);
    out << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(kLeft) << "\" y2=\""
        << fmt(py) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(py + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << format_double(t) << "</text>\n";
  }
  out << "<text x=\"" << fmt((kLeft + kWidth - kRight) / 2) << "\" y=\"" << fmt(kHeight - 10)
      << "\" font-size=\"13\" text-anchor=\"middle\">" << x_param << "</text>\n";
  out << "<text x=\"15\" y=\"" << fmt((kTop + kHeight - kBottom) / 2) << "\" font-size=\"13\" transform=\"rotate(-90 15 "
      << fmt((kTop + kHeight - kBottom) / 2) << ")\" text-anchor=\"middle\">median error</text>\n";

  std::size_t index = 0;
  for (const auto& [name, s] : series) {
    const char* color = kPalette[index % std::size(kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < s.x.size(); ++k) out << (k ? " " : "") << fmt(ax.map(s.x[k])) << ',' << fmt(ay.map(s.y[k]));
    out << "\"/>\n";
    for (std::size_t k = 0; k < s.x.size(); ++k)
      out << "<circle cx=\"" << fmt(ax.map(s.x[k])) << "\" cy=\"" << fmt(ay.map(s.y[k])) << "\" r=\"3\" fill=\""
          << color << "\"/>\n";
    const double ly = kTop + 18.0 * static_cast<double>(index);
    out << "<text x=\"" << fmt(kWidth - kRight + 12) << "\" y=\"" << fmt(ly + 4) << "\" font-size=\"12\" fill=\""
        << color << "\">" << name << "</text>\n";
    ++index;
  }
  out << "</svg>\n";
  return out.str();
}

void emit_svg(const std::vector<ExperimentRow>& rows, std::string_view x_param, const std::string& path) {
  const std::string body = render_svg(rows, x_param);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write svg: " + path);
  out << body;
  if (!out) throw IoError("failed writing svg: " + path);
}

}  // namespace rbme
