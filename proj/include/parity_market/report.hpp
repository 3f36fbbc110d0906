#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "parity_market/experiment.hpp"

namespace parity_market {

/// One sweep to draw: its rows plus whatever the sibling metadata told us.
struct ReportSeries {
  std::string label;
  std::vector<SweepRow> rows;
  std::optional<int> n_employers;
  std::optional<double> fraction_b;

  [[nodiscard]] int max_level() const {
    if (n_employers) return *n_employers;
    int m = 0;
    for (const auto& r : rows) m = std::max(m, r.n_compliant);
    return std::max(m, 1);
  }
};

namespace svg {

inline const char* color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  return palette[i % (sizeof palette / sizeof *palette)];
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// A plotting area inside a larger document, with data-to-pixel mapping.
class Panel {
 public:
  Panel(double left, double top, double width, double height, double x_max, double y_min, double y_max)
      : left_(left), top_(top), width_(width), height_(height), x_max_(x_max), y_min_(y_min),
        y_max_(y_max) {}

  [[nodiscard]] double px(double x) const { return left_ + width_ * x / x_max_; }
  [[nodiscard]] double py(double y) const {
    return top_ + height_ * (1.0 - (y - y_min_) / (y_max_ - y_min_));
  }

  void axes(std::string& out, const std::string& title, const std::string& x_label,
            const std::string& y_label) const {
    out += "<rect x=\"" + num(left_) + "\" y=\"" + num(top_) + "\" width=\"" + num(width_) +
           "\" height=\"" + num(height_) + "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 5; ++i) {
      const double x = x_max_ * i / 5.0;
      const double y = y_min_ + (y_max_ - y_min_) * i / 5.0;
      out += "<line x1=\"" + num(px(x)) + "\" y1=\"" + num(top_) + "\" x2=\"" + num(px(x)) +
             "\" y2=\"" + num(top_ + height_) + "\" stroke=\"#ddd\"/>\n";
      out += "<line x1=\"" + num(left_) + "\" y1=\"" + num(py(y)) + "\" x2=\"" + num(left_ + width_) +
             "\" y2=\"" + num(py(y)) + "\" stroke=\"#ddd\"/>\n";
      out += "<text x=\"" + num(px(x)) + "\" y=\"" + num(top_ + height_ + 14) +
             "\" font-size=\"10\" text-anchor=\"middle\">" + num(x) + "</text>\n";
      out += "<text x=\"" + num(left_ - 4) + "\" y=\"" + num(py(y) + 3) +
             "\" font-size=\"10\" text-anchor=\"end\">" + num(y) + "</text>\n";
    }
    out += "<text x=\"" + num(left_ + width_ / 2) + "\" y=\"" + num(top_ - 8) +
           "\" font-size=\"13\" text-anchor=\"middle\">" + escape(title) + "</text>\n";
    out += "<text x=\"" + num(left_ + width_ / 2) + "\" y=\"" + num(top_ + height_ + 30) +
           "\" font-size=\"11\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
    out += "<text transform=\"translate(" + num(left_ - 38) + "," + num(top_ + height_ / 2) +
           ") rotate(-90)\" font-size=\"11\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
  }

  void marker(std::string& out, double x, double y, const char* fill) const {
    out += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"2\" fill=\"" + fill +
           "\" fill-opacity=\"0.5\"/>\n";
  }

  void polyline(std::string& out, const std::vector<std::pair<double, double>>& pts, const char* stroke,
                bool dashed = false) const {
    if (pts.empty()) return;
    out += "<polyline fill=\"none\" stroke=\"";
    out += stroke;
    out += "\" stroke-width=\"1.5\"";
    if (dashed) out += " stroke-dasharray=\"5,3\"";
    out += " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) out += ' ';
      out += num(px(pts[i].first)) + "," + num(py(pts[i].second));
    }
    out += "\"/>\n";
  }

  void line(std::string& out, double x1, double y1, double x2, double y2, const char* stroke) const {
    out += "<line x1=\"" + num(px(x1)) + "\" y1=\"" + num(py(y1)) + "\" x2=\"" + num(px(x2)) +
           "\" y2=\"" + num(py(y2)) + "\" stroke=\"" + stroke + "\" stroke-width=\"1.5\"/>\n";
  }

  void legend(std::string& out, const std::vector<std::pair<std::string, std::string>>& entries,
              const std::vector<bool>& dashed = {}) const {
    double y = top_ + 12;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const double x = left_ + 8;
      out += "<line x1=\"" + num(x) + "\" y1=\"" + num(y - 3) + "\" x2=\"" + num(x + 18) + "\" y2=\"" +
             num(y - 3) + "\" stroke=\"" + entries[i].second + "\" stroke-width=\"2\"" +
             (i < dashed.size() && dashed[i] ? " stroke-dasharray=\"5,3\"" : "") + "/>\n";
      out += "<text x=\"" + num(x + 22) + "\" y=\"" + num(y) + "\" font-size=\"10\">" +
             escape(entries[i].first) + "</text>\n";
      y += 13;
    }
  }

 private:
  double left_, top_, width_, height_, x_max_, y_min_, y_max_;
};

inline std::string document(double width, double height, const std::string& body) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         num(width) + "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " +
         num(height) + "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
         body + "</svg>\n";
}

}  // namespace svg

namespace detail {

inline std::vector<std::pair<double, double>> level_means(const std::vector<SweepRow>& rows,
                                                          std::size_t column) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& agg : aggregate(rows))
    if (agg.cells[column].mean) pts.emplace_back(agg.n_compliant, *agg.cells[column].mean);
  return pts;
}

inline double common_x_max(const std::vector<ReportSeries>& series) {
  int m = 1;
  for (const auto& s : series) m = std::max(m, s.max_level());
  return m;
}

}  // namespace detail

/// Scaled benefit per trial, the per-level mean line, and the linear-gain reference.
inline std::string benefit_chart(const std::vector<ReportSeries>& series) {
  const std::size_t col = numeric_index("scaled_benefit");
  double lo = 0.0, hi = 1.0;
  for (const auto& s : series)
    for (const auto& r : s.rows)
      if (r.scaled_benefit) {
        lo = std::min(lo, *r.scaled_benefit);
        hi = std::max(hi, *r.scaled_benefit);
      }
  lo = std::floor(lo * 10.0) / 10.0;
  hi = std::ceil(hi * 10.0) / 10.0;
  const double x_max = detail::common_x_max(series);
  const svg::Panel panel(60, 40, 480, 320, x_max, lo, hi);
  std::string body;
  panel.axes(body, "Benefit as scaled demographic parity", "compliant employers", "scaled benefit");
  panel.line(body, 0, 0, x_max, 1, "#f4b183");
  std::vector<std::pair<std::string, std::string>> legend;
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (const auto& r : series[i].rows)
      if (r.scaled_benefit) panel.marker(body, r.n_compliant, *r.scaled_benefit, svg::color(i));
    panel.polyline(body, detail::level_means(series[i].rows, col), svg::color(i));
    legend.emplace_back(series[i].label, svg::color(i));
  }
  legend.emplace_back("linear gain", "#f4b183");
  panel.legend(body, legend);
  return svg::document(580, 410, body);
}

/// Group-B share of hires in each sector; solid compliant, dashed non-compliant.
inline std::string composition_chart(const std::vector<ReportSeries>& series) {
  const double x_max = detail::common_x_max(series);
  const svg::Panel panel(60, 40, 480, 320, x_max, 0.0, 1.0);
  std::string body;
  panel.axes(body, "Group B share of hires by employer type", "compliant employers", "group B share");
  std::vector<std::pair<std::string, std::string>> legend;
  std::vector<bool> dashed;
  for (std::size_t i = 0; i < series.size(); ++i) {
    panel.polyline(body, detail::level_means(series[i].rows, numeric_index("b_share_hires_compliant")),
                   svg::color(i));
    panel.polyline(body, detail::level_means(series[i].rows, numeric_index("b_share_hires_noncompliant")),
                   svg::color(i), true);
    legend.emplace_back(series[i].label + " compliant", svg::color(i));
    dashed.push_back(false);
    legend.emplace_back(series[i].label + " non-compliant", svg::color(i));
    dashed.push_back(true);
    if (series[i].fraction_b) panel.line(body, 0, *series[i].fraction_b, x_max, *series[i].fraction_b, "#9bd39b");
  }
  panel.legend(body, legend, dashed);
  return svg::document(580, 410, body);
}

/// Mean probability of applying to a compliant employer, with the no-preference line.
inline std::string probability_chart(const std::vector<ReportSeries>& series) {
  const double x_max = detail::common_x_max(series);
  const svg::Panel panel(60, 40, 480, 320, x_max, 0.0, 1.0);
  std::string body;
  panel.axes(body, "Probability of applying to a compliant employer", "compliant employers",
             "p_compliant");
  panel.line(body, 0, 0, x_max, 1, "#ff7f0e");
  std::vector<std::pair<std::string, std::string>> legend;
  std::vector<bool> dashed;
  for (std::size_t i = 0; i < series.size(); ++i) {
    panel.polyline(body, detail::level_means(series[i].rows, numeric_index("p_compliant_a")),
                   svg::color(i), true);
    panel.polyline(body, detail::level_means(series[i].rows, numeric_index("p_compliant_b")),
                   svg::color(i));
    legend.emplace_back(series[i].label + " group A", svg::color(i));
    dashed.push_back(true);
    legend.emplace_back(series[i].label + " group B", svg::color(i));
    dashed.push_back(false);
  }
  legend.emplace_back("no preference", "#ff7f0e");
  dashed.push_back(false);
  panel.legend(body, legend, dashed);
  return svg::document(580, 410, body);
}

/// 2x2 grid of hire rate per application, one panel per (group, employer type).
inline std::string hire_rate_chart(const std::vector<ReportSeries>& series) {
  const double x_max = detail::common_x_max(series);
  double hi = 0.0;
  for (const auto& s : series)
    for (const auto& r : s.rows)
      for (const auto& g : r.rate)
        for (const auto& v : g)
          if (v) hi = std::max(hi, *v);
  hi = std::max(0.1, std::ceil(hi * 20.0) / 20.0);

  const char* columns[2][2] = {{"rate_a_compliant", "rate_a_noncompliant"},
                               {"rate_b_compliant", "rate_b_noncompliant"}};
  const char* titles[2][2] = {{"Group A, compliant", "Group A, non-compliant"},
                              {"Group B, compliant", "Group B, non-compliant"}};
  std::string body;
  for (int g = 0; g < 2; ++g)
    for (int s = 0; s < 2; ++s) {
      const svg::Panel panel(60 + s * 330, 40 + g * 300, 260, 220, x_max, 0.0, hi);
      panel.axes(body, titles[g][s], "compliant employers", "hired per application");
      std::vector<std::pair<std::string, std::string>> legend;
      for (std::size_t i = 0; i < series.size(); ++i) {
        panel.polyline(body, detail::level_means(series[i].rows, numeric_index(columns[g][s])),
                       svg::color(i));
        legend.emplace_back(series[i].label, svg::color(i));
      }
      if (g == 0 && s == 0) panel.legend(body, legend);
    }
  return svg::document(680, 620, body);
}

inline const std::vector<std::string>& chart_kinds() {
  static const std::vector<std::string> kinds = {"benefit", "composition", "probabilities", "hire_rates"};
  return kinds;
}

inline std::string render_chart(const std::string& kind, const std::vector<ReportSeries>& series) {
  if (kind == "benefit") return benefit_chart(series);
  if (kind == "composition") return composition_chart(series);
  if (kind == "probabilities") return probability_chart(series);
  if (kind == "hire_rates") return hire_rate_chart(series);
  throw std::invalid_argument("unknown chart kind: " + kind);
}

/// Loads a sweep CSV and, when present, its sibling metadata.
inline ReportSeries load_series(const std::filesystem::path& csv_path) {
  ReportSeries s;
  s.rows = read_results(csv_path);
  std::string label = csv_path.stem().string();
  if (label.size() > 6 && label.compare(label.size() - 6, 6, "_sweep") == 0) label.resize(label.size() - 6);
  s.label = label;
  const auto meta_path = meta_path_for(csv_path);
  if (std::filesystem::exists(meta_path)) {
    try {
      const auto meta = nlohmann::json::parse(read_text_file(meta_path));
      if (meta.contains("config")) {
        s.n_employers = meta["config"].value("n_employers", 0);
        s.fraction_b = meta["config"].value("fraction_b", 0.0);
      }
    } catch (const std::exception&) {
      // metadata is optional for charting
    }
  }
  return s;
}

/// Writes `<prefix><kind>.svg` for every chart kind; returns the paths.
inline std::vector<std::filesystem::path> write_charts(const std::vector<ReportSeries>& series,
                                                       const std::filesystem::path& out_dir,
                                                       const std::string& prefix = "") {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& kind : chart_kinds()) {
    const auto path = out_dir / (prefix + kind + ".svg");
    write_text_file(path, render_chart(kind, series));
    written.push_back(path);
  }
  return written;
}

}  // namespace parity_market
