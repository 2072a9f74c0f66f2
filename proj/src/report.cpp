#include "lcert/report.hpp"

#include <algorithm>
#include <cmath>

#include "lcert/common.hpp"

namespace lcert::report {

const std::optional<cert::Certificate>& CertTable::cell(const std::string& method,
                                                        int eta_idx) const {
  static const std::optional<cert::Certificate> kEmpty;
  auto it = cells.find(method);
  if (it == cells.end()) return kEmpty;
  return it->second[static_cast<std::size_t>(eta_idx)];
}

CertTable build_table(const std::vector<std::pair<std::string, cert::Certificate>>& labeled,
                      bool allow_mixed) {
  require(!labeled.empty(), "report needs at least one certificate");

  const cert::Certificate& first = labeled.front().second;
  if (!allow_mixed) {
    for (const auto& [label, c] : labeled) {
      if (c.q != first.q || c.sigma != first.sigma || c.n != first.n || c.alpha != first.alpha)
        fail("certificate '%s' has (q=%g, sigma=%g, n=%d, alpha=%g) but the table was started "
             "with (q=%g, sigma=%g, n=%d, alpha=%g); pass allow_mixed to override",
             label.c_str(), c.q, c.sigma, c.n, c.alpha, first.q, first.sigma, first.n,
             first.alpha);
    }
  }

  CertTable t;
  for (const auto& [label, c] : labeled) {
    if (std::find(t.etas.begin(), t.etas.end(), c.eta) == t.etas.end()) t.etas.push_back(c.eta);
    if (std::find(t.methods.begin(), t.methods.end(), label) == t.methods.end())
      t.methods.push_back(label);
  }
  std::sort(t.etas.begin(), t.etas.end());
  for (const auto& m : t.methods) t.cells[m].resize(t.etas.size());
  for (const auto& [label, c] : labeled) {
    auto pos = std::find(t.etas.begin(), t.etas.end(), c.eta) - t.etas.begin();
    auto& slot = t.cells[label][static_cast<std::size_t>(pos)];
    if (slot.has_value())
      fail("duplicate certificate for method '%s' at eta=%g", label.c_str(), c.eta);
    slot = c;
  }
  return t;
}

namespace {

std::string cell_text(const std::optional<cert::Certificate>& c, double offset, bool use_offset) {
  if (!c.has_value() || c->abstained()) return "-";
  double v = *c->bound + (use_offset ? offset : 0.0);
  return strfmt("%.2f", 100.0 * v);
}

}  // namespace

std::string table_to_csv(const CertTable& table) {
  std::string out = "eta";
  for (const auto& m : table.methods) {
    out += "," + m;
    if (table.offsets.count(m)) out += "," + m + "(offset)";
  }
  out += "\n";
  for (std::size_t i = 0; i < table.etas.size(); ++i) {
    out += strfmt("%g", table.etas[i]);
    for (const auto& m : table.methods) {
      const auto& c = table.cell(m, static_cast<int>(i));
      out += "," + cell_text(c, 0.0, false);
      auto off = table.offsets.find(m);
      if (off != table.offsets.end()) out += "," + cell_text(c, off->second, true);
    }
    out += "\n";
  }
  return out;
}

std::string table_to_svg(const CertTable& table) {
  const double width = 640, height = 420;
  const double ml = 64, mr = 24, mt = 28, mb = 48;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double eta_min = table.etas.front(), eta_max = table.etas.back();
  if (eta_max == eta_min) eta_max = eta_min + 1.0;
  double b_min = 1.0, b_max = 0.0;
  for (const auto& m : table.methods)
    for (std::size_t i = 0; i < table.etas.size(); ++i) {
      const auto& c = table.cell(m, static_cast<int>(i));
      if (c.has_value() && !c->abstained()) {
        b_min = std::min(b_min, *c->bound);
        b_max = std::max(b_max, *c->bound);
      }
    }
  if (b_max < b_min) {
    b_min = 0.0;
    b_max = 1.0;
  }
  double pad = std::max(0.005, 0.1 * (b_max - b_min));
  b_min = std::max(0.0, b_min - pad);
  b_max = std::min(1.0, b_max + pad);

  auto x_of = [&](double eta) { return ml + pw * (eta - eta_min) / (eta_max - eta_min); };
  auto y_of = [&](double b) { return mt + ph * (1.0 - (b - b_min) / (b_max - b_min)); };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2"};
  std::string svg = strfmt(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
      "viewBox=\"0 0 %g %g\">\n<rect width=\"%g\" height=\"%g\" fill=\"white\"/>\n",
      width, height, width, height, width, height);
  svg += strfmt("<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", ml,
                mt + ph, ml + pw, mt + ph);
  svg += strfmt("<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", ml, mt,
                ml, mt + ph);
  for (int i = 0; i <= 4; ++i) {
    double eta = eta_min + (eta_max - eta_min) * i / 4.0;
    double b = b_min + (b_max - b_min) * i / 4.0;
    svg += strfmt(
        "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"middle\">%g</text>\n",
        x_of(eta), mt + ph + 16, eta);
    svg += strfmt(
        "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"end\">%.1f</text>\n", ml - 6,
        y_of(b) + 4, 100.0 * b);
  }
  svg += strfmt(
      "<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\">eta</text>\n",
      ml + pw / 2, height - 10);
  svg += strfmt(
      "<text x=\"14\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 14 %g)\">certified bound x100</text>\n",
      mt + ph / 2, mt + ph / 2);

  int color_idx = 0;
  double legend_y = mt + 6;
  for (const auto& m : table.methods) {
    const char* color = kColors[color_idx++ % 7];
    std::string points;
    for (std::size_t i = 0; i < table.etas.size(); ++i) {
      const auto& c = table.cell(m, static_cast<int>(i));
      if (!c.has_value() || c->abstained()) continue;
      points += strfmt("%.2f,%.2f ", x_of(table.etas[i]), y_of(*c->bound));
    }
    if (!points.empty())
      svg += strfmt("<polyline points=\"%s\" fill=\"none\" stroke=\"%s\" stroke-width=\"1.6\"/>\n",
                    points.c_str(), color);
    svg += strfmt(
        "<rect x=\"%g\" y=\"%g\" width=\"10\" height=\"10\" fill=\"%s\"/>"
        "<text x=\"%g\" y=\"%g\" font-size=\"11\">%s</text>\n",
        ml + pw - 110.0, legend_y, color, ml + pw - 96.0, legend_y + 9, m.c_str());
    legend_y += 16;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace lcert::report
