#include "flexglove/fab_export.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <numbers>
#include <nlohmann/json.hpp>

#include "flexglove/error.hpp"

namespace flexglove::fab {

using geom::Polygon;
using geom::PolygonSet;
using routing::Side;

namespace {

constexpr double kUnitsPerMm = 1e6;  // 4.6 format
constexpr double kMaxCoordMm = 9999.0;

class GerberWriter {
 public:
  GerberWriter(const std::string& function, const std::string& comment, const ExportConfig& cfg) : cfg_(cfg) {
    out_ += fmt::format("G04 {}*\n", comment);
    out_ += fmt::format("%TF.FileFunction,{}*%\n", function);
    out_ += "%FSLAX46Y46*%\n%MOMM*%\n%LPD*%\n";
  }

  void draw(const geom::Polyline& l) {
    if (l.vertices.size() < 2) return;
    select(l.width);
    move(l.vertices.front(), "D02");
    for (std::size_t i = 1; i < l.vertices.size(); ++i) move(l.vertices[i], "D01");
  }

  void flash(Point2 p, double diameter) {
    select(diameter);
    move(p, "D03");
  }

  void region(const geom::Ring& ring) {
    if (ring.size() < 3) return;
    body_ += "G36*\n";
    move(ring.front(), "D02");
    for (std::size_t i = 1; i < ring.size(); ++i) move(ring[i], "D01");
    move(ring.front(), "D01");
    body_ += "G37*\n";
  }

  void polarity(bool dark) { body_ += dark ? "%LPD*%\n" : "%LPC*%\n"; }

  /// Polygons largest first so a hole cleared later cannot erase an
  /// island drawn before it.
  void polygons(const PolygonSet& ps) {
    std::vector<const Polygon*> order;
    for (const auto& p : ps) order.push_back(&p);
    std::stable_sort(order.begin(), order.end(),
                     [](const Polygon* a, const Polygon* b) { return geom::area(*a) > geom::area(*b); });
    for (const Polygon* p : order) {
      region(p->exterior);
      if (p->holes.empty()) continue;
      polarity(false);
      for (const auto& h : p->holes) region(h);
      polarity(true);
    }
  }

  std::string finish() {
    std::string s = out_;
    for (const auto& [w, code] : apertures_) s += fmt::format("%ADD{}C,{:.6f}*%\n", code, w / kUnitsPerMm);
    if (!body_.empty()) s += "G01*\n" + body_;
    s += "M02*\n";
    return s;
  }

 private:
  void select(double width) {
    const long long key = std::llround(width * kUnitsPerMm);
    auto it = apertures_.find(key);
    if (it == apertures_.end()) it = apertures_.emplace(key, 10 + static_cast<int>(apertures_.size())).first;
    if (it->second != current_) {
      body_ += fmt::format("D{}*\n", it->second);
      current_ = it->second;
    }
  }

  void move(Point2 p, const char* op) {
    check(p);
    body_ += fmt::format("X{}Y{}{}*\n", std::llround(p.x * kUnitsPerMm), std::llround(p.y * kUnitsPerMm), op);
  }

  void check(Point2 p) const {
    if (!(std::abs(p.x) < kMaxCoordMm && std::abs(p.y) < kMaxCoordMm))
      throw ExportError(fmt::format("coordinate ({}, {}) exceeds the 4.6 Gerber format", p.x, p.y));
    const geom::Box& b = cfg_.page;
    if (b.width() <= 0.0 || b.height() <= 0.0) return;
    const double m = cfg_.page_margin_mm;
    if (p.x < b.min.x - m || p.x > b.max.x + m || p.y < b.min.y - m || p.y > b.max.y + m)
      throw ExportError(fmt::format("coordinate ({:.3f}, {:.3f}) lies outside the page margin", p.x, p.y));
  }

  const ExportConfig& cfg_;
  std::string out_;
  std::string body_;
  std::map<long long, int> apertures_;  // width in 1e-6 mm -> D code
  int current_ = -1;
};

std::string num(double v) { return fmt::format("{:.4f}", v); }

std::string svg_path(const Polygon& p) {
  std::string d;
  auto ring = [&](const geom::Ring& r) {
    for (std::size_t i = 0; i < r.size(); ++i) d += fmt::format("{}{},{} ", i == 0 ? "M" : "L", num(r[i].x), num(-r[i].y));
    d += "Z ";
  };
  ring(p.exterior);
  for (const auto& h : p.holes) ring(h);
  if (!d.empty()) d.pop_back();
  return d;
}

std::string side_str(Side s) { return routing::side_name(s); }

std::string money(long long cents) {
  return fmt::format("{}{}.{:02d}", cents < 0 ? "-" : "", std::llabs(cents) / 100, std::llabs(cents) % 100);
}

}  // namespace

const char* layer_name(Layer l) {
  switch (l) {
    case Layer::Copper: return "copper";
    case Layer::Coverlay: return "coverlay";
    case Layer::Adhesive: return "adhesive";
    case Layer::EdgeCuts: return "edge_cuts";
    case Layer::Silkscreen: return "silkscreen";
  }
  return "?";
}

const char* gerber_extension(Layer l, Side side) {
  const bool front = side == Side::Front;
  switch (l) {
    case Layer::Copper: return front ? "gtl" : "gbl";
    case Layer::Coverlay: return front ? "gts" : "gbs";
    case Layer::Silkscreen: return front ? "gto" : "gbo";
    case Layer::Adhesive: return "gm2";
    case Layer::EdgeCuts: return "gm1";
  }
  return "?";
}

Silkscreen silkscreen(const BoardDesign& d, const ExportConfig& cfg) {
  const auto& c = d.connector;
  Silkscreen s;
  if (c.pads.empty()) return s;
  const double th = c.rotation_deg * std::numbers::pi / 180.0;
  const Point2 w{-std::sin(th), std::cos(th)}, n{std::cos(th), std::sin(th)};
  double lo_w = 1e300, hi_w = -1e300, lo_n = 1e300, hi_n = -1e300;
  auto grow = [&](const Polygon& p) {
    for (Point2 q : p.exterior) {
      const Point2 r = q - c.position;
      lo_w = std::min(lo_w, geom::dot(r, w));
      hi_w = std::max(hi_w, geom::dot(r, w));
      lo_n = std::min(lo_n, geom::dot(r, n));
      hi_n = std::max(hi_n, geom::dot(r, n));
    }
  };
  for (const auto& p : c.pads) grow(p.shape);
  for (const auto& a : c.anchors) grow(a);
  const double g = cfg.silk_clearance_mm + cfg.silk_line_width_mm / 2.0;
  lo_w -= g;
  hi_w += g;
  lo_n -= g;
  hi_n += g;
  auto at = [&](double a, double b) { return geom::snap(c.position + w * a + n * b); };
  s.lines.push_back({{at(lo_w, lo_n), at(lo_w, hi_n), at(hi_w, hi_n), at(hi_w, lo_n), at(lo_w, lo_n)},
                     cfg.silk_line_width_mm});
  // pin 1 sits at the low-n end; mark it outside the courtyard, palm side
  const double pin1_n = geom::dot(c.pads.front().center - c.position, n);
  s.marks.push_back(at(hi_w + cfg.pin1_mark_mm, pin1_n));
  return s;
}

std::string gerber(const BoardDesign& d, Layer layer, const ExportConfig& cfg) {
  const bool front = d.side == Side::Front;
  const std::string comment = fmt::format("{} {} {}", cfg.hand_id, side_str(d.side), layer_name(layer));
  switch (layer) {
    case Layer::Copper: {
      GerberWriter g(front ? "Copper,L1,Top" : "Copper,L2,Bot", comment, cfg);
      for (const auto& t : d.copper_features.traces) g.draw(t.line);
      for (const auto& a : d.copper_features.areas) g.region(a.shape.exterior);
      return g.finish();
    }
    case Layer::Coverlay: {
      GerberWriter g(front ? "Soldermask,Top" : "Soldermask,Bot", comment, cfg);
      g.polygons(d.coverlay_mask);
      return g.finish();
    }
    case Layer::Adhesive: {
      GerberWriter g("Other,Adhesive", comment, cfg);
      g.polygons(d.adhesive);
      return g.finish();
    }
    case Layer::EdgeCuts: {
      GerberWriter g("Profile,NP", comment, cfg);
      auto closed = [&](const geom::Ring& r) {
        geom::Polyline l{r, cfg.edge_line_width_mm};
        l.vertices.push_back(r.front());
        g.draw(l);
      };
      closed(d.outline.exterior);
      for (const auto& c : d.inner_cuts) {
        closed(c.exterior);
        for (const auto& h : c.holes) closed(h);
      }
      return g.finish();
    }
    case Layer::Silkscreen: {
      GerberWriter g(front ? "Legend,Top" : "Legend,Bot", comment, cfg);
      const Silkscreen s = silkscreen(d, cfg);
      for (const auto& l : s.lines) g.draw(l);
      for (Point2 p : s.marks) g.flash(p, cfg.pin1_mark_mm);
      return g.finish();
    }
  }
  throw ExportError("unknown layer");
}

std::vector<OutputFile> gerber_set(const BoardDesign& d, const ExportConfig& cfg) {
  std::vector<OutputFile> out;
  for (Layer l : {Layer::Copper, Layer::Coverlay, Layer::Silkscreen, Layer::Adhesive, Layer::EdgeCuts}) {
    OutputFile f;
    f.side = side_str(d.side);
    f.kind = "gerber";
    f.layer = layer_name(l);
    f.name = fmt::format("{}_{}_{}.{}", cfg.hand_id, f.side, f.layer, gerber_extension(l, d.side));
    f.bytes = gerber(d, l, cfg);
    out.push_back(std::move(f));
  }
  return out;
}

std::string svg(const BoardDesign& d, const ExportConfig& cfg) {
  const geom::Box b = geom::bounds(d.outline);
  const double m = cfg.page_margin_mm;
  const double x0 = b.min.x - m, y0 = -(b.max.y + m), w = b.width() + 2 * m, h = b.height() + 2 * m;
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
  s += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}mm\" height=\"{}mm\" "
      "viewBox=\"{} {} {} {}\">\n",
      num(w), num(h), num(x0), num(y0), num(w), num(h));
  s += fmt::format("  <title>{} {} board</title>\n", cfg.hand_id, side_str(d.side));
  auto group = [&](const char* id, const char* style, const PolygonSet& ps) {
    s += fmt::format("  <g id=\"{}\" {}>\n", id, style);
    for (const auto& p : ps) s += fmt::format("    <path d=\"{}\"/>\n", svg_path(p));
    s += "  </g>\n";
  };
  group("adhesive", "fill=\"#e9c46a\" fill-rule=\"evenodd\" stroke=\"none\"", d.adhesive);
  group("coverlay", "fill=\"#8ecae6\" fill-opacity=\"0.6\" fill-rule=\"evenodd\" stroke=\"none\"", d.coverlay_mask);
  group("copper", "fill=\"#b87333\" fill-rule=\"evenodd\" stroke=\"none\"", d.copper);
  PolygonSet cuts{d.outline};
  cuts.insert(cuts.end(), d.inner_cuts.begin(), d.inner_cuts.end());
  group("edge-cuts",
        fmt::format("fill=\"none\" stroke=\"#000000\" stroke-width=\"{}\"", num(cfg.edge_line_width_mm)).c_str(),
        cuts);
  s += "</svg>\n";
  return s;
}

std::string placement_csv(const board::Boards& b, const ExportConfig& cfg) {
  std::string s = "Designator,Board,Mid X (mm),Mid Y (mm),Rotation (deg),Layer,Footprint\n";
  int k = 1;
  for (const BoardDesign* d : {&b.front, &b.back}) {
    double rot = std::fmod(d->connector.rotation_deg, 360.0);
    if (rot < 0) rot += 360.0;
    if (std::abs(rot) < 5e-5 || std::abs(rot - 360.0) < 5e-5) rot = 0.0;
    s += fmt::format("J{},{}_{},{},{},{},{},FFC_16P_0.5mm\n", k++, cfg.hand_id, side_str(d->side),
                     num(d->connector.position.x), num(d->connector.position.y), num(rot),
                     d->side == Side::Front ? "Top" : "Bottom");
  }
  return s;
}

// --- bill of materials ---------------------------------------------------------------

CostTable default_costs() {
  CostTable t;
  t.lines = {{"FPCBs", 1, 24.93},          {"Velostat", 1, 2.50},        {"Silicone rubber", 1, 29.20},
             {"Fabric", 1, 4.62},          {"Readout Circuit", 1, 64.66}, {"Flex cables", 1, 0.79}};
  return t;
}

CostTable parse_costs(const std::string& json_text) {
  CostTable t;
  try {
    const auto j = nlohmann::json::parse(json_text);
    t.currency = j.value("currency", "USD");
    for (const auto& l : j.at("items")) {
      BomLine b;
      b.item = l.at("item").get<std::string>();
      b.quantity = l.value("quantity", 1.0);
      b.unit_cost_usd = l.at("unit_cost").get<double>();
      if (b.quantity < 0.0 || b.unit_cost_usd < 0.0)
        throw SchemaError(Stage::Export, "costs: '" + b.item + "' has a negative quantity or cost");
      t.lines.push_back(std::move(b));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(Stage::Export, std::string("costs: ") + e.what());
  }
  return t;
}

long long line_cents(const BomLine& l) { return std::llround(l.quantity * l.unit_cost_usd * 100.0); }

long long total_cents(const CostTable& t) {
  long long c = 0;
  for (const auto& l : t.lines) c += line_cents(l);
  return c;
}

std::string bom_csv(const CostTable& t) {
  std::string s = fmt::format("item,quantity,unit_cost_{0},cost_{0}\n", t.currency);
  for (const auto& l : t.lines)
    s += fmt::format("{},{:g},{},{}\n", l.item, l.quantity, money(std::llround(l.unit_cost_usd * 100.0)),
                     money(line_cents(l)));
  s += fmt::format("Total,,,{}\n", money(total_cents(t)));
  return s;
}

std::string bom_text(const CostTable& t) {
  std::size_t wid = 5;
  for (const auto& l : t.lines) wid = std::max(wid, l.item.size());
  std::string s = fmt::format("Cost per glove ({})\n", t.currency);
  for (const auto& l : t.lines) s += fmt::format("  {:<{}}  {:>6g}  {:>9}\n", l.item, wid, l.quantity, money(line_cents(l)));
  s += fmt::format("  {:-<{}}\n", "", wid + 19);
  s += fmt::format("  {:<{}}  {:>6}  {:>9}\n", "Total", wid, "", money(total_cents(t)));
  return s;
}

// --- package ---------------------------------------------------------------------------

std::string manifest_json(const std::vector<OutputFile>& files, const ExportConfig& cfg) {
  nlohmann::ordered_json j;
  j["hand_id"] = cfg.hand_id;
  j["units"] = "mm";
  j["gerber_format"] = "RS-274X 4.6";
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& f : files) {
    nlohmann::ordered_json e;
    e["name"] = f.name;
    e["kind"] = f.kind;
    if (!f.side.empty()) e["side"] = f.side;
    if (!f.layer.empty()) e["layer"] = f.layer;
    e["bytes"] = f.bytes.size();
    list.push_back(std::move(e));
  }
  j["files"] = std::move(list);
  return j.dump(2) + "\n";
}

std::vector<OutputFile> package(const board::Boards& b, const CostTable& costs, const ExportConfig& cfg,
                                std::vector<OutputFile> extra) {
  std::vector<OutputFile> out;
  for (const BoardDesign* d : {&b.front, &b.back}) {
    auto g = gerber_set(*d, cfg);
    out.insert(out.end(), std::make_move_iterator(g.begin()), std::make_move_iterator(g.end()));
    out.push_back({fmt::format("{}_{}.svg", cfg.hand_id, side_str(d->side)), side_str(d->side), "svg", "", svg(*d, cfg)});
  }
  out.push_back({fmt::format("{}_placement.csv", cfg.hand_id), "", "csv", "placement", placement_csv(b, cfg)});
  out.push_back({fmt::format("{}_bom.csv", cfg.hand_id), "", "csv", "bom", bom_csv(costs)});
  out.push_back({fmt::format("{}_bom.txt", cfg.hand_id), "", "text", "bom", bom_text(costs)});
  for (auto& e : extra) out.push_back(std::move(e));
  const std::string manifest = manifest_json(out, cfg);
  out.push_back({fmt::format("{}_manifest.json", cfg.hand_id), "", "json", "manifest", manifest});
  return out;
}

}  // namespace flexglove::fab
