#include "mdlvq/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mdlvq {

namespace {

struct Mapper {
  double minx, miny, maxx, maxy, px_per_unit;
  double x(double v) const { return (v - minx) * px_per_unit + 40.0; }
  double y(double v) const { return (maxy - v) * px_per_unit + 40.0; }
  double w() const { return (maxx - minx) * px_per_unit + 80.0; }
  double h() const { return (maxy - miny) * px_per_unit + 80.0; }
};

std::string label_name(size_t idx, bool is_origin) {
  if (is_origin) return "O";
  static const char* letters = "ABCDEFGHIJKLMNPQRSTUVWXYZ";  // O reserved
  if (idx < 25) return std::string(1, letters[idx]);
  std::ostringstream os;
  os << "s" << idx;
  return os.str();
}

}  // namespace

std::string assignment_svg(const IndexAssignment& asg) {
  if (asg.lat.dim != 2) throw std::invalid_argument("figures are drawn for 2-D lattices only");
  const Lattice& lat = asg.lat;
  const int K = asg.K;

  // letters for the sublattice points used by the labels
  std::map<IVec, std::string> names;
  {
    std::vector<IVec> pts;
    for (const Label& l : asg.labels)
      for (const IVec& p : l.tuple.points) pts.push_back(p);
    std::sort(pts.begin(), pts.end(), [&](const IVec& a, const IVec& b) {
      i64 qa = lat.q2(a), qb = lat.q2(b);
      if (qa != qb) return qa < qb;
      return a < b;
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    size_t next = 0;
    for (const IVec& p : pts) {
      if (p.is_zero())
        names[p] = "O";
      else
        names[p] = label_name(next++, false);
    }
  }

  // view box around the labeled region
  double minx = 1e300, miny = 1e300, maxx = -1e300, maxy = -1e300;
  auto grow = [&](const DVec& c) {
    minx = std::min(minx, c[0]);
    maxx = std::max(maxx, c[0]);
    miny = std::min(miny, c[1]);
    maxy = std::max(maxy, c[1]);
  };
  for (const Label& l : asg.labels) {
    grow(lat.cartesian(l.central));
    grow(lat.cartesian_frac(l.site_micro, K));
  }
  double margin = 1.5 * lat.scale;
  minx -= margin;
  miny -= margin;
  maxx += margin;
  maxy += margin;
  Mapper m{minx, miny, maxx, maxy, 600.0 / std::max(maxx - minx, maxy - miny)};

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << m.w() << "\" height=\"" << m.h()
      << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // fraction-cell outline translated to every site in view
  {
    auto rel = relevant_vectors(lat, asg.sub.U);
    struct Facet {
      double vx, vy, ang;
    };
    std::vector<Facet> fs;
    for (const IVec& z : rel) {
      DVec v = lat.cartesian_frac(z * asg.sub.U, K);
      fs.push_back({v[0], v[1], std::atan2(v[1], v[0])});
    }
    std::sort(fs.begin(), fs.end(), [](const Facet& a, const Facet& b) { return a.ang < b.ang; });
    std::vector<std::pair<double, double>> poly;
    for (size_t i = 0; i < fs.size(); ++i) {
      const Facet& a = fs[i];
      const Facet& b = fs[(i + 1) % fs.size()];
      double det = a.vx * b.vy - a.vy * b.vx;
      double ra = (a.vx * a.vx + a.vy * a.vy) / 2.0, rb = (b.vx * b.vx + b.vy * b.vy) / 2.0;
      poly.emplace_back((ra * b.vy - rb * a.vy) / det, (rb * a.vx - ra * b.vx) / det);
    }
    // sites in view: fraction points covering the labeled window
    std::set<std::pair<i64, i64>> drawn;
    for (const Label& l : asg.labels) {
      for (i64 da = -1; da <= 1; ++da)
        for (i64 db = -1; db <= 1; ++db) {
          IVec su = l.site_u;
          su[0] += da * K;
          su[1] += db * K;
          // dedupe on raw u
          if (!drawn.insert({su[0], su[1]}).second) continue;
          DVec c = lat.cartesian_frac(su * asg.sub.U, K);
          svg << "<polygon points=\"";
          for (auto& [px, py] : poly) svg << m.x(c[0] + px) << "," << m.y(c[1] + py) << " ";
          bool home = asg.coset_of(su) == 0;
          svg << "\" fill=\"none\" stroke=\"#888\" stroke-width=\"1\""
              << (home ? "" : " stroke-dasharray=\"5,4\"") << "/>\n";
        }
    }
  }

  // central lattice dots over the window
  {
    DVec center(2);
    center[0] = (minx + maxx) / 2;
    center[1] = (miny + maxy) / 2;
    double radius = 0.55 * std::hypot(maxx - minx, maxy - miny);
    for (const LatticePoint& p : points_in_ball(lat, center, radius)) {
      if (p.cart[0] < minx || p.cart[0] > maxx || p.cart[1] < miny || p.cart[1] > maxy) continue;
      svg << "<circle cx=\"" << m.x(p.cart[0]) << "\" cy=\"" << m.y(p.cart[1])
          << "\" r=\"1.6\" fill=\"#333\"/>\n";
    }
  }

  // fraction points (crosses) and sublattice points (big dots)
  for (const Label& l : asg.labels) {
    DVec c = lat.cartesian_frac(l.site_micro, K);
    svg << "<path d=\"M " << m.x(c[0]) - 4 << " " << m.y(c[1]) << " h 8 M " << m.x(c[0]) << " "
        << m.y(c[1]) - 4 << " v 8\" stroke=\"#c33\" stroke-width=\"1.2\"/>\n";
  }
  for (const auto& [pt, name] : names) {
    DVec c = lat.cartesian(pt);
    svg << "<circle cx=\"" << m.x(c[0]) << "\" cy=\"" << m.y(c[1])
        << "\" r=\"5\" fill=\"#1b6\"/>\n";
    svg << "<text x=\"" << m.x(c[0]) + 6 << "\" y=\"" << m.y(c[1]) - 6
        << "\" font-size=\"13\" fill=\"#1b6\">" << name << "</text>\n";
  }

  // tuple labels at the central points
  for (const Label& l : asg.labels) {
    DVec c = lat.cartesian(l.central);
    std::string text;
    for (const IVec& p : l.tuple.points) {
      auto it = names.find(p);
      text += it != names.end() ? it->second : "?";
    }
    svg << "<text x=\"" << m.x(c[0]) + 3 << "\" y=\"" << m.y(c[1]) + 11
        << "\" font-size=\"9\" fill=\"#06c\">" << text << "</text>\n";
  }

  // legend
  {
    double ly = 16;
    svg << "<text x=\"8\" y=\"" << ly << "\" font-size=\"11\" fill=\"#000\">N=" << asg.sub.index_n
        << " K=" << K << "; labels list the K descriptions per central point</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_assignment_svg(const IndexAssignment& asg, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << assignment_svg(asg);
}

}  // namespace mdlvq
