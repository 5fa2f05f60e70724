#include "ipdsaw/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ipdsaw/errors.hpp"

namespace ipdsaw::geometry {

double Region::area() const {
  double a = 0.0;
  for (const auto& b : boxes) a += b.area();
  return a;
}

Box Region::bounds() const {
  if (boxes.empty()) throw DomainError("Region::bounds: empty region");
  Box out = boxes.front();
  for (const auto& b : boxes) {
    out.x0 = std::min(out.x0, b.x0);
    out.x1 = std::max(out.x1, b.x1);
    out.y0 = std::min(out.y0, b.y0);
    out.y1 = std::max(out.y1, b.y1);
  }
  return out;
}

OccupiedSet occupied_set(const model::LatticePath& w) { return OccupiedSet{w.sites()}; }

ScaleFactors make_scale(double v1, double v2) {
  if (!(v1 > 0.0) || !(v2 > 0.0)) throw DomainError("rescale: factors must be positive");
  return ScaleFactors{v1, v2, v1 * v2};
}

ScaleFactors critical_scale(std::int64_t L) {
  if (L < 1) throw DomainError("critical_scale: L must be positive");
  const double c = std::cbrt(static_cast<double>(L));
  return ScaleFactors{c * c, c, static_cast<double>(L)};
}

Region rescale(const OccupiedSet& s, const ScaleFactors& f) {
  if (!(f.v1 > 0.0) || !(f.v2 > 0.0)) throw DomainError("rescale: factors must be positive");
  std::vector<model::Site> sites = s.squares;
  std::sort(sites.begin(), sites.end());
  Region r;
  std::size_t i = 0;
  while (i < sites.size()) {
    std::size_t j = i;
    while (j + 1 < sites.size() && sites[j + 1].x == sites[i].x && sites[j + 1].y == sites[j].y + 1) ++j;
    const auto x = static_cast<double>(sites[i].x);
    r.boxes.push_back(Box{(x - 0.5) / f.v1, (x + 0.5) / f.v1,
                          (static_cast<double>(sites[i].y) - 0.5) / f.v2,
                          (static_cast<double>(sites[j].y) + 0.5) / f.v2});
    i = j + 1;
  }
  return r;
}

Region rescale(const Region& r, double v1, double v2) {
  if (!(v1 > 0.0) || !(v2 > 0.0)) throw DomainError("rescale: factors must be positive");
  Region out;
  out.boxes.reserve(r.boxes.size());
  for (const auto& b : r.boxes) out.boxes.push_back(Box{b.x0 / v1, b.x1 / v1, b.y0 / v2, b.y1 / v2});
  return out;
}

double scaled_area(const OccupiedSet& s, const ScaleFactors& f) {
  return static_cast<double>(s.size()) / f.area_factor;
}

Region band_from_profile(const rescaling::StepFunction& h, const rescaling::StepFunction& m,
                         double x_end) {
  if (h.rate != m.rate) throw ValidationError("band_from_profile: h and m must share their grid");
  if (!(x_end >= 0.0) || x_end > h.domain_end || x_end > m.domain_end) {
    throw DomainError("band_from_profile: x_end outside the domain");
  }
  Region r;
  const double n = h.rate;
  const auto cells = static_cast<std::size_t>(std::ceil(x_end * n));
  if (cells == 0) {
    const double c = m(0.0), half = std::abs(h(0.0)) / 2;
    r.boxes.push_back(Box{0.0, 0.0, c - half, c + half});
    return r;
  }
  for (std::size_t k = 0; k < cells; ++k) {
    const double x0 = static_cast<double>(k) / n;
    const double x1 = std::min(static_cast<double>(k + 1) / n, x_end);
    if (x1 < x0) break;
    const double c = m.cell_value(k), half = std::abs(h.cell_value(k)) / 2;
    r.boxes.push_back(Box{x0, x1, c - half, c + half});
  }
  return r;
}

double polymer_band_end(const model::StretchConfig& l) {
  const double n = std::pow(std::cbrt(static_cast<double>(l.total_length())), 2);
  const auto last = static_cast<double>(std::abs(l[l.size() - 1]));
  return (static_cast<double>(l.size()) + last / (1.0 + last)) / n;
}

Region lattice_adjust(const Region& r, std::int64_t L) {
  if (L < 1) throw DomainError("lattice_adjust: L must be positive");
  const double c = std::cbrt(static_cast<double>(L));
  const double dy = 0.5 / c, dx = 0.5 / (c * c);
  Region out;
  out.boxes.reserve(r.boxes.size());
  for (const auto& b : r.boxes) out.boxes.push_back(Box{b.x0 - dx, b.x1 - dx, b.y0 - dy, b.y1 + dy});
  return out;
}

Region polymer_band(const model::StretchConfig& l) {
  const auto p = rescaling::rescale_polymer(l);
  return lattice_adjust(band_from_profile(p.profile, p.com, polymer_band_end(l)), l.total_length());
}

double default_pitch(const ScaleFactors& f) { return std::min(1.0 / f.v2, 1.0) / 8.0; }

// --- Hausdorff ------------------------------------------------------------------

namespace {

double box_distance(const Box& b, double x, double y) {
  const double dx = std::max({b.x0 - x, 0.0, x - b.x1});
  const double dy = std::max({b.y0 - y, 0.0, y - b.y1});
  return std::hypot(dx, dy);
}

double median_of(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

// Bucket grid over a region's bounding box. Cells follow the typical box
// shape, which keeps thin column boxes from piling up in one bucket.
class BoxIndex {
 public:
  explicit BoxIndex(const Region& r) : boxes_(r.boxes) {
    const Box bb = r.bounds();
    x0_ = bb.x0;
    y0_ = bb.y0;
    const double w = std::max(bb.x1 - bb.x0, 1e-12), h = std::max(bb.y1 - bb.y0, 1e-12);
    std::vector<double> ws, hs;
    for (const auto& b : boxes_) {
      ws.push_back(b.x1 - b.x0);
      hs.push_back(b.y1 - b.y0);
    }
    cw_ = std::max(median_of(ws), w / 4096.0);
    ch_ = std::max(median_of(hs), h / 4096.0);
    const double cap = 8.0 * static_cast<double>(boxes_.size()) + 64.0;
    const double cells = (w / cw_ + 1.0) * (h / ch_ + 1.0);
    if (cells > cap) {
      const double f = std::sqrt(cells / cap);
      cw_ *= f;
      ch_ *= f;
    }
    nx_ = static_cast<long>(std::floor(w / cw_)) + 1;
    ny_ = static_cast<long>(std::floor(h / ch_)) + 1;
    buckets_.resize(static_cast<std::size_t>(nx_ * ny_));
    for (std::size_t i = 0; i < boxes_.size(); ++i) {
      const auto& b = boxes_[i];
      for (long cx = cx_of(b.x0); cx <= cx_of(b.x1); ++cx) {
        for (long cy = cy_of(b.y0); cy <= cy_of(b.y1); ++cy) bucket(cx, cy).push_back(i);
      }
    }
  }

  // `hint` is the box that was nearest to the previous query; points inside
  // it return at once.
  double distance(double x, double y, std::size_t& hint) const {
    double best = box_distance(boxes_[hint], x, y);
    if (best == 0.0) return 0.0;
    const long px = cx_of(x), py = cy_of(y);
    const double slack = ring_slack(x, y, px, py);
    const double step = std::min(cw_, ch_);
    const long r0 = std::max({0L, -px, px - (nx_ - 1), -py, py - (ny_ - 1)});
    const long rmax = r0 + std::max(nx_, ny_);
    auto visit = [&](long cx, long cy) {
      if (cx < 0 || cy < 0 || cx >= nx_ || cy >= ny_) return;
      for (std::size_t i : bucket(cx, cy)) {
        const double d = box_distance(boxes_[i], x, y);
        if (d < best) {
          best = d;
          hint = i;
        }
      }
    };
    for (long r = r0; r <= rmax; ++r) {
      const long xa = std::max(px - r, 0L), xb = std::min(px + r, nx_ - 1);
      for (long cx = xa; cx <= xb; ++cx) {
        visit(cx, py - r);
        if (r > 0) visit(cx, py + r);
      }
      const long ya = std::max(py - r + 1, 0L), yb = std::min(py + r - 1, ny_ - 1);
      for (long cy = ya; cy <= yb; ++cy) {
        visit(px - r, cy);
        if (r > 0) visit(px + r, cy);
      }
      if (best == 0.0) return 0.0;
      // Every unvisited cell is more than r cells away along some axis.
      if (best <= static_cast<double>(r) * step + slack) return best;
    }
    return best;
  }

 private:
  long cx_of(double x) const { return static_cast<long>(std::floor((x - x0_) / cw_)); }
  long cy_of(double y) const { return static_cast<long>(std::floor((y - y0_) / ch_)); }
  std::vector<std::size_t>& bucket(long cx, long cy) {
    return buckets_[static_cast<std::size_t>(cx * ny_ + cy)];
  }
  const std::vector<std::size_t>& bucket(long cx, long cy) const {
    return buckets_[static_cast<std::size_t>(cx * ny_ + cy)];
  }
  // Distance from (x, y) to the border of its own cell.
  double ring_slack(double x, double y, long px, long py) const {
    const double lx = x - (x0_ + static_cast<double>(px) * cw_);
    const double ly = y - (y0_ + static_cast<double>(py) * ch_);
    return std::min({lx, cw_ - lx, ly, ch_ - ly});
  }

  std::vector<Box> boxes_;
  double x0_ = 0.0, y0_ = 0.0, cw_ = 1.0, ch_ = 1.0;
  long nx_ = 1, ny_ = 1;
  std::vector<std::vector<std::size_t>> buckets_;
};

double directed(const Region& from, const BoxIndex& to, double h) {
  double worst = 0.0;
  std::size_t hint = 0;
  for (const auto& b : from.boxes) {
    const auto nx = static_cast<long>(std::ceil((b.x1 - b.x0) / h));
    const auto ny = static_cast<long>(std::ceil((b.y1 - b.y0) / h));
    for (long i = 0; i <= nx; ++i) {
      const double x = nx == 0 ? b.x0 : b.x0 + (b.x1 - b.x0) * static_cast<double>(i) / static_cast<double>(nx);
      for (long j = 0; j <= ny; ++j) {
        const double y = ny == 0 ? b.y0 : b.y0 + (b.y1 - b.y0) * static_cast<double>(j) / static_cast<double>(ny);
        worst = std::max(worst, to.distance(x, y, hint));
      }
    }
  }
  return worst;
}

}  // namespace

HausdorffResult hausdorff(const Region& a, const Region& b, double h) {
  if (a.empty() || b.empty()) throw DomainError("hausdorff: empty region");
  if (!(h > 0.0)) throw DomainError("hausdorff: pitch must be positive");
  const BoxIndex ia(a), ib(b);
  HausdorffResult r;
  r.distance = std::max(directed(a, ib, h), directed(b, ia, h));
  r.error_bound = h * std::sqrt(2.0);
  return r;
}

}  // namespace ipdsaw::geometry
