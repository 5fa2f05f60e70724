#pragma once

// Occupied sets, the rescaling operator, bands built from a profile and a
// center of mass, and a Hausdorff distance for unions of axis-aligned boxes.

#include <cstdint>
#include <vector>

#include "ipdsaw/model.hpp"
#include "ipdsaw/rescaling.hpp"

namespace ipdsaw::geometry {

struct Box {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  double area() const { return (x1 - x0) * (y1 - y0); }
};

/// Union of closed boxes.
struct Region {
  std::vector<Box> boxes;

  bool empty() const { return boxes.empty(); }
  /// Sum of box areas; exact when the boxes have disjoint interiors, which
  /// holds for every region built in this module.
  double area() const;
  Box bounds() const;
};

/// One unit square per visited site, centred on the site.
struct OccupiedSet {
  std::vector<model::Site> squares;
  std::size_t size() const { return squares.size(); }
};

OccupiedSet occupied_set(const model::LatticePath& w);

/// Horizontal and vertical divisors, with their product kept exactly where
/// it is an integer (L for the critical scaling).
struct ScaleFactors {
  double v1 = 1.0;
  double v2 = 1.0;
  double area_factor = 1.0;  // v1 * v2
};

ScaleFactors make_scale(double v1, double v2);
/// (L^{2/3}, L^{1/3}) with area factor exactly L.
ScaleFactors critical_scale(std::int64_t L);

/// T_{v1,v2}(S): (x, y) -> (x / v1, y / v2). Squares stacked in one column are
/// merged into a single box.
Region rescale(const OccupiedSet& s, const ScaleFactors& f);
Region rescale(const Region& r, double v1, double v2);

/// |S| / (v1 v2), using the exact area factor.
double scaled_area(const OccupiedSet& s, const ScaleFactors& f);

/// {(s, y) : 0 <= s <= x_end, m(s) - |h(s)|/2 <= y <= m(s) + |h(s)|/2}, one box
/// per grid cell. h and m must share their grid.
Region band_from_profile(const rescaling::StepFunction& h, const rescaling::StepFunction& m,
                         double x_end);

/// i_L = sup{s : s / L^{1/3} + int_0^s |h_L| <= 1} for the polymer profile.
double polymer_band_end(const model::StretchConfig& l);

/// Enlarges every box by 1/(2 L^{1/3}) above and below and shifts it left by
/// 1/(2 L^{2/3}).
Region lattice_adjust(const Region& r, std::int64_t L);

/// lattice_adjust(band_from_profile(|l|, M_l, i_L)) with both processes from rescale_polymer.
Region polymer_band(const model::StretchConfig& l);

struct HausdorffResult {
  double distance = 0.0;
  double error_bound = 0.0;  // h sqrt(2)
};

/// Both directed distances from point clouds at pitch h (every box sampled on
/// its boundary and interior) to the exact other region.
HausdorffResult hausdorff(const Region& a, const Region& b, double h);

/// Default pitch min(1/v2, 1) / 8 for regions rescaled by (v1, v2).
double default_pitch(const ScaleFactors& f);

}  // namespace ipdsaw::geometry
