#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "alb/lattice.hpp"

// The multi-scale cover S of Lambda_N1 by N-blocks and the free-site
// selection S'. Geometry only; classification quality is supplied by the
// caller.
namespace alb::msa {

using lattice::Box;
using lattice::Coord;
using lattice::Site;

// Labels are per-axis indices into the center grid, offset so the middle of
// the grid sits near label 0 (consecutive labels are ~(5/4)N apart).
struct BoxCover {
  int d = 1;
  Coord N1 = 0;
  Coord N = 0;
  std::vector<std::vector<Coord>> axis_positions;  // per axis, increasing
  std::vector<Coord> axis_label_offset;            // label = index - offset

  std::size_t centers_per_axis(int axis) const { return axis_positions[static_cast<std::size_t>(axis)].size(); }
  std::vector<Site> labels() const;
  Site position(const Site& label) const;
  std::vector<Site> centers() const;
  Box block(const Site& label) const { return Box(position(label), N); }

  // strict pair invariants: every pair of distinct centers either overlaps by
  // >= N/2 per axis or is >= N/4 apart, and dist(k', Lambda_N(k)) >= N/5.
  bool strict_pairs_ok = true;

  struct Check {
    bool covers = true;
    bool pair_overlap_or_far = true;
    bool separation = true;
    bool ok() const { return covers && pair_overlap_or_far && separation; }
  };
  Check validate() const;
};

// Cover of Lambda_N1 (centered at the origin) by radius-N blocks on a
// near-uniform ~(5/4)N grid, pulled in at the boundary so every block stays
// inside Lambda_N1. Requires N <= N1/2 (N == N1 gives the single block).
// Falls back to a coverage+separation grid (strict_pairs_ok = false) when
// the overlap window is infeasible.
BoxCover build_cover(Coord N1, Coord N, int d);

struct FreeSiteSelection {
  Site r0_label;
  std::vector<Site> selected_labels;       // one qualifying label per I-block
  std::vector<Site> free_sites;            // positions of selected labels
  std::vector<Site> blocks_without_label;  // I-blocks with no qualifying label
  Coord exclusion_label_radius = 40;       // labels within this of r0 removed
  Coord min_site_distance = 0;             // enforced > 50 N
};

// One label per I-block of the label lattice (side ~ (log N)^2 / 3) where
// `qualifies` holds, excluding [-40,40]^d + r0 and anything within 50N of
// the r0 position.
FreeSiteSelection select_free_sites(const BoxCover& cover,
                                    const std::set<Site>& qualifying_labels,
                                    const Site& r0_label);

}  // namespace alb::msa
