#include "alb/cover.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace alb::msa {

namespace {

// Axis positions from -(N1-N) to N1-N with every gap inside [lo, hi].
// Prefers the gap count closest to the nominal (5/4)N spacing.
std::vector<Coord> axis_grid(Coord N1, Coord N) {
  const Coord A = N1 - N;
  if (A == 0) return {0};
  const double span = 2.0 * static_cast<double>(A);
  auto positions_for = [&](Coord gaps) {
    std::vector<Coord> pos;
    pos.reserve(static_cast<std::size_t>(gaps) + 1);
    for (Coord i = 0; i <= gaps; ++i)
      pos.push_back(-A + static_cast<Coord>(std::llround(span * static_cast<double>(i) /
                                                         static_cast<double>(gaps))));
    return pos;
  };
  auto gaps_ok = [&](const std::vector<Coord>& pos, double lo, double hi) {
    for (std::size_t i = 1; i < pos.size(); ++i) {
      double g = static_cast<double>(pos[i] - pos[i - 1]);
      if (g < lo || g > hi) return false;
    }
    return true;
  };

  // strict window: separation needs gap > (6/5)N, overlap needs gap <= (3/2)N+1
  const double lo = 6.0 * static_cast<double>(N) / 5.0;
  const double hi = 1.5 * static_cast<double>(N) + 1.0;
  const double nominal = 1.25 * static_cast<double>(N);
  Coord best = -1;
  double best_score = 1e300;
  Coord gmin = std::max<Coord>(1, static_cast<Coord>(std::floor(span / hi)));
  Coord gmax = static_cast<Coord>(std::ceil(span / lo)) + 1;
  for (Coord g = gmin; g <= gmax; ++g) {
    auto pos = positions_for(g);
    if (!gaps_ok(pos, lo + 1e-9, hi)) continue;
    double score = std::abs(span / static_cast<double>(g) - nominal);
    if (score < best_score) {
      best_score = score;
      best = g;
    }
  }
  if (best > 0) return positions_for(best);

  // fallback: keep coverage (gap <= 2N) and separation (gap > (6/5)N)
  // when possible, else coverage alone with the widest legal gaps.
  for (Coord g = std::max<Coord>(1, static_cast<Coord>(std::floor(span / (2.0 * N)))); ; ++g) {
    auto pos = positions_for(g);
    bool cover_ok = true;
    for (std::size_t i = 1; i < pos.size(); ++i)
      if (pos[i] - pos[i - 1] > 2 * N) cover_ok = false;
    if (cover_ok) return pos;
    if (g > 4 * std::max<Coord>(N1 / std::max<Coord>(N, 1), 4)) break;
  }
  throw std::runtime_error("build_cover: no covering grid found");
}

}  // namespace

std::vector<Site> BoxCover::labels() const {
  std::vector<Site> out;
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  for (;;) {
    Site lab = Site::zero(d);
    for (int i = 0; i < d; ++i)
      lab[i] = static_cast<Coord>(idx[static_cast<std::size_t>(i)]) -
               axis_label_offset[static_cast<std::size_t>(i)];
    out.push_back(lab);
    int axis = d - 1;
    while (axis >= 0) {
      if (++idx[static_cast<std::size_t>(axis)] < centers_per_axis(axis)) break;
      idx[static_cast<std::size_t>(axis)] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  return out;
}

Site BoxCover::position(const Site& label) const {
  Site p = Site::zero(d);
  for (int i = 0; i < d; ++i) {
    Coord idx = label[i] + axis_label_offset[static_cast<std::size_t>(i)];
    const auto& pos = axis_positions[static_cast<std::size_t>(i)];
    if (idx < 0 || idx >= static_cast<Coord>(pos.size()))
      throw std::out_of_range("BoxCover::position: label outside grid");
    p[i] = pos[static_cast<std::size_t>(idx)];
  }
  return p;
}

std::vector<Site> BoxCover::centers() const {
  std::vector<Site> out;
  for (const Site& lab : labels()) out.push_back(position(lab));
  return out;
}

BoxCover::Check BoxCover::validate() const {
  Check c;
  // coverage and pair properties separate per axis x product structure
  for (int i = 0; i < d; ++i) {
    const auto& pos = axis_positions[static_cast<std::size_t>(i)];
    if (pos.front() - N > -N1 || pos.back() + N < N1) c.covers = false;
    for (std::size_t a = 1; a < pos.size(); ++a)
      if (pos[a] - pos[a - 1] > 2 * N + 1) c.covers = false;
  }
  auto cs = centers();
  for (std::size_t a = 0; a < cs.size(); ++a)
    for (std::size_t b = a + 1; b < cs.size(); ++b) {
      Box ba(cs[a], N), bb(cs[b], N);
      Coord dist = lattice::box_distance(ba, bb);
      if (dist == 0) {
        // overlap size per axis
        Coord overlap = 2 * N + 1;
        for (int i = 0; i < d; ++i) {
          Coord o = 2 * N + 1 - lattice::abs_coord(cs[a][i] - cs[b][i]);
          overlap = std::min(overlap, o);
        }
        if (2 * overlap < N) c.pair_overlap_or_far = false;
      } else if (4 * dist < N) {
        c.pair_overlap_or_far = false;
      }
      Coord sep = std::max<Coord>(lattice::sup_dist(cs[a], cs[b]) - N, 0);
      if (5 * sep < N) c.separation = false;
    }
  return c;
}

BoxCover build_cover(Coord N1, Coord N, int d) {
  if (N <= 0 || N1 <= 0 || (2 * N > N1 && N != N1))
    throw std::invalid_argument("build_cover: requires 0 < N <= N1/2 (or N == N1)");
  BoxCover cover;
  cover.d = d;
  cover.N1 = N1;
  cover.N = N;
  auto grid = N == N1 ? std::vector<Coord>{0} : axis_grid(N1, N);
  for (int i = 0; i < d; ++i) {
    cover.axis_positions.push_back(grid);
    // label 0 at the center closest to the origin
    std::size_t mid = 0;
    for (std::size_t a = 1; a < grid.size(); ++a)
      if (lattice::abs_coord(grid[a]) < lattice::abs_coord(grid[mid])) mid = a;
    cover.axis_label_offset.push_back(static_cast<Coord>(mid));
  }
  auto chk = cover.validate();
  cover.strict_pairs_ok = chk.pair_overlap_or_far && chk.separation;
  if (!chk.covers) throw std::runtime_error("build_cover: grid fails to cover");
  return cover;
}

FreeSiteSelection select_free_sites(const BoxCover& cover,
                                    const std::set<Site>& qualifying_labels,
                                    const Site& r0_label) {
  FreeSiteSelection sel;
  sel.r0_label = r0_label;
  const Site r0_pos = cover.position(r0_label);

  // pave the label lattice with I-blocks of side ~ (log N)^2 / 3
  Coord side = std::max<Coord>(
      1, static_cast<Coord>(std::llround(std::pow(std::log(static_cast<double>(cover.N)), 2) / 3.0)));

  const int d = cover.d;
  std::vector<Coord> counts(static_cast<std::size_t>(d));
  std::vector<Coord> base(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    counts[static_cast<std::size_t>(i)] = static_cast<Coord>(cover.centers_per_axis(i));
    base[static_cast<std::size_t>(i)] = -cover.axis_label_offset[static_cast<std::size_t>(i)];
  }

  std::vector<Coord> nblocks(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i)
    nblocks[static_cast<std::size_t>(i)] =
        (counts[static_cast<std::size_t>(i)] + side - 1) / side;

  std::vector<Coord> blockIdx(static_cast<std::size_t>(d), 0);
  for (;;) {
    // pick one qualifying label per I-block; those inside the exclusion
    // region around r0 are dropped by construction, not reported as failures
    bool any_qualifying = false;
    bool picked = false;
    std::vector<Coord> off(static_cast<std::size_t>(d), 0);
    Site block_id = Site::zero(d);
    for (int i = 0; i < d; ++i) block_id[i] = blockIdx[static_cast<std::size_t>(i)];
    for (;;) {
      Site lab = Site::zero(d);
      bool in_range = true;
      for (int i = 0; i < d; ++i) {
        Coord idx = blockIdx[static_cast<std::size_t>(i)] * side + off[static_cast<std::size_t>(i)];
        if (idx >= counts[static_cast<std::size_t>(i)]) {
          in_range = false;
          break;
        }
        lab[i] = base[static_cast<std::size_t>(i)] + idx;
      }
      if (in_range && qualifying_labels.count(lab)) {
        any_qualifying = true;
        if (!picked && lattice::sup_dist(lab, r0_label) > sel.exclusion_label_radius &&
            lattice::sup_dist(cover.position(lab), r0_pos) > 50 * cover.N) {
          sel.selected_labels.push_back(lab);
          sel.free_sites.push_back(cover.position(lab));
          picked = true;
        }
      }
      if (picked) break;
      int axis = d - 1;
      while (axis >= 0) {
        if (++off[static_cast<std::size_t>(axis)] < side) break;
        off[static_cast<std::size_t>(axis)] = 0;
        --axis;
      }
      if (axis < 0) break;
    }
    if (!any_qualifying) sel.blocks_without_label.push_back(block_id);

    int axis = d - 1;
    while (axis >= 0) {
      if (++blockIdx[static_cast<std::size_t>(axis)] < nblocks[static_cast<std::size_t>(axis)]) break;
      blockIdx[static_cast<std::size_t>(axis)] = 0;
      --axis;
    }
    if (axis < 0) break;
  }

  sel.min_site_distance = 0;
  for (const Site& s : sel.free_sites) {
    Coord dist = lattice::sup_dist(s, r0_pos);
    if (sel.min_site_distance == 0 || dist < sel.min_site_distance) sel.min_site_distance = dist;
  }
  return sel;
}

}  // namespace alb::msa
