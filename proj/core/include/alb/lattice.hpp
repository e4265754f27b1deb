#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

// Lattice geometry: sites of Z^d, sup/one norms, boxes Lambda_N(k) and their
// deterministic (lexicographic) linear indexing used for all matrix layouts.
namespace alb::lattice {

using Coord = std::int64_t;

inline Coord abs_coord(Coord x) { return x < 0 ? -x : x; }

struct Site {
  std::vector<Coord> c;

  Site() = default;
  explicit Site(std::vector<Coord> coords) : c(std::move(coords)) {}
  static Site zero(int d) { return Site(std::vector<Coord>(static_cast<std::size_t>(d), 0)); }

  int dim() const { return static_cast<int>(c.size()); }
  Coord operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  Coord& operator[](int i) { return c[static_cast<std::size_t>(i)]; }

  bool operator==(const Site& o) const { return c == o.c; }
  bool operator!=(const Site& o) const { return c != o.c; }
  // Lexicographic order; fixes the global matrix row/column layout.
  bool operator<(const Site& o) const { return c < o.c; }

  Site operator+(const Site& o) const {
    Site r = *this;
    for (int i = 0; i < dim(); ++i) r[i] += o[i];
    return r;
  }
  Site operator-(const Site& o) const {
    Site r = *this;
    for (int i = 0; i < dim(); ++i) r[i] -= o[i];
    return r;
  }
};

inline Coord sup_norm(const Site& n) {
  Coord m = 0;
  for (Coord x : n.c) m = std::max(m, abs_coord(x));
  return m;
}

inline Coord one_norm(const Site& n) {
  Coord s = 0;
  for (Coord x : n.c) s += abs_coord(x);
  return s;
}

inline Coord sup_dist(const Site& a, const Site& b) { return sup_norm(a - b); }

struct SiteHash {
  std::size_t operator()(const Site& s) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (Coord x : s.c) {
      h ^= static_cast<std::uint64_t>(x);
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

// Lambda_radius(center): all n with |n - center| <= radius.
struct Box {
  Site center;
  Coord radius = 0;

  Box() = default;
  Box(Site c, Coord r) : center(std::move(c)), radius(r) {
    if (r < 0) throw std::invalid_argument("Box: negative radius");
  }
  static Box centered(int d, Coord r) { return Box(Site::zero(d), r); }

  int dim() const { return center.dim(); }
  Coord side() const { return 2 * radius + 1; }
  std::size_t volume() const {
    std::size_t v = 1;
    for (int i = 0; i < dim(); ++i) v *= static_cast<std::size_t>(side());
    return v;
  }
  bool contains(const Site& n) const { return sup_dist(n, center) <= radius; }
  Box shifted(const Site& k) const { return Box(center + k, radius); }
  Box inflated(Coord extra) const { return Box(center, radius + extra); }
};

// dist(b1, b2) = min over site pairs of the sup-norm distance. Boxes are
// axis-aligned products, so the minimum splits per axis.
inline Coord box_distance(const Box& b1, const Box& b2) {
  if (b1.dim() != b2.dim()) throw std::invalid_argument("box_distance: dimension mismatch");
  Coord d = 0;
  for (int i = 0; i < b1.dim(); ++i) {
    Coord gap = abs_coord(b1.center[i] - b2.center[i]) - b1.radius - b2.radius;
    d = std::max(d, gap);
  }
  return std::max<Coord>(d, 0);
}

inline bool boxes_intersect(const Box& b1, const Box& b2) { return box_distance(b1, b2) == 0; }

// Bijection between box sites and {0, ..., volume-1}, lexicographic on
// coordinates (first axis slowest).
class IndexMap {
 public:
  explicit IndexMap(Box box) : box_(std::move(box)) {
    strides_.assign(static_cast<std::size_t>(box_.dim()), 1);
    for (int i = box_.dim() - 2; i >= 0; --i)
      strides_[static_cast<std::size_t>(i)] =
          strides_[static_cast<std::size_t>(i + 1)] * static_cast<std::size_t>(box_.side());
  }

  const Box& box() const { return box_; }
  std::size_t size() const { return box_.volume(); }

  std::size_t index_of(const Site& n) const {
    std::size_t idx = 0;
    for (int i = 0; i < box_.dim(); ++i) {
      Coord off = n[i] - box_.center[i] + box_.radius;
      if (off < 0 || off >= box_.side()) throw std::out_of_range("IndexMap: site outside box");
      idx += static_cast<std::size_t>(off) * strides_[static_cast<std::size_t>(i)];
    }
    return idx;
  }

  Site site_at(std::size_t idx) const {
    Site n = Site::zero(box_.dim());
    for (int i = 0; i < box_.dim(); ++i) {
      std::size_t q = idx / strides_[static_cast<std::size_t>(i)];
      idx %= strides_[static_cast<std::size_t>(i)];
      n[i] = static_cast<Coord>(q) - box_.radius + box_.center[i];
    }
    return n;
  }

 private:
  Box box_;
  std::vector<std::size_t> strides_;
};

inline std::vector<Site> box_sites(const Box& b) {
  IndexMap m(b);
  std::vector<Site> out;
  out.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out.push_back(m.site_at(i));
  return out;
}

inline std::string to_string(const Site& s) {
  std::string r = "(";
  for (int i = 0; i < s.dim(); ++i) {
    if (i) r += ",";
    r += std::to_string(s[i]);
  }
  return r + ")";
}

}  // namespace alb::lattice
