#include "trafficlens/roadmodel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <string>
#include <tuple>

#include "trafficlens/motion.hpp"

namespace trafficlens {

namespace {

// Clockwise on screen (y down), starting west.
constexpr int kDx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

int direction_of(int dx, int dy) {
  for (int d = 0; d < 8; ++d) {
    if (kDx[d] == dx && kDy[d] == dy) return d;
  }
  return -1;
}

void require_gray(const ImageBuffer& img, const char* what) {
  if (img.empty()) throw Error(ErrorKind::EmptyImage, what);
  if (img.channels() != 1) throw Error(ErrorKind::ShapeMismatch, std::string(what) + " must be single-channel");
}

}  // namespace

void SrgParams::validate() const {
  if (tau_alpha <= 0 || tau_alpha >= 256) throw Error(ErrorKind::ConfigError, "tau_alpha must lie in (0, 256)");
}

ImageBuffer srg_segment(const ImageBuffer& gray, std::span<const BevPoint> seeds, const SrgParams& params) {
  params.validate();
  require_gray(gray, "srg image");
  const int w = gray.width(), h = gray.height();
  ImageBuffer mask(w, h, 1, 0);
  std::deque<Pixel> frontier;
  for (const auto& s : seeds) {
    if (!std::isfinite(s.x) || !std::isfinite(s.y)) continue;
    const long x = std::lround(s.x), y = std::lround(s.y);
    if (x < 0 || y < 0 || x >= w || y >= h) continue;
    if (mask.at(x, y) == kRoad) continue;
    mask.at(x, y) = kRoad;
    frontier.push_back({static_cast<int>(x), static_cast<int>(y)});
  }
  if (frontier.empty()) throw Error(ErrorKind::NoSeeds, "no seed inside the image");

  while (!frontier.empty()) {
    const Pixel p = frontier.front();
    frontier.pop_front();
    const int ref = gray.at(p.x, p.y);
    for (int d = 0; d < 8; ++d) {
      const int nx = p.x + kDx[d], ny = p.y + kDy[d];
      if (!mask.contains(nx, ny) || mask.at(nx, ny) == kRoad) continue;
      if (std::abs(gray.at(nx, ny) - ref) < params.tau_alpha) {
        mask.at(nx, ny) = kRoad;
        frontier.push_back({nx, ny});
      }
    }
  }
  return mask;
}

ImageBuffer refine_mask(const ImageBuffer& mask) { return erode3x3(dilate3x3(mask)); }

// ---------------------------------------------------------------------------

bool BoundarySet::empty() const {
  return std::all_of(chains.begin(), chains.end(), [](const auto& c) { return c.empty(); });
}

std::vector<Pixel> BoundarySet::pixels() const {
  std::vector<Pixel> out;
  for (const auto& c : chains) out.insert(out.end(), c.begin(), c.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

BoundarySet extract_boundary(const ImageBuffer& mask) {
  require_gray(mask, "mask");
  const int w = mask.width(), h = mask.height();
  const auto road = [&](int x, int y) { return mask.contains(x, y) && mask.at(x, y) == kRoad; };

  std::vector<char> visited(static_cast<std::size_t>(w) * h, 0);
  BoundarySet out;
  bool any_road = false;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!road(x, y)) continue;
      any_road = true;
      if (visited[static_cast<std::size_t>(y) * w + x]) continue;
      // Chains start at pixels with a background 4-neighbour.
      int start_dir = -1;
      for (int d : {0, 2, 4, 6}) {
        if (!road(x + kDx[d], y + kDy[d])) {
          start_dir = d;
          break;
        }
      }
      if (start_dir < 0) continue;

      std::vector<Pixel> chain{{x, y}};
      visited[static_cast<std::size_t>(y) * w + x] = 1;
      Pixel p{x, y};
      int back = start_dir;
      std::set<std::tuple<int, int, int>> states{{x, y, back}};
      while (true) {
        int found = -1;
        for (int k = 1; k <= 8; ++k) {
          const int d = (back + k) % 8;
          if (road(p.x + kDx[d], p.y + kDy[d])) {
            found = d;
            break;
          }
        }
        if (found < 0) break;  // isolated pixel
        const int prev = (found + 7) % 8;
        const Pixel q{p.x + kDx[found], p.y + kDy[found]};
        back = direction_of(p.x + kDx[prev] - q.x, p.y + kDy[prev] - q.y);
        p = q;
        if (!states.emplace(p.x, p.y, back).second) break;  // Jacob's criterion
        chain.push_back(p);
        visited[static_cast<std::size_t>(p.y) * w + p.x] = 1;
      }
      out.chains.push_back(std::move(chain));
    }
  }
  if (!any_road) throw Error(ErrorKind::EmptyMask, "mask has no road pixels");
  return out;
}

NearestBoundary nearest_boundary_point(BevPoint p, const BoundarySet& boundary) {
  if (boundary.empty()) throw Error(ErrorKind::EmptyMask, "boundary is empty");
  double best = std::numeric_limits<double>::infinity();
  Pixel arg{};
  for (const auto& chain : boundary.chains) {
    for (const Pixel& q : chain) {
      const double d = std::hypot(q.x - p.x, q.y - p.y);
      if (d < best || (d == best && q < arg)) {
        best = d;
        arg = q;
      }
    }
  }
  return {{static_cast<double>(arg.x), static_cast<double>(arg.y)}, best};
}

// ---------------------------------------------------------------------------

BoundaryIndex::BoundaryIndex(const BoundarySet& boundary, int cell) : cell_(cell), pixels_(boundary.pixels()) {
  if (cell_ < 1) throw Error(ErrorKind::InvalidArgument, "cell size must be positive");
  if (pixels_.empty()) return;
  const auto floor_div = [this](int v) { return v >= 0 ? v / cell_ : -((-v + cell_ - 1) / cell_); };
  int max_cx = std::numeric_limits<int>::min(), max_cy = std::numeric_limits<int>::min();
  min_cx_ = min_cy_ = std::numeric_limits<int>::max();
  for (const Pixel& q : pixels_) {
    min_cx_ = std::min(min_cx_, floor_div(q.x));
    min_cy_ = std::min(min_cy_, floor_div(q.y));
    max_cx = std::max(max_cx, floor_div(q.x));
    max_cy = std::max(max_cy, floor_div(q.y));
  }
  cols_ = max_cx - min_cx_ + 1;
  rows_ = max_cy - min_cy_ + 1;
  buckets_.assign(static_cast<std::size_t>(cols_) * rows_, {});
  for (int i = 0; i < static_cast<int>(pixels_.size()); ++i) {
    const int cx = floor_div(pixels_[i].x) - min_cx_, cy = floor_div(pixels_[i].y) - min_cy_;
    buckets_[static_cast<std::size_t>(cy) * cols_ + cx].push_back(i);
  }
}

NearestBoundary BoundaryIndex::nearest(BevPoint p) const {
  if (pixels_.empty()) throw Error(ErrorKind::EmptyMask, "boundary is empty");
  const int pcx = static_cast<int>(std::floor(p.x / cell_)) - min_cx_;
  const int pcy = static_cast<int>(std::floor(p.y / cell_)) - min_cy_;
  // Rings needed to cover the whole grid from the query cell.
  const int max_ring = std::max({std::abs(pcx), std::abs(pcx - (cols_ - 1)), std::abs(pcy),
                                 std::abs(pcy - (rows_ - 1))});
  double best = std::numeric_limits<double>::infinity();
  int arg = -1;
  const auto visit = [&](int cx, int cy) {
    if (cx < 0 || cy < 0 || cx >= cols_ || cy >= rows_) return;
    for (int i : buckets_[static_cast<std::size_t>(cy) * cols_ + cx]) {
      const double d = std::hypot(pixels_[i].x - p.x, pixels_[i].y - p.y);
      if (d < best || (d == best && i < arg)) {
        best = d;
        arg = i;
      }
    }
  };
  for (int r = 0; r <= max_ring; ++r) {
    // Anything in ring r is at least (r - 1) cells away from p.
    if (arg >= 0 && best < static_cast<double>(r - 1) * cell_) break;
    if (r == 0) {
      visit(pcx, pcy);
      continue;
    }
    for (int dx = -r; dx <= r; ++dx) {
      visit(pcx + dx, pcy - r);
      visit(pcx + dx, pcy + r);
    }
    for (int dy = -r + 1; dy <= r - 1; ++dy) {
      visit(pcx - r, pcy + dy);
      visit(pcx + r, pcy + dy);
    }
  }
  return {{static_cast<double>(pixels_[arg].x), static_cast<double>(pixels_[arg].y)}, best};
}

std::vector<Pixel> BoundaryIndex::within(BevPoint p, double lo, double hi) const {
  std::vector<int> hits;
  if (pixels_.empty()) return {};
  const int cx0 = std::max(0, static_cast<int>(std::floor((p.x - hi) / cell_)) - min_cx_);
  const int cy0 = std::max(0, static_cast<int>(std::floor((p.y - hi) / cell_)) - min_cy_);
  const int cx1 = std::min(cols_ - 1, static_cast<int>(std::floor((p.x + hi) / cell_)) - min_cx_);
  const int cy1 = std::min(rows_ - 1, static_cast<int>(std::floor((p.y + hi) / cell_)) - min_cy_);
  for (int cy = cy0; cy <= cy1; ++cy) {
    for (int cx = cx0; cx <= cx1; ++cx) {
      for (int i : buckets_[static_cast<std::size_t>(cy) * cols_ + cx]) {
        const double d = std::hypot(pixels_[i].x - p.x, pixels_[i].y - p.y);
        if (d >= lo && d <= hi) hits.push_back(i);
      }
    }
  }
  std::sort(hits.begin(), hits.end());
  std::vector<Pixel> out;
  out.reserve(hits.size());
  for (int i : hits) out.push_back(pixels_[i]);
  return out;
}

// An 8-connected chain moves at most sqrt(2) px per step, so a ring this wide
// always catches a pixel of any chain that crosses the circle.
constexpr double kRingHalfWidth = 0.70710678118654757;

double boundary_heading(BevPoint l_r, const BoundaryIndex& index, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "radius must be positive");
  double r = radius;
  for (int attempt = 0; attempt <= 4; ++attempt, r *= 2.0) {
    const std::vector<Pixel> ring = index.within(l_r, r - kRingHalfWidth, r + kRingHalfWidth);
    double best = 0.0;
    Pixel a{}, b{};
    for (std::size_t i = 0; i < ring.size(); ++i) {
      for (std::size_t j = i + 1; j < ring.size(); ++j) {
        const double d = std::hypot(ring[i].x - ring[j].x, ring[i].y - ring[j].y);
        if (d > best) {
          best = d;
          a = ring[i];
          b = ring[j];
        }
      }
    }
    if (best > 0.0) {
      const double deg = heading({double(b.x), double(b.y)}, {double(a.x), double(a.y)});
      const double folded = std::fmod(deg + 360.0, 180.0);
      return folded >= 180.0 ? 0.0 : folded;
    }
  }
  throw Error(ErrorKind::InsufficientIntersection,
              "fewer than two boundary pixels around the reference point up to radius " + std::to_string(r / 2.0));
}

double boundary_heading(BevPoint l_r, const BoundarySet& boundary, double radius) {
  return boundary_heading(l_r, BoundaryIndex(boundary), radius);
}

}  // namespace trafficlens
