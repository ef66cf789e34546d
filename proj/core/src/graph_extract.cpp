#include "roadnet/graph_extract.hpp"

#include <array>
#include <map>
#include <set>
#include <string>

#include "roadnet/errors.hpp"

namespace roadnet {
namespace {

// 8-neighborhood ring, clockwise starting from east (y grows downward).
constexpr int kRing[8][2] = {{1, 0},  {1, 1},   {0, 1},  {-1, 1},
                             {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
constexpr bool kOrthogonal[8] = {true, false, true, false, true, false, true, false};

struct RingRuns {
  int count = 0;
  std::array<std::int8_t, 8> run_of{};  // -1 background, else run index
  std::array<std::int8_t, 4> rep{};     // ring position walked into per run
};

RingRuns ring_runs(const BitCanvas& c, int x, int y) {
  RingRuns r;
  std::array<bool, 8> fg{};
  int first_bg = -1;
  for (int i = 0; i < 8; ++i) {
    const int nx = x + kRing[i][0], ny = y + kRing[i][1];
    fg[i] = c.inside(nx, ny) && c.at(nx, ny);
    if (!fg[i] && first_bg < 0) first_bg = i;
    r.run_of[i] = -1;
  }
  if (first_bg < 0) {
    // solid ring: a single branch; prefer the eastern orthogonal cell
    r.count = 1;
    for (int i = 0; i < 8; ++i) r.run_of[i] = 0;
    r.rep[0] = 0;
    return r;
  }
  bool in_run = false;
  for (int k = 1; k <= 8; ++k) {
    const int i = (first_bg + k) % 8;
    if (!fg[i]) {
      in_run = false;
      continue;
    }
    if (!in_run) {
      in_run = true;
      if (r.count < 4) r.rep[r.count] = static_cast<std::int8_t>(i);
      ++r.count;
    }
    const int run = r.count - 1;
    r.run_of[i] = static_cast<std::int8_t>(run);
    // orthogonal cells make better walk continuations than their
    // diagonal run-mates
    if (run < 4 && kOrthogonal[i] && !kOrthogonal[r.rep[run]])
      r.rep[run] = static_cast<std::int8_t>(i);
  }
  return r;
}

inline int ring_index_of(PixelCoord from, PixelCoord to) {
  for (int i = 0; i < 8; ++i)
    if (from.x + kRing[i][0] == to.x && from.y + kRing[i][1] == to.y) return i;
  return -1;
}

}  // namespace

int fringe_count(const BitCanvas& canvas, PixelCoord px) {
  if (!canvas.inside(px.x, px.y) || !canvas.at(px.x, px.y))
    throw InvariantError("fringe_count: (" + std::to_string(px.x) + "," + std::to_string(px.y) +
                         ") is not a foreground pixel");
  return ring_runs(canvas, px.x, px.y).count;
}

std::vector<PixelCoord> detect_crossings(const BitCanvas& canvas) {
  std::vector<PixelCoord> out;
  for (int y = 0; y < canvas.height; ++y)
    for (int x = 0; x < canvas.width; ++x) {
      if (!canvas.at(x, y)) continue;
      const int n = ring_runs(canvas, x, y).count;
      if (n == 1 || n > 2) out.push_back({x, y});
    }
  return out;
}

namespace {

class Extractor {
 public:
  Extractor(const BitCanvas& canvas, const ExtractParams& p, int tile_size)
      : canvas_(canvas), params_(p), tile_size_(tile_size) {
    if (p.node_interval < 1) throw InvariantError("extract_graph: node_interval must be >= 1");
    consumed_.assign(canvas.bits.size(), 0);
    visited_.assign(canvas.bits.size(), 0);
    crossing_.assign(canvas.bits.size(), 0);
  }

  RoadGraph run() {
    const std::vector<PixelCoord> crossings = detect_crossings(canvas_);
    for (const PixelCoord& c : crossings) crossing_[index(c)] = 1;

    for (const PixelCoord& c : crossings) {
      const RingRuns rr = ring_runs(canvas_, c.x, c.y);
      for (int run = 0; run < rr.count && run < 4; ++run) {
        if (consumed_[index(c)] & (1u << run)) continue;
        walk_branch(c, rr, run);
      }
      visited_[index(c)] = 1;
    }

    // leftovers: crossing-free cycles, plus any branch the seed pass
    // could not reach through its junction runs
    for (int y = 0; y < canvas_.height; ++y)
      for (int x = 0; x < canvas_.width; ++x) {
        const PixelCoord p{x, y};
        if (!canvas_.at(x, y) || visited_[index(p)]) continue;
        if (ring_runs(canvas_, x, y).count == 0) {
          visited_[index(p)] = 1;  // isolated dot: nothing to connect
          continue;
        }
        walk_leftover(p);
      }
    return graph_;
  }

 private:
  std::size_t index(PixelCoord p) const {
    return static_cast<std::size_t>(p.y) * canvas_.width + p.x;
  }

  int node_at(PixelCoord p) {
    auto it = node_of_.find(p);
    if (it != node_of_.end()) return it->second;
    const GeoPoint g = pixel_to_geo(canvas_, p.x + 0.5, p.y + 0.5, tile_size_);
    const int id = graph_.add_node(g);
    node_of_.emplace(p, id);
    return id;
  }

  // One deterministic step: enter `cur` from ring position `back_idx`,
  // leave through the other run. Returns false at a dead end.
  bool step(PixelCoord& cur, int& back_idx) {
    const RingRuns rr = ring_runs(canvas_, cur.x, cur.y);
    const int back_run = rr.run_of[back_idx];
    int out_run = -1;
    for (int rn = 0; rn < rr.count && rn < 4; ++rn)
      if (rn != back_run) {
        out_run = rn;
        break;
      }
    if (out_run < 0) return false;
    const int rep = rr.rep[out_run];
    const PixelCoord next{cur.x + kRing[rep][0], cur.y + kRing[rep][1]};
    back_idx = ring_index_of(next, cur);
    cur = next;
    return true;
  }

  void walk_branch(PixelCoord seed, const RingRuns& rr, int run) {
    consumed_[index(seed)] |= 1u << run;
    std::vector<PixelCoord> path{seed};
    const int rep = rr.rep[run];
    PixelCoord cur{seed.x + kRing[rep][0], seed.y + kRing[rep][1]};
    int back_idx = ring_index_of(cur, seed);
    const std::size_t limit = canvas_.bits.size() * 4 + 16;
    while (path.size() < limit) {
      path.push_back(cur);
      visited_[index(cur)] = 1;
      if (crossing_[index(cur)]) {
        const RingRuns cr = ring_runs(canvas_, cur.x, cur.y);
        const int arrival = cr.run_of[back_idx];
        if (arrival >= 0 && arrival < 4) consumed_[index(cur)] |= 1u << arrival;
        break;
      }
      if (!step(cur, back_idx)) break;
    }
    plant(path);
  }

  // Walk outward from an unseeded pixel until the path closes on itself,
  // reaches a crossing, or touches already-walked skeleton.
  void walk_leftover(PixelCoord p) {
    const RingRuns rr = ring_runs(canvas_, p.x, p.y);
    std::vector<PixelCoord> path{p};
    visited_[index(p)] = 1;
    const int rep = rr.rep[0];
    PixelCoord cur{p.x + kRing[rep][0], p.y + kRing[rep][1]};
    int back_idx = ring_index_of(cur, p);
    const std::size_t limit = canvas_.bits.size() * 4 + 16;
    bool closed = false;
    while (path.size() < limit) {
      path.push_back(cur);
      if (cur == p) {
        closed = true;
        break;
      }
      const bool stop = crossing_[index(cur)] || visited_[index(cur)];
      visited_[index(cur)] = 1;
      if (stop || !step(cur, back_idx)) break;
    }
    if (!closed && rr.count > 1) {
      // extend the other way so the whole leftover branch is one path
      std::vector<PixelCoord> tail;
      const int rep2 = rr.rep[1];
      PixelCoord cur2{p.x + kRing[rep2][0], p.y + kRing[rep2][1]};
      int back2 = ring_index_of(cur2, p);
      while (tail.size() < limit) {
        tail.push_back(cur2);
        const bool stop = crossing_[index(cur2)] || visited_[index(cur2)];
        visited_[index(cur2)] = 1;
        if (stop || !step(cur2, back2)) break;
      }
      std::vector<PixelCoord> joined(tail.rbegin(), tail.rend());
      joined.insert(joined.end(), path.begin(), path.end());
      path.swap(joined);
    }
    plant(path);
  }

  void plant(const std::vector<PixelCoord>& path) {
    if (path.size() < 2) return;
    const int m = static_cast<int>(path.size()) - 1;
    const bool loop = path.front() == path.back();
    std::vector<int> offsets;
    for (int off = 0; off < m; off += params_.node_interval) offsets.push_back(off);
    offsets.push_back(m);
    if (loop) {
      // a closed walk needs two interior anchors to avoid self-loops
      std::set<int> uniq(offsets.begin(), offsets.end());
      uniq.insert(m / 3 > 0 ? m / 3 : 1);
      uniq.insert(2 * m / 3 > m / 3 ? 2 * m / 3 : std::min(m - 1, m / 3 + 1));
      offsets.assign(uniq.begin(), uniq.end());
    }
    for (std::size_t i = 0; i + 1 < offsets.size(); ++i)
      connect(path, offsets[i], offsets[i + 1]);
  }

  void connect(const std::vector<PixelCoord>& path, int off_a, int off_b) {
    const int a = node_at(path[off_a]);
    const int b = node_at(path[off_b]);
    if (a == b) {
      if (off_b - off_a < 2) return;  // nothing between; drop the degenerate stub
      const int mid = (off_a + off_b) / 2;
      connect(path, off_a, mid);
      connect(path, mid, off_b);
      return;
    }
    const auto key = std::minmax(a, b);
    if (edges_.count(key)) {
      if (off_b - off_a < 2) return;  // parallel step with no room for a midpoint
      const int mid = (off_a + off_b) / 2;
      connect(path, off_a, mid);
      connect(path, mid, off_b);
      return;
    }
    edges_.insert(key);
    graph_.add_edge(a, b);
  }

  const BitCanvas& canvas_;
  ExtractParams params_;
  int tile_size_;
  RoadGraph graph_;
  std::map<PixelCoord, int> node_of_;
  std::set<std::pair<int, int>> edges_;
  std::vector<std::uint8_t> crossing_;
  std::vector<std::uint8_t> consumed_;
  std::vector<std::uint8_t> visited_;
};

}  // namespace

RoadGraph extract_graph(const BitCanvas& canvas, const ExtractParams& p, int tile_size) {
  Extractor ex(canvas, p, tile_size);
  return ex.run();
}

}  // namespace roadnet
