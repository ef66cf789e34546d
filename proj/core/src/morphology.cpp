#include "roadnet/morphology.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <utility>

#include "roadnet/errors.hpp"

namespace roadnet {

std::vector<std::uint8_t> baseline_segment(const TileImage& img, const BaselineParams& p) {
  const int w = img.width, h = img.height;
  std::vector<std::uint8_t> gray(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int g = (img.at(x, y, 0) + img.at(x, y, 1) + img.at(x, y, 2)) / 3;
      gray[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint8_t>(g);
    }
  std::vector<std::uint8_t> bits(gray.size(), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int g = gray[static_cast<std::size_t>(y) * w + x];
      if (g < p.gray_min || g > p.gray_max) continue;
      int lo = 255, hi = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
          const int v = gray[static_cast<std::size_t>(ny) * w + nx];
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      if (hi - lo <= p.contrast_max) bits[static_cast<std::size_t>(y) * w + x] = 1;
    }
  return bits;
}

namespace {

// 1D sliding-window OR/AND via prefix counts; exact for the square element.
void dilate_rows(const std::vector<std::uint8_t>& in, std::vector<std::uint8_t>& out, int w, int h,
                 int r) {
  std::vector<int> prefix(w + 1);
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* row = in.data() + static_cast<std::size_t>(y) * w;
    prefix[0] = 0;
    for (int x = 0; x < w; ++x) prefix[x + 1] = prefix[x] + row[x];
    std::uint8_t* orow = out.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const int a = std::max(0, x - r), b = std::min(w - 1, x + r);
      orow[x] = prefix[b + 1] - prefix[a] > 0 ? 1 : 0;
    }
  }
}

void dilate_cols(const std::vector<std::uint8_t>& in, std::vector<std::uint8_t>& out, int w, int h,
                 int r) {
  std::vector<int> prefix(h + 1);
  for (int x = 0; x < w; ++x) {
    prefix[0] = 0;
    for (int y = 0; y < h; ++y) prefix[y + 1] = prefix[y] + in[static_cast<std::size_t>(y) * w + x];
    for (int y = 0; y < h; ++y) {
      const int a = std::max(0, y - r), b = std::min(h - 1, y + r);
      out[static_cast<std::size_t>(y) * w + x] = prefix[b + 1] - prefix[a] > 0 ? 1 : 0;
    }
  }
}

// Erosion needs the full window inside the foreground; windows reaching
// past the buffer see background and fail.
void erode_rows(const std::vector<std::uint8_t>& in, std::vector<std::uint8_t>& out, int w, int h,
                int r) {
  std::vector<int> prefix(w + 1);
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* row = in.data() + static_cast<std::size_t>(y) * w;
    prefix[0] = 0;
    for (int x = 0; x < w; ++x) prefix[x + 1] = prefix[x] + row[x];
    std::uint8_t* orow = out.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const int a = x - r, b = x + r;
      if (a < 0 || b >= w) {
        orow[x] = 0;
        continue;
      }
      orow[x] = prefix[b + 1] - prefix[a] == 2 * r + 1 ? 1 : 0;
    }
  }
}

void erode_cols(const std::vector<std::uint8_t>& in, std::vector<std::uint8_t>& out, int w, int h,
                int r) {
  std::vector<int> prefix(h + 1);
  for (int x = 0; x < w; ++x) {
    prefix[0] = 0;
    for (int y = 0; y < h; ++y) prefix[y + 1] = prefix[y] + in[static_cast<std::size_t>(y) * w + x];
    for (int y = 0; y < h; ++y) {
      const int a = y - r, b = y + r;
      if (a < 0 || b >= h) {
        out[static_cast<std::size_t>(y) * w + x] = 0;
        continue;
      }
      out[static_cast<std::size_t>(y) * w + x] = prefix[b + 1] - prefix[a] == 2 * r + 1 ? 1 : 0;
    }
  }
}

}  // namespace

BitCanvas close(const BitCanvas& canvas, const MorphParams& p) {
  if (p.kernel_size < 1 || p.kernel_size % 2 == 0)
    throw InvariantError("close: kernel_size must be odd and >= 1");
  if (p.kernel_size > std::min(canvas.width, canvas.height))
    throw InvariantError("close: kernel " + std::to_string(p.kernel_size) +
                         " larger than canvas");
  const int r = p.kernel_size / 2;
  if (r == 0) return canvas;

  // Pad by r so the dilation has room to spill; the closing of a
  // background-embedded window never reaches past that margin.
  const int pw = canvas.width + 2 * r, ph = canvas.height + 2 * r;
  std::vector<std::uint8_t> padded(static_cast<std::size_t>(pw) * ph, 0);
  for (int y = 0; y < canvas.height; ++y)
    std::copy(canvas.bits.begin() + static_cast<std::size_t>(y) * canvas.width,
              canvas.bits.begin() + static_cast<std::size_t>(y + 1) * canvas.width,
              padded.begin() + static_cast<std::size_t>(y + r) * pw + r);

  std::vector<std::uint8_t> tmp(padded.size());
  dilate_rows(padded, tmp, pw, ph, r);
  dilate_cols(tmp, padded, pw, ph, r);
  erode_rows(padded, tmp, pw, ph, r);
  erode_cols(tmp, padded, pw, ph, r);

  BitCanvas out = BitCanvas::zeros(canvas.origin, canvas.width, canvas.height);
  for (int y = 0; y < canvas.height; ++y)
    std::copy(padded.begin() + static_cast<std::size_t>(y + r) * pw + r,
              padded.begin() + static_cast<std::size_t>(y + r) * pw + r + canvas.width,
              out.bits.begin() + static_cast<std::size_t>(y) * canvas.width);
  return out;
}

namespace {

// P2..P9 clockwise from north; y grows downward.
constexpr int kNbOff[8][2] = {{0, -1}, {1, -1}, {1, 0},  {1, 1},
                              {0, 1},  {-1, 1}, {-1, 0}, {-1, -1}};

inline void neighbor_ring(const BitCanvas& c, int x, int y, std::array<std::uint8_t, 8>& p) {
  for (int i = 0; i < 8; ++i) {
    const int nx = x + kNbOff[i][0], ny = y + kNbOff[i][1];
    p[i] = c.inside(nx, ny) ? c.at(nx, ny) : 0;
  }
}

inline int transitions(const std::array<std::uint8_t, 8>& p) {
  int a = 0;
  for (int i = 0; i < 8; ++i)
    if (p[i] == 0 && p[(i + 1) % 8] == 1) ++a;
  return a;
}

inline int neighbor_count(const std::array<std::uint8_t, 8>& p) {
  int b = 0;
  for (std::uint8_t v : p) b += v;
  return b;
}

// 8-connected labels over the current foreground; labels are 1-based.
void label8(const BitCanvas& c, std::vector<int>& labels, std::vector<int>& sizes) {
  labels.assign(c.bits.size(), 0);
  sizes.assign(1, 0);
  std::vector<std::pair<int, int>> stack;
  for (int y0 = 0; y0 < c.height; ++y0)
    for (int x0 = 0; x0 < c.width; ++x0) {
      const std::size_t i0 = static_cast<std::size_t>(y0) * c.width + x0;
      if (!c.bits[i0] || labels[i0]) continue;
      const int lab = static_cast<int>(sizes.size());
      sizes.push_back(0);
      labels[i0] = lab;
      stack.push_back({x0, y0});
      while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        ++sizes[lab];
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const int nx = x + dx, ny = y + dy;
            if (!c.inside(nx, ny)) continue;
            const std::size_t ni = static_cast<std::size_t>(ny) * c.width + nx;
            if (c.bits[ni] && !labels[ni]) {
              labels[ni] = lab;
              stack.push_back({nx, ny});
            }
          }
      }
    }
}

}  // namespace

bool zhang_suen_deletable(const BitCanvas& canvas, int x, int y, int sub_iteration) {
  if (!canvas.at(x, y)) return false;
  std::array<std::uint8_t, 8> p;
  neighbor_ring(canvas, x, y, p);
  const int b = neighbor_count(p);
  if (b < 2 || b > 6) return false;
  if (transitions(p) != 1) return false;
  const std::uint8_t p2 = p[0], p4 = p[2], p6 = p[4], p8 = p[6];
  if (sub_iteration == 0) return (p2 * p4 * p6 == 0) && (p4 * p6 * p8 == 0);
  return (p2 * p4 * p8 == 0) && (p2 * p6 * p8 == 0);
}

BitCanvas skeletonize(const BitCanvas& canvas) {
  BitCanvas img = canvas;
  std::vector<std::pair<int, int>> proposed;
  std::vector<int> labels, comp_size, comp_proposed;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int sub = 0; sub < 2; ++sub) {
      proposed.clear();
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
          if (zhang_suen_deletable(img, x, y, sub)) proposed.emplace_back(x, y);
      if (proposed.empty()) continue;
      // The published rules delete every flagged pixel at once, which
      // erases isolated 2x2 squares (and some 2-px diagonal strokes)
      // whole. When a sub-iteration flags an entire component, keep its
      // first pixel; everything is still a function of the pre-pass state.
      label8(img, labels, comp_size);
      comp_proposed.assign(comp_size.size(), 0);
      for (const auto& [x, y] : proposed)
        ++comp_proposed[labels[static_cast<std::size_t>(y) * img.width + x]];
      std::vector<char> spared(comp_size.size(), 0);
      for (const auto& [x, y] : proposed) {
        const int lab = labels[static_cast<std::size_t>(y) * img.width + x];
        if (comp_proposed[lab] == comp_size[lab] && !spared[lab]) {
          spared[lab] = 1;
          continue;
        }
        img.set(x, y, 0);
        changed = true;
      }
    }
  }
  return img;
}

int label_components4(const BitCanvas& canvas, std::vector<int>& labels) {
  labels.assign(canvas.bits.size(), 0);
  int next = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y0 = 0; y0 < canvas.height; ++y0)
    for (int x0 = 0; x0 < canvas.width; ++x0) {
      const std::size_t i0 = static_cast<std::size_t>(y0) * canvas.width + x0;
      if (!canvas.bits[i0] || labels[i0]) continue;
      ++next;
      stack.push_back({x0, y0});
      labels[i0] = next;
      while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        constexpr int kOff4[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& d : kOff4) {
          const int nx = x + d[0], ny = y + d[1];
          if (!canvas.inside(nx, ny)) continue;
          const std::size_t ni = static_cast<std::size_t>(ny) * canvas.width + nx;
          if (canvas.bits[ni] && !labels[ni]) {
            labels[ni] = next;
            stack.push_back({nx, ny});
          }
        }
      }
    }
  return next;
}

BitCanvas refine(const BitCanvas& canvas, const MorphParams& p) {
  if (p.refine_min_len < 1) throw InvariantError("refine: refine_min_len must be >= 1");
  std::vector<int> labels;
  const int n = label_components4(canvas, labels);
  std::vector<std::size_t> sizes(static_cast<std::size_t>(n) + 1, 0);
  for (int l : labels)
    if (l) ++sizes[l];
  BitCanvas out = canvas;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] && sizes[labels[i]] < static_cast<std::size_t>(p.refine_min_len))
      out.bits[i] = 0;
  return out;
}

}  // namespace roadnet
