#ifndef ROADNET_MORPHOLOGY_HPP
#define ROADNET_MORPHOLOGY_HPP

#include <vector>

#include "roadnet/raster.hpp"

namespace roadnet {

struct MorphParams {
  int kernel_size = 11;     // odd side of the square structuring element
  int refine_min_len = 500; // minimum surviving component size, in pixels
};

// Stand-in segmenter so the pipeline runs without a learned model:
// a pixel is road iff its gray value falls in [gray_min, gray_max] and the
// local 3x3 contrast (max-min of gray) stays at or below contrast_max.
struct BaselineParams {
  int gray_min = 90;
  int gray_max = 180;
  int contrast_max = 32;
};

std::vector<std::uint8_t> baseline_segment(const TileImage& img, const BaselineParams& p);

// Morphological closing (dilate then erode) with a square all-ones element.
// The canvas is treated as a window into an all-background plane, so the
// result equals the plane closing restricted to the window; in particular
// the output is always a superset of the input.
BitCanvas close(const BitCanvas& canvas, const MorphParams& p);

// Zhang-Suen thinning to a 1-px skeleton, with parallel sub-iteration
// semantics: deletions depend only on the pre-pass state. The one
// amendment to the published rules: a sub-iteration that flags a whole
// component (isolated 2x2 squares, some 2-px diagonal strokes) spares one
// pixel of it, so the 8-component count is preserved on any input.
BitCanvas skeletonize(const BitCanvas& canvas);

// Drops 4-connected components smaller than refine_min_len pixels.
BitCanvas refine(const BitCanvas& canvas, const MorphParams& p);

// 4-connected component labels, 0 = background, 1..n = components.
// Returns the component count.
int label_components4(const BitCanvas& canvas, std::vector<int>& labels);

// Raw Zhang-Suen deletability of one pixel under sub-iteration 0 or 1,
// evaluated against the current canvas. Exposed for output-quality checks.
bool zhang_suen_deletable(const BitCanvas& canvas, int x, int y, int sub_iteration);

}  // namespace roadnet

#endif
