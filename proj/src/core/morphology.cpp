#include "plume/core/morphology.hpp"

#include "plume/core/error.hpp"

#include <array>

namespace plume {

namespace {

PixelMask dilate_once(const PixelMask& in) {
  const int h = in.height();
  const int w = in.width();
  PixelMask out(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!in.test(r, c)) continue;
      for (int dr = -1; dr <= 1; ++dr) {
        const int rr = r + dr;
        if (rr < 0 || rr >= h) continue;
        for (int dc = -1; dc <= 1; ++dc) {
          const int cc = c + dc;
          if (cc < 0 || cc >= w) continue;
          out.set(rr, cc);
        }
      }
    }
  }
  return out;
}

}  // namespace

PixelMask dilate(const PixelMask& mask, int iterations) {
  if (iterations < 0) throw DomainError("dilation iterations must be non-negative");
  PixelMask out = mask;
  for (int i = 0; i < iterations; ++i) {
    if (out.all()) break;
    out = dilate_once(out);
  }
  return out;
}

PixelMask make_guardrail(const PixelMask& roi) {
  if (!roi.any()) throw DomainError("guardrail requires a nonempty roi");
  PixelMask grown = dilate(roi, 4);
  if (grown.all()) throw DomainError("no background pixels: roi and guardrail cover the image");
  return grown - roi;
}

PixelMask background_pool(const PixelMask& roi, const PixelMask& guard) { return ~(roi | guard); }

Components connected_components(const PixelMask& mask, Connectivity connectivity) {
  const int h = mask.height();
  const int w = mask.width();
  Components out;
  out.labels.assign(static_cast<std::size_t>(mask.size()), -1);

  static constexpr std::array<std::array<int, 2>, 8> kOffsets{
      {{-1, 0}, {1, 0}, {0, -1}, {0, 1}, {-1, -1}, {-1, 1}, {1, -1}, {1, 1}}};
  const int n_offsets = connectivity == Connectivity::Four ? 4 : 8;

  std::vector<int> stack;
  for (int p = 0; p < mask.size(); ++p) {
    if (!mask.test(p) || out.labels[static_cast<std::size_t>(p)] >= 0) continue;
    const int label = out.count++;
    out.labels[static_cast<std::size_t>(p)] = label;
    stack.push_back(p);
    while (!stack.empty()) {
      const int q = stack.back();
      stack.pop_back();
      const int r = q / w;
      const int c = q % w;
      for (int k = 0; k < n_offsets; ++k) {
        const int rr = r + kOffsets[static_cast<std::size_t>(k)][0];
        const int cc = c + kOffsets[static_cast<std::size_t>(k)][1];
        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
        const int n = rr * w + cc;
        if (!mask.test(n) || out.labels[static_cast<std::size_t>(n)] >= 0) continue;
        out.labels[static_cast<std::size_t>(n)] = label;
        stack.push_back(n);
      }
    }
  }
  return out;
}

}  // namespace plume
