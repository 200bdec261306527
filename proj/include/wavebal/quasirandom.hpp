#pragma once

#include <cstdint>
#include <vector>

#include "wavebal/types.hpp"

namespace wavebal {

// Axis-aligned sampling box in state space.
struct Box {
  Vec lo;
  Vec hi;

  int dim() const { return static_cast<int>(lo.size()); }

  static Box cube(int n, double half_width) {
    Box b;
    b.lo = Vec::Constant(n, -half_width);
    b.hi = Vec::Constant(n, half_width);
    return b;
  }
};

inline double halton(std::uint64_t index, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d9a126d9833553ull;
  return x ^ (x >> 31);
}

// Deterministic low-discrepancy point set over a box: the 2^n corners
// followed by a seed-shifted Halton sequence. The first (corners + k)
// points are a prefix of the first (corners + k') points for k < k', so
// sampled minima are monotone in the sample count.
class BoxSampler {
 public:
  BoxSampler(const Box& box, std::uint64_t seed, std::uint64_t stream = 0)
      : box_(box), n_(box.dim()) {
    shift_.resize(n_);
    for (int d = 0; d < n_; ++d) {
      const std::uint64_t h = splitmix64(seed ^ splitmix64(stream * 64 + d));
      shift_[d] = static_cast<double>(h >> 11) * 0x1.0p-53;
    }
  }

  int corner_count() const { return 1 << n_; }

  // k = 0 .. corner_count()-1 gives corners, then the Halton stream.
  Vec point(std::uint64_t k) const {
    Vec p(n_);
    if (k < static_cast<std::uint64_t>(corner_count())) {
      for (int d = 0; d < n_; ++d) {
        const bool high = (k >> d) & 1u;
        p[d] = high ? box_.hi[d] : box_.lo[d];
      }
      return p;
    }
    const std::uint64_t j = k - corner_count() + 1;
    for (int d = 0; d < n_; ++d) {
      double t = halton(j, kBases[d % kNumBases]) + shift_[d];
      t -= std::floor(t);
      p[d] = box_.lo[d] + t * (box_.hi[d] - box_.lo[d]);
    }
    return p;
  }

  std::vector<Vec> points(int n_samples) const {
    std::vector<Vec> out;
    out.reserve(corner_count() + n_samples);
    for (std::uint64_t k = 0;
         k < static_cast<std::uint64_t>(corner_count() + n_samples); ++k)
      out.push_back(point(k));
    return out;
  }

 private:
  static constexpr int kNumBases = 8;
  static constexpr std::uint64_t kBases[kNumBases] = {2,  3,  5,  7,
                                                      11, 13, 17, 19};
  Box box_;
  int n_;
  std::vector<double> shift_;
};

}  // namespace wavebal
