#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bcpp {

// Division of 32-bit values by a fixed divisor through one 128-bit multiply.
class FixedDivisor {
 public:
  explicit FixedDivisor(std::uint32_t d = 1) : d_(d), m_(~std::uint64_t{0} / d + 1) {}
  std::uint32_t quotient(std::uint32_t a) const {
    return d_ == 1 ? a : static_cast<std::uint32_t>((static_cast<unsigned __int128>(m_) * a) >> 64);
  }
  std::uint32_t remainder(std::uint32_t a) const {
    if (d_ == 1) return 0;
    const std::uint64_t low = m_ * a;
    return static_cast<std::uint32_t>((static_cast<unsigned __int128>(low) * d_) >> 64);
  }

 private:
  std::uint32_t d_;
  std::uint64_t m_;
};

// Lattice point in centered representation. On a torus of side L every
// component lies in [-floor(L/2), L-1-floor(L/2)]; the origin is all zeros.
using SiteCoord = std::vector<int>;

// Periodic d-dimensional cubic lattice of side L. Site index is the
// little-endian mixed-radix encoding of the coordinates taken mod L, so the
// origin is index 0. Immutable after construction.
class TorusGeometry {
 public:
  // Throws ConfigError unless dim >= 1 and side >= 3.
  TorusGeometry(int dim, int side);

  int dim() const { return dim_; }
  int side() const { return side_; }
  std::size_t n_sites() const { return n_sites_; }
  int degree() const { return 2 * dim_; }

  // Any integer coordinates (wrapped mod L). Throws ConfigError on a
  // dimension mismatch.
  std::size_t site_index(std::span<const int> coord) const;
  SiteCoord coord_of_index(std::size_t index) const;

  // Unique centered representative of c mod L.
  int centered(int c) const;

  // Direction 2i is +e_i, direction 2i+1 is -e_i.
  std::size_t neighbor(std::size_t index, int direction) const {
    const auto axis = static_cast<std::size_t>(direction >> 1);
    const std::size_t stride = strides_[axis];
    const auto digit = static_cast<int>(side_div_.remainder(stride_div_[axis].quotient(static_cast<std::uint32_t>(index))));
    if ((direction & 1) == 0) {
      return digit == side_ - 1 ? index - static_cast<std::size_t>(side_ - 1) * stride
                                : index + stride;
    }
    return digit == 0 ? index + static_cast<std::size_t>(side_ - 1) * stride : index - stride;
  }

  // All 2d neighbors in direction order. Throws std::out_of_range for an
  // invalid index.
  std::vector<std::size_t> neighbors(std::size_t index) const;

  // Shortest periodic l1 distance.
  int torus_l1_distance(std::size_t a, std::size_t b) const;

  // Centered displacement b - a, per coordinate.
  SiteCoord displacement(std::size_t a, std::size_t b) const;

  std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

 private:
  int dim_;
  int side_;
  std::size_t n_sites_;
  std::vector<std::size_t> strides_;
  std::vector<FixedDivisor> stride_div_;
  FixedDivisor side_div_;
};

// Iterates the centered l-infinity box [-radius, radius]^dim in the same
// mixed-radix order used by BoxIndexer below.
class BoxIndexer {
 public:
  BoxIndexer(int dim, int radius);

  int dim() const { return dim_; }
  int radius() const { return radius_; }
  int width() const { return 2 * radius_ + 1; }
  std::size_t size() const { return size_; }

  bool contains(std::span<const int> coord) const;
  std::size_t index(std::span<const int> coord) const;
  SiteCoord coord(std::size_t index) const;
  std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }
  std::size_t origin() const { return origin_; }

 private:
  int dim_;
  int radius_;
  std::size_t size_;
  std::size_t origin_;
  std::vector<std::size_t> strides_;
};

int linf_norm(std::span<const int> coord);

}  // namespace bcpp
