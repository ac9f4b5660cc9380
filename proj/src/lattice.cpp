#include "bcpp/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

#include "bcpp/errors.hpp"

namespace bcpp {

namespace {

int floor_mod(int a, int m) {
  const int r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

TorusGeometry::TorusGeometry(int dim, int side) : dim_(dim), side_(side), n_sites_(1) {
  if (dim < 1) throw ConfigError("torus dimension must be >= 1, got " + std::to_string(dim), {}, "d");
  // With L = 2 the +e_i and -e_i neighbors coincide and edges are doubled.
  if (side < 3) throw ConfigError("torus side must satisfy L >= 3, got " + std::to_string(side), {}, "L");
  strides_.resize(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    strides_[static_cast<std::size_t>(i)] = n_sites_;
    if (n_sites_ > std::numeric_limits<std::uint32_t>::max() / static_cast<std::size_t>(side)) {
      throw ConfigError("torus too large: L^d overflows the site index range", {}, "L");
    }
    n_sites_ *= static_cast<std::size_t>(side);
  }
  for (std::size_t stride : strides_) stride_div_.emplace_back(static_cast<std::uint32_t>(stride));
  side_div_ = FixedDivisor(static_cast<std::uint32_t>(side));
}

int TorusGeometry::centered(int c) const {
  const int digit = floor_mod(c, side_);
  return digit <= side_ - 1 - side_ / 2 ? digit : digit - side_;
}

std::size_t TorusGeometry::site_index(std::span<const int> coord) const {
  if (static_cast<int>(coord.size()) != dim_) {
    throw ConfigError("coordinate has " + std::to_string(coord.size()) + " components, torus has d=" +
                      std::to_string(dim_));
  }
  std::size_t index = 0;
  for (int i = 0; i < dim_; ++i) {
    index += static_cast<std::size_t>(floor_mod(coord[static_cast<std::size_t>(i)], side_)) *
             strides_[static_cast<std::size_t>(i)];
  }
  return index;
}

SiteCoord TorusGeometry::coord_of_index(std::size_t index) const {
  if (index >= n_sites_) throw std::out_of_range("site index out of range");
  SiteCoord c(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) {
    const auto digit = static_cast<int>(index % static_cast<std::size_t>(side_));
    index /= static_cast<std::size_t>(side_);
    c[static_cast<std::size_t>(i)] = centered(digit);
  }
  return c;
}

std::vector<std::size_t> TorusGeometry::neighbors(std::size_t index) const {
  if (index >= n_sites_) throw std::out_of_range("site index out of range");
  std::vector<std::size_t> out(static_cast<std::size_t>(degree()));
  for (int k = 0; k < degree(); ++k) out[static_cast<std::size_t>(k)] = neighbor(index, k);
  return out;
}

SiteCoord TorusGeometry::displacement(std::size_t a, std::size_t b) const {
  const SiteCoord ca = coord_of_index(a);
  const SiteCoord cb = coord_of_index(b);
  SiteCoord out(ca.size());
  for (std::size_t i = 0; i < ca.size(); ++i) out[i] = centered(cb[i] - ca[i]);
  return out;
}

int TorusGeometry::torus_l1_distance(std::size_t a, std::size_t b) const {
  int total = 0;
  for (int c : displacement(a, b)) total += std::abs(c);
  return total;
}

BoxIndexer::BoxIndexer(int dim, int radius) : dim_(dim), radius_(radius), size_(1), origin_(0) {
  if (dim < 1 || radius < 0) throw ConfigError("box needs dim >= 1 and radius >= 0");
  strides_.resize(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    strides_[static_cast<std::size_t>(i)] = size_;
    origin_ += static_cast<std::size_t>(radius) * size_;
    size_ *= static_cast<std::size_t>(width());
  }
}

bool BoxIndexer::contains(std::span<const int> coord) const {
  return std::all_of(coord.begin(), coord.end(), [&](int c) { return std::abs(c) <= radius_; });
}

std::size_t BoxIndexer::index(std::span<const int> coord) const {
  std::size_t idx = 0;
  for (int i = 0; i < dim_; ++i) {
    idx += static_cast<std::size_t>(coord[static_cast<std::size_t>(i)] + radius_) *
           strides_[static_cast<std::size_t>(i)];
  }
  return idx;
}

SiteCoord BoxIndexer::coord(std::size_t index) const {
  SiteCoord c(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) {
    c[static_cast<std::size_t>(i)] = static_cast<int>(index % static_cast<std::size_t>(width())) - radius_;
    index /= static_cast<std::size_t>(width());
  }
  return c;
}

int linf_norm(std::span<const int> coord) {
  int m = 0;
  for (int c : coord) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace bcpp
