#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace bcpp {

using Engine = std::mt19937_64;

// Engine for stream (master_seed, ids...). Streams are derived through
// std::seed_seq, whose algorithm is fixed by the standard, so the same ids give
// the same sequence on every conforming platform and for any worker count.
Engine make_engine(std::uint64_t master_seed, std::span<const std::uint64_t> stream_ids);
inline Engine make_engine(std::uint64_t master_seed, std::initializer_list<std::uint64_t> stream_ids) {
  return make_engine(master_seed, std::span<const std::uint64_t>(stream_ids.begin(), stream_ids.size()));
}

// Conversions are written out instead of using <random> distributions, whose
// output is implementation-defined.

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Engine& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Uniform integer in [0, n); multiply-shift with bias below n / 2^64.
inline std::uint64_t uniform_index(Engine& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

// Uniform index in [0, n) plus a uniform fraction in [0, 1) from the same
// draw: the low half of the product spreads over a grid of spacing n / 2^64.
inline std::uint64_t uniform_index_and_fraction(Engine& rng, std::uint64_t n, double& fraction) {
  const auto product = static_cast<unsigned __int128>(rng()) * n;
  fraction = static_cast<double>(static_cast<std::uint64_t>(product) >> 11) * 0x1.0p-53;
  return static_cast<std::uint64_t>(product >> 64);
}

// Exponential with the given rate.
inline double exponential(Engine& rng, double rate) { return -std::log1p(-uniform01(rng)) / rate; }

}  // namespace bcpp
