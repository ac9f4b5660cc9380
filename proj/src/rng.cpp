#include "bcpp/rng.hpp"

#include <vector>

namespace bcpp {

Engine make_engine(std::uint64_t master_seed, std::span<const std::uint64_t> stream_ids) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (stream_ids.size() + 1) + 1);
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(master_seed);
  // Length tag keeps (s, {a}) and (s, {a, 0}) apart.
  words.push_back(static_cast<std::uint32_t>(stream_ids.size()));
  for (std::uint64_t id : stream_ids) push(id);
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

}  // namespace bcpp
