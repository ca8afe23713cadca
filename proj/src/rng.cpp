#include "skewdiff/rng.hpp"

#include <cmath>

#include "skewdiff/special.hpp"

namespace skewdiff {

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{0u, 0u, static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)} {}

double RandomStream::normal() noexcept { return normal_quantile(uniform()); }

double RandomStream::exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

}  // namespace skewdiff
