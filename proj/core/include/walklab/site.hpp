#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

namespace walklab {

inline constexpr std::size_t kMaxDim = 4;

/// A point of Z^d, d <= kMaxDim. Unused trailing coordinates stay zero so
/// sites of different dimensions never compare equal by accident.
using Site = std::array<std::int64_t, kMaxDim>;

inline Site operator+(Site a, const Site& b) noexcept {
  for (std::size_t i = 0; i < kMaxDim; ++i) a[i] += b[i];
  return a;
}

inline Site operator-(Site a, const Site& b) noexcept {
  for (std::size_t i = 0; i < kMaxDim; ++i) a[i] -= b[i];
  return a;
}

inline Site negate(Site a) noexcept {
  for (auto& c : a) c = -c;
  return a;
}

inline std::string to_string(const Site& s, std::size_t dim) {
  std::string out = "(";
  for (std::size_t i = 0; i < dim; ++i) {
    if (i) out += ',';
    out += std::to_string(s[i]);
  }
  return out + ")";
}

}  // namespace walklab
