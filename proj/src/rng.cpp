#include "shiftlearn/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace shiftlearn {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

CounterRng::CounterRng(std::uint64_t seed, RngPurpose purpose, std::uint64_t t)
    : key_(mix64(mix64(mix64(seed) ^ static_cast<std::uint64_t>(purpose)) ^ (t * kGolden))) {}

std::uint64_t CounterRng::next() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double CounterRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t CounterRng::below(std::uint64_t n) {
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % n;
}

void Fnv1a::add_bytes(std::span<const std::byte> bytes) {
  for (auto b : bytes) {
    h_ ^= static_cast<std::uint64_t>(b);
    h_ *= 0x100000001b3ULL;
  }
}

void Fnv1a::add(std::uint64_t v) { add_bytes(std::as_bytes(std::span{&v, 1})); }

void Fnv1a::add(double v) { add(std::bit_cast<std::uint64_t>(v)); }

void Fnv1a::add(std::span<const double> v) {
  for (double x : v) add(x);
}

}  // namespace shiftlearn
