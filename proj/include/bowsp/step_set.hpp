#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "error.hpp"

namespace bowsp {

inline constexpr int kMaxSteps = 64;

/// A set of workflow steps stored as a 64-bit mask; step i is bit i (0-based).
class StepSet {
 public:
  constexpr StepSet() = default;
  constexpr explicit StepSet(std::uint64_t bits) : bits_(bits) {}

  static constexpr StepSet single(int step) { return StepSet(std::uint64_t{1} << step); }
  static constexpr StepSet first_n(int k) {
    return k >= 64 ? StepSet(~std::uint64_t{0}) : StepSet((std::uint64_t{1} << k) - 1);
  }
  static StepSet of(const std::vector<int>& steps) {
    StepSet s;
    for (int i : steps) s.insert(i);
    return s;
  }

  [[nodiscard]] constexpr std::uint64_t bits() const { return bits_; }
  [[nodiscard]] constexpr bool contains(int step) const { return (bits_ >> step) & 1U; }
  [[nodiscard]] constexpr bool empty() const { return bits_ == 0; }
  [[nodiscard]] constexpr int size() const { return std::popcount(bits_); }
  [[nodiscard]] constexpr int lowest() const { return std::countr_zero(bits_); }
  [[nodiscard]] constexpr bool intersects(StepSet o) const { return (bits_ & o.bits_) != 0; }
  [[nodiscard]] constexpr bool subset_of(StepSet o) const { return (bits_ & ~o.bits_) == 0; }

  constexpr void insert(int step) { bits_ |= std::uint64_t{1} << step; }
  constexpr void erase(int step) { bits_ &= ~(std::uint64_t{1} << step); }

  constexpr StepSet operator|(StepSet o) const { return StepSet(bits_ | o.bits_); }
  constexpr StepSet operator&(StepSet o) const { return StepSet(bits_ & o.bits_); }
  constexpr StepSet operator-(StepSet o) const { return StepSet(bits_ & ~o.bits_); }
  constexpr bool operator==(const StepSet&) const = default;
  constexpr auto operator<=>(const StepSet&) const = default;

  [[nodiscard]] std::vector<int> elements() const {
    std::vector<int> out;
    for (std::uint64_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b));
    return out;
  }

  template <typename F>
  void for_each(F&& f) const {
    for (std::uint64_t b = bits_; b != 0; b &= b - 1) f(std::countr_zero(b));
  }

 private:
  std::uint64_t bits_ = 0;
};

}  // namespace bowsp
