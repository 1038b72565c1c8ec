#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace pathsum {

// A set of vertex ids over a fixed universe {0..B-1}, stored as a bit mask.
// The representation is canonical (fixed word count, zero padding bits), so
// equal membership implies equal representation; that is what makes it usable
// as a memoization key. The first word lives inline: universes of at most 64
// vertices never touch the heap, and the recursion copies these sets on every
// step.
class VertexSubset {
 public:
  VertexSubset() = default;

  explicit VertexSubset(int universeSize)
      : universe_(universeSize),
        tail_(universeSize > 64 ? static_cast<std::size_t>((universeSize + 63) / 64 - 1) : 0,
              0) {}

  int universeSize() const noexcept { return universe_; }

  bool contains(int v) const noexcept {
    if (v < 64) return (head_ >> v) & 1u;
    return (tail_[(static_cast<std::size_t>(v) >> 6) - 1] >> (v & 63)) & 1u;
  }

  void insert(int v) noexcept {
    if (v < 64) {
      head_ |= std::uint64_t{1} << v;
    } else {
      tail_[(static_cast<std::size_t>(v) >> 6) - 1] |= std::uint64_t{1} << (v & 63);
    }
  }

  void erase(int v) noexcept {
    if (v < 64) {
      head_ &= ~(std::uint64_t{1} << v);
    } else {
      tail_[(static_cast<std::size_t>(v) >> 6) - 1] &= ~(std::uint64_t{1} << (v & 63));
    }
  }

  int count() const noexcept {
    int c = std::popcount(head_);
    for (auto w : tail_) c += std::popcount(w);
    return c;
  }

  bool none() const noexcept {
    if (head_ != 0) return false;
    for (auto w : tail_) {
      if (w != 0) return false;
    }
    return true;
  }

  // Complement within the universe; padding bits stay zero.
  VertexSubset complement() const {
    VertexSubset out(universe_);
    out.head_ = ~head_;
    for (std::size_t i = 0; i < tail_.size(); ++i) out.tail_[i] = ~tail_[i];
    if (universe_ < 64) {
      out.head_ &= (std::uint64_t{1} << universe_) - 1;
    } else if (const int spill = universe_ & 63; spill != 0 && !out.tail_.empty()) {
      out.tail_.back() &= (std::uint64_t{1} << spill) - 1;
    }
    return out;
  }

  // Members in ascending order (diagnostics, error messages).
  std::vector<int> members() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(count()));
    for (int v = 0; v < universe_; ++v) {
      if (contains(v)) out.push_back(v);
    }
    return out;
  }

  friend bool operator==(const VertexSubset& a, const VertexSubset& b) = default;

  std::size_t hash() const noexcept {
    std::uint64_t h = mix(0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(universe_), head_);
    for (auto w : tail_) h = mix(h, w);
    return static_cast<std::size_t>(h);
  }

 private:
  static std::uint64_t mix(std::uint64_t h, std::uint64_t w) noexcept {
    h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h ^= (h >> 30);
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= (h >> 27);
    return h;
  }

  int universe_ = 0;
  std::uint64_t head_ = 0;
  std::vector<std::uint64_t> tail_;
};

struct VertexSubsetHash {
  std::size_t operator()(const VertexSubset& s) const noexcept { return s.hash(); }
};

}  // namespace pathsum
