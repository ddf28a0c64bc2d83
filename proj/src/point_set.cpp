#include "chaselab/point_set.hpp"

#include <bit>
#include <cassert>

namespace chaselab {

namespace {
constexpr std::size_t kWordBits = 64;

std::size_t word_count(std::size_t capacity) {
  return (capacity + kWordBits - 1) / kWordBits;
}
}  // namespace

PointSet::PointSet(std::size_t capacity)
    : capacity_(capacity), words_(word_count(capacity), 0) {}

PointSet PointSet::full(std::size_t capacity) {
  PointSet s(capacity);
  for (std::size_t i = 0; i < capacity; ++i) s.insert(i);
  return s;
}

void PointSet::resize(std::size_t capacity) {
  if (capacity < capacity_) {
    for (std::size_t i = capacity; i < capacity_; ++i) erase(i);
  }
  capacity_ = capacity;
  words_.resize(word_count(capacity), 0);
}

void PointSet::insert(PointId i) {
  assert(i < capacity_);
  words_[i / kWordBits] |= std::uint64_t{1} << (i % kWordBits);
}

void PointSet::erase(PointId i) {
  assert(i < capacity_);
  words_[i / kWordBits] &= ~(std::uint64_t{1} << (i % kWordBits));
}

bool PointSet::contains(PointId i) const {
  if (i >= capacity_) return false;
  return (words_[i / kWordBits] >> (i % kWordBits)) & 1U;
}

std::size_t PointSet::count() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

bool PointSet::empty() const {
  for (auto w : words_) {
    if (w != 0) return false;
  }
  return true;
}

bool PointSet::intersects(const PointSet& other) const {
  const std::size_t n = std::min(words_.size(), other.words_.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (words_[i] & other.words_[i]) return true;
  }
  return false;
}

bool PointSet::is_subset_of(const PointSet& other) const {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    const std::uint64_t o = i < other.words_.size() ? other.words_[i] : 0;
    if (words_[i] & ~o) return false;
  }
  return true;
}

std::size_t PointSet::count_and(const PointSet& other) const {
  const std::size_t n = std::min(words_.size(), other.words_.size());
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) {
    c += static_cast<std::size_t>(std::popcount(words_[i] & other.words_[i]));
  }
  return c;
}

PointSet& PointSet::operator&=(const PointSet& other) {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    words_[i] &= i < other.words_.size() ? other.words_[i] : 0;
  }
  return *this;
}

PointSet& PointSet::operator|=(const PointSet& other) {
  assert(other.capacity_ <= capacity_);
  for (std::size_t i = 0; i < other.words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

PointSet& PointSet::subtract(const PointSet& other) {
  const std::size_t n = std::min(words_.size(), other.words_.size());
  for (std::size_t i = 0; i < n; ++i) words_[i] &= ~other.words_[i];
  return *this;
}

PointId PointSet::first() const {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] != 0) {
      return i * kWordBits + static_cast<std::size_t>(std::countr_zero(words_[i]));
    }
  }
  return capacity_;
}

std::vector<PointId> PointSet::to_vector() const {
  std::vector<PointId> out;
  for_each([&](PointId i) { out.push_back(i); });
  return out;
}

void PointSet::for_each(const std::function<void(PointId)>& fn) const {
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits != 0) {
      const int b = std::countr_zero(bits);
      fn(w * kWordBits + static_cast<std::size_t>(b));
      bits &= bits - 1;
    }
  }
}

}  // namespace chaselab
