#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace chaselab {

using PointId = std::size_t;

// Dense bitset over point indices [0, capacity). Used for ball member sets,
// cover candidates and visited-index sets.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t capacity);

  static PointSet full(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  void resize(std::size_t capacity);

  void insert(PointId i);
  void erase(PointId i);
  bool contains(PointId i) const;

  std::size_t count() const;
  bool empty() const;
  bool intersects(const PointSet& other) const;
  bool is_subset_of(const PointSet& other) const;
  std::size_t count_and(const PointSet& other) const;

  PointSet& operator&=(const PointSet& other);
  PointSet& operator|=(const PointSet& other);
  PointSet& subtract(const PointSet& other);

  // Lowest member, or capacity() when empty.
  PointId first() const;
  std::vector<PointId> to_vector() const;
  void for_each(const std::function<void(PointId)>& fn) const;

  const std::vector<std::uint64_t>& words() const { return words_; }

  friend bool operator==(const PointSet& a, const PointSet& b) {
    return a.capacity_ == b.capacity_ && a.words_ == b.words_;
  }

 private:
  std::size_t capacity_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace chaselab
