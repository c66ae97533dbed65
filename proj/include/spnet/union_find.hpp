#pragma once

#include <numeric>
#include <vector>

namespace spnet {

/// Disjoint sets with union by size and path halving.
template <class Id = int>
class UnionFind {
public:
  explicit UnionFind(Id size) : parent_(static_cast<std::size_t>(size)), size_(static_cast<std::size_t>(size), 1) {
    std::iota(parent_.begin(), parent_.end(), Id{0});
  }

  Id find(Id i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  /// Returns false when a and b were already in the same set.
  bool unite(Id a, Id b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    // Union by size; on ties the smaller index becomes the root.
    if (size_[a] < size_[b] || (size_[a] == size_[b] && b < a)) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  bool same(Id a, Id b) { return find(a) == find(b); }

  Id set_size(Id i) { return size_[find(i)]; }

  Id element_count() const { return static_cast<Id>(parent_.size()); }

  /// Dense 0-based labels, numbered by first occurrence.
  std::vector<Id> labels(Id* count = nullptr) {
    std::vector<Id> root_label(parent_.size(), Id{-1});
    std::vector<Id> out(parent_.size());
    Id next = 0;
    for (std::size_t i = 0; i < parent_.size(); ++i) {
      const Id r = find(static_cast<Id>(i));
      if (root_label[r] < 0) root_label[r] = next++;
      out[i] = root_label[r];
    }
    if (count) *count = next;
    return out;
  }

private:
  std::vector<Id> parent_;
  std::vector<Id> size_;
};

} // namespace spnet
