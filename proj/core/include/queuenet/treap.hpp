#pragma once

#include <cstdint>
#include <vector>

namespace queuenet {

// Balanced search tree over (key, id) pairs with three augmentations:
//   - subtree sizes, for order statistics (rank / k-th / counting);
//   - a double-valued satellite per entry with subtree-max, so that interval
//     overlap queries (key <= hi and satellite >= lo) can prune subtrees;
//   - neighbor queries (greatest below / least above a probe point).
// Entries are ordered lexicographically by (key, id); ids must lie strictly
// between INT32_MIN and INT32_MAX, which are reserved as probe sentinels.
// Balancing is randomized (treap priorities) from a deterministic stream, so
// identical operation sequences produce identical trees.
class TimeTreap {
 public:
  struct Entry {
    double key = 0.0;
    std::int32_t id = 0;
    double satellite = 0.0;
  };

  TimeTreap() = default;

  void clear();
  int size() const { return root_ < 0 ? 0 : pool_[root_].size; }
  bool empty() const { return root_ < 0; }

  void insert(double key, std::int32_t id, double satellite);
  // Returns false if (key, id) is absent.
  bool erase(double key, std::int32_t id);
  bool contains(double key, std::int32_t id) const;
  // Rewrites the satellite of an existing entry; returns false if absent.
  bool update_satellite(double key, std::int32_t id, double satellite);

  // Number of entries ordered strictly before (key, id).
  int rank(double key, std::int32_t id) const;
  // Number of entries with key' < key, resp. key' <= key.
  int count_less(double key) const;
  int count_less_equal(double key) const;

  // Greatest entry ordered strictly before / least strictly after (key, id).
  bool prev_of(double key, std::int32_t id, Entry& out) const;
  bool next_of(double key, std::int32_t id, Entry& out) const;
  bool min_entry(Entry& out) const;
  bool max_entry(Entry& out) const;
  // k-th entry in order, 0-based.
  bool kth(int k, Entry& out) const;

  // Appends entries with lo < key < hi (open) or lo <= key <= hi (closed),
  // in order.
  void collect_range(double lo, double hi, bool closed, std::vector<Entry>& out) const;
  // Appends entries whose [key, satellite] "interval" overlaps [lo, hi]:
  // key <= hi (or < hi if !key_closed) and satellite >= lo (or > lo if
  // !sat_closed), in key order. Prunes on the subtree satellite maximum.
  void collect_overlapping(double lo, double hi, bool key_closed, bool sat_closed,
                           std::vector<Entry>& out) const;
  // All entries in order (mainly for tests and serialization).
  void collect_all(std::vector<Entry>& out) const;

 private:
  struct Node {
    double key;
    double sat;
    double max_sat;
    std::int32_t id;
    std::uint32_t prio;
    int left;
    int right;
    int size;
  };

  static bool before(double k1, std::int32_t i1, double k2, std::int32_t i2) {
    if (k1 != k2) return k1 < k2;
    return i1 < i2;
  }

  int new_node(double key, std::int32_t id, double sat);
  void free_node(int n);
  void pull(int n);
  void split(int n, double key, std::int32_t id, int& left, int& right);
  int merge(int left, int right);
  int find(double key, std::int32_t id) const;
  bool fix_satellite(int n, double key, std::int32_t id, double sat);
  void collect_range_rec(int n, double lo, double hi, bool closed,
                         std::vector<Entry>& out) const;
  void collect_overlapping_rec(int n, double lo, double hi, bool key_closed,
                               bool sat_closed, std::vector<Entry>& out) const;
  void collect_all_rec(int n, std::vector<Entry>& out) const;

  std::vector<Node> pool_;
  std::vector<int> free_;
  int root_ = -1;
  std::uint64_t prio_state_ = 0x8f1bbcdc9d02091bULL;
};

}  // namespace queuenet
