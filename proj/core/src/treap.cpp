#include "queuenet/treap.hpp"

#include "queuenet/rng.hpp"

namespace queuenet {

void TimeTreap::clear() {
  pool_.clear();
  free_.clear();
  root_ = -1;
}

int TimeTreap::new_node(double key, std::int32_t id, double sat) {
  int n;
  if (!free_.empty()) {
    n = free_.back();
    free_.pop_back();
  } else {
    n = static_cast<int>(pool_.size());
    pool_.emplace_back();
  }
  Node& node = pool_[n];
  node.key = key;
  node.sat = sat;
  node.max_sat = sat;
  node.id = id;
  node.prio = static_cast<std::uint32_t>(splitmix64(prio_state_) >> 32);
  node.left = -1;
  node.right = -1;
  node.size = 1;
  return n;
}

void TimeTreap::free_node(int n) { free_.push_back(n); }

void TimeTreap::pull(int n) {
  Node& node = pool_[n];
  node.size = 1;
  node.max_sat = node.sat;
  if (node.left >= 0) {
    node.size += pool_[node.left].size;
    if (pool_[node.left].max_sat > node.max_sat) node.max_sat = pool_[node.left].max_sat;
  }
  if (node.right >= 0) {
    node.size += pool_[node.right].size;
    if (pool_[node.right].max_sat > node.max_sat) node.max_sat = pool_[node.right].max_sat;
  }
}

// Splits into entries ordered before (key, id) and the rest.
void TimeTreap::split(int n, double key, std::int32_t id, int& left, int& right) {
  if (n < 0) {
    left = -1;
    right = -1;
    return;
  }
  Node& node = pool_[n];
  if (before(node.key, node.id, key, id)) {
    split(node.right, key, id, node.right, right);
    left = n;
  } else {
    split(node.left, key, id, left, node.left);
    right = n;
  }
  pull(n);
}

int TimeTreap::merge(int left, int right) {
  if (left < 0) return right;
  if (right < 0) return left;
  if (pool_[left].prio > pool_[right].prio) {
    pool_[left].right = merge(pool_[left].right, right);
    pull(left);
    return left;
  }
  pool_[right].left = merge(left, pool_[right].left);
  pull(right);
  return right;
}

void TimeTreap::insert(double key, std::int32_t id, double satellite) {
  const int n = new_node(key, id, satellite);
  int left, right;
  split(root_, key, id, left, right);
  root_ = merge(merge(left, n), right);
}

bool TimeTreap::erase(double key, std::int32_t id) {
  int left, mid, right;
  split(root_, key, id, left, mid);
  // mid holds entries >= (key, id); peel off the first if it matches.
  split(mid, key, id + 1, mid, right);
  bool found = false;
  if (mid >= 0) {
    // (key, id) is unique, so mid is a single node when present.
    found = true;
    free_node(mid);
    mid = -1;
  }
  root_ = merge(left, merge(mid, right));
  return found;
}

int TimeTreap::find(double key, std::int32_t id) const {
  int n = root_;
  while (n >= 0) {
    const Node& node = pool_[n];
    if (node.key == key && node.id == id) return n;
    if (before(key, id, node.key, node.id)) {
      n = node.left;
    } else {
      n = node.right;
    }
  }
  return -1;
}

bool TimeTreap::contains(double key, std::int32_t id) const { return find(key, id) >= 0; }

bool TimeTreap::fix_satellite(int n, double key, std::int32_t id, double sat) {
  if (n < 0) return false;
  Node& node = pool_[n];
  bool found;
  if (node.key == key && node.id == id) {
    node.sat = sat;
    found = true;
  } else if (before(key, id, node.key, node.id)) {
    found = fix_satellite(node.left, key, id, sat);
  } else {
    found = fix_satellite(node.right, key, id, sat);
  }
  if (found) pull(n);
  return found;
}

bool TimeTreap::update_satellite(double key, std::int32_t id, double satellite) {
  return fix_satellite(root_, key, id, satellite);
}

int TimeTreap::rank(double key, std::int32_t id) const {
  int n = root_;
  int r = 0;
  while (n >= 0) {
    const Node& node = pool_[n];
    if (before(node.key, node.id, key, id)) {
      r += 1 + (node.left >= 0 ? pool_[node.left].size : 0);
      n = node.right;
    } else {
      n = node.left;
    }
  }
  return r;
}

int TimeTreap::count_less(double key) const { return rank(key, INT32_MIN); }

int TimeTreap::count_less_equal(double key) const { return rank(key, INT32_MAX); }

bool TimeTreap::prev_of(double key, std::int32_t id, Entry& out) const {
  int n = root_;
  int best = -1;
  while (n >= 0) {
    const Node& node = pool_[n];
    if (before(node.key, node.id, key, id)) {
      best = n;
      n = node.right;
    } else {
      n = node.left;
    }
  }
  if (best < 0) return false;
  out = Entry{pool_[best].key, pool_[best].id, pool_[best].sat};
  return true;
}

bool TimeTreap::next_of(double key, std::int32_t id, Entry& out) const {
  int n = root_;
  int best = -1;
  while (n >= 0) {
    const Node& node = pool_[n];
    if (before(key, id, node.key, node.id)) {
      best = n;
      n = node.left;
    } else {
      n = node.right;
    }
  }
  if (best < 0) return false;
  out = Entry{pool_[best].key, pool_[best].id, pool_[best].sat};
  return true;
}

bool TimeTreap::min_entry(Entry& out) const {
  if (root_ < 0) return false;
  int n = root_;
  while (pool_[n].left >= 0) n = pool_[n].left;
  out = Entry{pool_[n].key, pool_[n].id, pool_[n].sat};
  return true;
}

bool TimeTreap::max_entry(Entry& out) const {
  if (root_ < 0) return false;
  int n = root_;
  while (pool_[n].right >= 0) n = pool_[n].right;
  out = Entry{pool_[n].key, pool_[n].id, pool_[n].sat};
  return true;
}

bool TimeTreap::kth(int k, Entry& out) const {
  if (k < 0 || k >= size()) return false;
  int n = root_;
  while (n >= 0) {
    const int left_size = pool_[n].left >= 0 ? pool_[pool_[n].left].size : 0;
    if (k < left_size) {
      n = pool_[n].left;
    } else if (k == left_size) {
      out = Entry{pool_[n].key, pool_[n].id, pool_[n].sat};
      return true;
    } else {
      k -= left_size + 1;
      n = pool_[n].right;
    }
  }
  return false;
}

void TimeTreap::collect_range_rec(int n, double lo, double hi, bool closed,
                                  std::vector<Entry>& out) const {
  if (n < 0) return;
  const Node& node = pool_[n];
  const bool above_lo = closed ? node.key >= lo : node.key > lo;
  const bool below_hi = closed ? node.key <= hi : node.key < hi;
  if (above_lo) collect_range_rec(node.left, lo, hi, closed, out);
  if (above_lo && below_hi) out.push_back(Entry{node.key, node.id, node.sat});
  if (below_hi) collect_range_rec(node.right, lo, hi, closed, out);
}

void TimeTreap::collect_range(double lo, double hi, bool closed,
                              std::vector<Entry>& out) const {
  collect_range_rec(root_, lo, hi, closed, out);
}

void TimeTreap::collect_overlapping_rec(int n, double lo, double hi, bool key_closed,
                                        bool sat_closed, std::vector<Entry>& out) const {
  if (n < 0) return;
  const Node& node = pool_[n];
  if (sat_closed ? node.max_sat < lo : node.max_sat <= lo) return;
  const bool key_ok = key_closed ? node.key <= hi : node.key < hi;
  collect_overlapping_rec(node.left, lo, hi, key_closed, sat_closed, out);
  if (key_ok) {
    if (sat_closed ? node.sat >= lo : node.sat > lo) {
      out.push_back(Entry{node.key, node.id, node.sat});
    }
    collect_overlapping_rec(node.right, lo, hi, key_closed, sat_closed, out);
  }
}

void TimeTreap::collect_overlapping(double lo, double hi, bool key_closed, bool sat_closed,
                                    std::vector<Entry>& out) const {
  collect_overlapping_rec(root_, lo, hi, key_closed, sat_closed, out);
}

void TimeTreap::collect_all_rec(int n, std::vector<Entry>& out) const {
  if (n < 0) return;
  collect_all_rec(pool_[n].left, out);
  out.push_back(Entry{pool_[n].key, pool_[n].id, pool_[n].sat});
  collect_all_rec(pool_[n].right, out);
}

void TimeTreap::collect_all(std::vector<Entry>& out) const { collect_all_rec(root_, out); }

}  // namespace queuenet
