#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "papertype/matrix.hpp"
#include "papertype/models/model.hpp"
#include "papertype/rng.hpp"

namespace papertype {

struct TreeOptions {
  std::size_t max_depth = 0;     // 0: unlimited
  std::size_t min_leaf = 1;      // minimum sample count per child
  std::size_t max_leaves = 0;    // 0: unlimited
  std::size_t max_features = 0;  // features tried per split; 0: all
};

namespace detail {

// Presorted CART grower. Every node owns the same contiguous range in each
// per-feature ordering; splitting stable-partitions those ranges, so the
// orderings stay sorted without re-sorting.
class TreeGrower {
 public:
  TreeGrower(const Dataset& data, std::span<const double> weights, std::span<const std::uint32_t> counts,
             const TreeOptions& opt, Rng& rng)
      : data_(data), weights_(weights), counts_(counts), opt_(opt), rng_(rng) {}

  Tree grow() {
    const std::size_t n = data_.size();
    const std::size_t d = data_.dims();
    std::vector<std::uint32_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (counts_[i] > 0) members.push_back(static_cast<std::uint32_t>(i));
    order_.assign(d, members);
    for (std::size_t j = 0; j < d; ++j)
      std::sort(order_[j].begin(), order_[j].end(), [&](std::uint32_t a, std::uint32_t b) {
        const double va = data_.x(a, j), vb = data_.x(b, j);
        return va < vb || (va == vb && a < b);
      });
    goes_left_.assign(n, 0);
    buffer_.resize(members.size());

    Tree tree;
    std::vector<Pending> pending;
    pending.push_back(make_node(tree, 0, members.size(), 0));
    std::size_t leaves = 1;
    while (opt_.max_leaves == 0 || leaves < opt_.max_leaves) {
      // best gain first; ties go to the older node
      auto best = pending.end();
      for (auto it = pending.begin(); it != pending.end(); ++it)
        if (it->split.valid && (best == pending.end() || it->split.gain > best->split.gain)) best = it;
      if (best == pending.end()) break;
      const Pending p = *best;
      pending.erase(best);
      const std::size_t mid = partition(p);
      auto& node = tree.nodes[p.node];
      node.feature = static_cast<std::int32_t>(p.split.feature);
      node.threshold = p.split.threshold;
      node.distribution = {};
      const auto left = make_node(tree, p.begin, mid, p.depth + 1);
      const auto right = make_node(tree, mid, p.end, p.depth + 1);
      tree.nodes[p.node].left = static_cast<std::int32_t>(left.node);
      tree.nodes[p.node].right = static_cast<std::int32_t>(right.node);
      pending.push_back(left);
      pending.push_back(right);
      ++leaves;
    }
    return tree;
  }

 private:
  struct Split {
    bool valid = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
    std::size_t left_size = 0;  // members routed left
  };

  struct Pending {
    std::size_t node;
    std::size_t begin, end;
    std::size_t depth;
    Split split;
  };

  Pending make_node(Tree& tree, std::size_t begin, std::size_t end, std::size_t depth) {
    TreeNode node;
    ClassScores w{};
    for (std::size_t p = begin; p < end; ++p) {
      const auto i = order_[0][p];
      w[index_of(data_.y[i])] += weights_[i];
    }
    const double total = w[0] + w[1] + w[2];
    for (std::size_t c = 0; c < kNumClasses; ++c) node.distribution[c] = total > 0.0 ? w[c] / total : 0.0;
    if (!(total > 0.0)) node.distribution = {1.0, 0.0, 0.0};
    tree.nodes.push_back(node);
    Pending p{tree.nodes.size() - 1, begin, end, depth, {}};
    p.split = find_split(begin, end, depth, w, total);
    return p;
  }

  std::vector<std::size_t> candidate_features() {
    const std::size_t d = data_.dims();
    std::vector<std::size_t> f(d);
    std::iota(f.begin(), f.end(), 0);
    if (opt_.max_features == 0 || opt_.max_features >= d) return f;
    for (std::size_t i = 0; i < opt_.max_features; ++i) std::swap(f[i], f[i + rng_.index(d - i)]);
    f.resize(opt_.max_features);
    std::sort(f.begin(), f.end());
    return f;
  }

  Split find_split(std::size_t begin, std::size_t end, std::size_t depth, const ClassScores& w, double total) {
    Split best;
    if (opt_.max_depth != 0 && depth >= opt_.max_depth) return best;
    std::size_t count = 0;
    for (std::size_t p = begin; p < end; ++p) count += counts_[order_[0][p]];
    if (count < 2 * std::max<std::size_t>(opt_.min_leaf, 1)) return best;
    int classes_present = 0;
    for (double v : w) classes_present += v > 0.0;
    if (classes_present < 2) return best;
    const auto features = candidate_features();

    double parent = 0.0;
    for (double v : w) parent += v * v;
    parent /= total;

    for (auto j : features) {
      const auto& ord = order_[j];
      ClassScores wl{};
      double left_w = 0.0;
      std::size_t left_n = 0;
      for (std::size_t p = begin; p + 1 < end; ++p) {
        const auto i = ord[p];
        wl[index_of(data_.y[i])] += weights_[i];
        left_w += weights_[i];
        left_n += counts_[i];
        const double v = data_.x(i, j), next = data_.x(ord[p + 1], j);
        if (!(v < next)) continue;
        if (left_n < opt_.min_leaf || count - left_n < opt_.min_leaf) continue;
        const double right_w = total - left_w;
        if (!(left_w > 0.0) || !(right_w > 0.0)) continue;
        double sl = 0.0, sr = 0.0;
        for (std::size_t c = 0; c < kNumClasses; ++c) {
          sl += wl[c] * wl[c];
          const double r = w[c] - wl[c];
          sr += r * r;
        }
        const double gain = sl / left_w + sr / right_w - parent;
        if (gain > 1e-12 * total && (!best.valid || gain > best.gain)) {
          best.valid = true;
          best.feature = j;
          best.threshold = v;
          best.gain = gain;
          best.left_size = p + 1 - begin;
        }
      }
    }
    return best;
  }

  std::size_t partition(const Pending& p) {
    const auto& ord = order_[p.split.feature];
    for (std::size_t q = p.begin; q < p.end; ++q) goes_left_[ord[q]] = q < p.begin + p.split.left_size;
    for (auto& o : order_) {
      std::size_t l = 0, r = p.split.left_size;
      for (std::size_t q = p.begin; q < p.end; ++q) {
        const auto i = o[q];
        buffer_[goes_left_[i] ? l++ : r++] = i;
      }
      std::copy(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(p.end - p.begin),
                o.begin() + static_cast<std::ptrdiff_t>(p.begin));
    }
    return p.begin + p.split.left_size;
  }

  const Dataset& data_;
  std::span<const double> weights_;
  std::span<const std::uint32_t> counts_;
  TreeOptions opt_;
  Rng& rng_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<char> goes_left_;
  std::vector<std::uint32_t> buffer_;
};

}  // namespace detail

// Gini-impurity CART grown best-first. `weights` drive impurity and leaf
// distributions; `counts` are sample multiplicities (zero excludes a row)
// and drive min_leaf. Leaf distributions are class weight fractions.
inline Tree grow_tree(const Dataset& data, std::span<const double> weights, std::span<const std::uint32_t> counts,
                      const TreeOptions& opt, Rng& rng) {
  if (data.size() == 0) throw TrainingError("cannot grow a tree on an empty dataset");
  if (weights.size() != data.size() || counts.size() != data.size())
    throw ArgumentError("grow_tree: weights and counts must match the dataset size");
  return detail::TreeGrower(data, weights, counts, opt, rng).grow();
}

inline Tree grow_tree(const Dataset& data, const TreeOptions& opt, Rng& rng) {
  const std::vector<double> w(data.size(), 1.0);
  const std::vector<std::uint32_t> c(data.size(), 1);
  return grow_tree(data, w, c, opt, rng);
}

}  // namespace papertype
