#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "ostd/classifiers.h"
#include "ostd/error.h"

namespace ostd {
namespace {

__extension__ typedef unsigned __int128 Wide;

// Weighted child impurity is 1 - S/n with S = sum over children of
// (h^2 + f^2) / n_child. Candidates are ranked by S, held as the exact
// fraction num/den so equal-Gini ties are detected without rounding.
struct SplitScore {
  Wide num = 0;
  Wide den = 1;

  bool operator>(const SplitScore& o) const { return num * o.den > o.num * den; }
};

SplitScore score_split(std::uint64_t lh, std::uint64_t lf, std::uint64_t rh, std::uint64_t rf) {
  const Wide nl = lh + lf, nr = rh + rf;
  const Wide al = Wide(lh) * lh + Wide(lf) * lf;
  const Wide ar = Wide(rh) * rh + Wide(rf) * rf;
  return {al * nr + ar * nl, nl * nr};
}

struct Builder {
  const Matrix& x;
  std::span<const Label> y;
  std::size_t max_depth;
  std::vector<TreeNode> nodes;

  std::int32_t grow(std::vector<std::size_t>& rows, std::size_t depth) {
    TreeNode node;
    node.depth = depth;
    for (std::size_t r : rows) ++node.class_counts[as_int(y[r])];
    const auto id = static_cast<std::int32_t>(nodes.size());
    nodes.push_back(node);

    const auto [h, f] = node.class_counts;
    if (depth >= max_depth || h == 0 || f == 0 || rows.size() < 2) return id;

    const SplitScore parent{Wide(h) * h + Wide(f) * f, Wide(h) + f};
    std::optional<SplitScore> best;
    std::size_t best_feature = 0;
    double best_threshold = 0;

    std::vector<std::size_t> order(rows);
    for (std::size_t c = 0; c < x.cols(); ++c) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return x(a, c) < x(b, c); });
      std::uint64_t lh = 0, lf = 0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        (y[order[i]] == Label::kFaithful ? lf : lh) += 1;
        const double lo = x(order[i], c);
        const double hi = x(order[i + 1], c);
        if (!(lo < hi)) continue;
        const auto s = score_split(lh, lf, h - lh, f - lf);
        if (!best || s > *best) {
          best = s;
          best_feature = c;
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid < hi)) mid = lo;
          best_threshold = mid;
        }
      }
    }
    // Split only on a strict impurity decrease: S/n_children > parent S.
    if (!best || !(SplitScore{best->num, best->den} > parent)) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) (x(r, best_feature) <= best_threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    nodes[id].leaf = false;
    nodes[id].feature = best_feature;
    nodes[id].threshold = best_threshold;
    const auto l = grow(left, depth + 1);
    const auto r = grow(right, depth + 1);
    nodes[id].left = l;
    nodes[id].right = r;
    return id;
  }
};

void dump_node(const TreeModel& tree, std::int32_t id, std::span<const std::string> names,
               std::size_t indent, std::ostringstream& out) {
  const auto& node = tree.nodes()[id];
  auto counts = [&](const TreeNode& n) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), " [hallucinated=%llu, faithful=%llu]",
                  static_cast<unsigned long long>(n.class_counts[0]),
                  static_cast<unsigned long long>(n.class_counts[1]));
    return std::string(buf);
  };
  std::string prefix;
  for (std::size_t i = 0; i < indent; ++i) prefix += "|   ";
  if (node.leaf) {
    out << prefix << "|--- class: " << to_string(node.prediction()) << counts(node) << '\n';
    return;
  }
  const std::string name =
      node.feature < names.size() ? names[node.feature] : "x" + std::to_string(node.feature);
  char thr[64];
  std::snprintf(thr, sizeof(thr), "%.6g", node.threshold);
  out << prefix << "|--- " << name << " <= " << thr << counts(tree.nodes()[node.left]) << '\n';
  dump_node(tree, node.left, names, indent + 1, out);
  out << prefix << "|--- " << name << " >  " << thr << counts(tree.nodes()[node.right]) << '\n';
  dump_node(tree, node.right, names, indent + 1, out);
}

}  // namespace

double gini(std::uint64_t hallucinated, std::uint64_t faithful) {
  const double n = static_cast<double>(hallucinated + faithful);
  if (n == 0) return 0.0;
  const double ph = static_cast<double>(hallucinated) / n;
  const double pf = static_cast<double>(faithful) / n;
  return 1.0 - ph * ph - pf * pf;
}

TreeModel fit_tree(const Matrix& x, std::span<const Label> y, std::size_t max_depth) {
  if (x.rows() == 0) throw InvalidArgument("cannot fit a tree on zero rows");
  if (x.rows() != y.size()) throw InvalidArgument("feature and label lengths differ");
  if (max_depth < 1) throw InvalidArgument("max_depth must be >= 1");
  for (double v : x.data()) {
    if (std::isnan(v)) throw InvalidArgument("NaN feature value");
  }
  Builder b{x, y, max_depth, {}};
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), 0);
  b.grow(rows, 0);
  return TreeModel(std::move(b.nodes), max_depth, x.cols());
}

std::size_t TreeModel::depth() const {
  std::size_t d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.leaf; }));
}

Label TreeModel::predict_row(std::span<const double> row) const {
  if (row.size() != n_features_) {
    throw InvalidArgument("tree expects " + std::to_string(n_features_) + " features, got " +
                          std::to_string(row.size()));
  }
  std::int32_t id = 0;
  while (!nodes_[id].leaf) {
    const auto& n = nodes_[id];
    id = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes_[id].prediction();
}

std::vector<Label> TreeModel::predict(const Matrix& x) const {
  std::vector<Label> out;
  out.reserve(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out.push_back(predict_row(x.row(r)));
  return out;
}

std::string TreeModel::dump(std::span<const std::string> feature_names) const {
  std::ostringstream out;
  const auto& root = nodes_.front();
  out << "root [hallucinated=" << root.class_counts[0] << ", faithful=" << root.class_counts[1]
      << "]\n";
  dump_node(*this, 0, feature_names, 0, out);
  return out.str();
}

}  // namespace ostd
