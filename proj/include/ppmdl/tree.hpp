#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "ppmdl/core.hpp"
#include "ppmdl/cycle.hpp"

namespace ppmdl {

/// Node of a pattern tree. A leaf holds an event; an interior block repeats
/// its children `repetitions` times every `period` steps, with
/// `distances[i]` separating children i and i+1.
struct Block {
  EventId event = -1;
  int repetitions = 0;
  Time period = 0;
  std::vector<Block> children;
  std::vector<Time> distances;

  bool is_leaf() const noexcept { return children.empty(); }
  friend bool operator==(const Block&, const Block&) = default;
};

inline Block leaf(EventId e) {
  Block b;
  b.event = e;
  return b;
}

inline Block block(int r, Time p, std::vector<Block> children, std::vector<Time> distances = {}) {
  Block b;
  b.repetitions = r;
  b.period = p;
  b.children = std::move(children);
  b.distances = std::move(distances);
  return b;
}

struct PatternTree {
  Block root;
  friend bool operator==(const PatternTree&, const PatternTree&) = default;
};

/// (tree, tau, E): the unit the codec scores.
struct Pattern {
  PatternTree tree;
  Time tau = 0;
  std::vector<Time> corrections;
  friend bool operator==(const Pattern&, const Pattern&) = default;
};

namespace detail {

inline void validate_block(const Block& b, bool is_root) {
  if (b.is_leaf()) {
    if (is_root) throw InvalidPatternError("pattern root must be an interior block");
    if (b.event < 0) throw InvalidPatternError("leaf without event");
    return;
  }
  if (b.repetitions < 2) throw InvalidPatternError("block repetitions must be >= 2");
  if (b.period < 1) throw InvalidPatternError("block period must be >= 1");
  if (b.distances.size() + 1 != b.children.size())
    throw InvalidPatternError("block needs one distance between consecutive children");
  for (Time d : b.distances)
    if (d < 0) throw InvalidPatternError("negative inter-block distance");
  for (const auto& c : b.children) validate_block(c, false);
}

inline std::size_t count_leaves(const Block& b) {
  if (b.is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : b.children) n += count_leaves(c);
  return n;
}

inline std::size_t count_occurrences(const Block& b) {
  if (b.is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : b.children) n += count_occurrences(c);
  return n * static_cast<std::size_t>(b.repetitions);
}

inline int block_height(const Block& b) {
  if (b.is_leaf()) return 0;
  int h = 0;
  for (const auto& c : b.children) h = std::max(h, block_height(c));
  return h + 1;
}

/// Depth-first, repetition-major traversal of the expansion tree. For each
/// leaf occurrence `visit(index, rel_time, event, inherited, path, reps)` is
/// called and must return E(o) for that occurrence (0 for index 0).
/// `inherited` is the sum of corrections collected from the contributors of
/// the occurrence (left-sibling and previous-repetition left-most leaves,
/// recursively up the tree); cume(o) = E(o) + inherited.
template <class Visit>
class ExpansionWalker {
 public:
  explicit ExpansionWalker(Visit& visit) : visit_(visit) {}

  void run(const Block& root) { walk(root, 0, 0); }

 private:
  void walk(const Block& b, Time base, Time inherited) {
    Time previous_reps = 0;
    reps_.push_back(0);
    for (int k = 0; k < b.repetitions; ++k) {
      reps_.back() = k;
      const Time rep_base = base + static_cast<Time>(k) * b.period;
      const std::size_t rep_first = es_.size();
      Time left_siblings = 0;
      Time offset = 0;
      for (std::size_t y = 0; y < b.children.size(); ++y) {
        if (y > 0) offset += b.distances[y - 1];
        path_.push_back(static_cast<int>(y));
        const std::size_t child_first = es_.size();
        const Time c = inherited + previous_reps + left_siblings;
        const Block& child = b.children[y];
        if (child.is_leaf())
          es_.push_back(visit_(es_.size(), rep_base + offset, child.event, c, path_, reps_));
        else
          walk(child, rep_base + offset, c);
        path_.pop_back();
        left_siblings += es_[child_first];
      }
      previous_reps += es_[rep_first];
    }
    reps_.pop_back();
  }

  Visit& visit_;
  std::vector<Time> es_;
  std::vector<int> path_;
  std::vector<int> reps_;
};

template <class Visit>
void walk_expansion(const Block& root, Visit&& visit) {
  ExpansionWalker<std::remove_reference_t<Visit>> w(visit);
  w.run(root);
}

}  // namespace detail

inline void validate_tree(const PatternTree& tree) { detail::validate_block(tree.root, true); }

inline std::size_t occurrence_count(const PatternTree& tree) { return detail::count_occurrences(tree.root); }
inline std::size_t tree_width(const PatternTree& tree) { return detail::count_leaves(tree.root); }
inline int tree_height(const PatternTree& tree) { return detail::block_height(tree.root); }

inline PatternTree simple_tree(EventId e, int r, Time p) { return {block(r, p, {leaf(e)})}; }

inline Pattern wrap_cycle(const Cycle& c) { return {simple_tree(c.event, c.length, c.period), c.start, c.corrections}; }

/// Block path (child indices from the root) and repetition indices of every
/// interior ancestor, both 0-based.
struct LeafId {
  std::vector<int> path;
  std::vector<int> reps;
  friend auto operator<=>(const LeafId&, const LeafId&) = default;
};

struct Expansion {
  std::vector<Occurrence> perfect;  // relative timestamps, traversal order
  std::vector<LeafId> ids;
};

inline Expansion expand_tree(const PatternTree& tree) {
  validate_tree(tree);
  Expansion x;
  detail::walk_expansion(tree.root, [&](std::size_t, Time rel, EventId e, Time, const std::vector<int>& path,
                                        const std::vector<int>& reps) -> Time {
    x.perfect.push_back({rel, e});
    x.ids.push_back({path, reps});
    return 0;
  });
  return x;
}

/// Perfect relative occurrences only.
inline std::vector<Occurrence> occs_star(const PatternTree& tree) {
  validate_tree(tree);
  std::vector<Occurrence> out;
  out.reserve(occurrence_count(tree));
  detail::walk_expansion(tree.root, [&](std::size_t, Time rel, EventId e, Time, const auto&, const auto&) -> Time {
    out.push_back({rel, e});
    return 0;
  });
  return out;
}

namespace detail {

inline void check_corrections(const Pattern& p) {
  validate_tree(p.tree);
  if (p.corrections.size() + 1 != occurrence_count(p.tree))
    throw DomainError("pattern needs exactly N-1 corrections (N=" + std::to_string(occurrence_count(p.tree)) +
                      ", got " + std::to_string(p.corrections.size()) + ")");
}

}  // namespace detail

/// cume(o) for every occurrence in traversal order.
inline std::vector<Time> accumulate_corrections(const Pattern& p) {
  detail::check_corrections(p);
  std::vector<Time> cume;
  cume.reserve(p.corrections.size() + 1);
  detail::walk_expansion(p.tree.root,
                         [&](std::size_t i, Time, EventId, Time inherited, const auto&, const auto&) -> Time {
                           Time e = i == 0 ? 0 : p.corrections[i - 1];
                           cume.push_back(e + inherited);
                           return e;
                         });
  return cume;
}

/// Corrected occurrences in traversal order (absolute timestamps).
inline std::vector<Occurrence> corrected_occurrences(const Pattern& p) {
  detail::check_corrections(p);
  std::vector<Occurrence> out;
  out.reserve(p.corrections.size() + 1);
  detail::walk_expansion(p.tree.root,
                         [&](std::size_t i, Time rel, EventId ev, Time inherited, const auto&, const auto&) -> Time {
                           Time e = i == 0 ? 0 : p.corrections[i - 1];
                           out.push_back({p.tau + rel + e + inherited, ev});
                           return e;
                         });
  return out;
}

/// Covered pairs, sorted and deduplicated.
inline std::vector<Occurrence> pattern_occurrences(const Pattern& p) {
  auto occ = corrected_occurrences(p);
  for (const auto& o : occ)
    if (o.t < 0) throw InvalidPatternError("corrected occurrence at negative time " + std::to_string(o.t));
  std::sort(occ.begin(), occ.end());
  occ.erase(std::unique(occ.begin(), occ.end()), occ.end());
  return occ;
}

/// Corrections that place the tree's occurrences (traversal order) exactly at
/// `targets`. The first target must equal tau.
inline std::vector<Time> solve_corrections(const PatternTree& tree, Time tau, const std::vector<Time>& targets) {
  validate_tree(tree);
  if (targets.size() != occurrence_count(tree)) throw DomainError("target count does not match the tree");
  if (targets.empty() || targets.front() != tau) throw DomainError("first target must equal tau");
  std::vector<Time> es;
  es.reserve(targets.size() - 1);
  detail::walk_expansion(tree.root,
                         [&](std::size_t i, Time rel, EventId, Time inherited, const auto&, const auto&) -> Time {
                           if (i == 0) return 0;
                           Time e = targets[i] - tau - rel - inherited;
                           es.push_back(e);
                           return e;
                         });
  return es;
}

enum class ShapeClass { Simple, Vertical, Horizontal, Mixed };

inline const char* shape_name(ShapeClass c) {
  switch (c) {
    case ShapeClass::Simple: return "simple";
    case ShapeClass::Vertical: return "vertical";
    case ShapeClass::Horizontal: return "horizontal";
    case ShapeClass::Mixed: return "mixed";
  }
  return "?";
}

struct TreeShape {
  int height = 0;
  std::size_t width = 0;
  bool interleaved = false;
  bool overlaps = false;
  ShapeClass cls = ShapeClass::Simple;
};

inline TreeShape classify_tree(const PatternTree& tree) {
  TreeShape s;
  s.height = tree_height(tree);
  s.width = tree_width(tree);
  auto occ = occs_star(tree);
  std::vector<Time> ts;
  ts.reserve(occ.size());
  for (const auto& o : occ) ts.push_back(o.t);
  s.interleaved = !std::is_sorted(ts.begin(), ts.end());
  std::sort(ts.begin(), ts.end());
  s.overlaps = std::adjacent_find(ts.begin(), ts.end()) != ts.end();
  if (s.width == 1)
    s.cls = s.height == 1 ? ShapeClass::Simple : ShapeClass::Vertical;
  else
    s.cls = s.height == 1 ? ShapeClass::Horizontal : ShapeClass::Mixed;
  return s;
}

/// Offset of the last child inside one repetition of `b`.
inline Time last_child_offset(const Block& b) {
  Time off = 0;
  for (Time d : b.distances) off += d;
  return off;
}

inline Time repetition_width(const Block& b);

/// Span of the perfect occurrences of a block: (r-1)p + width of one repetition.
inline Time perfect_span(const Block& b) {
  if (b.is_leaf()) return 0;
  return static_cast<Time>(b.repetitions - 1) * b.period + repetition_width(b);
}

/// Width of one repetition of `b` (largest child end offset).
inline Time repetition_width(const Block& b) {
  Time w = 0, off = 0;
  for (std::size_t i = 0; i < b.children.size(); ++i) {
    if (i > 0) off += b.distances[i - 1];
    w = std::max(w, off + perfect_span(b.children[i]));
  }
  return w;
}

}  // namespace ppmdl
