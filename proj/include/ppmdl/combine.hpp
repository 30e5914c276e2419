#pragma once

#include <map>
#include <optional>
#include <vector>

#include "ppmdl/codec.hpp"

namespace ppmdl {

/// Nests instances of one tree under a new root cycle fitted over their
/// starting points.
inline Pattern grow_vertically(std::vector<Pattern> instances) {
  if (instances.size() < 2) throw DomainError("grow_vertically needs at least 2 instances");
  std::stable_sort(instances.begin(), instances.end(), [](const Pattern& x, const Pattern& y) { return x.tau < y.tau; });
  for (const auto& p : instances)
    if (!(p.tree == instances.front().tree)) throw DomainError("grow_vertically needs structurally equal trees");
  std::vector<Time> starts;
  for (const auto& p : instances) starts.push_back(p.tau);
  Cycle outer = fit_cycle(starts, 0);

  Pattern out;
  out.tree.root = block(outer.length, outer.period, {instances.front().tree.root});
  out.tau = outer.start;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (i > 0) out.corrections.push_back(outer.corrections[i - 1]);
    const auto& e = instances[i].corrections;
    out.corrections.insert(out.corrections.end(), e.begin(), e.end());
  }
  return out;
}

/// Concatenates the root contents of the instances (ordered by tau) under a
/// root with the shortest length and the earliest period. Returns nullopt when
/// the starting points cannot be expressed as non-negative distances.
inline std::optional<Pattern> concatenate_patterns(std::vector<Pattern> instances) {
  if (instances.size() < 2) throw DomainError("concatenation needs at least 2 instances");
  std::stable_sort(instances.begin(), instances.end(), [](const Pattern& x, const Pattern& y) { return x.tau < y.tau; });
  int r = instances.front().tree.root.repetitions;
  for (const auto& p : instances) {
    if (p.tree.root.is_leaf()) throw DomainError("instance root must be an interior block");
    r = std::min(r, p.tree.root.repetitions);
  }

  Block root = block(r, instances.front().tree.root.period, {});
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const Block& b = instances[i].tree.root;
    if (i > 0) {
      Time d = instances[i].tau - instances[i - 1].tau - last_child_offset(instances[i - 1].tree.root);
      if (d < 0) return std::nullopt;
      root.distances.push_back(d);
    }
    root.children.insert(root.children.end(), b.children.begin(), b.children.end());
    root.distances.insert(root.distances.end(), b.distances.begin(), b.distances.end());
  }

  // Target timestamps in the new traversal order: for every kept repetition,
  // each instance's slice of corrected occurrences.
  std::vector<std::vector<Occurrence>> occ;
  for (const auto& p : instances) occ.push_back(corrected_occurrences(p));
  std::vector<Time> targets;
  for (int k = 0; k < r; ++k)
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const std::size_t per = occ[i].size() / static_cast<std::size_t>(instances[i].tree.root.repetitions);
      for (std::size_t j = 0; j < per; ++j) targets.push_back(occ[i][static_cast<std::size_t>(k) * per + j].t);
    }

  Pattern out;
  out.tree.root = std::move(root);
  out.tau = instances.front().tau;
  out.corrections = solve_corrections(out.tree, out.tau, targets);
  return out;
}

/// Rewrites [r0,p0]([r1,p1](A) d [r1,p1](B) ...) as [r0,p0]([r1,p1](A d' B ...))
/// with identical cover. Returns nullopt when the shape does not match.
inline std::optional<Pattern> factorize(const Pattern& p) {
  const Block& root = p.tree.root;
  if (root.children.size() < 2) return std::nullopt;
  for (const auto& c : root.children)
    if (c.is_leaf() || c.repetitions != root.children.front().repetitions ||
        c.period != root.children.front().period)
      return std::nullopt;

  Block inner = block(root.children.front().repetitions, root.children.front().period, {});
  std::vector<int> first_index;  // index of each old child's first grandchild in `inner`
  for (std::size_t c = 0; c < root.children.size(); ++c) {
    const Block& ch = root.children[c];
    if (c > 0) {
      Time d = root.distances[c - 1] - last_child_offset(root.children[c - 1]);
      if (d < 0) return std::nullopt;
      inner.distances.push_back(d);
    }
    first_index.push_back(static_cast<int>(inner.children.size()));
    inner.children.insert(inner.children.end(), ch.children.begin(), ch.children.end());
    inner.distances.insert(inner.distances.end(), ch.distances.begin(), ch.distances.end());
  }

  Pattern out;
  out.tree.root = block(root.repetitions, root.period, {std::move(inner)});
  out.tau = p.tau;

  // Map leaves: old path [c, g, rest..] -> new path [0, first_index[c] + g, rest..].
  auto old_x = expand_tree(p.tree);
  auto old_occ = corrected_occurrences(p);
  std::map<LeafId, Time> target;
  for (std::size_t i = 0; i < old_x.ids.size(); ++i) {
    LeafId id = old_x.ids[i];
    int c = id.path[0];
    id.path[0] = 0;
    id.path[1] += first_index[static_cast<std::size_t>(c)];
    target.emplace(std::move(id), old_occ[i].t);
  }
  auto new_x = expand_tree(out.tree);
  std::vector<Time> targets;
  targets.reserve(new_x.ids.size());
  for (const auto& id : new_x.ids) targets.push_back(target.at(id));
  out.corrections = solve_corrections(out.tree, out.tau, targets);
  return out;
}

/// Concatenation, or its factorized form when that is cheaper. nullopt when
/// neither is representable and codable.
inline std::optional<Pattern> grow_horizontally(std::vector<Pattern> instances, const SeqStats& stats,
                                                bool allow_interleaving = true) {
  auto plain = concatenate_patterns(std::move(instances));
  if (!plain) return std::nullopt;
  auto plain_cost = try_pattern_cost(*plain, stats, allow_interleaving);
  if (auto f = factorize(*plain)) {
    auto fc = try_pattern_cost(*f, stats, allow_interleaving);
    if (fc && (!plain_cost || fc->total() < plain_cost->total())) return f;
  }
  if (!plain_cost) return std::nullopt;
  return plain;
}

}  // namespace ppmdl
