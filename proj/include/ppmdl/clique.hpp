#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace ppmdl {

/// Undirected graph over vertices 0..n-1 with sorted adjacency lists.
class Graph {
 public:
  explicit Graph(std::size_t n) : adj_(n) {}

  void add_edge(std::size_t a, std::size_t b) {
    if (a == b) return;
    adj_[a].push_back(b);
    adj_[b].push_back(a);
    sorted_ = false;
  }

  std::size_t size() const noexcept { return adj_.size(); }

  const std::vector<std::size_t>& neighbors(std::size_t v) {
    normalize();
    return adj_[v];
  }

  bool adjacent(std::size_t a, std::size_t b) {
    normalize();
    return std::binary_search(adj_[a].begin(), adj_[a].end(), b);
  }

  /// Connected components with at least one edge, each sorted ascending.
  std::vector<std::vector<std::size_t>> components() {
    normalize();
    std::vector<std::vector<std::size_t>> out;
    std::vector<char> seen(adj_.size(), 0);
    for (std::size_t s = 0; s < adj_.size(); ++s) {
      if (seen[s] || adj_[s].empty()) continue;
      std::vector<std::size_t> comp{s}, stack{s};
      seen[s] = 1;
      while (!stack.empty()) {
        std::size_t v = stack.back();
        stack.pop_back();
        for (std::size_t w : adj_[v])
          if (!seen[w]) {
            seen[w] = 1;
            comp.push_back(w);
            stack.push_back(w);
          }
      }
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
    return out;
  }

 private:
  void normalize() {
    if (sorted_) return;
    for (auto& a : adj_) {
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    sorted_ = true;
  }

  std::vector<std::vector<std::size_t>> adj_;
  bool sorted_ = true;
};

namespace detail {

inline std::vector<std::size_t> intersect(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline void bron_kerbosch(Graph& g, std::vector<std::size_t>& r, std::vector<std::size_t> p, std::vector<std::size_t> x,
                          std::vector<std::vector<std::size_t>>& out) {
  if (p.empty() && x.empty()) {
    auto c = r;
    std::sort(c.begin(), c.end());
    out.push_back(std::move(c));
    return;
  }
  // pivot: vertex of P ∪ X with most neighbours in P
  std::size_t pivot = p.empty() ? x.front() : p.front();
  std::size_t best = 0;
  for (const auto* set : {&p, &x})
    for (std::size_t u : *set) {
      std::size_t k = intersect(g.neighbors(u), p).size();
      if (k > best) {
        best = k;
        pivot = u;
      }
    }
  std::vector<std::size_t> candidates;
  std::set_difference(p.begin(), p.end(), g.neighbors(pivot).begin(), g.neighbors(pivot).end(),
                      std::back_inserter(candidates));
  for (std::size_t v : candidates) {
    r.push_back(v);
    bron_kerbosch(g, r, intersect(p, g.neighbors(v)), intersect(x, g.neighbors(v)), out);
    r.pop_back();
    p.erase(std::lower_bound(p.begin(), p.end(), v));
    x.insert(std::lower_bound(x.begin(), x.end(), v), v);
  }
}

/// Vertices of `comp` in degeneracy order (repeatedly remove a minimum-degree vertex).
inline std::vector<std::size_t> degeneracy_order(Graph& g, const std::vector<std::size_t>& comp) {
  std::vector<std::size_t> order;
  std::vector<char> removed(g.size(), 0);
  std::vector<std::size_t> degree(g.size(), 0);
  for (std::size_t v : comp) degree[v] = g.neighbors(v).size();
  for (std::size_t step = 0; step < comp.size(); ++step) {
    std::size_t pick = comp.size();
    for (std::size_t i = 0; i < comp.size(); ++i) {
      std::size_t v = comp[i];
      if (removed[v]) continue;
      if (pick == comp.size() || degree[v] < degree[comp[pick]]) pick = i;
    }
    std::size_t v = comp[pick];
    removed[v] = 1;
    order.push_back(v);
    for (std::size_t w : g.neighbors(v))
      if (!removed[w]) --degree[w];
  }
  return order;
}

}  // namespace detail

/// Maximal cliques of every component up to `node_cap` vertices (pivoting
/// enumeration over a degeneracy ordering); larger components get a greedy
/// clique cover instead. Output cliques are sorted, in deterministic order.
inline std::vector<std::vector<std::size_t>> maximal_cliques(Graph& g, std::size_t node_cap) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& comp : g.components()) {
    if (comp.size() <= node_cap) {
      auto order = detail::degeneracy_order(g, comp);
      std::vector<std::size_t> pos(g.size(), 0);
      for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
      for (std::size_t v : order) {
        std::vector<std::size_t> p, x;
        for (std::size_t w : g.neighbors(v)) (pos[w] > pos[v] ? p : x).push_back(w);
        std::sort(p.begin(), p.end());
        std::sort(x.begin(), x.end());
        std::vector<std::size_t> r{v};
        detail::bron_kerbosch(g, r, std::move(p), std::move(x), out);
      }
    } else {
      // greedy cover: highest degree first, grow with vertices adjacent to all members
      std::vector<std::size_t> order = comp;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return g.neighbors(a).size() > g.neighbors(b).size();
      });
      std::vector<char> used(g.size(), 0);
      for (std::size_t v : order) {
        if (used[v]) continue;
        std::vector<std::size_t> clique{v};
        used[v] = 1;
        for (std::size_t w : order) {
          if (used[w]) continue;
          bool ok = std::all_of(clique.begin(), clique.end(), [&](std::size_t u) { return g.adjacent(u, w); });
          if (ok) {
            clique.push_back(w);
            used[w] = 1;
          }
        }
        std::sort(clique.begin(), clique.end());
        out.push_back(std::move(clique));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace ppmdl
