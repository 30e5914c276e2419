#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ppmdl/clique.hpp"
#include "ppmdl/combine.hpp"
#include "ppmdl/extract.hpp"
#include "ppmdl/notation.hpp"

namespace ppmdl {

enum class Provenance { Dp, Tri, Vertical, Horizontal, Factorized };

inline const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Dp: return "dp";
    case Provenance::Tri: return "tri";
    case Provenance::Vertical: return "vertical";
    case Provenance::Horizontal: return "horizontal";
    case Provenance::Factorized: return "factorized";
  }
  return "?";
}

struct Candidate {
  Pattern pattern;
  std::vector<Occurrence> cover;  // sorted, unique
  CostBreakdown breakdown;
  double cost = 0;
  double efficiency = 0;
  Provenance provenance = Provenance::Dp;
  std::string key;  // notation over event ids; identity and tie-break order
};

struct MiningConfig {
  int k = 3;
  int max_rounds = 10;
  bool allow_interleaving = true;
  std::size_t clique_node_cap = 64;
  /// Mining consumes no randomness; the seed is recorded in reports only.
  std::uint64_t deterministic_seed = 0;
  unsigned threads = 1;
  bool cycles_only = false;
};

/// Scored candidate, or nullopt when the pattern is not codable or not
/// cost-effective for its own cover.
inline std::optional<Candidate> make_candidate(Pattern p, const SeqStats& stats, bool allow_interleaving,
                                               Provenance prov) {
  auto cost = try_pattern_cost(p, stats, allow_interleaving);
  if (!cost) return std::nullopt;
  Candidate c;
  c.cover = pattern_occurrences(p);
  c.breakdown = *cost;
  c.cost = cost->total();
  double res = 0;
  for (const auto& o : c.cover) res += residual_cost(stats, o);
  if (!(c.cost < res)) return std::nullopt;
  c.efficiency = c.cost / static_cast<double>(c.cover.size());
  c.provenance = prov;
  c.key = format_pattern(p, nullptr);
  c.pattern = std::move(p);
  return c;
}

/// Ranking used everywhere: efficiency, then cost, then notation.
inline bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.efficiency != b.efficiency) return a.efficiency < b.efficiency;
  if (a.cost != b.cost) return a.cost < b.cost;
  return a.key < b.key;
}

namespace detail {

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Callers write into
/// per-index slots, so results do not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

/// Candidate list without duplicate patterns, in insertion order.
class CandidateSet {
 public:
  bool add(Candidate c) {
    if (!keys_.insert(c.key).second) return false;
    items_.push_back(std::move(c));
    return true;
  }
  void add_all(const std::vector<Candidate>& cs) {
    for (const auto& c : cs) add(c);
  }
  bool contains(const std::string& key) const { return keys_.count(key) > 0; }
  const std::vector<Candidate>& items() const noexcept { return items_; }
  std::vector<Candidate> take() { return std::move(items_); }

 private:
  std::vector<Candidate> items_;
  std::unordered_set<std::string> keys_;
};

inline bool covers_intersect(const std::vector<Occurrence>& a, const std::vector<Occurrence>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j)
      ++i;
    else if (*j < *i)
      ++j;
    else
      return true;
  }
  return false;
}

/// Residual bits of the pairs in the union of member covers that `cover` misses.
inline double lost_residuals(const std::vector<const Candidate*>& members, const std::vector<Occurrence>& cover,
                             const SeqStats& stats) {
  std::vector<Occurrence> all;
  for (const auto* m : members) all.insert(all.end(), m->cover.begin(), m->cover.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  double bits = 0;
  for (const auto& o : all)
    if (!std::binary_search(cover.begin(), cover.end(), o)) bits += residual_cost(stats, o);
  return bits;
}

}  // namespace detail

// ─── Filtering ───────────────────────────────────────────────────────────

/// Keeps the candidates ranked among the k best for at least one covered pair.
inline std::vector<Candidate> filter_candidates(std::vector<Candidate> pool, int k) {
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ranks_before(pool[a], pool[b]); });
  std::unordered_map<Occurrence, int, OccurrenceHash> seen;
  std::vector<char> keep(pool.size(), 0);
  for (std::size_t i : order) {
    for (const auto& o : pool[i].cover) {
      int& n = seen[o];
      if (n < k) keep[i] = 1;
      ++n;
    }
  }
  std::vector<Candidate> out;
  for (std::size_t i : order)
    if (keep[i]) out.push_back(std::move(pool[i]));
  return out;
}

// ─── Stage 1: cycles per event ───────────────────────────────────────────

inline std::vector<Candidate> event_cycles(const EventSequence& seq, EventId e, const SeqStats& stats,
                                           const MiningConfig& cfg) {
  auto ts = seq.timestamps(e);
  std::vector<Candidate> out;
  if (ts.size() < 3) return out;
  detail::CandidateSet set;
  for (const auto& c : extract_cycles_dp(ts, e, stats))
    if (auto cand = make_candidate(wrap_cycle(c), stats, cfg.allow_interleaving, Provenance::Dp))
      set.add(std::move(*cand));
  for (const auto& c : extract_cycles_tri(ts, e, extension_margin(stats)))
    if (c.length >= 3)
      if (auto cand = make_candidate(wrap_cycle(c), stats, cfg.allow_interleaving, Provenance::Tri))
        set.add(std::move(*cand));
  return set.take();
}

inline std::vector<Candidate> initial_candidates(const EventSequence& seq, const SeqStats& stats,
                                                 const MiningConfig& cfg) {
  const std::size_t n = seq.alphabet().size();
  std::vector<std::vector<Candidate>> per_event(n);
  detail::parallel_for(n, cfg.threads,
                       [&](std::size_t e) { per_event[e] = event_cycles(seq, static_cast<EventId>(e), stats, cfg); });
  detail::CandidateSet all;
  for (auto& v : per_event) all.add_all(v);
  return filter_candidates(all.take(), cfg.k);
}

// ─── Stage 2: combinations ───────────────────────────────────────────────

/// Nests same-tree candidates whose starting points form cycles.
inline std::vector<Candidate> combine_vertically(const std::vector<Candidate>& fresh,
                                                 const std::vector<Candidate>& pool, const SeqStats& stats,
                                                 const MiningConfig& cfg) {
  std::map<std::string, std::vector<const Candidate*>> groups;
  std::set<std::string> wanted;
  std::unordered_set<std::string> seen;
  for (const auto* list : {&fresh, &pool})
    for (const auto& c : *list) {
      if (!seen.insert(c.key).second) continue;
      std::string tk = format_tree(c.pattern.tree, nullptr);
      if (list == &fresh) wanted.insert(tk);
      groups[tk].push_back(&c);
    }

  detail::CandidateSet out;
  for (const auto& tk : wanted) {
    auto& members = groups[tk];
    // one instance per starting point: the cheapest
    std::map<Time, const Candidate*> by_start;
    for (const auto* c : members) {
      auto [it, fresh_slot] = by_start.emplace(c->pattern.tau, c);
      if (!fresh_slot && (c->cost < it->second->cost || (c->cost == it->second->cost && c->key < it->second->key)))
        it->second = c;
    }
    if (by_start.size() < 3) continue;
    std::vector<Time> starts;
    for (const auto& [t, c] : by_start) starts.push_back(t);

    const Candidate& first = *by_start.begin()->second;
    const double l_max = first.cost - first.breakdown.E;  // one instance with an empty correction list

    for (const auto& chain : triple_chains(starts, l_max)) {
      std::vector<const Candidate*> chosen;
      for (std::size_t i : chain) chosen.push_back(by_start[starts[i]]);
      bool disjoint = true;
      for (std::size_t i = 0; i < chosen.size() && disjoint; ++i)
        for (std::size_t j = i + 1; j < chosen.size() && disjoint; ++j)
          disjoint = !detail::covers_intersect(chosen[i]->cover, chosen[j]->cover);
      if (!disjoint) continue;
      std::vector<Pattern> inst;
      double member_cost = 0;
      for (const auto* c : chosen) {
        inst.push_back(c->pattern);
        member_cost += c->cost;
      }
      auto cand = make_candidate(grow_vertically(std::move(inst)), stats, cfg.allow_interleaving, Provenance::Vertical);
      if (cand && cand->cost < member_cost) out.add(std::move(*cand));
    }
  }
  return filter_candidates(out.take(), cfg.k);
}

namespace detail {

inline std::optional<Candidate> horizontal_candidate(const std::vector<const Candidate*>& members,
                                                     const SeqStats& stats, const MiningConfig& cfg) {
  std::vector<Pattern> inst;
  std::size_t children = 0;
  double member_cost = 0;
  for (const auto* m : members) {
    inst.push_back(m->pattern);
    children += m->pattern.tree.root.children.size();
    member_cost += m->cost;
  }
  auto grown = grow_horizontally(std::move(inst), stats, cfg.allow_interleaving);
  if (!grown) return std::nullopt;
  const auto prov = grown->tree.root.children.size() < children ? Provenance::Factorized : Provenance::Horizontal;
  auto cand = make_candidate(std::move(*grown), stats, cfg.allow_interleaving, prov);
  if (!cand) return std::nullopt;
  if (!(cand->cost + lost_residuals(members, cand->cover, stats) < member_cost)) return std::nullopt;
  return cand;
}

/// Passes when the period difference is small against the later pattern's
/// repetition-boundary corrections.
inline bool periods_compatible(const Candidate& earlier, const Candidate& later) {
  const Block& a = earlier.pattern.tree.root;
  const Block& b = later.pattern.tree.root;
  const Time r = std::min(a.repetitions, b.repetitions);
  const std::size_t per_rep = (later.pattern.corrections.size() + 1) / static_cast<std::size_t>(b.repetitions);
  Time sum = 0;
  for (Time i = 1; i < r; ++i) sum += std::abs(later.pattern.corrections[static_cast<std::size_t>(i) * per_rep - 1]);
  return std::abs(b.period - a.period) * r * (r - 1) <= 2 * sum;
}

}  // namespace detail

/// Concatenates co-periodic candidates pairwise, then per maximal clique of
/// the graph of profitable pairs.
inline std::vector<Candidate> combine_horizontally(const std::vector<Candidate>& fresh,
                                                   const std::vector<Candidate>& pool, const SeqStats& stats,
                                                   const MiningConfig& cfg) {
  std::vector<const Candidate*> all;
  std::vector<char> is_fresh;
  std::unordered_set<std::string> seen;
  for (const auto* list : {&fresh, &pool})
    for (const auto& c : *list)
      if (seen.insert(c.key).second) {
        all.push_back(&c);
        is_fresh.push_back(list == &fresh);
      }
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (all[x]->pattern.tau != all[y]->pattern.tau) return all[x]->pattern.tau < all[y]->pattern.tau;
    return all[x]->key < all[y]->key;
  });

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Candidate& a = *all[order[i]];
    const Time limit = a.pattern.tau + a.pattern.tree.root.period;
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const Candidate& b = *all[order[j]];
      if (b.pattern.tau > limit) break;
      if (!is_fresh[order[i]] && !is_fresh[order[j]]) continue;
      if (!detail::periods_compatible(a, b)) continue;
      if (detail::covers_intersect(a.cover, b.cover)) continue;
      pairs.emplace_back(order[i], order[j]);
    }
  }

  std::vector<std::optional<Candidate>> results(pairs.size());
  detail::parallel_for(pairs.size(), cfg.threads, [&](std::size_t i) {
    results[i] = detail::horizontal_candidate({all[pairs[i].first], all[pairs[i].second]}, stats, cfg);
  });

  detail::CandidateSet out;
  Graph g(all.size());
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (results[i]) {
      g.add_edge(pairs[i].first, pairs[i].second);
      out.add(std::move(*results[i]));
    }

  for (const auto& clique : maximal_cliques(g, cfg.clique_node_cap)) {
    if (clique.size() < 3) continue;
    std::vector<const Candidate*> members;
    for (std::size_t v : clique) members.push_back(all[v]);
    std::stable_sort(members.begin(), members.end(), [](const Candidate* x, const Candidate* y) {
      if (x->pattern.tau != y->pattern.tau) return x->pattern.tau < y->pattern.tau;
      return x->key < y->key;
    });
    if (auto cand = detail::horizontal_candidate(members, stats, cfg)) out.add(std::move(*cand));
  }
  return filter_candidates(out.take(), cfg.k);
}

// ─── Stage 3: selection ──────────────────────────────────────────────────

struct Selection {
  std::vector<Candidate> patterns;
  std::vector<Occurrence> residuals;
  double total = 0;
};

/// Greedy cover by marginal efficiency. Accepts a candidate only while it
/// beats the residual cost of its still-uncovered pairs and stops at the
/// first rejection; falls back to the best single candidate if that scores
/// lower than the greedy result.
inline Selection greedy_cover(const std::vector<Candidate>& pool, const EventSequence& seq, const SeqStats& stats) {
  const auto& pairs = seq.pairs();
  std::vector<double> res(pairs.size());
  double baseline = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    res[i] = residual_cost(stats, pairs[i]);
    baseline += res[i];
  }
  std::vector<std::vector<std::size_t>> idx(pool.size());
  for (std::size_t c = 0; c < pool.size(); ++c)
    for (const auto& o : pool[c].cover) {
      auto it = std::lower_bound(pairs.begin(), pairs.end(), o);
      if (it == pairs.end() || !(*it == o)) throw DomainError("candidate covers a pair outside the sequence");
      idx[c].push_back(static_cast<std::size_t>(it - pairs.begin()));
    }

  struct Entry {
    double ratio;
    std::size_t c;
  };
  auto worse = [&](const Entry& x, const Entry& y) {  // priority_queue puts the best on top
    if (x.ratio != y.ratio) return x.ratio > y.ratio;
    if (pool[x.c].cost != pool[y.c].cost) return pool[x.c].cost > pool[y.c].cost;
    return pool[x.c].key > pool[y.c].key;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (std::size_t c = 0; c < pool.size(); ++c)
    if (!idx[c].empty()) heap.push({pool[c].cost / static_cast<double>(idx[c].size()), c});

  std::vector<char> covered(pairs.size(), 0);
  std::vector<std::size_t> chosen;
  while (!heap.empty()) {
    Entry top = heap.top();
    heap.pop();
    std::size_t fresh = 0;
    double fresh_res = 0;
    for (std::size_t i : idx[top.c])
      if (!covered[i]) {
        ++fresh;
        fresh_res += res[i];
      }
    if (fresh == 0) continue;
    Entry now{pool[top.c].cost / static_cast<double>(fresh), top.c};
    if (!heap.empty() && worse(now, heap.top())) {  // stale: someone else may be better now
      heap.push(now);
      continue;
    }
    if (!(pool[top.c].cost < fresh_res)) break;
    chosen.push_back(top.c);
    for (std::size_t i : idx[top.c]) covered[i] = 1;
  }

  auto total_of = [&](const std::vector<std::size_t>& picks, std::vector<char>& cov) {
    double t = 0;
    for (std::size_t c : picks) t += pool[c].cost;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (!cov[i]) t += res[i];
    return t;
  };
  double greedy_total = total_of(chosen, covered);

  std::optional<std::size_t> single;
  double single_total = greedy_total;
  for (std::size_t c = 0; c < pool.size(); ++c) {
    double t = baseline - [&] {
      double s = 0;
      for (std::size_t i : idx[c]) s += res[i];
      return s;
    }() + pool[c].cost;
    if (t < single_total) {
      single_total = t;
      single = c;
    }
  }
  if (single) {
    chosen = {*single};
    std::fill(covered.begin(), covered.end(), 0);
    for (std::size_t i : idx[*single]) covered[i] = 1;
    greedy_total = total_of(chosen, covered);
  }

  Selection s;
  for (std::size_t c : chosen) s.patterns.push_back(pool[c]);
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (!covered[i]) s.residuals.push_back(pairs[i]);
  s.total = greedy_total;
  return s;
}

// ─── Pipeline ────────────────────────────────────────────────────────────

struct StageResult {
  std::string name;
  std::size_t pool_size = 0;
  Selection selection;
  CollectionReport report;
};

struct MiningResult {
  Selection selection;
  CollectionReport report;
  std::string stage;  // name of the stage whose selection won
  std::vector<StageResult> stages;
  std::vector<Candidate> pool;  // every candidate accumulated
  std::vector<std::pair<std::string, double>> timings_ms;
};

inline std::vector<Pattern> patterns_of(const Selection& s) {
  std::vector<Pattern> out;
  for (const auto& c : s.patterns) out.push_back(c.pattern);
  return out;
}

inline MiningResult mine(const EventSequence& seq, const MiningConfig& cfg = {}) {
  using clock = std::chrono::steady_clock;
  MiningResult result;
  if (cfg.k < 1) throw DomainError("k must be >= 1");
  const SeqStats stats = SeqStats::of(seq);
  auto lap = [&, t0 = clock::now()](const std::string& name) mutable {
    auto t1 = clock::now();
    result.timings_ms.emplace_back(name, std::chrono::duration<double, std::milli>(t1 - t0).count());
    t0 = t1;
  };

  std::vector<Candidate> initial = seq.empty() ? std::vector<Candidate>{} : initial_candidates(seq, stats, cfg);
  lap("cycles");

  std::vector<std::pair<std::string, std::vector<Candidate>>> stage_pools;
  stage_pools.emplace_back("C_S", initial);

  detail::CandidateSet accumulated;
  if (!cfg.cycles_only) {
    std::vector<Candidate> vert = initial, horiz = initial;
    std::vector<Candidate> first_v, first_h;
    for (int round = 0; round < cfg.max_rounds && (!vert.empty() || !horiz.empty()); ++round) {
      detail::CandidateSet pool;
      pool.add_all(accumulated.items());
      pool.add_all(horiz);
      pool.add_all(vert);
      auto next_v = combine_vertically(horiz, pool.items(), stats, cfg);
      auto next_h = combine_horizontally(vert, pool.items(), stats, cfg);
      accumulated.add_all(horiz);
      accumulated.add_all(vert);
      if (round == 0) {
        first_v = next_v;
        first_h = next_h;
      }
      auto unseen = [&](std::vector<Candidate> v) {
        std::erase_if(v, [&](const Candidate& c) { return accumulated.contains(c.key); });
        return v;
      };
      vert = unseen(std::move(next_v));
      horiz = unseen(std::move(next_h));
    }
    accumulated.add_all(horiz);
    accumulated.add_all(vert);
    lap("combine");

    auto joined = [&](std::initializer_list<const std::vector<Candidate>*> parts) {
      detail::CandidateSet s;
      for (const auto* p : parts) s.add_all(*p);
      return s.take();
    };
    stage_pools.emplace_back("C_V", joined({&initial, &first_v}));
    stage_pools.emplace_back("C_H", joined({&initial, &first_h}));
    stage_pools.emplace_back("C_V+H", joined({&initial, &first_v, &first_h}));
    stage_pools.emplace_back("C_F", accumulated.items());
  }
  result.pool = cfg.cycles_only ? initial : accumulated.items();

  for (auto& [name, pool] : stage_pools) {
    StageResult st;
    st.name = name;
    st.pool_size = pool.size();
    st.selection = greedy_cover(pool, seq, stats);
    st.report = collection_cost(patterns_of(st.selection), seq, stats, cfg.allow_interleaving);
    result.stages.push_back(std::move(st));
  }
  lap("select");

  // lowest total wins; ties go to the later stage
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.stages.size(); ++i)
    if (result.stages[i].selection.total <= result.stages[best].selection.total) best = i;
  result.selection = result.stages[best].selection;
  result.report = result.stages[best].report;
  result.stage = result.stages[best].name;
  return result;
}

}  // namespace ppmdl
