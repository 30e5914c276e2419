#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ppmdl/cycle.hpp"
#include "ppmdl/tree.hpp"

namespace ppmdl {

/// Sequence statistics every cost depends on. Passed explicitly so callers
/// can cost a pattern against an enclosing context.
struct SeqStats {
  Time t_start = 0;
  Time t_end = 0;
  std::size_t len = 0;
  std::vector<std::size_t> counts;  // indexed by event id

  Time span() const noexcept { return t_end - t_start; }

  std::size_t count(EventId e) const noexcept {
    if (e < 0 || static_cast<std::size_t>(e) >= counts.size()) return 0;
    return counts[static_cast<std::size_t>(e)];
  }

  static SeqStats of(const EventSequence& seq) {
    SeqStats s;
    s.t_start = seq.t_start();
    s.t_end = seq.t_end();
    s.len = seq.size();
    for (std::size_t e = 0; e < seq.alphabet().size(); ++e) s.counts.push_back(seq.count(static_cast<EventId>(e)));
    return s;
  }
};

/// One term of the D component, for per-field reporting.
struct DTerm {
  enum class Kind { Width, Period, Distance };
  Kind kind;
  Time value;
  double bits;
};

struct CostBreakdown {
  double A = 0, R = 0, p0 = 0, D = 0, tau = 0, E = 0;
  std::vector<DTerm> d_terms;
  double total() const noexcept { return A + R + p0 + D + tau + E; }
};

// ─── Elementary codes ────────────────────────────────────────────────────

namespace codes {

inline double delimiter() { return std::log2(3.0); }

inline double event(const SeqStats& s, EventId e) {
  return -std::log2(static_cast<double>(s.count(e)) / (3.0 * static_cast<double>(s.len)));
}

inline double timestamp(const SeqStats& s) { return std::log2(static_cast<double>(s.span() + 1)); }

inline double log2i(Time v) { return std::log2(static_cast<double>(v)); }

}  // namespace codes

inline double residual_cost(const SeqStats& stats, const Occurrence& o) {
  std::size_t c = stats.count(o.event);
  if (c == 0) throw DomainError("unknown event id " + std::to_string(o.event));
  return codes::timestamp(stats) -
         std::log2(static_cast<double>(c) / static_cast<double>(stats.len));
}

inline double corrections_cost(std::span<const Time> es) {
  Time sum = 0;
  for (Time e : es) sum += std::abs(e);
  return static_cast<double>(2 * static_cast<Time>(es.size()) + sum);
}

namespace detail {

inline double event_string_bits(const Block& b, const SeqStats& s) {
  if (b.is_leaf()) return codes::event(s, b.event);
  double bits = 0;
  bits += codes::delimiter();
  for (const auto& c : b.children) bits += event_string_bits(c, s);
  bits += codes::delimiter();
  return bits;
}

inline std::size_t rarest_count(const Block& b, const SeqStats& s) {
  if (b.is_leaf()) return s.count(b.event);
  std::size_t m = std::numeric_limits<std::size_t>::max();
  for (const auto& c : b.children) m = std::min(m, rarest_count(c, s));
  return m;
}

inline void length_bits(const Block& b, const SeqStats& s, double& bits) {
  if (b.is_leaf()) return;
  bits += std::log2(static_cast<double>(rarest_count(b, s)));
  for (const auto& c : b.children) length_bits(c, s, bits);
}

inline bool all_events_known(const Block& b, const SeqStats& s) {
  if (b.is_leaf()) return s.count(b.event) > 0;
  for (const auto& c : b.children)
    if (!all_events_known(c, s)) return false;
  return true;
}

/// Root period bound floor((Δ - cume(o_za)) / (r0-1)); 0 when the budget is gone.
inline Time root_period_bound(Time span, Time cume_za, int r0) {
  Time num = span - cume_za;
  if (num < r0 - 1) return 0;
  return num / (r0 - 1);
}

/// Distances and children of an interior block given its repetition width
/// budget `w`. Returns false with `why` set on a budget violation.
inline bool encode_children(const Block& b, Time w, bool interleave, CostBreakdown& c, std::string& why) {
  Time total_d = 0;
  for (Time d : b.distances) total_d += d;
  if (total_d > w) {
    why = "inter-block distances exceed the repetition width budget";
    return false;
  }
  for (Time d : b.distances) {
    double bits = codes::log2i(w + 1);
    c.D += bits;
    c.d_terms.push_back({DTerm::Kind::Distance, d, bits});
  }
  Time offset = 0;
  for (std::size_t i = 0; i < b.children.size(); ++i) {
    if (i > 0) offset += b.distances[i - 1];
    const Block& ch = b.children[i];
    if (ch.is_leaf()) continue;
    const bool last = i + 1 == b.children.size();
    const Time budget = (interleave || last) ? w - offset : b.distances[i];
    if (perfect_span(ch) > budget) {
      why = "block span exceeds its budget";
      return false;
    }
    const Time bound = budget / (ch.repetitions - 1);
    if (bound < 1 || ch.period > bound) {
      why = "block period exceeds its budget";
      return false;
    }
    double bits = codes::log2i(bound);
    c.D += bits;
    c.d_terms.push_back({DTerm::Kind::Period, ch.period, bits});
    const Time inner_w = interleave ? budget - ch.repetitions + 1 : std::min(ch.period, budget / ch.repetitions);
    if (repetition_width(ch) > inner_w) {
      why = "repetition width exceeds its budget";
      return false;
    }
    if (!encode_children(ch, inner_w, interleave, c, why)) return false;
  }
  return true;
}

}  // namespace detail

/// Code length of a pattern, or nullopt (with `why`) when it is not codable
/// against `stats`.
inline std::optional<CostBreakdown> try_pattern_cost(const Pattern& p, const SeqStats& stats,
                                                     bool allow_interleaving = true, std::string* why = nullptr) {
  std::string reason;
  auto fail = [&](std::string r) -> std::optional<CostBreakdown> {
    if (why) *why = std::move(r);
    return std::nullopt;
  };
  const Block& root = p.tree.root;
  if (root.is_leaf()) return fail("pattern root must be an interior block");
  if (!detail::all_events_known(root, stats)) return fail("pattern uses an event absent from the sequence");
  const std::size_t n = occurrence_count(p.tree);
  if (p.corrections.size() + 1 != n) return fail("pattern needs exactly N-1 corrections");

  // Perfect relative times and cumulated corrections, traversal order.
  std::vector<Time> rel(n), cume(n);
  detail::walk_expansion(root, [&](std::size_t i, Time r, EventId, Time inherited, const auto&, const auto&) -> Time {
    Time e = i == 0 ? 0 : p.corrections[i - 1];
    rel[i] = r;
    cume[i] = e + inherited;
    return e;
  });
  for (std::size_t i = 0; i < n; ++i) {
    Time t = p.tau + rel[i] + cume[i];
    if (t < stats.t_start || t > stats.t_end) return fail("occurrence outside the sequence time range");
  }

  CostBreakdown c;
  c.A = detail::event_string_bits(root, stats);
  detail::length_bits(root, stats, c.R);

  const int r0 = root.repetitions;
  const std::size_t per_rep = n / static_cast<std::size_t>(r0);
  const std::size_t za = static_cast<std::size_t>(r0 - 1) * per_rep;
  const Time bound = detail::root_period_bound(stats.span(), cume[za], r0);
  if (bound < 1 || root.period > bound) return fail("root period exceeds its budget");
  c.p0 = codes::log2i(bound);
  const Time tau_range = stats.span() - cume[za] - static_cast<Time>(r0 - 1) * root.period + 1;
  if (tau_range < 1) return fail("no room left for the starting point");
  c.tau = codes::log2i(tau_range);

  if (!allow_interleaving && !std::is_sorted(rel.begin(), rel.end()))
    return fail("interleaved pattern while interleaving is disabled");

  const bool simple = root.children.size() == 1 && root.children.front().is_leaf();
  if (!simple) {
    Time delta = 0;
    for (std::size_t i = 0; i < per_rep; ++i) delta = std::max(delta, rel[i]);
    std::size_t zz = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (rel[i] >= rel[zz]) zz = i;
    const Time max_width = stats.t_end - cume[zz] - static_cast<Time>(r0 - 1) * root.period - p.tau;
    if (max_width < delta) return fail("repetition width exceeds its budget");
    double bits = codes::log2i(max_width + 1);
    c.D += bits;
    c.d_terms.push_back({DTerm::Kind::Width, delta, bits});
    if (!allow_interleaving && delta > root.period) return fail("root repetitions interleave");
    if (!detail::encode_children(root, delta, allow_interleaving, c, reason)) return fail(reason);
  }

  c.E = corrections_cost(p.corrections);
  return c;
}

inline CostBreakdown pattern_cost(const Pattern& p, const SeqStats& stats, bool allow_interleaving = true) {
  validate_tree(p.tree);
  if (p.corrections.size() + 1 != occurrence_count(p.tree))
    throw DomainError("pattern needs exactly N-1 corrections");
  std::string why;
  auto c = try_pattern_cost(p, stats, allow_interleaving, &why);
  if (!c) throw UncodablePatternError(why);
  return *c;
}

inline CostBreakdown cycle_cost(const Cycle& c, const SeqStats& stats) {
  cycle_cover(c);
  return pattern_cost(wrap_cycle(c), stats);
}

/// Cost of a simple cycle from its summary statistics, bit-identical to
/// pattern_cost on the wrapped cycle whenever its cover lies inside the
/// context. Used by the segmentation DP.
class SimpleCycleCoster {
 public:
  SimpleCycleCoster(EventId event, const SeqStats& stats) : stats_(stats) {
    Block root = block(2, 1, {leaf(event)});
    a_ = detail::event_string_bits(root, stats);
    detail::length_bits(root, stats, r_);
  }

  /// nullopt when the cycle does not fit the root budgets.
  std::optional<double> operator()(int r, Time period, Time sum_abs, Time sum_signed) const {
    CostBreakdown c;
    c.A = a_;
    c.R = r_;
    const Time bound = detail::root_period_bound(stats_.span(), sum_signed, r);
    if (bound < 1 || period > bound) return std::nullopt;
    c.p0 = codes::log2i(bound);
    const Time tau_range = stats_.span() - sum_signed - static_cast<Time>(r - 1) * period + 1;
    if (tau_range < 1) return std::nullopt;
    c.tau = codes::log2i(tau_range);
    c.E = static_cast<double>(2 * static_cast<Time>(r - 1) + sum_abs);
    return c.total();
  }

 private:
  const SeqStats& stats_;
  double a_ = 0;
  double r_ = 0;
};

// ─── Collections ─────────────────────────────────────────────────────────

struct CollectionReport {
  double total = 0;
  double pattern_bits = 0;
  double residual_bits = 0;
  std::size_t residual_count = 0;
  double baseline = 0;
  double percent_L = 100;
  double lr_ratio = 1;
  std::size_t simple = 0, vertical = 0, horizontal = 0, mixed = 0;
  std::size_t max_cover = 0;
  std::vector<CostBreakdown> costs;  // parallel to the input patterns
};

inline double baseline_cost(const EventSequence& seq, const SeqStats& stats) {
  double bits = 0;
  for (const auto& o : seq.pairs()) bits += residual_cost(stats, o);
  return bits;
}

inline CollectionReport collection_cost(const std::vector<Pattern>& patterns, const EventSequence& seq,
                                        const SeqStats& stats, bool allow_interleaving = true) {
  CollectionReport r;
  std::vector<Occurrence> covered;
  for (const auto& p : patterns) {
    auto cov = pattern_occurrences(p);
    for (const auto& o : cov)
      if (!seq.contains(o))
        throw DomainError("pattern covers (" + std::to_string(o.t) + ", " + seq.alphabet().label(o.event) +
                          ") which is not in the sequence");
    r.costs.push_back(pattern_cost(p, stats, allow_interleaving));
    r.pattern_bits += r.costs.back().total();
    r.max_cover = std::max(r.max_cover, cov.size());
    switch (classify_tree(p.tree).cls) {
      case ShapeClass::Simple: ++r.simple; break;
      case ShapeClass::Vertical: ++r.vertical; break;
      case ShapeClass::Horizontal: ++r.horizontal; break;
      case ShapeClass::Mixed: ++r.mixed; break;
    }
    covered.insert(covered.end(), cov.begin(), cov.end());
  }
  std::sort(covered.begin(), covered.end());
  covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
  for (const auto& o : seq.pairs()) {
    double bits = residual_cost(stats, o);
    r.baseline += bits;
    if (!std::binary_search(covered.begin(), covered.end(), o)) {
      r.residual_bits += bits;
      ++r.residual_count;
    }
  }
  r.total = r.pattern_bits + r.residual_bits;
  r.percent_L = r.baseline > 0 ? 100.0 * r.total / r.baseline : 100.0;
  r.lr_ratio = r.total > 0 ? r.residual_bits / r.total : 1.0;
  return r;
}

inline CollectionReport collection_cost(const std::vector<Pattern>& patterns, const EventSequence& seq) {
  return collection_cost(patterns, seq, SeqStats::of(seq));
}

// ─── Predicates and thresholds ───────────────────────────────────────────

inline bool is_cost_effective(const Pattern& p, std::span<const Occurrence> pairs, const SeqStats& stats,
                              bool allow_interleaving = true) {
  auto c = try_pattern_cost(p, stats, allow_interleaving);
  if (!c) return false;
  double res = 0;
  for (const auto& o : pairs) res += residual_cost(stats, o);
  return c->total() < res;
}

inline bool is_cost_effective(const Pattern& p, const SeqStats& stats, bool allow_interleaving = true) {
  auto cov = pattern_occurrences(p);
  return is_cost_effective(p, cov, stats, allow_interleaving);
}

inline double efficiency(const Pattern& p, const SeqStats& stats, bool allow_interleaving = true) {
  return pattern_cost(p, stats, allow_interleaving).total() / static_cast<double>(pattern_occurrences(p).size());
}

/// Bound on the corrections of a k-cycle over `event` below which the cycle
/// beats its residuals.
inline double w_threshold(int k, EventId event, const SeqStats& stats) {
  if (k < 3) throw DomainError("w_threshold needs k >= 3");
  const double ct = codes::timestamp(stats);
  const double la = -std::log2(static_cast<double>(stats.count(event)) / static_cast<double>(stats.len));
  const double beta = 2.0 * codes::delimiter();
  return (k - 2) * ct + (k - 1) * la - beta - std::log2(static_cast<double>(stats.count(event))) +
         std::log2(static_cast<double>(k - 1)) - 2.0 * k + 2.0;
}

/// Largest correction worth extending a cycle by one occurrence.
inline double extension_margin(const SeqStats& stats) { return codes::timestamp(stats) - 2.0; }

}  // namespace ppmdl
