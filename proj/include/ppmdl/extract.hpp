#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <queue>
#include <tuple>
#include <vector>

#include "ppmdl/codec.hpp"

namespace ppmdl {

/// Optimal segmentation of one event's occurrences into cycles and residuals.
struct Segmentation {
  std::vector<Cycle> cycles;
  double cost = 0;  // minimal sum of segment costs
};

namespace detail {

/// Running upper median of inserted values with sums on each side, so the
/// absolute deviation from the median is available in O(1).
class RunningMedian {
 public:
  void insert(Time v) {
    if (upper_.empty() || v >= upper_.top()) {
      upper_.push(v);
      upper_sum_ += v;
    } else {
      lower_.push(v);
      lower_sum_ += v;
    }
    // keep |upper| == ceil(n/2), so the upper median is upper_.top()
    while (upper_.size() > lower_.size() + 1) {
      Time x = upper_.top();
      upper_.pop();
      upper_sum_ -= x;
      lower_.push(x);
      lower_sum_ += x;
    }
    while (lower_.size() > upper_.size()) {
      Time x = lower_.top();
      lower_.pop();
      lower_sum_ -= x;
      upper_.push(x);
      upper_sum_ += x;
    }
  }
  Time median() const { return upper_.top(); }
  Time abs_deviation() const {
    Time m = median();
    return (upper_sum_ - m * static_cast<Time>(upper_.size())) + (m * static_cast<Time>(lower_.size()) - lower_sum_);
  }

 private:
  std::priority_queue<Time> lower_;
  std::priority_queue<Time, std::vector<Time>, std::greater<Time>> upper_;
  Time lower_sum_ = 0, upper_sum_ = 0;
};

}  // namespace detail

/// DP over segment boundaries. A segment of length >= 3 costs
/// min(fitted cycle, its residuals); shorter ones cost their residuals.
inline Segmentation segment_cycles(std::span<const Time> ts, EventId event, const SeqStats& stats) {
  Segmentation out;
  const std::size_t n = ts.size();
  if (n == 0) return out;
  const double unit = residual_cost(stats, {ts.front(), event});
  SimpleCycleCoster coster(event, stats);

  // Forward relaxation: best[i] is final once every shorter prefix is processed.
  std::vector<double> best(n + 1, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> cut(n + 1, 0);
  std::vector<char> is_cycle(n + 1, 0);
  best[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    detail::RunningMedian med;
    for (std::size_t j = i; j < n; ++j) {
      const std::size_t len = j - i + 1;
      if (j > i) med.insert(ts[j] - ts[j - 1]);
      const double res = static_cast<double>(len) * unit;
      double cost = res;
      bool cycle = false;
      if (len >= 3) {
        const Time p = med.median();
        const Time sum_signed = (ts[j] - ts[i]) - static_cast<Time>(len - 1) * p;
        auto cc = coster(static_cast<int>(len), p, med.abs_deviation(), sum_signed);
        if (cc && *cc < res) {
          cost = *cc;
          cycle = true;
        }
      }
      const double c = best[i] + cost;
      if (c < best[j + 1]) {
        best[j + 1] = c;
        cut[j + 1] = i;
        is_cycle[j + 1] = cycle;
      }
    }
  }
  out.cost = best[n];
  for (std::size_t j = n; j > 0; j = cut[j])
    if (is_cycle[j]) out.cycles.push_back(fit_cycle(ts.subspan(cut[j], j - cut[j]), event));
  std::reverse(out.cycles.begin(), out.cycles.end());
  return out;
}

inline std::vector<Cycle> extract_cycles_dp(std::span<const Time> ts, EventId event, const SeqStats& stats) {
  if (ts.size() < 3) return {};
  return segment_cycles(ts, event, stats).cycles;
}

/// Chains of triples (t0, t1, t2) with ||t2-t1| - |t1-t0|| <= ell. Each chain
/// starts at a triple not yet reached by another chain and extends greedily
/// with the successor of smallest deviation (then earliest).
inline std::vector<std::vector<std::size_t>> triple_chains(std::span<const Time> ts, double ell) {
  const std::size_t n = ts.size();
  const Time slack = static_cast<Time>(std::floor(ell));
  struct Triple {
    std::size_t a, b, c;
    Time dev;
  };
  std::vector<Triple> triples;
  // successors of a head pair (a, b) are the triples starting with (a, b)
  std::vector<std::vector<std::size_t>> by_head(n);  // index by a; filtered on b later
  for (std::size_t a = 0; a + 2 < n; ++a)
    for (std::size_t b = a + 1; b + 1 < n; ++b) {
      const Time g = ts[b] - ts[a];
      const Time lo = ts[b] + g - slack, hi = ts[b] + g + slack;
      auto it = std::lower_bound(ts.begin() + static_cast<std::ptrdiff_t>(b + 1), ts.end(), lo);
      for (; it != ts.end() && *it <= hi; ++it) {
        const std::size_t c = static_cast<std::size_t>(it - ts.begin());
        by_head[a].push_back(triples.size());
        triples.push_back({a, b, c, std::abs((*it - ts[b]) - g)});
      }
    }
  std::vector<char> reached(triples.size(), 0);
  auto successor = [&](const Triple& t) -> std::optional<std::size_t> {
    std::optional<std::size_t> best;
    for (std::size_t k : by_head[t.b]) {
      const Triple& u = triples[k];
      if (u.b != t.c) continue;
      if (!best || u.dev < triples[*best].dev || (u.dev == triples[*best].dev && u.c < triples[*best].c)) best = k;
    }
    return best;
  };
  std::vector<char> has_pred(triples.size(), 0);
  for (const auto& t : triples)
    for (std::size_t k : by_head[t.b])
      if (triples[k].b == t.c) has_pred[k] = 1;

  std::vector<std::vector<std::size_t>> chains;
  auto run = [&](std::size_t start, bool stop_at_reached) {
    std::vector<std::size_t> chain{triples[start].a, triples[start].b, triples[start].c};
    reached[start] = 1;
    std::size_t cur = start;
    while (auto nx = successor(triples[cur])) {
      cur = *nx;
      chain.push_back(triples[cur].c);
      if (reached[cur] && stop_at_reached) break;
      reached[cur] = 1;
    }
    chains.push_back(std::move(chain));
  };
  for (std::size_t i = 0; i < triples.size(); ++i)
    if (!has_pred[i]) run(i, false);
  // Triples skipped by every greedy extension start their own chain, which
  // ends where it joins an existing one.
  for (std::size_t i = 0; i < triples.size(); ++i)
    if (!reached[i]) run(i, true);
  return chains;
}

inline std::vector<Cycle> extract_cycles_tri(std::span<const Time> ts, EventId event, double ell) {
  std::vector<Cycle> out;
  std::vector<Time> picked;
  for (const auto& chain : triple_chains(ts, ell)) {
    picked.clear();
    for (std::size_t i : chain) picked.push_back(ts[i]);
    out.push_back(fit_cycle(picked, event));
  }
  std::sort(out.begin(), out.end(), [](const Cycle& x, const Cycle& y) {
    return std::tie(x.start, x.length, x.period, x.corrections) < std::tie(y.start, y.length, y.period, y.corrections);
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace ppmdl
