#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "ppmdl/core.hpp"

namespace ppmdl {

/// Periodic repetition of one event: r occurrences, period p, start tau,
/// and r-1 shift corrections.
struct Cycle {
  EventId event = 0;
  int length = 0;
  Time period = 0;
  Time start = 0;
  std::vector<Time> corrections;

  Time span() const {
    Time s = static_cast<Time>(length - 1) * period;
    for (Time e : corrections) s += e;
    return s;
  }
  friend bool operator==(const Cycle&, const Cycle&) = default;
};

inline std::vector<Time> cycle_cover(const Cycle& c) {
  if (c.length < 2 || c.period < 1) throw InvalidCycleError("cycle needs r >= 2 and p >= 1");
  if (c.corrections.size() != static_cast<std::size_t>(c.length - 1))
    throw InvalidCycleError("cycle needs exactly r-1 corrections");
  std::vector<Time> ts{c.start};
  ts.reserve(static_cast<std::size_t>(c.length));
  for (Time e : c.corrections) {
    Time next = ts.back() + c.period + e;
    if (next <= ts.back()) throw InvalidCycleError("corrections break the occurrence order");
    ts.push_back(next);
  }
  return ts;
}

/// Median of the inter-occurrence distances. With an even count both middle
/// values give the same sum of absolute deviations, so the tie rule picks the
/// upper one.
inline Time median_period(std::span<const Time> ts) {
  std::vector<Time> diffs;
  diffs.reserve(ts.size());
  for (std::size_t i = 1; i < ts.size(); ++i) diffs.push_back(ts[i] - ts[i - 1]);
  auto mid = diffs.begin() + static_cast<std::ptrdiff_t>(diffs.size() / 2);
  std::nth_element(diffs.begin(), mid, diffs.end());
  return *mid;
}

inline Cycle fit_cycle(std::span<const Time> ts, EventId event) {
  if (ts.size() < 2) throw DomainError("fit_cycle needs at least 2 timestamps");
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (ts[i] <= ts[i - 1]) throw DomainError("fit_cycle needs strictly increasing timestamps");
  Cycle c;
  c.event = event;
  c.length = static_cast<int>(ts.size());
  c.period = median_period(ts);
  c.start = ts.front();
  c.corrections.reserve(ts.size() - 1);
  for (std::size_t i = 1; i < ts.size(); ++i) c.corrections.push_back(ts[i] - ts[i - 1] - c.period);
  return c;
}

}  // namespace ppmdl
