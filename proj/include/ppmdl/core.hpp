#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ppmdl/errors.hpp"

namespace ppmdl {

using Time = std::int64_t;
using EventId = std::int32_t;

/// One (timestamp, event) pair.
struct Occurrence {
  Time t = 0;
  EventId event = 0;
  friend auto operator<=>(const Occurrence&, const Occurrence&) = default;
};

struct OccurrenceHash {
  std::size_t operator()(const Occurrence& o) const noexcept {
    return std::hash<std::uint64_t>{}(static_cast<std::uint64_t>(o.t) * 0x9E3779B97F4A7C15ULL ^
                                      static_cast<std::uint64_t>(o.event));
  }
};

/// Bijection between event labels and dense ids.
class Alphabet {
 public:
  EventId intern(std::string_view label) {
    auto it = ids_.find(std::string(label));
    if (it != ids_.end()) return it->second;
    auto id = static_cast<EventId>(labels_.size());
    labels_.emplace_back(label);
    ids_.emplace(labels_.back(), id);
    return id;
  }

  std::optional<EventId> find(std::string_view label) const {
    auto it = ids_.find(std::string(label));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& label(EventId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= labels_.size())
      throw DomainError("unknown event id " + std::to_string(id));
    return labels_[static_cast<std::size_t>(id)];
  }

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, EventId> ids_;
};

/// Sorted set of (t, event) pairs with per-event projections.
class EventSequence {
 public:
  EventSequence() = default;

  /// Sorts and deduplicates `pairs`; every event id must be below alphabet.size().
  EventSequence(std::vector<Occurrence> pairs, Alphabet alphabet, std::size_t collapsed = 0)
      : pairs_(std::move(pairs)), alphabet_(std::move(alphabet)), collapsed_(collapsed) {
    std::sort(pairs_.begin(), pairs_.end());
    auto last = std::unique(pairs_.begin(), pairs_.end());
    collapsed_ += static_cast<std::size_t>(pairs_.end() - last);
    pairs_.erase(last, pairs_.end());
    per_event_.assign(alphabet_.size(), {});
    for (const auto& o : pairs_) {
      if (o.t < 0) throw DomainError("negative timestamp " + std::to_string(o.t));
      if (o.event < 0 || static_cast<std::size_t>(o.event) >= alphabet_.size())
        throw DomainError("event id outside alphabet: " + std::to_string(o.event));
      per_event_[static_cast<std::size_t>(o.event)].push_back(o.t);
    }
  }

  const std::vector<Occurrence>& pairs() const noexcept { return pairs_; }
  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }
  Time t_start() const noexcept { return pairs_.empty() ? 0 : pairs_.front().t; }
  Time t_end() const noexcept { return pairs_.empty() ? 0 : pairs_.back().t; }
  Time span() const noexcept { return t_end() - t_start(); }
  std::size_t collapsed_duplicates() const noexcept { return collapsed_; }

  std::span<const Time> timestamps(EventId e) const {
    if (e < 0 || static_cast<std::size_t>(e) >= per_event_.size()) return {};
    return per_event_[static_cast<std::size_t>(e)];
  }
  std::size_t count(EventId e) const { return timestamps(e).size(); }

  bool contains(const Occurrence& o) const { return std::binary_search(pairs_.begin(), pairs_.end(), o); }

  friend bool operator==(const EventSequence& a, const EventSequence& b) {
    return a.pairs_ == b.pairs_ && a.alphabet_ == b.alphabet_;
  }

 private:
  std::vector<Occurrence> pairs_;
  Alphabet alphabet_;
  std::vector<std::vector<Time>> per_event_;
  std::size_t collapsed_ = 0;
};

enum class Separator { Auto, Tab, Comma };

struct IngestOptions {
  Separator separator = Separator::Auto;
  Time granularity = 1;
  bool succession = false;
  /// Events with fewer occurrences than this are relabeled to `other_label`.
  std::optional<std::size_t> rare_threshold;
  std::string other_label = "other";
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Reads "t<sep>label" lines. Event ids follow chronological first appearance
/// (ties by line order), which makes the serialized form load back identically.
inline EventSequence load_sequence(std::istream& in, const IngestOptions& opts = {}) {
  if (opts.granularity < 1) throw DomainError("granularity must be >= 1");
  struct Raw {
    Time t;
    std::string label;
    std::size_t line;
  };
  std::vector<Raw> raw;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = detail::trim(line);
    if (s.empty() || s.front() == '#') continue;
    std::size_t cut = std::string_view::npos;
    switch (opts.separator) {
      case Separator::Tab: cut = s.find('\t'); break;
      case Separator::Comma: cut = s.find(','); break;
      case Separator::Auto:
        cut = s.find('\t');
        if (cut == std::string_view::npos) cut = s.find(',');
        break;
    }
    if (cut == std::string_view::npos) throw ParseError(lineno, "expected 'timestamp<sep>label'");
    std::string_view ts = detail::trim(s.substr(0, cut));
    std::string_view label = detail::trim(s.substr(cut + 1));
    if (label.empty()) throw ParseError(lineno, "empty event label");
    Time t = 0;
    bool negative = !ts.empty() && ts.front() == '-';
    auto [ptr, ec] = std::from_chars(ts.data() + (negative ? 1 : 0), ts.data() + ts.size(), t);
    if (ts.size() <= (negative ? 1u : 0u) || ec != std::errc() || ptr != ts.data() + ts.size())
      throw ParseError(lineno, "bad timestamp '" + std::string(ts) + "'");
    if (negative && t != 0)
      throw DomainError("line " + std::to_string(lineno) + ": negative timestamp -" + std::to_string(t));
    raw.push_back({t, std::string(label), lineno});
  }
  if (raw.empty()) throw EmptySequenceError();

  for (std::size_t i = 0; i < raw.size(); ++i)
    raw[i].t = opts.succession ? static_cast<Time>(i) : raw[i].t / opts.granularity;

  std::size_t collapsed = 0;
  auto dedup = [&] {
    std::map<std::pair<Time, std::string>, std::size_t> seen;
    std::vector<Raw> kept;
    kept.reserve(raw.size());
    for (auto& r : raw) {
      if (seen.emplace(std::pair{r.t, r.label}, r.line).second)
        kept.push_back(std::move(r));
      else
        ++collapsed;
    }
    raw = std::move(kept);
  };
  dedup();

  if (opts.rare_threshold) {
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& r : raw) ++counts[r.label];
    for (auto& r : raw)
      if (counts[r.label] < *opts.rare_threshold) r.label = opts.other_label;
    dedup();
  }

  std::stable_sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) { return a.t < b.t; });
  Alphabet alphabet;
  std::vector<Occurrence> pairs;
  pairs.reserve(raw.size());
  for (const auto& r : raw) pairs.push_back({r.t, alphabet.intern(r.label)});
  return EventSequence(std::move(pairs), std::move(alphabet), collapsed);
}

/// Writes the sorted pairs in the input format.
inline void write_sequence(std::ostream& out, const EventSequence& seq, char sep = '\t') {
  for (const auto& o : seq.pairs()) out << o.t << sep << seq.alphabet().label(o.event) << '\n';
}

struct SequenceSummary {
  std::size_t len = 0;
  Time span = 0;
  Time t_start = 0;
  Time t_end = 0;
  std::size_t alphabet_size = 0;
  std::vector<std::size_t> counts;  // indexed by event id
  double median_count = 0.0;
  std::size_t max_count = 0;
};

inline SequenceSummary stats(const EventSequence& seq) {
  SequenceSummary s;
  s.len = seq.size();
  s.span = seq.span();
  s.t_start = seq.t_start();
  s.t_end = seq.t_end();
  s.alphabet_size = seq.alphabet().size();
  for (std::size_t e = 0; e < s.alphabet_size; ++e) s.counts.push_back(seq.count(static_cast<EventId>(e)));
  if (!s.counts.empty()) {
    std::vector<std::size_t> sorted = s.counts;
    std::sort(sorted.begin(), sorted.end());
    std::size_t n = sorted.size();
    s.median_count = n % 2 ? static_cast<double>(sorted[n / 2])
                           : (static_cast<double>(sorted[n / 2 - 1]) + static_cast<double>(sorted[n / 2])) / 2.0;
    s.max_count = sorted.back();
  }
  return s;
}

}  // namespace ppmdl
