#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ppmdl/codec.hpp"
#include "ppmdl/notation.hpp"

namespace ppmdl {

enum class Basis { A, AB, ACD };  // (a), (a d=4 b), (a d=1 c d=2 d)

using IntRange = std::pair<Time, Time>;

struct PlantSpec {
  Basis basis = Basis::A;
  int depth = 1;
  IntRange inner_period{5, 9};
  IntRange inner_length{5, 10};
  IntRange outer_length{3, 5};
  /// Non-interleaved outer periods are the child span plus a gap from this range.
  IntRange outer_gap{1, 10};
  IntRange start{0, 20};
  Time shift_level = 0;
  double shift_density = 0;
  double additive_density = 0;
  bool interleaving = false;
  std::uint64_t seed = 1;
  int patterns = 1;
  bool overlap = false;
};

struct GroundTruth {
  std::vector<Pattern> planted;  // corrections reflect the shift noise
  EventSequence clean;           // union of the planted trees at zero correction
  EventSequence perturbed;       // shifted occurrences plus spurious ones
};

namespace detail {

inline std::size_t noise_count(double density, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(density * static_cast<double>(n) - 1e-9));
}

inline Time draw(std::mt19937_64& rng, IntRange r) {
  if (r.first > r.second) throw DomainError("empty range " + std::to_string(r.first) + "-" + std::to_string(r.second));
  return std::uniform_int_distribution<Time>(r.first, r.second)(rng);
}

inline bool has_collision(const std::vector<Occurrence>& occ) {
  std::vector<Occurrence> s = occ;
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) != s.end();
}

/// Tree for one planted pattern over events `ids` (a, then b or c, d).
inline PatternTree plant_tree(const PlantSpec& spec, const std::vector<EventId>& ids, std::mt19937_64& rng) {
  std::vector<Block> children;
  std::vector<Time> distances;
  switch (spec.basis) {
    case Basis::A: children = {leaf(ids[0])}; break;
    case Basis::AB:
      children = {leaf(ids[0]), leaf(ids[1])};
      distances = {4};
      break;
    case Basis::ACD:
      children = {leaf(ids[0]), leaf(ids[1]), leaf(ids[2])};
      distances = {1, 2};
      break;
  }
  const Time basis_width = std::accumulate(distances.begin(), distances.end(), Time{0});
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Block inner = block(static_cast<int>(draw(rng, spec.inner_length)), draw(rng, spec.inner_period), children,
                        distances);
    if (inner.repetitions < 2 || inner.period < 1) throw DomainError("inner length must be >= 2 and period >= 1");
    if (!spec.interleaving && inner.period <= basis_width) continue;
    Block cur = inner;
    for (int level = 1; level < spec.depth; ++level) {
      const int r = static_cast<int>(draw(rng, spec.outer_length));
      if (r < 2) throw DomainError("outer length must be >= 2");
      const Time span = perfect_span(cur);
      const Time p = spec.interleaving ? draw(rng, {1, std::max<Time>(1, span)}) : span + draw(rng, spec.outer_gap);
      if (p < 1) throw DomainError("outer gap must keep periods positive");
      cur = block(r, p, {cur});
    }
    PatternTree t{cur};
    if (!has_collision(occs_star(t))) return t;
  }
  throw DomainError("could not plant a collision-free pattern with these ranges");
}

/// Displaces occurrences 1..N-1 of `targets` in place.
inline void shift_noise(std::vector<Occurrence>& occ, const PlantSpec& spec, std::mt19937_64& rng) {
  const std::size_t n = occ.size();
  const std::size_t want = noise_count(spec.shift_density, n - 1);
  if (want == 0) return;
  if (spec.shift_level < 1) throw DomainError("shift noise needs level >= 1");
  std::vector<std::size_t> order(n - 1);
  std::iota(order.begin(), order.end(), 1);
  std::shuffle(order.begin(), order.end(), rng);
  std::set<Occurrence> taken(occ.begin(), occ.end());
  std::size_t done = 0;
  for (std::size_t i : order) {
    if (done == want) break;
    for (int attempt = 0; attempt < 32; ++attempt) {
      Time delta = std::uniform_int_distribution<Time>(-spec.shift_level, spec.shift_level - 1)(rng);
      if (delta >= 0) ++delta;  // nonzero
      const Time t = occ[i].t + delta;
      if (t < 0 || taken.count({t, occ[i].event})) continue;
      if (!spec.interleaving && (t <= occ[i - 1].t || (i + 1 < n && t >= occ[i + 1].t))) continue;
      taken.erase(occ[i]);
      occ[i].t = t;
      taken.insert(occ[i]);
      ++done;
      break;
    }
  }
  if (done < want) throw DomainError("could not place the requested shift noise");
}

}  // namespace detail

inline GroundTruth generate(const PlantSpec& spec) {
  if (spec.depth < 1 || spec.depth > 3) throw DomainError("depth must be in 1..3");
  if (spec.patterns < 1) throw DomainError("patterns must be >= 1");
  for (double d : {spec.shift_density, spec.additive_density})
    if (d < 0 || d > 1) throw DomainError("densities must lie in [0, 1]");
  if (spec.shift_level < 0) throw DomainError("shift level must be >= 0");

  std::mt19937_64 rng(spec.seed);
  Alphabet alphabet;
  const std::vector<std::string> base = spec.basis == Basis::A    ? std::vector<std::string>{"a"}
                                        : spec.basis == Basis::AB ? std::vector<std::string>{"a", "b"}
                                                                  : std::vector<std::string>{"a", "c", "d"};
  GroundTruth g;
  std::vector<Occurrence> clean, perturbed;
  Time previous_start = 0, previous_end = -1;
  for (int k = 0; k < spec.patterns; ++k) {
    std::vector<EventId> ids;
    for (const auto& b : base) ids.push_back(alphabet.intern(spec.patterns == 1 ? b : "p" + std::to_string(k) + "." + b));
    PatternTree tree = detail::plant_tree(spec, ids, rng);

    Time tau;
    if (k == 0)
      tau = detail::draw(rng, spec.start);
    else if (spec.overlap)
      tau = detail::draw(rng, {previous_start, previous_end});
    else
      tau = previous_end + 1 + detail::draw(rng, spec.outer_gap);

    Pattern p{tree, tau, std::vector<Time>(occurrence_count(tree) - 1, 0)};
    auto occ = corrected_occurrences(p);
    clean.insert(clean.end(), occ.begin(), occ.end());
    detail::shift_noise(occ, spec, rng);
    std::vector<Time> targets;
    for (const auto& o : occ) targets.push_back(o.t);
    p.corrections = solve_corrections(p.tree, p.tau, targets);

    Time lo = occ.front().t, hi = lo;
    std::set<Time> a_times;
    for (const auto& o : occ) {
      lo = std::min(lo, o.t);
      hi = std::max(hi, o.t);
      if (o.event == ids[0]) a_times.insert(o.t);
    }
    perturbed.insert(perturbed.end(), occ.begin(), occ.end());
    const std::size_t spurious = detail::noise_count(spec.additive_density, occ.size());
    if (spurious > static_cast<std::size_t>(hi - lo + 1) - a_times.size())
      throw DomainError("not enough free timestamps for the additive noise");
    for (std::size_t s = 0; s < spurious;) {
      Time t = detail::draw(rng, {lo, hi});
      if (a_times.insert(t).second) {
        perturbed.push_back({t, ids[0]});
        ++s;
      }
    }
    g.planted.push_back(std::move(p));
    previous_start = tau;
    previous_end = std::max(previous_end, hi);
  }
  g.clean = EventSequence(std::move(clean), alphabet);
  g.perturbed = EventSequence(std::move(perturbed), alphabet);
  return g;
}

struct Evaluation {
  bool exact_recovery = false;
  double percent_L_found = 100;
  double percent_L_planted = 100;
  double diff = 0;
};

/// Compares found patterns with the planted ones on `seq`.
inline Evaluation evaluate(const std::vector<Pattern>& found, const GroundTruth& truth, const EventSequence& seq,
                           bool allow_interleaving = true) {
  auto signature = [](const std::vector<Pattern>& ps) {
    std::vector<std::pair<std::string, std::vector<Occurrence>>> s;
    for (const auto& p : ps) s.emplace_back(format_tree(p.tree, nullptr), pattern_occurrences(p));
    std::sort(s.begin(), s.end());
    return s;
  };
  const SeqStats stats = SeqStats::of(seq);
  Evaluation e;
  e.exact_recovery = signature(found) == signature(truth.planted);
  e.percent_L_found = collection_cost(found, seq, stats, allow_interleaving).percent_L;
  e.percent_L_planted = collection_cost(truth.planted, seq, stats, allow_interleaving).percent_L;
  e.diff = e.percent_L_found - e.percent_L_planted;
  return e;
}

// ─── Spec files: key=value lines, '#' comments ───────────────────────────

namespace detail {

inline IntRange parse_range(const std::string& v) {
  auto dash = v.find('-', 1);
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    long long x = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<Time>(x);
  };
  if (dash == std::string::npos) return {num(v), num(v)};
  return {num(v.substr(0, dash)), num(v.substr(dash + 1))};
}

inline bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw std::invalid_argument(v);
}

}  // namespace detail

inline PlantSpec read_spec(std::istream& in) {
  PlantSpec s;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError(lineno, "expected key=value");
    std::string key(detail::trim(t.substr(0, eq))), val(detail::trim(t.substr(eq + 1)));
    try {
      if (key == "basis") {
        if (val == "a") s.basis = Basis::A;
        else if (val == "ab") s.basis = Basis::AB;
        else if (val == "acd") s.basis = Basis::ACD;
        else throw std::invalid_argument(val);
      } else if (key == "depth") s.depth = static_cast<int>(detail::parse_range(val).first);
      else if (key == "inner_period") s.inner_period = detail::parse_range(val);
      else if (key == "inner_length") s.inner_length = detail::parse_range(val);
      else if (key == "outer_length") s.outer_length = detail::parse_range(val);
      else if (key == "outer_gap") s.outer_gap = detail::parse_range(val);
      else if (key == "start") s.start = detail::parse_range(val);
      else if (key == "shift_level") s.shift_level = detail::parse_range(val).first;
      else if (key == "shift_density") s.shift_density = std::stod(val);
      else if (key == "additive_density") s.additive_density = std::stod(val);
      else if (key == "interleaving") s.interleaving = detail::parse_bool(val);
      else if (key == "seed") s.seed = std::stoull(val);
      else if (key == "patterns") s.patterns = static_cast<int>(detail::parse_range(val).first);
      else if (key == "overlap") s.overlap = detail::parse_bool(val);
      else throw ParseError(lineno, "unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw ParseError(lineno, "bad value for '" + key + "': '" + val + "'");
    } catch (const std::out_of_range&) {
      throw ParseError(lineno, "value out of range for '" + key + "'");
    }
  }
  return s;
}

inline void write_spec(std::ostream& out, const PlantSpec& s) {
  auto range = [](IntRange r) { return std::to_string(r.first) + "-" + std::to_string(r.second); };
  out << "basis=" << (s.basis == Basis::A ? "a" : s.basis == Basis::AB ? "ab" : "acd") << '\n'
      << "depth=" << s.depth << '\n'
      << "inner_period=" << range(s.inner_period) << '\n'
      << "inner_length=" << range(s.inner_length) << '\n'
      << "outer_length=" << range(s.outer_length) << '\n'
      << "outer_gap=" << range(s.outer_gap) << '\n'
      << "start=" << range(s.start) << '\n'
      << "shift_level=" << s.shift_level << '\n'
      << "shift_density=" << s.shift_density << '\n'
      << "additive_density=" << s.additive_density << '\n'
      << "interleaving=" << (s.interleaving ? "true" : "false") << '\n'
      << "seed=" << s.seed << '\n'
      << "patterns=" << s.patterns << '\n'
      << "overlap=" << (s.overlap ? "true" : "false") << '\n';
}

/// Planted patterns in notation, one per line.
inline void write_planted(std::ostream& out, const GroundTruth& g) {
  for (const auto& p : g.planted) out << format_pattern(p, &g.perturbed.alphabet()) << '\n';
}

}  // namespace ppmdl
