#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "ppmdl/miner.hpp"
#include "ppmdl/synth.hpp"

namespace ppmdl::cli {

using json = nlohmann::ordered_json;

enum ExitCode { Ok = 0, Usage = 1, DataError = 2 };

inline json cost_json(const CostBreakdown& c) {
  return {{"A", c.A}, {"R", c.R}, {"p0", c.p0}, {"D", c.D}, {"tau", c.tau}, {"E", c.E}, {"total", c.total()}};
}

inline json report_json(const CollectionReport& r, std::size_t patterns) {
  return {{"patterns", patterns},
          {"total_bits", r.total},
          {"pattern_bits", r.pattern_bits},
          {"residual_bits", r.residual_bits},
          {"baseline_bits", r.baseline},
          {"percent_L", r.percent_L},
          {"L_R", r.lr_ratio},
          {"s", r.simple},
          {"v", r.vertical},
          {"h", r.horizontal},
          {"m", r.mixed},
          {"residuals", r.residual_count},
          {"max_cover", r.max_cover}};
}

inline json input_json(const std::string& file, const EventSequence& seq) {
  return {{"file", file},
          {"len", seq.size()},
          {"span", seq.span()},
          {"t_start", seq.t_start()},
          {"t_end", seq.t_end()},
          {"alphabet_size", seq.alphabet().size()},
          {"collapsed_duplicates", seq.collapsed_duplicates()}};
}

struct IngestFlags {
  Time granularity = 1;
  bool succession = false;
  std::string separator = "auto";
  std::size_t rare = 0;

  void attach(CLI::App* app) {
    app->add_option("--granularity", granularity, "time-unit divisor (floor division)")->check(CLI::PositiveNumber);
    app->add_flag("--succession", succession, "replace timestamps by event ranks");
    app->add_option("--separator", separator, "tab, comma or auto")->check(CLI::IsMember({"tab", "comma", "auto"}));
    app->add_option("--aggregate-rare", rare, "relabel events with fewer occurrences to 'other'");
  }

  EventSequence load(const std::string& file) const {
    std::ifstream in(file);
    if (!in) throw DomainError("cannot open '" + file + "'");
    IngestOptions o;
    o.granularity = granularity;
    o.succession = succession;
    o.separator = separator == "tab" ? Separator::Tab : separator == "comma" ? Separator::Comma : Separator::Auto;
    if (rare > 0) o.rare_threshold = rare;
    return load_sequence(in, o);
  }

  json echo() const {
    return {{"granularity", granularity}, {"succession", succession}, {"separator", separator}, {"aggregate_rare", rare}};
  }
};

struct MiningFlags {
  MiningConfig cfg;
  bool no_interleaving = false;

  void attach(CLI::App* app) {
    app->add_option("--k", cfg.k, "candidates kept per occurrence")->check(CLI::PositiveNumber);
    app->add_option("--max-rounds", cfg.max_rounds, "combination rounds")->check(CLI::NonNegativeNumber);
    app->add_flag("--cycles-only", cfg.cycles_only, "stop after cycle extraction");
    app->add_flag("--no-interleaving", no_interleaving, "reject interleaved patterns");
    app->add_option("--clique-cap", cfg.clique_node_cap, "largest component for exact clique enumeration")
        ->check(CLI::PositiveNumber);
    app->add_option("--threads", cfg.threads, "worker threads")->check(CLI::PositiveNumber);
    app->add_option("--seed", cfg.deterministic_seed, "recorded in the report");
  }

  MiningConfig config() const {
    MiningConfig c = cfg;
    c.allow_interleaving = !no_interleaving;
    return c;
  }

  json echo() const {
    MiningConfig c = config();
    return {{"k", c.k},
            {"max_rounds", c.max_rounds},
            {"allow_interleaving", c.allow_interleaving},
            {"clique_node_cap", c.clique_node_cap},
            {"seed", c.deterministic_seed},
            {"cycles_only", c.cycles_only}};
  }
};

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

inline std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

inline void print_stage_table(std::ostream& out, const std::vector<StageResult>& stages) {
  out << std::left << std::setw(7) << "stage" << std::right << std::setw(7) << "pool" << std::setw(10) << "patterns"
      << std::setw(9) << "%L" << std::setw(8) << "L:R" << std::setw(5) << "s" << std::setw(5) << "v" << std::setw(5)
      << "h" << std::setw(5) << "m" << std::setw(10) << "residuals" << std::setw(6) << "c+" << '\n';
  for (const auto& st : stages) {
    const auto& r = st.report;
    out << std::left << std::setw(7) << st.name << std::right << std::setw(7) << st.pool_size << std::setw(10)
        << st.selection.patterns.size() << std::setw(9) << fmt(r.percent_L, 2) << std::setw(8) << fmt(r.lr_ratio, 3)
        << std::setw(5) << r.simple << std::setw(5) << r.vertical << std::setw(5) << r.horizontal << std::setw(5)
        << r.mixed << std::setw(10) << r.residual_count << std::setw(6) << r.max_cover << '\n';
  }
}

// Human tables cut long correction lists; files and JSON keep the full notation.
inline std::string shorten(const std::string& notation, std::size_t width = 120) {
  return notation.size() <= width ? notation : notation.substr(0, width - 3) + "...";
}

inline void print_cost_row(std::ostream& out, const std::string& notation, const CostBreakdown& c) {
  out << "  A " << fmt(c.A) << "  R " << fmt(c.R) << "  p0 " << fmt(c.p0) << "  D " << fmt(c.D) << "  tau "
      << fmt(c.tau) << "  E " << fmt(c.E) << "  total " << fmt(c.total()) << "  " << shorten(notation) << '\n';
}

inline int cmd_mine(const std::string& file, const IngestFlags& ingest, const MiningFlags& flags,
                    const std::string& out_path, const std::string& patterns_out, std::ostream& out) {
  EventSequence seq = ingest.load(file);
  MiningResult r = mine(seq, flags.config());
  const auto& al = seq.alphabet();

  json j;
  j["command"] = "mine";
  j["input"] = input_json(file, seq);
  j["config"] = flags.echo();
  j["config"]["ingest"] = ingest.echo();
  j["stages"] = json::array();
  for (const auto& st : r.stages) {
    json s = report_json(st.report, st.selection.patterns.size());
    s["name"] = st.name;
    s["pool_size"] = st.pool_size;
    j["stages"].push_back(std::move(s));
  }
  j["selected_stage"] = r.stage;
  j["summary"] = report_json(r.report, r.selection.patterns.size());
  j["patterns"] = json::array();
  for (std::size_t i = 0; i < r.selection.patterns.size(); ++i) {
    const auto& c = r.selection.patterns[i];
    j["patterns"].push_back({{"notation", format_pattern(c.pattern, &al)},
                             {"cover", c.cover.size()},
                             {"provenance", provenance_name(c.provenance)},
                             {"cost", cost_json(r.report.costs[i])}});
  }
  json timing;
  for (const auto& [name, ms] : r.timings_ms) timing[name] = ms;
  j["timing_ms"] = timing;

  if (!out_path.empty()) write_json(out_path, j);
  if (!patterns_out.empty()) {
    std::ofstream pf(patterns_out);
    if (!pf) throw DomainError("cannot write '" + patterns_out + "'");
    for (const auto& c : r.selection.patterns) pf << format_pattern(c.pattern, &al) << '\n';
  }

  out << "input: " << seq.size() << " pairs, span " << seq.span() << ", " << al.size() << " events\n";
  print_stage_table(out, r.stages);
  out << "selected: " << r.stage << "  total " << fmt(r.report.total) << " bits  baseline " << fmt(r.report.baseline)
      << " bits  %L " << fmt(r.report.percent_L, 2) << '\n';
  for (std::size_t i = 0; i < r.selection.patterns.size(); ++i)
    print_cost_row(out, format_pattern(r.selection.patterns[i].pattern, &al), r.report.costs[i]);
  return Ok;
}

inline int cmd_score(const std::string& file, const IngestFlags& ingest, const std::string& patterns_path,
                     std::optional<Time> t_start, std::optional<Time> t_end, bool no_interleaving,
                     const std::string& out_path, std::ostream& out) {
  EventSequence seq = ingest.load(file);
  std::ifstream pin(patterns_path);
  if (!pin) throw DomainError("cannot open '" + patterns_path + "'");
  Alphabet al = seq.alphabet();
  auto patterns = read_patterns(pin, al);
  SeqStats stats = SeqStats::of(seq);
  if (t_start) stats.t_start = *t_start;
  if (t_end) stats.t_end = *t_end;
  if (stats.t_start > seq.t_start() || stats.t_end < seq.t_end())
    throw DomainError("context range must enclose the sequence");
  auto r = collection_cost(patterns, seq, stats, !no_interleaving);

  json j;
  j["command"] = "score";
  j["input"] = input_json(file, seq);
  j["context"] = {{"t_start", stats.t_start}, {"t_end", stats.t_end}, {"allow_interleaving", !no_interleaving}};
  j["summary"] = report_json(r, patterns.size());
  j["patterns"] = json::array();
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    json d = json::array();
    for (const auto& t : r.costs[i].d_terms)
      d.push_back({{"kind", t.kind == DTerm::Kind::Width ? "width" : t.kind == DTerm::Kind::Period ? "period" : "distance"},
                   {"value", t.value},
                   {"bits", t.bits}});
    j["patterns"].push_back({{"notation", format_pattern(patterns[i], &al)},
                             {"cover", pattern_occurrences(patterns[i]).size()},
                             {"cost", cost_json(r.costs[i])},
                             {"D_terms", d}});
  }
  if (!out_path.empty()) write_json(out_path, j);

  for (std::size_t i = 0; i < patterns.size(); ++i) print_cost_row(out, format_pattern(patterns[i], &al), r.costs[i]);
  out << "patterns " << fmt(r.pattern_bits) << "  residuals " << fmt(r.residual_bits) << " (" << r.residual_count
      << ")  total " << fmt(r.total) << "  baseline " << fmt(r.baseline) << "  %L " << fmt(r.percent_L, 2) << "  L:R "
      << fmt(r.lr_ratio) << '\n';
  return Ok;
}

inline int cmd_stats(const std::string& file, const IngestFlags& ingest, std::ostream& out) {
  EventSequence seq = ingest.load(file);
  auto s = stats(seq);
  const SeqStats cs = SeqStats::of(seq);
  out << "len\t" << s.len << "\nspan\t" << s.span << "\nt_start\t" << s.t_start << "\nt_end\t" << s.t_end
      << "\nalphabet\t" << s.alphabet_size << "\nmedian_count\t" << s.median_count << "\nmax_count\t" << s.max_count
      << "\ncollapsed_duplicates\t" << seq.collapsed_duplicates() << "\nbaseline_bits\t" << fmt(baseline_cost(seq, cs))
      << '\n';
  for (std::size_t e = 0; e < s.counts.size(); ++e)
    out << "count\t" << seq.alphabet().label(static_cast<EventId>(e)) << '\t' << s.counts[e] << '\n';
  return Ok;
}

inline PlantSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  return read_spec(in);
}

inline int cmd_synth(const std::string& spec_path, const std::string& seq_out, const std::string& planted_out,
                     std::ostream& out) {
  GroundTruth g = generate(load_spec(spec_path));
  std::ofstream s(seq_out);
  if (!s) throw DomainError("cannot write '" + seq_out + "'");
  write_sequence(s, g.perturbed);
  if (!planted_out.empty()) {
    std::ofstream p(planted_out);
    if (!p) throw DomainError("cannot write '" + planted_out + "'");
    write_planted(p, g);
  }
  out << "wrote " << g.perturbed.size() << " pairs, " << g.planted.size() << " planted pattern(s)\n";
  return Ok;
}

inline int cmd_synth_eval(const std::string& spec_path, int trials, const MiningFlags& flags,
                          const std::string& out_path, std::ostream& out) {
  const PlantSpec base = load_spec(spec_path);
  std::vector<Evaluation> evals;
  json runs = json::array();
  for (int t = 0; t < trials; ++t) {
    PlantSpec spec = base;
    spec.seed = base.seed + static_cast<std::uint64_t>(t);
    GroundTruth g = generate(spec);
    MiningResult r = mine(g.perturbed, flags.config());
    Evaluation e = evaluate(patterns_of(r.selection), g, g.perturbed, flags.config().allow_interleaving);
    evals.push_back(e);
    runs.push_back({{"seed", spec.seed},
                    {"exact_recovery", e.exact_recovery},
                    {"percent_L_found", e.percent_L_found},
                    {"percent_L_planted", e.percent_L_planted},
                    {"diff", e.diff}});
  }
  std::size_t exact = 0;
  std::vector<double> diffs;
  for (const auto& e : evals) {
    exact += e.exact_recovery;
    diffs.push_back(e.diff);
  }
  std::sort(diffs.begin(), diffs.end());
  const double rate = trials ? static_cast<double>(exact) / trials : 0.0;
  double mean = 0;
  for (double d : diffs) mean += d;
  if (!diffs.empty()) mean /= static_cast<double>(diffs.size());

  json j;
  j["command"] = "synth-eval";
  j["config"] = flags.echo();
  j["trials"] = trials;
  j["recovery_rate"] = rate;
  if (!diffs.empty())
    j["diff"] = {{"min", diffs.front()}, {"median", diffs[diffs.size() / 2]}, {"mean", mean}, {"max", diffs.back()}};
  j["runs"] = runs;
  if (!out_path.empty()) write_json(out_path, j);

  out << "trials " << trials << "  exact recovery " << exact << "/" << trials << " (" << fmt(100 * rate, 1) << "%)\n";
  if (!diffs.empty())
    out << "%L_F - %L_H  min " << fmt(diffs.front(), 2) << "  median " << fmt(diffs[diffs.size() / 2], 2) << "  mean "
        << fmt(mean, 2) << "  max " << fmt(diffs.back(), 2) << '\n';
  return Ok;
}

/// Entry point shared by the executable and the tests.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mine periodic patterns that compress an event log.", "ppmdl"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  IngestFlags ingest;
  MiningFlags mining;
  std::string file, out_path, patterns_path, patterns_out, spec_path, seq_out;
  std::optional<Time> t_start, t_end;
  bool no_interleaving = false;
  int trials = 10;

  auto* mine_cmd = app.add_subcommand("mine", "run the full mining pipeline");
  mine_cmd->add_option("file", file, "event log")->required();
  ingest.attach(mine_cmd);
  mining.attach(mine_cmd);
  mine_cmd->add_option("--out", out_path, "JSON report");
  mine_cmd->add_option("--patterns-out", patterns_out, "selected patterns in notation");

  auto* score_cmd = app.add_subcommand("score", "cost a given pattern collection");
  score_cmd->add_option("file", file, "event log")->required();
  score_cmd->add_option("--patterns", patterns_path, "pattern file")->required();
  ingest.attach(score_cmd);
  score_cmd->add_option("--t-start", t_start, "context start (defaults to the first timestamp)");
  score_cmd->add_option("--t-end", t_end, "context end (defaults to the last timestamp)");
  score_cmd->add_flag("--no-interleaving", no_interleaving, "reject interleaved patterns");
  score_cmd->add_option("--out", out_path, "JSON report");

  auto* stats_cmd = app.add_subcommand("stats", "print sequence statistics");
  stats_cmd->add_option("file", file, "event log")->required();
  ingest.attach(stats_cmd);

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic sequence");
  synth_cmd->add_option("--spec", spec_path, "plant spec (key=value)")->required();
  synth_cmd->add_option("--out", seq_out, "sequence file")->required();
  synth_cmd->add_option("--planted", patterns_out, "planted patterns file");

  auto* eval_cmd = app.add_subcommand("synth-eval", "generate, mine and evaluate synthetic sequences");
  eval_cmd->add_option("--spec", spec_path, "plant spec (key=value)")->required();
  eval_cmd->add_option("--trials", trials, "number of seeds (seed, seed+1, ...)")->check(CLI::PositiveNumber);
  mining.attach(eval_cmd);
  eval_cmd->add_option("--out", out_path, "JSON report");

  std::reverse(args.begin(), args.end());  // CLI11 parses a reversed vector
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? Ok : Usage;
  }

  try {
    if (*mine_cmd) return cmd_mine(file, ingest, mining, out_path, patterns_out, out);
    if (*score_cmd) return cmd_score(file, ingest, patterns_path, t_start, t_end, no_interleaving, out_path, out);
    if (*stats_cmd) return cmd_stats(file, ingest, out);
    if (*synth_cmd) return cmd_synth(spec_path, seq_out, patterns_out, out);
    if (*eval_cmd) return cmd_synth_eval(spec_path, trials, mining, out_path, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return DataError;
  }
  return Usage;
}

}  // namespace ppmdl::cli
