#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dynsparse/dynsparse.hpp"

namespace dynsparse::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kStreamViolation = 2,
  kPipelineFailure = 3,
  kVerifyFailure = 4,
};

struct RunOptions {
  std::string input = "-";
  std::string epsilon = "1/2";
  std::uint64_t seed = 1;
  std::string profile = "paper";
  bool checked = false;
  std::string gamma;
  std::string alpha;
  std::string kappa;
  std::uint32_t copies = 0;
  std::uint32_t weighted_bits = 0;
  bool best_effort = false;
  std::uint64_t cut_samples = 10000;
};

inline SketchConfig make_config(const RunOptions& o, Vertex n) {
  const Rational eps = Rational::parse(o.epsilon);
  SketchConfig c;
  if (o.profile == "paper") {
    c = SketchConfig::paper(n, eps, o.seed);
  } else if (o.profile == "desk") {
    c = SketchConfig::desk(n, eps, o.seed);
  } else {
    throw ConfigError("unknown profile '" + o.profile + "'");
  }
  if (!o.gamma.empty()) c.gamma = Rational::parse(o.gamma);
  if (!o.alpha.empty()) c.alpha = Rational::parse(o.alpha);
  if (!o.kappa.empty()) c.kappa = Rational::parse(o.kappa);
  if (o.copies != 0) {
    c.level_copies = o.copies;
    c.recovery_copies = o.copies;
  }
  c.checked = o.checked;
  return c;
}

/// Everything one pass over the stream produces.
struct Ingested {
  StreamHeader header;
  SketchConfig config;
  std::unique_ptr<SketchBank> bank;              // unweighted streams
  std::unique_ptr<WeightedSketchBank> weighted;  // weighted streams
  std::unique_ptr<ShadowGraph> shadow;           // only when verifying
  std::int64_t net_edges = 0;
  std::uint64_t updates = 0;
  std::map<std::uint64_t, std::uint64_t> touched_histogram;
  std::uint64_t touched_total = 0;
};

inline Ingested ingest_stream(std::istream& in, const RunOptions& o, bool with_shadow) {
  StreamReader reader(in);
  Ingested st;
  st.header = reader.header();
  st.config = make_config(o, st.header.vertices);
  std::uint64_t max_weight = st.header.max_weight;
  if (o.weighted_bits != 0) {
    if (o.weighted_bits > 62) throw ConfigError("--weighted-bits must be at most 62");
    max_weight = (std::uint64_t{1} << o.weighted_bits) - 1;
  }
  if (max_weight != 0) {
    st.weighted = std::make_unique<WeightedSketchBank>(st.config, max_weight);
  } else {
    st.bank = std::make_unique<SketchBank>(st.config);
  }
  if (with_shadow) st.shadow = std::make_unique<ShadowGraph>(st.header.vertices);

  while (auto upd = reader.next()) {
    if (st.shadow) st.shadow->apply(*upd);
    const std::uint64_t touched = st.weighted ? st.weighted->ingest(*upd) : st.bank->ingest(*upd);
    st.net_edges += upd->sign;
    ++st.updates;
    st.touched_total += touched;
    ++st.touched_histogram[touched];
  }
  return st;
}

inline Sparsifier extract(const Ingested& st, const RunOptions& o) {
  SparsifyOptions so;
  so.policy = o.best_effort ? FailurePolicy::kBestEffort : FailurePolicy::kRaise;
  return st.weighted ? sparsify_weighted(*st.weighted, so) : sparsify(*st.bank, so);
}

inline MemoryWords memory_of(const Ingested& st) {
  if (st.bank) return st.bank->memory_words();
  MemoryWords total;
  for (std::size_t b = 0; b < st.weighted->bits(); ++b) {
    const MemoryWords m = st.weighted->bank(b).memory_words();
    total.materialized += m.materialized;
    total.nominal += m.nominal;
  }
  return total;
}

inline nlohmann::ordered_json stats_report(const Ingested& st, const Sparsifier& sp) {
  const ResolvedParams p = resolve(st.config);
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["n"] = st.header.vertices;
  j["m"] = st.net_edges;
  j["updates"] = st.updates;
  j["epsilon"] = st.config.epsilon.to_string();
  j["seed"] = st.config.seed;
  j["profile"] = to_string(st.config.profile);
  j["max_weight"] = st.weighted ? st.weighted->max_weight() : 1;
  j["sparsifier_size"] = sp.edges.size();
  j["level_counts"] = sp.level_counts;
  j["duplicates"] = sp.duplicates;
  nlohmann::ordered_json hist = nlohmann::ordered_json::object();
  for (const auto& [cells, count] : st.touched_histogram) hist[std::to_string(cells)] = count;
  j["touched_cells_per_update"] = {
      {"mean", st.updates == 0 ? 0.0 : static_cast<double>(st.touched_total) / static_cast<double>(st.updates)},
      {"histogram", hist}};
  const MemoryWords mem = memory_of(st);
  j["memory_words"] = {{"materialized", mem.materialized}, {"nominal", mem.nominal}};
  j["params"] = {{"rate_numerator", p.rate_numerator.to_string()},
                 {"shift", p.shift},
                 {"max_level", p.max_level},
                 {"level_copies", p.level_copies},
                 {"recovery_copies", p.recovery_copies},
                 {"sparsity", p.sparsity},
                 {"peel_threshold", p.peel_threshold},
                 {"independence", p.independence},
                 {"projections", p.projections}};
  j["warnings"] = sp.warnings;
  return j;
}

inline void print_edges(std::ostream& out, const Sparsifier& sp) {
  for (const auto& e : sp.edges) {
    out << e.u << ' ' << e.v << ' ' << to_string(e.weight.num()) << ' ' << to_string(e.weight.den()) << '\n';
  }
}

/// Runs the command line `args` (without the program name). Returns the exit code.
inline int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cut sparsifiers of dynamic graph streams from linear sketches"};
  app.require_subcommand(1);
  RunOptions o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("stream", o.input, "stream file, '-' for standard input")->capture_default_str();
    sub->add_option("--epsilon", o.epsilon, "accuracy in (0, 1), decimal or p/q")
        ->envname("DYNSPARSE_EPSILON")
        ->capture_default_str();
    sub->add_option("--seed", o.seed, "master seed")->envname("DYNSPARSE_SEED")->capture_default_str();
    sub->add_option("--profile", o.profile, "constant profile")
        ->check(CLI::IsMember({"paper", "desk"}))
        ->envname("DYNSPARSE_PROFILE")
        ->capture_default_str();
    sub->add_flag("--checked", o.checked, "reject invalid streams")->envname("DYNSPARSE_CHECKED");
    sub->add_option("--gamma", o.gamma, "sampling-rate constant")->envname("DYNSPARSE_GAMMA");
    sub->add_option("--alpha", o.alpha, "peeling-threshold constant")->envname("DYNSPARSE_ALPHA");
    sub->add_option("--kappa", o.kappa, "sparsity-budget constant")->envname("DYNSPARSE_KAPPA");
    sub->add_option("--copies", o.copies, "copies per exponent for connectivity and recovery")
        ->envname("DYNSPARSE_COPIES");
    sub->add_option("--weighted-bits", o.weighted_bits, "weights up to 2^bits - 1")
        ->envname("DYNSPARSE_WEIGHTED_BITS");
    sub->add_flag("--best-effort", o.best_effort, "downgrade sketch failures to warnings")
        ->envname("DYNSPARSE_BEST_EFFORT");
  };
  CLI::App* sparsify_cmd = app.add_subcommand("sparsify", "print the sparsifier as 'u v p q' lines (weight p/q)");
  CLI::App* stats_cmd = app.add_subcommand("stats", "print a JSON report of sketch and sparsifier statistics");
  CLI::App* verify_cmd = app.add_subcommand("verify", "compare sparsifier cuts with exact cuts (n <= 256)");
  add_common(sparsify_cmd);
  add_common(stats_cmd);
  add_common(verify_cmd);
  verify_cmd->add_option("--cut-samples", o.cut_samples, "random cuts checked when n > 16")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kUsage;
  }

  try {
    std::ifstream file;
    std::istream* src = &in;
    if (o.input != "-") {
      file.open(o.input);
      if (!file) {
        err << "cannot open " << o.input << '\n';
        return kUsage;
      }
      src = &file;
    }
    const bool verifying = verify_cmd->parsed();
    const Ingested st = ingest_stream(*src, o, verifying);
    const Sparsifier sp = extract(st, o);
    for (const auto& w : sp.warnings) err << "warning: " << w << '\n';

    if (sparsify_cmd->parsed()) {
      print_edges(out, sp);
      return kOk;
    }
    if (stats_cmd->parsed()) {
      out << stats_report(st, sp).dump(2) << '\n';
      return kOk;
    }
    const CutErrorReport rep = all_cuts_error(*st.shadow, sp.edges, st.config.seed, o.cut_samples);
    const bool pass = rep.max_error <= st.config.epsilon.value();
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["n"] = st.header.vertices;
    j["m"] = st.shadow->edge_count();
    j["sparsifier_size"] = sp.edges.size();
    j["epsilon"] = st.config.epsilon.to_string();
    j["cuts_checked"] = rep.cuts;
    j["exhaustive"] = rep.exhaustive;
    j["max_relative_error"] = rep.max_error;
    j["mean_relative_error"] = rep.mean_error;
    j["pass"] = pass;
    out << j.dump(2) << '\n';
    return pass ? kOk : kVerifyFailure;
  } catch (const StreamFormatError& e) {
    err << "malformed stream: " << e.what() << '\n';
    return kUsage;
  } catch (const StreamViolation& e) {
    err << "stream violation: " << e.what() << '\n';
    return kStreamViolation;
  } catch (const PipelineError& e) {
    err << "extraction failed: " << e.what() << '\n';
    return kPipelineFailure;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace dynsparse::cli
