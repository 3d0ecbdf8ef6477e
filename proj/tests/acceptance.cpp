// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// All thresholds below are fixed; reference values come from the exact oracles.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dynsparse/dynsparse.hpp"
#include "graph_gen.hpp"

using namespace dynsparse;
using testgen::Edge;

namespace {

// Lower-bound constant for s_e <= beta * 2^L(e) * log2 n.
constexpr double kSandwichBeta = 2.0;
// Size bound constant for |H| <= C * n * log2^3 n / eps^2.
constexpr double kSizeConstant = 1.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

// budget <= 0 means no wall-clock limit.
void report(int id, const char* name, const std::function<Outcome()>& body, double budget = 0) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o = body();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget > 0 && secs >= budget) {
    o.pass = false;
    o.detail += fmt(", over the %.0fs budget", budget);
  }
  std::printf("criterion %2d %-22s %s  %s  (%.1fs)\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}


LevelStructure levels_of(const SketchBank& bank) {
  const ResolvedParams& p = bank.params();
  return build_levels(p.vertices, p.max_level, p.level_copies,
                      [&](int a, std::uint32_t b) -> const ForestSketch& { return bank.forest(a, b); });
}

SketchBank bank_from(const SketchConfig& cfg, const std::vector<EdgeUpdate>& stream) {
  SketchBank bank(cfg);
  for (const auto& u : stream) bank.ingest(u);
  return bank;
}

// ---------------------------------------------------------------------------

Outcome linearity() {
  const Vertex n = 64;
  int equal = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    std::mt19937_64 rng(1000 + s);
    // ~500 distinct inserted edges, half of them deleted again.
    std::vector<Edge> all = testgen::gnp(n, 500.0 / (n * (n - 1) / 2), rng);
    auto [survivors, transient] = testgen::split_churn(all, 0.5, rng);
    const SketchConfig cfg = SketchConfig::desk(n, Rational(1, 2), s + 1);
    const SketchBank streamed = bank_from(cfg, testgen::churn_stream(survivors, transient, rng));
    std::shuffle(survivors.begin(), survivors.end(), rng);
    const SketchBank direct = bank_from(cfg, testgen::insertions(survivors));
    equal += streamed == direct;
  }
  return {equal == 100, fmt("%d/100 streams bit-exact", equal)};
}

Outcome forests() {
  const Vertex n = 100;
  int exact = 0;
  std::uint64_t phantom = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    std::mt19937_64 rng(2000 + s);
    const auto edges = testgen::gnp(n, 0.05, rng);
    auto [survivors, transient] = testgen::split_churn(edges, 0.3, rng);
    ForestSketch f(ForestParams{n, forest_rounds_for(n), l0_levels_for(pair_count(n)), 77 + s});
    for (const auto& u : testgen::churn_stream(survivors, transient, rng)) f.update_edge(u.u, u.v, u.sign);
    const SpanningForest sf = spanning_forest(f);
    const ShadowGraph g = testgen::shadow_of(n, survivors);
    for (auto [u, v] : sf.edges) phantom += g.weight(u, v) == 0;
    exact += (!sf.exhausted && sf.component == g.components());
  }
  return {exact >= 95 && phantom == 0, fmt("%d/100 exact components, %llu phantom edges", exact,
                                            static_cast<unsigned long long>(phantom))};
}

Outcome recovery() {
  const std::uint64_t k = 64;
  const std::uint64_t dim = pair_count(1u << 12);
  int exact = 0;
  int cancelled = 0;
  std::mt19937_64 rng(3);
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const RecoveryParams params{k, 4, 0, 3000 + s, dim};
    RecoverySketch sk(params);
    std::map<CoordIndex, std::int64_t> truth;
    const auto support = std::uniform_int_distribution<std::uint64_t>(0, k)(rng);
    while (truth.size() < support) {
      std::int64_t x = std::uniform_int_distribution<std::int64_t>(-3, 3)(rng);
      if (x == 0) x = 1;
      truth[rng() % dim] = x;
    }
    // Deliver each value as a few noisy +-1 updates that net out to it.
    std::vector<std::pair<CoordIndex, std::int64_t>> ops;
    for (auto [i, x] : truth) {
      for (std::int64_t j = 0; j < std::abs(x); ++j) ops.emplace_back(i, x > 0 ? 1 : -1);
      const CoordIndex noise = rng() % dim;
      ops.emplace_back(noise, 1);
      ops.emplace_back(noise, -1);
    }
    std::shuffle(ops.begin(), ops.end(), rng);
    for (auto [i, d] : ops) sk.update(i, d);

    const auto decoded = sk.decode();
    if (!decoded) continue;
    std::vector<SparseEntry> want;
    for (auto [i, x] : truth) want.push_back({i, x});
    exact += *decoded == want;
    RecoverySketch re(params);
    for (const auto& e : *decoded) re.update(e.index, e.value);
    cancelled += (sk - re).is_zero();
  }
  return {exact >= 999 && cancelled == exact,
          fmt("%d/1000 exact decodes, %d re-encodes cancel to zero", exact, cancelled)};
}

Outcome l1_estimate() {
  const double eps = 0.25;
  const int log_n = 10;
  const auto projections = static_cast<std::uint32_t>(std::ceil(2.0 * log_n / (eps * eps)));
  const Vertex n = 1u << log_n;
  std::mt19937_64 rng(4);
  auto within = [&](double est, double truth) { return std::abs(est - truth) <= eps * truth; };

  int rows_ok = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const DegreeParams p{projections, 4000 + s};
    DegreeSketch d(p);
    const Vertex v = static_cast<Vertex>(rng() % n);
    const auto deg = std::uniform_int_distribution<Vertex>(1, 300)(rng);
    std::set<Vertex> nbrs;
    while (nbrs.size() < deg) {
      const auto w = static_cast<Vertex>(rng() % n);
      if (w != v) nbrs.insert(w);
    }
    for (Vertex w : nbrs) d.update(encode_edge(v, w), incidence_sign(v, v, w));
    rows_ok += within(d.estimate(), static_cast<double>(deg));
  }

  int super_ok = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const DegreeParams p{projections, 5000 + s};
    const Vertex m = 48;
    const auto edges = testgen::gnp(m, 0.3, rng);
    std::vector<bool> in(m);
    for (Vertex v = 0; v < m; ++v) in[v] = rng() % 3 == 0;
    in[0] = true;
    in[m - 1] = false;
    DegreeSketch sum(p);
    std::vector<DegreeSketch> rows(m, DegreeSketch(p));
    for (auto [u, v] : edges) {
      rows[u].update(encode_edge(u, v), incidence_sign(u, u, v));
      rows[v].update(encode_edge(u, v), incidence_sign(v, u, v));
    }
    for (Vertex v = 0; v < m; ++v)
      if (in[v]) sum += rows[v];
    const double boundary = static_cast<double>(cut_value(testgen::shadow_of(m, edges), in));
    super_ok += boundary == 0 ? sum.is_zero() : within(sum.estimate(), boundary);
  }
  return {rows_ok >= 900 && super_ok >= 900,
          fmt("rows %d/1000, supernode boundaries %d/1000 within 1+-%.2f", rows_ok, super_ok, eps)};
}

// ---------------------------------------------------------------------------
// Shared corpus for the level, size and termination criteria.

struct CorpusGraph {
  std::string name;
  Vertex n;
  std::vector<Edge> edges;
};

std::vector<CorpusGraph> corpus() {
  std::vector<CorpusGraph> out;
  for (Vertex n : {16u, 32u, 64u}) out.push_back({fmt("K%u", n), n, testgen::complete(n)});
  for (Vertex k : {8u, 16u, 32u}) out.push_back({fmt("bridge%u", k), 2 * k, testgen::two_cliques_bridge(k)});
  std::mt19937_64 rng(5);
  const std::pair<Vertex, double> gnps[] = {{32, 0.3}, {64, 0.1}, {64, 0.3}, {64, 0.5}};
  for (auto [n, p] : gnps) out.push_back({fmt("G(%u,%.1f)", n, p), n, testgen::gnp(n, p, rng)});
  return out;
}

constexpr std::uint64_t kCorpusSeeds = 10;

struct CorpusStats {
  // Level sandwich.
  std::uint64_t pairs = 0;
  std::uint64_t upper_ok = 0;
  std::uint64_t lower_ok = 0;
  double worst_upper = 0;  // max 2^L / c_e
  double worst_lower = 0;  // max s_e / (2^L log2 n)
  // Size.
  double worst_size_ratio = 0;
  bool size_within_m = true;
  std::uint64_t extraction_errors = 0;
  // Termination.
  std::uint64_t triples = 0;
  std::uint64_t stalls = 0;
};

const CorpusStats& corpus_stats() {
  static const CorpusStats stats = [] {
    CorpusStats st;
    const Rational eps(1, 2);
    for (const auto& cg : corpus()) {
      const ShadowGraph g = testgen::shadow_of(cg.n, cg.edges);
      const auto strong = strong_connectivities(g);
      std::map<Edge, std::uint64_t> conn;
      for (auto [u, v] : cg.edges) conn[{std::min(u, v), std::max(u, v)}] = edge_connectivity(g, u, v);
      const double lg = std::log2(static_cast<double>(cg.n));

      for (std::uint64_t s = 0; s < kCorpusSeeds; ++s) {
        const SketchBank bank = bank_from(SketchConfig::desk(cg.n, eps, 600 + s), testgen::insertions(cg.edges));
        const LevelStructure ls = levels_of(bank);
        for (const auto& [e, c] : conn) {
          const auto level = ls.edge_level(e.first, e.second);
          const double two_l = level ? std::ldexp(1.0, *level) : 0.0;
          ++st.pairs;
          // A missing level means the sampled forests lost the edge's own component.
          if (!level) continue;
          const double up = two_l / static_cast<double>(c);
          const double down = static_cast<double>(strong.at(e)) / (two_l * lg);
          st.worst_upper = std::max(st.worst_upper, up);
          st.worst_lower = std::max(st.worst_lower, down);
          st.upper_ok += up <= 2.0;
          st.lower_ok += down <= kSandwichBeta;
        }

        for (int a = 0; a <= bank.params().max_level; ++a) {
          ++st.triples;
          std::vector<std::string> warnings;
          st.stalls += partition_level(bank, ls, a, FailurePolicy::kBestEffort, &warnings).stalled;
        }

        try {
          const Sparsifier sp = sparsify(bank);
          const double bound = static_cast<double>(cg.n) * lg * lg * lg / eps.value() / eps.value();
          st.worst_size_ratio = std::max(st.worst_size_ratio, static_cast<double>(sp.edges.size()) / bound);
          st.size_within_m = st.size_within_m && sp.edges.size() <= cg.edges.size();
        } catch (const PipelineError&) {
          ++st.extraction_errors;
        }
      }
    }
    return st;
  }();
  return stats;
}

Outcome level_sandwich() {
  const CorpusStats& st = corpus_stats();
  const double up = static_cast<double>(st.upper_ok) / static_cast<double>(st.pairs);
  const double down = static_cast<double>(st.lower_ok) / static_cast<double>(st.pairs);
  return {up >= 0.99 && down >= 0.99,
          fmt("upper %.4f, lower %.4f at beta=%.1f over %llu (edge, seed) pairs; max 2^L/c_e %.2f, max "
              "s_e/(2^L log n) %.2f",
              up, down, kSandwichBeta, static_cast<unsigned long long>(st.pairs), st.worst_upper, st.worst_lower)};
}

Outcome cut_preservation() {
  const Rational eps(1, 2);
  auto run = [&](Vertex n, std::uint64_t base, double& worst_median) {
    int ok = 0;
    std::vector<double> errs;
    for (std::uint64_t s = 0; s < 100; ++s) {
      std::mt19937_64 rng(base + s);
      const auto edges = testgen::gnp(n, 0.5, rng);
      const SketchBank bank = bank_from(SketchConfig::desk(n, eps, base + s), testgen::insertions(edges));
      try {
        const Sparsifier sp = sparsify(bank);
        const CutErrorReport rep = all_cuts_error(testgen::shadow_of(n, edges), sp.edges, s + 1, 10000);
        errs.push_back(rep.max_error);
        ok += rep.max_error <= eps.value();
      } catch (const PipelineError&) {
        errs.push_back(INFINITY);
      }
    }
    std::sort(errs.begin(), errs.end());
    worst_median = errs[errs.size() / 2];
    return ok;
  };
  double med16 = 0;
  double med64 = 0;
  const int ok16 = run(16, 6000, med16);
  const int ok64 = run(64, 6500, med64);
  return {ok16 >= 95 && ok64 >= 95,
          fmt("G(16,0.5) exhaustive %d/100 (median max error %.3f), G(64,0.5) sampled %d/100 (median %.3f)", ok16,
              med16, ok64, med64)};
}

Outcome size_bound() {
  const CorpusStats& st = corpus_stats();
  return {st.worst_size_ratio <= kSizeConstant && st.size_within_m && st.extraction_errors == 0,
          fmt("C=%.1f, observed max |H|/(n log^3 n/eps^2) %.4f, |H| <= m %s, extraction errors %llu", kSizeConstant,
              st.worst_size_ratio, st.size_within_m ? "always" : "violated",
              static_cast<unsigned long long>(st.extraction_errors))};
}

Outcome update_cost() {
  auto mean_touched = [](Vertex n) {
    SketchBank bank(SketchConfig::desk(n, Rational(1, 2), 8));
    std::mt19937_64 rng(8);
    std::set<Edge> present;
    while (present.size() < 2000) {
      const auto u = static_cast<Vertex>(rng() % n);
      const auto v = static_cast<Vertex>(rng() % n);
      if (u != v) present.insert({std::min(u, v), std::max(u, v)});
    }
    std::uint64_t total = 0;
    std::uint64_t updates = 0;
    for (auto [u, v] : present) {
      total += bank.ingest({u, v, 1, 1});
      ++updates;
    }
    return static_cast<double>(total) / static_cast<double>(updates);
  };
  const double small = mean_touched(1u << 10);
  const double large = mean_touched(1u << 14);
  const double limit = std::pow(14.0 / 10.0, 3) * 1.5;
  return {large / small <= limit,
          fmt("mean cells %.0f at n=2^10, %.0f at n=2^14, ratio %.3f (limit %.3f)", small, large, large / small, limit)};
}

Outcome weighted() {
  const Rational eps(1, 2);
  bool membership = true;
  auto run = [&](Vertex n, const std::function<std::vector<Edge>(std::mt19937_64&)>& gen, std::uint64_t base) {
    int ok = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
      std::mt19937_64 rng(base + s);
      const auto edges = gen(rng);
      std::vector<std::uint64_t> w(edges.size());
      for (auto& x : w) x = std::uniform_int_distribution<std::uint64_t>(1, 15)(rng);
      WeightedSketchBank banks(SketchConfig::desk(n, eps, base + s), 15);
      ShadowGraph g(n);
      for (std::size_t i = 0; i < edges.size(); ++i) {
        banks.ingest({edges[i].first, edges[i].second, 1, w[i]});
        g.add_edge(edges[i].first, edges[i].second, w[i]);
      }
      // Sub-bank b must hold exactly the edges whose weight has bit b set.
      for (std::size_t b = 0; b < banks.bits(); ++b) {
        SketchBank ref(banks.bank(b).config());
        for (std::size_t i = 0; i < edges.size(); ++i)
          if ((w[i] >> b) & 1U) ref.ingest({edges[i].first, edges[i].second, 1, 1});
        membership = membership && ref == banks.bank(b);
      }
      try {
        const Sparsifier sp = sparsify_weighted(banks);
        ok += all_cuts_error(g, sp.edges).max_error <= eps.value();
      } catch (const PipelineError&) {
      }
    }
    return ok;
  };
  const int ok_cycle = run(8, [](std::mt19937_64&) { return testgen::cycle(8); }, 9000);
  const int ok_gnp = run(12, [](std::mt19937_64& rng) { return testgen::gnp(12, 0.5, rng); }, 9500);
  return {ok_cycle >= 95 && ok_gnp >= 95 && membership,
          fmt("C8 %d/100, G(12,0.5) %d/100 within eps, sub-bank membership %s", ok_cycle, ok_gnp,
              membership ? "exact" : "WRONG")};
}

Outcome termination() {
  const CorpusStats& st = corpus_stats();
  const double rate = static_cast<double>(st.stalls) / static_cast<double>(st.triples);
  return {rate <= 0.01, fmt("%llu stalls in %llu (graph, seed, level) triples (%.4f)",
                            static_cast<unsigned long long>(st.stalls), static_cast<unsigned long long>(st.triples),
                            rate)};
}

}  // namespace

int main() {
  report(1, "linearity", linearity, 60);
  report(2, "spanning-forest", forests);
  report(3, "sparse-recovery", recovery, 60);
  report(4, "l1-estimate", l1_estimate, 60);
  report(5, "level-sandwich", level_sandwich);
  report(6, "cut-preservation", cut_preservation);
  report(7, "size-bound", size_bound, 60);
  report(8, "update-cost", update_cost);
  report(9, "weighted", weighted);
  report(10, "partition-termination", termination);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
