// Builds a sketch of a churning stream, extracts a sparsifier and checks its cuts.
#include <iostream>
#include <random>

#include "dynsparse/dynsparse.hpp"

int main() {
  using namespace dynsparse;
  const Vertex n = 32;
  SketchBank bank(SketchConfig::desk(n, Rational(1, 2), /*seed=*/7));
  ShadowGraph shadow(n);

  std::mt19937_64 rng(7);
  std::vector<EdgeUpdate> inserted;
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = u + 1; v < n; ++v)
      if (rng() % 2 == 0) inserted.push_back({u, v, 1, 1});
  for (const auto& e : inserted) {
    bank.ingest(e);
    shadow.apply(e);
  }
  // Delete every fifth edge again; the sketch only sees the net graph.
  for (std::size_t i = 0; i < inserted.size(); i += 5) {
    const EdgeUpdate del{inserted[i].u, inserted[i].v, -1, 1};
    bank.ingest(del);
    shadow.apply(del);
  }

  const Sparsifier sp = sparsify(bank);
  const CutErrorReport rep = all_cuts_error(shadow, sp.edges, 1, 2000);
  std::cout << "edges in graph:      " << shadow.edge_count() << '\n'
            << "edges in sparsifier: " << sp.edges.size() << '\n'
            << "max cut error:       " << rep.max_error << " over " << rep.cuts << " cuts\n";
  for (std::size_t i = 0; i < sp.edges.size() && i < 5; ++i) {
    const auto& e = sp.edges[i];
    std::cout << "  " << e.u << " - " << e.v << "  weight " << e.weight.to_string() << '\n';
  }
}
