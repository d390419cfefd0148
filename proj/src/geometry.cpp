#include "ionsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace ionsim {

namespace {

using std::numbers::pi;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

struct Compiler {
  CompiledGeometry operator()(const geometry::Ring& g) const {
    require(g.n >= 3, "ring needs N >= 3 (n=1 and n=N-1 coincide for N=2)");
    const double phi = g.loop_flux / g.n;
    return {{{1, g.rate, phi, 0.0}, {g.n - 1, g.rate, -phi, 0.0}}, {}, g.n, g.loop_flux};
  }
  CompiledGeometry operator()(const geometry::TriangularLadder& g) const {
    require(g.n >= 3, "triangular ladder needs N >= 3");
    return {{{1, g.j1, g.phi1, 0.0}, {2, g.j2, g.phi2, 0.0}}, {}, g.n, std::nullopt};
  }
  CompiledGeometry operator()(const geometry::RectangularLadder& g) const {
    require(g.rows >= 2 && g.cols >= 2, "rectangular lattice needs rows, cols >= 2");
    CompiledGeometry out;
    out.n_ions = g.rows * (g.cols + 1) - 1;
    for (int r = 0; r + 1 < g.rows; ++r) out.spacers.push_back(r * (g.cols + 1) + g.cols);
    out.terms = {{1, g.rate, 0.0, 0.0}, {g.cols + 1, g.rate, 0.0, 0.0}};
    return out;
  }
  CompiledGeometry operator()(const geometry::Cylinder& g) const {
    require(g.rows >= 3 && g.cols >= 2, "cylinder needs rows >= 3 and cols >= 2");
    CompiledGeometry out;
    out.n_ions = g.rows * (g.cols + 1);
    for (int r = 0; r < g.rows; ++r) out.spacers.push_back(r * (g.cols + 1) + g.cols);
    const double phi = g.flux / g.rows;
    out.terms = {{1, g.rate, 0.0, 0.0},
                 {g.cols + 1, g.rate, phi, 0.0},
                 {out.n_ions - (g.cols + 1), g.rate, -phi, 0.0}};
    out.loop_flux = g.flux;
    return out;
  }
  CompiledGeometry operator()(const geometry::MobiusLadder& g) const {
    require(g.n >= 4 && g.n % 2 == 0, "Mobius ladder needs an even N >= 4");
    return {{{1, g.rate, 0.0, 0.0}, {g.n / 2, g.rate, 0.0, 0.0}, {g.n - 1, g.rate, 0.0, 0.0}},
            {},
            g.n,
            std::nullopt};
  }
  CompiledGeometry operator()(const geometry::Helix& g) const {
    require(g.w >= 2 && g.h >= 2, "helix needs w, h >= 2");
    return {{{1, g.rate, 0.0, 0.0}, {g.w, g.rate, 0.0, 0.0}}, {}, g.w * g.h, std::nullopt};
  }
  CompiledGeometry operator()(const geometry::Torus& g) const {
    require(g.w >= 2 && g.h >= 3, "torus needs w >= 2 and h >= 3");
    const int n = g.w * g.h;
    const double phi_w = g.flux1 / g.h;
    const double phi_1 = (g.flux2 + phi_w) / g.w;
    return {{{1, g.rate, phi_1, 0.0},
             {g.w, g.rate, phi_w, 0.0},
             {n - g.w, g.rate, -phi_w, 0.0},
             {n - 1, g.rate, -phi_1, 0.0}},
            {},
            n,
            std::nullopt};
  }
  CompiledGeometry operator()(const geometry::Custom& g) const {
    require(g.n >= 2, "custom geometry needs N >= 2");
    CompiledGeometry out{g.terms, g.spacers, g.n, std::nullopt};
    std::sort(out.spacers.begin(), out.spacers.end());
    for (int s : out.spacers) require(s >= 0 && s < g.n, "spacer out of range");
    require(std::adjacent_find(out.spacers.begin(), out.spacers.end()) == out.spacers.end(),
            "duplicate spacer");
    return out;
  }
};

}  // namespace

std::string geometry_name(const GeometrySpec& spec) {
  static const char* names[] = {"ring",     "triangular", "rectangular", "cylinder",
                                "mobius",   "helix",      "torus",       "custom"};
  return names[spec.index()];
}

void validate_terms(const std::vector<HoppingTerm>& terms, int n_ions) {
  std::set<int> seen;
  for (const auto& t : terms) {
    require(t.range >= 1 && t.range <= n_ions - 1,
            "hopping range " + std::to_string(t.range) + " outside 1..N-1");
    require(seen.insert(t.range).second, "duplicate hopping range " + std::to_string(t.range));
    require(std::isfinite(t.rate) && t.rate >= 0.0, "hopping rate must be finite and >= 0");
    require(std::isfinite(t.phase) && std::isfinite(t.detuning), "non-finite phase or detuning");
  }
}

CompiledGeometry compile(const GeometrySpec& spec) {
  CompiledGeometry out = std::visit(Compiler{}, spec);
  validate_terms(out.terms, out.n_ions);
  return out;
}

CouplingGraph::CouplingGraph(int n_sites, std::vector<int> spacers, std::vector<Edge> edges)
    : n_sites_(n_sites), spacers_(std::move(spacers)), edges_(std::move(edges)) {}

std::vector<int> CouplingGraph::active_sites() const {
  std::vector<int> out;
  for (int i = 0; i < n_sites_; ++i)
    if (std::find(spacers_.begin(), spacers_.end(), i) == spacers_.end()) out.push_back(i);
  return out;
}

std::optional<cplx> CouplingGraph::weight(int from, int to) const {
  for (const auto& e : edges_)
    if (e.from == from && e.to == to) return e.weight;
  return std::nullopt;
}

int CouplingGraph::degree(int site) const {
  return static_cast<int>(std::count_if(edges_.begin(), edges_.end(),
                                        [site](const Edge& e) { return e.from == site; }));
}

std::vector<std::vector<int>> CouplingGraph::adjacency() const {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_sites_));
  for (const auto& e : edges_) adj[e.from].push_back(e.to);
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

CouplingGraph expand_to_graph(const std::vector<HoppingTerm>& terms,
                              const std::vector<int>& spacers, int n_ions) {
  validate_terms(terms, n_ions);
  std::vector<bool> spacer(static_cast<std::size_t>(n_ions), false);
  for (int s : spacers) {
    require(s >= 0 && s < n_ions, "spacer out of range");
    spacer[s] = true;
  }
  std::vector<Edge> edges;
  for (const auto& t : terms) {
    if (t.rate == 0.0) continue;
    const cplx w = std::polar(t.rate, t.phase);
    for (int i = 0; i + t.range < n_ions; ++i) {
      const int j = i + t.range;
      if (spacer[i] || spacer[j]) continue;
      edges.push_back({i, j, w});
      edges.push_back({j, i, std::conj(w)});
    }
  }
  std::vector<int> sorted(spacers);
  std::sort(sorted.begin(), sorted.end());
  return CouplingGraph(n_ions, std::move(sorted), std::move(edges));
}

double wrap_phase(double angle) {
  double a = std::remainder(angle, 2.0 * pi);
  if (a <= -pi) a += 2.0 * pi;
  return a;
}

double loop_flux(const CouplingGraph& graph, const std::vector<int>& cycle, bool reduce) {
  require(cycle.size() >= 2, "cycle needs at least two nodes");
  double total = 0.0;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const int a = cycle[i];
    const int b = cycle[(i + 1) % cycle.size()];
    const auto w = graph.weight(a, b);
    if (!w || std::abs(*w) == 0.0)
      throw std::invalid_argument("cycle uses missing edge " + std::to_string(a) + "->" +
                                  std::to_string(b));
    total += std::arg(*w);
  }
  return reduce ? wrap_phase(total) : total;
}

std::vector<HoppingTerm> apply_gauge(std::vector<HoppingTerm> terms, double gauge) {
  for (auto& t : terms) t.phase += t.range * gauge;
  return terms;
}

namespace {

bool extend(const std::vector<std::vector<int>>& a, const std::vector<std::vector<int>>& b,
            std::vector<int>& map, std::vector<bool>& used, int next) {
  const int n = static_cast<int>(a.size());
  if (next == n) return true;
  for (int cand = 0; cand < n; ++cand) {
    if (used[cand] || a[next].size() != b[cand].size()) continue;
    bool ok = true;
    for (int prev = 0; prev < next && ok; ++prev) {
      const bool ea = std::binary_search(a[next].begin(), a[next].end(), prev);
      const bool eb = std::binary_search(b[cand].begin(), b[cand].end(), map[prev]);
      ok = ea == eb;
    }
    if (!ok) continue;
    map[next] = cand;
    used[cand] = true;
    if (extend(a, b, map, used, next + 1)) return true;
    used[cand] = false;
  }
  return false;
}

}  // namespace

bool isomorphic(const std::vector<std::vector<int>>& a, const std::vector<std::vector<int>>& b) {
  if (a.size() != b.size()) return false;
  auto degrees = [](const auto& g) {
    std::vector<std::size_t> d;
    for (const auto& row : g) d.push_back(row.size());
    std::sort(d.begin(), d.end());
    return d;
  };
  if (degrees(a) != degrees(b)) return false;
  auto sorted = [](auto g) {
    for (auto& row : g) std::sort(row.begin(), row.end());
    return g;
  };
  const auto sa = sorted(a);
  const auto sb = sorted(b);
  std::vector<int> map(a.size(), -1);
  std::vector<bool> used(a.size(), false);
  return extend(sa, sb, map, used, 0);
}

std::vector<std::vector<int>> grid_graph(int rows, int cols) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(rows * cols));
  auto link = [&](int u, int v) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int u = r * cols + c;
      if (c + 1 < cols) link(u, u + 1);
      if (r + 1 < rows) link(u, u + cols);
    }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

std::vector<std::vector<int>> active_adjacency(const CouplingGraph& graph) {
  const auto active = graph.active_sites();
  std::vector<int> label(static_cast<std::size_t>(graph.n_sites()), -1);
  for (std::size_t i = 0; i < active.size(); ++i) label[active[i]] = static_cast<int>(i);
  std::vector<std::vector<int>> adj(active.size());
  for (const auto& e : graph.edges()) adj[label[e.from]].push_back(label[e.to]);
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

}  // namespace ionsim
