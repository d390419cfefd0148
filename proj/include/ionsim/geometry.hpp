#pragma once

// Lattice geometries compiled into index-shift hopping terms
//   H = sum_n Omega_n e^{i(phi_n - delta_n t)} sum_i s+_i s-_{i+n} + h.c.
// plus spacer sites, and gauge-invariant loop fluxes of the resulting graph.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ionsim/core.hpp"

namespace ionsim {

struct HoppingTerm {
  int range = 1;         // n
  double rate = 0.0;     // Omega_n, rad/s
  double phase = 0.0;    // phi_n, rad
  double detuning = 0.0; // delta_n, rad/s
};

namespace geometry {

struct Ring {
  int n = 0;
  double loop_flux = 0.0;  // gauge-invariant loop phase, = 2*pi*Phi of the ring Hamiltonian
  double rate = 1.0;
};
struct TriangularLadder {
  int n = 0;
  double j1 = 1.0, j2 = 1.0;
  double phi1 = 0.0, phi2 = 0.0;
};
struct RectangularLadder {
  int rows = 2, cols = 0;
  double rate = 1.0;
};
struct Cylinder {
  int rows = 0, cols = 0;
  double flux = 0.0;
  double rate = 1.0;
};
struct MobiusLadder {
  int n = 0;
  double rate = 1.0;
};
struct Helix {
  int w = 0, h = 0;
  double rate = 1.0;
};
struct Torus {
  int w = 0, h = 0;
  double flux1 = 0.0;  // h * phi_w
  double flux2 = 0.0;  // w * phi_1 - phi_w
  double rate = 1.0;
};
struct Custom {
  int n = 0;
  std::vector<HoppingTerm> terms;
  std::vector<int> spacers;  // 0-based
};

}  // namespace geometry

using GeometrySpec =
    std::variant<geometry::Ring, geometry::TriangularLadder, geometry::RectangularLadder,
                 geometry::Cylinder, geometry::MobiusLadder, geometry::Helix,
                 geometry::Torus, geometry::Custom>;

std::string geometry_name(const GeometrySpec& spec);

struct CompiledGeometry {
  std::vector<HoppingTerm> terms;
  std::vector<int> spacers;  // 0-based, ascending
  int n_ions = 0;
  std::optional<double> loop_flux;  // ring-type geometries only
};

/// Throws std::invalid_argument when the variant's constraints fail.
CompiledGeometry compile(const GeometrySpec& spec);

/// Checks range uniqueness and 1 <= n <= N-1.
void validate_terms(const std::vector<HoppingTerm>& terms, int n_ions);

struct Edge {
  int from = 0;
  int to = 0;
  cplx weight;  // single-particle matrix element <from|H|to>
};

/// Directed weighted graph on the active sites. Every edge appears in both
/// directions with conjugate weights.
class CouplingGraph {
 public:
  CouplingGraph() = default;
  CouplingGraph(int n_sites, std::vector<int> spacers, std::vector<Edge> edges);

  int n_sites() const { return n_sites_; }
  const std::vector<int>& spacers() const { return spacers_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::vector<int> active_sites() const;

  std::optional<cplx> weight(int from, int to) const;
  int degree(int site) const;
  /// Undirected adjacency over all sites (spacers included, isolated).
  std::vector<std::vector<int>> adjacency() const;

 private:
  int n_sites_ = 0;
  std::vector<int> spacers_;
  std::vector<Edge> edges_;
};

CouplingGraph expand_to_graph(const std::vector<HoppingTerm>& terms,
                              const std::vector<int>& spacers, int n_ions);

/// Sum of directed edge phases around a closed walk given as a node sequence
/// (the closing edge back to the first node is implied). Throws if an edge is
/// missing or has zero weight.
double loop_flux(const CouplingGraph& graph, const std::vector<int>& cycle,
                 bool reduce = false);

/// phi_n -> phi_n + n * gauge for every term.
std::vector<HoppingTerm> apply_gauge(std::vector<HoppingTerm> terms, double gauge);

/// Wraps an angle to (-pi, pi].
double wrap_phase(double angle);

/// Structural graph isomorphism on the active sites (undirected, unweighted).
bool isomorphic(const std::vector<std::vector<int>>& a, const std::vector<std::vector<int>>& b);

/// Undirected adjacency of the rows x cols rectangular grid (row-major labels).
std::vector<std::vector<int>> grid_graph(int rows, int cols);

/// Adjacency restricted to the active sites, relabelled 0..n_active-1.
std::vector<std::vector<int>> active_adjacency(const CouplingGraph& graph);

}  // namespace ionsim
