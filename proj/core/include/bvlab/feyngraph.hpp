#pragma once

#include "bvlab/rational.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace bvlab::feyn {

// Half-edge tags. Plain graphs use tag_even everywhere; matchings must pair
// even with even, odd with odd, and out with in.
enum Tag : int { tag_even = 0, tag_odd = 1, tag_in = 2, tag_out = 3 };

bool tags_compatible(int a, int b);

struct Graph {
    std::vector<int> vertex_color;  // one entry per vertex
    std::vector<int> incidence;     // half-edge -> vertex
    std::vector<int> matching;      // fixed-point-free involution on half-edges
    std::vector<int> tag;           // per half-edge

    std::size_t num_vertices() const { return vertex_color.size(); }
    std::size_t num_half_edges() const { return incidence.size(); }
    std::size_t num_edges() const { return incidence.size() / 2; }
    int valence(int v) const;
    std::vector<int> half_edges_at(int v) const;

    // throws std::invalid_argument with the first violated invariant
    void validate() const;

    // single-line text form; parse() inverts it
    std::string to_string() const;
    static Graph parse(const std::string& text);

    friend bool operator==(const Graph&, const Graph&) = default;
};

struct EdgeSpec {
    int u = 0, v = 0;
    int tag_u = tag_even, tag_v = tag_even;
};

// Builds a graph with half-edges allocated edge by edge.
Graph graph_from_edges(std::vector<int> vertex_color, const std::vector<EdgeSpec>& edges);
Graph graph_from_edges(int num_vertices, const std::vector<std::pair<int, int>>& edges);

// Relabel vertices by vperm (old -> new) and half-edges by hperm (old -> new).
Graph relabel(const Graph& g, const std::vector<int>& vperm, const std::vector<int>& hperm);

struct Canonical {
    Graph form;
    std::vector<std::vector<int>> code;  // complete invariant; equal iff isomorphic
    std::uint64_t aut = 1;
};

Canonical canonicalize(const Graph& g);
Graph canonical_form(const Graph& g);
std::uint64_t automorphism_order(const Graph& g);

// Exhaustive search over vertex and half-edge bijections. Test oracle only.
std::uint64_t brute_force_automorphism_order(const Graph& g);

std::vector<std::pair<Graph, int>> connected_decompose(const Graph& g);
bool is_connected(const Graph& g);
int euler_characteristic(const Graph& g);
int loop_number(const Graph& g);  // throws on disconnected input
bool has_short_loop(const Graph& g);

struct VertexKind {
    int color = 0;
    int valence = 0;
    int odd = 0;  // how many of the half-edges are odd
    friend auto operator<=>(const VertexKind&, const VertexKind&) = default;
};

struct ValencyProfile {
    std::map<VertexKind, int> counts;

    static ValencyProfile plain(const std::map<int, int>& valence_counts);
    // "3:2,4:1" -> two trivalent and one quadrivalent vertex; empty string -> empty profile
    static ValencyProfile parse(const std::string& text);
    int half_edges() const;
    int vertices() const;
    std::string to_string() const;
};

struct IsoClass {
    Graph form;
    std::uint64_t aut = 1;
    std::vector<std::pair<Graph, int>> components;
};

struct EnumerateOptions {
    int cap_half_edges = 16;
    bool allow_short_loops = true;
    bool connected_only = false;
    int threads = 0;  // 0: BVLAB_THREADS or 1
};

// All isomorphism classes, ordered by canonical code. Throws std::invalid_argument for
// parity-infeasible profiles and std::length_error above the half-edge cap.
std::vector<IsoClass> enumerate(const ValencyProfile& profile, const EnumerateOptions& opts = {});

// sum 1/|Aut| over classes, and the closed form (2m-1)!! / prod V_d! (d!)^{V_d}
Rational groupoid_volume(const std::vector<IsoClass>& classes);
Rational groupoid_volume_formula(const ValencyProfile& profile);

// Oriented BF transfer graphs. Leaves have color 1 and one out half-edge, the root has
// color 2 and one in half-edge, internal vertices have color 0 with two ins and one out.
enum class TransferKind { tree, one_loop };
inline constexpr int color_internal = 0;
inline constexpr int color_leaf = 1;
inline constexpr int color_root = 2;

std::vector<IsoClass> enumerate_transfer_graphs(int leaves, TransferKind kind);

int worker_count(int requested);

}  // namespace bvlab::feyn
