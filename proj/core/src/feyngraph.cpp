#include "bvlab/feyngraph.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace bvlab::feyn {

bool tags_compatible(int a, int b) {
    if (a == tag_in) return b == tag_out;
    if (a == tag_out) return b == tag_in;
    return a == b;
}

int Graph::valence(int v) const {
    return static_cast<int>(std::count(incidence.begin(), incidence.end(), v));
}

std::vector<int> Graph::half_edges_at(int v) const {
    std::vector<int> out;
    for (std::size_t h = 0; h < incidence.size(); ++h)
        if (incidence[h] == v) out.push_back(static_cast<int>(h));
    return out;
}

void Graph::validate() const {
    const int n = static_cast<int>(num_half_edges());
    if (matching.size() != incidence.size() || tag.size() != incidence.size())
        throw std::invalid_argument("graph: half-edge arrays differ in length");
    for (int h = 0; h < n; ++h) {
        if (incidence[h] < 0 || incidence[h] >= static_cast<int>(num_vertices()))
            throw std::invalid_argument("graph: half-edge " + std::to_string(h) + " has no vertex");
        const int p = matching[h];
        if (p < 0 || p >= n || p == h || matching[p] != h)
            throw std::invalid_argument("graph: matching is not a fixed-point-free involution at " +
                                        std::to_string(h));
        if (!tags_compatible(tag[h], tag[p]))
            throw std::invalid_argument("graph: edge " + std::to_string(h) + "-" + std::to_string(p) +
                                        " joins incompatible tags");
    }
}

namespace {

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    if (s.empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
}

std::string join(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

}  // namespace

std::string Graph::to_string() const {
    std::string edges;
    for (std::size_t h = 0; h < matching.size(); ++h) {
        if (matching[h] < static_cast<int>(h)) continue;
        if (!edges.empty()) edges += ',';
        edges += std::to_string(h) + "-" + std::to_string(matching[h]);
    }
    return "colors=" + join(vertex_color) + " inc=" + join(incidence) + " tags=" + join(tag) + " edges=" + edges;
}

Graph Graph::parse(const std::string& text) {
    Graph g;
    std::stringstream ss(text);
    std::string field;
    bool seen_edges = false;
    while (ss >> field) {
        auto eq = field.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("graph text: bad field " + field);
        std::string key = field.substr(0, eq), val = field.substr(eq + 1);
        if (key == "colors") g.vertex_color = parse_int_list(val);
        else if (key == "inc") g.incidence = parse_int_list(val);
        else if (key == "tags") g.tag = parse_int_list(val);
        else if (key == "edges") {
            seen_edges = true;
            g.matching.assign(g.incidence.size(), -1);
            std::stringstream es(val);
            std::string e;
            while (std::getline(es, e, ',')) {
                auto dash = e.find('-');
                if (dash == std::string::npos) throw std::invalid_argument("graph text: bad edge " + e);
                int a = std::stoi(e.substr(0, dash)), b = std::stoi(e.substr(dash + 1));
                if (a < 0 || b < 0 || a >= static_cast<int>(g.matching.size()) ||
                    b >= static_cast<int>(g.matching.size()))
                    throw std::invalid_argument("graph text: edge out of range " + e);
                g.matching[a] = b;
                g.matching[b] = a;
            }
        } else {
            throw std::invalid_argument("graph text: unknown field " + key);
        }
    }
    if (!seen_edges) g.matching.assign(g.incidence.size(), -1);
    if (g.tag.empty()) g.tag.assign(g.incidence.size(), tag_even);
    g.validate();
    return g;
}

Graph graph_from_edges(std::vector<int> vertex_color, const std::vector<EdgeSpec>& edges) {
    Graph g;
    g.vertex_color = std::move(vertex_color);
    for (const auto& e : edges) {
        const int h = static_cast<int>(g.incidence.size());
        g.incidence.push_back(e.u);
        g.incidence.push_back(e.v);
        g.tag.push_back(e.tag_u);
        g.tag.push_back(e.tag_v);
        g.matching.push_back(h + 1);
        g.matching.push_back(h);
    }
    g.validate();
    return g;
}

Graph graph_from_edges(int num_vertices, const std::vector<std::pair<int, int>>& edges) {
    std::vector<EdgeSpec> spec;
    for (auto [u, v] : edges) spec.push_back({u, v, tag_even, tag_even});
    return graph_from_edges(std::vector<int>(num_vertices, 0), spec);
}

Graph relabel(const Graph& g, const std::vector<int>& vperm, const std::vector<int>& hperm) {
    Graph r;
    r.vertex_color.assign(g.num_vertices(), 0);
    for (std::size_t v = 0; v < g.num_vertices(); ++v) r.vertex_color[vperm[v]] = g.vertex_color[v];
    const std::size_t n = g.num_half_edges();
    r.incidence.assign(n, 0);
    r.matching.assign(n, 0);
    r.tag.assign(n, 0);
    for (std::size_t h = 0; h < n; ++h) {
        r.incidence[hperm[h]] = vperm[g.incidence[h]];
        r.matching[hperm[h]] = hperm[g.matching[h]];
        r.tag[hperm[h]] = g.tag[h];
    }
    return r;
}

namespace {

using Code = std::vector<std::vector<int>>;

// vertex lists of connected components, each sorted, in order of smallest vertex
std::vector<std::vector<int>> components_of(const Graph& g) {
    const int V = static_cast<int>(g.num_vertices());
    std::vector<std::vector<int>> adj(V);
    for (std::size_t h = 0; h < g.num_half_edges(); ++h)
        adj[g.incidence[h]].push_back(g.incidence[g.matching[h]]);
    std::vector<int> comp(V, -1);
    std::vector<std::vector<int>> out;
    for (int s = 0; s < V; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> stack{s}, members;
        comp[s] = static_cast<int>(out.size());
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            members.push_back(v);
            for (int w : adj[v])
                if (comp[w] < 0) {
                    comp[w] = comp[s];
                    stack.push_back(w);
                }
        }
        std::sort(members.begin(), members.end());
        out.push_back(std::move(members));
    }
    return out;
}

Graph induced(const Graph& g, const std::vector<int>& verts) {
    std::vector<int> vmap(g.num_vertices(), -1);
    for (std::size_t i = 0; i < verts.size(); ++i) vmap[verts[i]] = static_cast<int>(i);
    std::vector<int> hmap(g.num_half_edges(), -1);
    Graph s;
    for (int v : verts) s.vertex_color.push_back(g.vertex_color[v]);
    for (std::size_t h = 0; h < g.num_half_edges(); ++h) {
        if (vmap[g.incidence[h]] < 0) continue;
        hmap[h] = static_cast<int>(s.incidence.size());
        s.incidence.push_back(vmap[g.incidence[h]]);
        s.tag.push_back(g.tag[h]);
    }
    s.matching.assign(s.incidence.size(), -1);
    for (std::size_t h = 0; h < g.num_half_edges(); ++h)
        if (hmap[h] >= 0) s.matching[hmap[h]] = hmap[g.matching[h]];
    return s;
}

std::uint64_t factorial_u64(int n) {
    std::uint64_t r = 1;
    for (int k = 2; k <= n; ++k) r *= static_cast<std::uint64_t>(k);
    return r;
}

// Permutations of half-edges that fix every vertex and preserve the edge partition.
std::uint64_t edge_factor(const Graph& g) {
    std::map<std::array<int, 4>, int> classes;
    for (std::size_t h = 0; h < g.num_half_edges(); ++h) {
        const int p = g.matching[h];
        if (p < static_cast<int>(h)) continue;
        std::array<int, 2> a{g.incidence[h], g.tag[h]}, b{g.incidence[p], g.tag[p]};
        if (b < a) std::swap(a, b);
        ++classes[{a[0], a[1], b[0], b[1]}];
    }
    std::uint64_t f = 1;
    for (const auto& [key, m] : classes) {
        f *= factorial_u64(m);
        if (key[0] == key[2] && key[1] == key[3]) f <<= m;  // flipping a loop
    }
    return f;
}

struct Search {
    const Graph& g;
    int V = 0;
    std::vector<std::vector<int>> hes;
    std::vector<int> label, cell_of_pos, pos_of, vert_at;
    Code cur, best;
    std::vector<int> best_order;
    bool have_best = false;
    std::uint64_t count = 0;

    explicit Search(const Graph& gr) : g(gr), V(static_cast<int>(gr.num_vertices())) {
        hes.resize(V);
        for (std::size_t h = 0; h < g.num_half_edges(); ++h) hes[g.incidence[h]].push_back(static_cast<int>(h));
    }

    static std::vector<int> ranks(const std::vector<std::vector<int>>& sig) {
        std::vector<std::vector<int>> sorted = sig;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        std::vector<int> r(sig.size());
        for (std::size_t i = 0; i < sig.size(); ++i)
            r[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), sig[i]) - sorted.begin());
        return r;
    }

    std::vector<int> base_signature(int v) const {
        std::vector<int> tags;
        for (int h : hes[v]) tags.push_back(g.tag[h]);
        std::sort(tags.begin(), tags.end());
        std::vector<int> s{g.vertex_color[v], static_cast<int>(tags.size())};
        s.insert(s.end(), tags.begin(), tags.end());
        return s;
    }

    void refine() {
        std::vector<std::vector<int>> sig(V);
        for (int v = 0; v < V; ++v) sig[v] = base_signature(v);
        label = ranks(sig);
        int classes = label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1;
        while (true) {
            for (int v = 0; v < V; ++v) {
                std::vector<std::array<int, 3>> nb;
                for (int h : hes[v]) {
                    const int p = g.matching[h];
                    nb.push_back({g.tag[h], label[g.incidence[p]], g.tag[p]});
                }
                std::sort(nb.begin(), nb.end());
                std::vector<int> s{label[v]};
                for (const auto& e : nb) s.insert(s.end(), e.begin(), e.end());
                sig[v] = std::move(s);
            }
            auto next = ranks(sig);
            int nc = next.empty() ? 0 : *std::max_element(next.begin(), next.end()) + 1;
            label = std::move(next);
            if (nc == classes) break;
            classes = nc;
        }
    }

    std::vector<int> row(int v) const {
        std::vector<std::array<int, 3>> entries;
        for (int h : hes[v]) {
            const int p = g.matching[h];
            const int w = g.incidence[p];
            if (pos_of[w] >= 0) entries.push_back({pos_of[w], g.tag[h], g.tag[p]});
        }
        std::sort(entries.begin(), entries.end());
        std::vector<int> r;
        for (const auto& e : entries) r.insert(r.end(), e.begin(), e.end());
        return r;
    }

    // -1, 0, 1 comparing cur with the same-length prefix of best
    int compare_prefix() const {
        for (std::size_t i = 0; i < cur.size(); ++i) {
            if (cur[i] < best[i]) return -1;
            if (best[i] < cur[i]) return 1;
        }
        return 0;
    }

    void rec(int k) {
        if (k == V) {
            if (!have_best || cur < best) {
                best = cur;
                best_order = vert_at;
                have_best = true;
                count = 1;
            } else if (cur == best) {
                ++count;
            }
            return;
        }
        for (int v = 0; v < V; ++v) {
            if (pos_of[v] >= 0 || label[v] != cell_of_pos[k]) continue;
            pos_of[v] = k;
            vert_at[k] = v;
            cur.push_back(row(v));
            if (!have_best || compare_prefix() <= 0) rec(k + 1);
            cur.pop_back();
            pos_of[v] = -1;
        }
    }

    void run() {
        refine();
        std::vector<int> order(V);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return label[a] < label[b]; });
        cell_of_pos.resize(V);
        std::vector<int> header;
        for (int k = 0; k < V; ++k) {
            cell_of_pos[k] = label[order[k]];
            auto s = base_signature(order[k]);
            header.insert(header.end(), s.begin(), s.end());
        }
        pos_of.assign(V, -1);
        vert_at.assign(V, -1);
        cur.push_back(header);
        rec(0);
        if (!have_best) {  // V == 0
            best = cur;
            best_order.clear();
            count = 1;
        }
    }
};

// Graph with vertices in the given order and half-edges in canonical order.
Graph build_form(const Graph& g, const std::vector<int>& order) {
    const int V = static_cast<int>(order.size());
    std::vector<int> newpos(g.num_vertices(), -1);
    for (int k = 0; k < V; ++k) newpos[order[k]] = k;
    Graph f;
    for (int k = 0; k < V; ++k) f.vertex_color.push_back(g.vertex_color[order[k]]);
    using Key = std::array<int, 4>;  // vertex, tag, neighbour, neighbour tag
    std::vector<Key> keys;
    for (std::size_t h = 0; h < g.num_half_edges(); ++h) {
        const int p = g.matching[h];
        keys.push_back({newpos[g.incidence[h]], g.tag[h], newpos[g.incidence[p]], g.tag[p]});
    }
    std::sort(keys.begin(), keys.end());
    const int n = static_cast<int>(keys.size());
    f.incidence.resize(n);
    f.tag.resize(n);
    f.matching.assign(n, -1);
    std::map<Key, std::vector<int>> groups;
    for (int i = 0; i < n; ++i) {
        f.incidence[i] = keys[i][0];
        f.tag[i] = keys[i][1];
        groups[keys[i]].push_back(i);
    }
    for (const auto& [key, members] : groups) {
        Key other{key[2], key[3], key[0], key[1]};
        if (other == key) {
            for (std::size_t i = 0; i + 1 < members.size(); i += 2) {
                f.matching[members[i]] = members[i + 1];
                f.matching[members[i + 1]] = members[i];
            }
        } else {
            const auto& partner = groups.at(other);
            for (std::size_t i = 0; i < members.size(); ++i) f.matching[members[i]] = partner[i];
        }
    }
    return f;
}

struct ComponentCanon {
    Code code;
    std::uint64_t vertex_aut = 1;
    std::vector<int> order;  // original vertex ids in canonical order
};

ComponentCanon canon_component(const Graph& g, const std::vector<int>& verts) {
    Graph sub = induced(g, verts);
    Search s(sub);
    s.run();
    ComponentCanon c;
    c.code = std::move(s.best);
    c.vertex_aut = s.count;
    for (int v : s.best_order) c.order.push_back(verts[v]);
    return c;
}

}  // namespace

Canonical canonicalize(const Graph& g) {
    auto comps = components_of(g);
    std::vector<ComponentCanon> cc;
    cc.reserve(comps.size());
    for (const auto& c : comps) cc.push_back(canon_component(g, c));
    std::sort(cc.begin(), cc.end(), [](const ComponentCanon& a, const ComponentCanon& b) { return a.code < b.code; });

    Canonical out;
    out.code.push_back({static_cast<int>(cc.size())});
    std::vector<int> order;
    std::uint64_t vaut = 1;
    for (std::size_t i = 0; i < cc.size();) {
        std::size_t j = i;
        while (j < cc.size() && cc[j].code == cc[i].code) ++j;
        vaut *= factorial_u64(static_cast<int>(j - i));
        for (std::size_t k = i; k < j; ++k) vaut *= cc[k].vertex_aut;
        i = j;
    }
    for (const auto& c : cc) {
        out.code.push_back({-2, static_cast<int>(c.code.size())});
        out.code.insert(out.code.end(), c.code.begin(), c.code.end());
        order.insert(order.end(), c.order.begin(), c.order.end());
    }
    out.form = build_form(g, order);
    out.aut = vaut * edge_factor(g);
    return out;
}

Graph canonical_form(const Graph& g) { return canonicalize(g).form; }

std::uint64_t automorphism_order(const Graph& g) { return canonicalize(g).aut; }

std::uint64_t brute_force_automorphism_order(const Graph& g) {
    const int V = static_cast<int>(g.num_vertices());
    const int H = static_cast<int>(g.num_half_edges());
    std::vector<std::vector<int>> sig(V);
    for (int v = 0; v < V; ++v) {
        std::vector<int> t;
        for (int h = 0; h < H; ++h)
            if (g.incidence[h] == v) t.push_back(g.tag[h]);
        std::sort(t.begin(), t.end());
        t.push_back(g.vertex_color[v]);
        sig[v] = t;
    }
    std::vector<int> vimg(V, -1), himg(H, -1);
    std::vector<bool> vused(V, false), hused(H, false);
    std::uint64_t total = 0;

    std::function<void(int)> lift = [&](int h) {
        if (h == H) {
            ++total;
            return;
        }
        const int p = g.matching[h];
        for (int c = 0; c < H; ++c) {
            if (hused[c] || g.incidence[c] != vimg[g.incidence[h]] || g.tag[c] != g.tag[h]) continue;
            if (himg[p] >= 0 && g.matching[himg[p]] != c) continue;
            hused[c] = true;
            himg[h] = c;
            lift(h + 1);
            himg[h] = -1;
            hused[c] = false;
        }
    };
    std::function<void(int)> assign = [&](int v) {
        if (v == V) {
            lift(0);
            return;
        }
        for (int w = 0; w < V; ++w) {
            if (vused[w] || sig[w] != sig[v]) continue;
            vused[w] = true;
            vimg[v] = w;
            assign(v + 1);
            vimg[v] = -1;
            vused[w] = false;
        }
    };
    assign(0);
    return total;
}

std::vector<std::pair<Graph, int>> connected_decompose(const Graph& g) {
    std::vector<std::pair<Canonical, int>> acc;
    for (const auto& c : components_of(g)) {
        Canonical cn = canonicalize(induced(g, c));
        auto it = std::find_if(acc.begin(), acc.end(), [&](const auto& e) { return e.first.code == cn.code; });
        if (it == acc.end()) acc.push_back({std::move(cn), 1});
        else ++it->second;
    }
    std::sort(acc.begin(), acc.end(), [](const auto& a, const auto& b) { return a.first.code < b.first.code; });
    std::vector<std::pair<Graph, int>> out;
    for (auto& [cn, r] : acc) out.push_back({std::move(cn.form), r});
    return out;
}

// the empty graph has no components and counts as disconnected
bool is_connected(const Graph& g) { return components_of(g).size() == 1; }

int euler_characteristic(const Graph& g) {
    return static_cast<int>(g.num_vertices()) - static_cast<int>(g.num_edges());
}

int loop_number(const Graph& g) {
    if (!is_connected(g)) throw std::invalid_argument("loop_number: graph is not connected");
    return 1 - euler_characteristic(g);
}

bool has_short_loop(const Graph& g) {
    for (std::size_t h = 0; h < g.num_half_edges(); ++h)
        if (g.incidence[h] == g.incidence[g.matching[h]]) return true;
    return false;
}

ValencyProfile ValencyProfile::plain(const std::map<int, int>& valence_counts) {
    ValencyProfile p;
    for (auto [d, n] : valence_counts)
        if (n > 0) p.counts[{0, d, 0}] = n;
    return p;
}

ValencyProfile ValencyProfile::parse(const std::string& text) {
    std::map<int, int> counts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto colon = item.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("profile: expected valence:count, got " + item);
        int d = std::stoi(item.substr(0, colon)), n = std::stoi(item.substr(colon + 1));
        if (d < 0 || n < 0) throw std::invalid_argument("profile: negative entry " + item);
        counts[d] += n;
    }
    return plain(counts);
}

int ValencyProfile::half_edges() const {
    int s = 0;
    for (const auto& [k, n] : counts) s += k.valence * n;
    return s;
}

int ValencyProfile::vertices() const {
    int s = 0;
    for (const auto& [k, n] : counts) s += n;
    return s;
}

std::string ValencyProfile::to_string() const {
    std::string s;
    for (const auto& [k, n] : counts) {
        if (!s.empty()) s += ',';
        s += std::to_string(k.valence) + ":" + std::to_string(n);
        if (k.color || k.odd) s += "[c" + std::to_string(k.color) + ",o" + std::to_string(k.odd) + "]";
    }
    return s;
}

int worker_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("BVLAB_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

namespace {

struct Group {
    int vertex;
    int tag;
    int size;
    int first_half_edge;
};

struct Enumerator {
    std::vector<int> colors;
    std::vector<Group> groups;
    int H = 0;
    bool allow_short_loops = true;

    explicit Enumerator(const ValencyProfile& p) {
        for (const auto& [kind, n] : p.counts)
            for (int i = 0; i < n; ++i) {
                const int v = static_cast<int>(colors.size());
                colors.push_back(kind.color);
                const int even = kind.valence - kind.odd;
                if (even > 0) groups.push_back({v, tag_even, even, H});
                H += even;
                if (kind.odd > 0) groups.push_back({v, tag_odd, kind.odd, H});
                H += kind.odd;
            }
    }

    Graph build(const std::vector<std::pair<int, int>>& edges) const {
        Graph g;
        g.vertex_color = colors;
        g.incidence.resize(H);
        g.tag.resize(H);
        g.matching.assign(H, -1);
        for (const auto& gr : groups)
            for (int i = 0; i < gr.size; ++i) {
                g.incidence[gr.first_half_edge + i] = gr.vertex;
                g.tag[gr.first_half_edge + i] = gr.tag;
            }
        std::vector<int> next(groups.size(), 0);
        for (auto [a, b] : edges) {
            int ha = groups[a].first_half_edge + next[a]++;
            int hb = groups[b].first_half_edge + next[b]++;
            g.matching[ha] = hb;
            g.matching[hb] = ha;
        }
        return g;
    }

    // Each labelled multigraph exactly once: the lowest group with free half-edges pairs
    // its next half-edge with a group index that never decreases within its run.
    template <class Sink>
    void rec(std::vector<int>& free, std::vector<std::pair<int, int>>& edges, int ga, int last, Sink& sink) const {
        while (ga < static_cast<int>(groups.size()) && free[ga] == 0) {
            ++ga;
            last = ga;
        }
        if (ga == static_cast<int>(groups.size())) {
            sink(edges);
            return;
        }
        for (int gb = std::max(last, ga); gb < static_cast<int>(groups.size()); ++gb) {
            if (!tags_compatible(groups[ga].tag, groups[gb].tag)) continue;
            if (gb == ga ? free[ga] < 2 : free[gb] == 0) continue;
            if (!allow_short_loops && groups[ga].vertex == groups[gb].vertex) continue;
            --free[ga];
            --free[gb];
            edges.push_back({ga, gb});
            rec(free, edges, ga, gb, sink);
            edges.pop_back();
            ++free[ga];
            ++free[gb];
        }
    }
};

}  // namespace

std::vector<IsoClass> enumerate(const ValencyProfile& profile, const EnumerateOptions& opts) {
    int even_total = 0, odd_total = 0;
    for (const auto& [k, n] : profile.counts) {
        if (k.odd < 0 || k.odd > k.valence) throw std::invalid_argument("profile: odd count exceeds valence");
        even_total += (k.valence - k.odd) * n;
        odd_total += k.odd * n;
    }
    if (even_total % 2 || odd_total % 2)
        throw std::invalid_argument("profile " + profile.to_string() + ": odd number of half-edges");
    if (even_total + odd_total > opts.cap_half_edges)
        throw std::length_error("profile " + profile.to_string() + ": " + std::to_string(even_total + odd_total) +
                                " half-edges exceeds cap " + std::to_string(opts.cap_half_edges));

    Enumerator en(profile);
    en.allow_short_loops = opts.allow_short_loops;

    // First-level branches are split across workers; results merged by canonical code.
    std::vector<std::pair<int, int>> first;
    if (!en.groups.empty()) {
        std::vector<int> free;
        for (const auto& g : en.groups) free.push_back(g.size);
        for (int gb = 0; gb < static_cast<int>(en.groups.size()); ++gb) {
            if (!tags_compatible(en.groups[0].tag, en.groups[gb].tag)) continue;
            if (gb == 0 ? free[0] < 2 : free[gb] == 0) continue;
            if (!opts.allow_short_loops && en.groups[0].vertex == en.groups[gb].vertex) continue;
            first.push_back({0, gb});
        }
    }

    using Found = std::map<Code, IsoClass>;
    auto process = [&](const std::vector<std::pair<int, int>>& edges, Found& found) {
        Graph g = en.build(edges);
        Canonical c = canonicalize(g);
        if (found.count(c.code)) return;
        IsoClass ic;
        ic.components = connected_decompose(c.form);
        if (opts.connected_only && !is_connected(c.form)) return;
        ic.form = std::move(c.form);
        ic.aut = c.aut;
        found.emplace(std::move(c.code), std::move(ic));
    };

    Found merged;
    if (en.groups.empty()) {
        process({}, merged);
    } else {
        const int workers = std::min<int>(worker_count(opts.threads), static_cast<int>(first.size()));
        std::vector<Found> local(std::max(workers, 1));
        auto work = [&](int w) {
            for (std::size_t i = w; i < first.size(); i += workers) {
                std::vector<int> free;
                for (const auto& g : en.groups) free.push_back(g.size);
                auto [a, b] = first[i];
                --free[a];
                --free[b];
                std::vector<std::pair<int, int>> edges{first[i]};
                auto sink = [&](const std::vector<std::pair<int, int>>& e) { process(e, local[w]); };
                en.rec(free, edges, 0, b, sink);
            }
        };
        if (workers <= 1) {
            if (!first.empty()) work(0);
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
            for (auto& t : pool) t.join();
        }
        for (auto& l : local) merged.merge(l);
    }
    std::vector<IsoClass> out;
    for (auto& [code, ic] : merged) out.push_back(std::move(ic));
    return out;
}

Rational groupoid_volume(const std::vector<IsoClass>& classes) {
    Rational s = 0;
    for (const auto& c : classes) s += Rational(1, static_cast<unsigned long>(c.aut));
    return s;
}

Rational groupoid_volume_formula(const ValencyProfile& profile) {
    int even_total = 0, odd_total = 0;
    Rational denom = 1;
    for (const auto& [k, n] : profile.counts) {
        even_total += (k.valence - k.odd) * n;
        odd_total += k.odd * n;
        denom *= factorial(n);
        for (int i = 0; i < n; ++i) denom *= factorial(k.valence - k.odd) * factorial(k.odd);
    }
    if (even_total % 2 || odd_total % 2) return 0;
    return double_factorial_odd(even_total / 2) * double_factorial_odd(odd_total / 2) / denom;
}

namespace {

// Rooted binary tree shapes with unordered children; leaves are "L".
struct Shape {
    int leaves = 1;
    int left = -1, right = -1;  // indices into the shape table, left <= right
};

struct ShapeTable {
    std::vector<Shape> shapes;
    std::vector<std::vector<int>> by_leaves;  // leaf count -> shape ids

    explicit ShapeTable(int max_leaves) {
        by_leaves.resize(max_leaves + 1);
        shapes.push_back({1, -1, -1});
        if (max_leaves >= 1) by_leaves[1].push_back(0);
        for (int k = 2; k <= max_leaves; ++k)
            for (int i = 1; i <= k / 2; ++i)
                for (int a : by_leaves[i])
                    for (int b : by_leaves[k - i]) {
                        if (i == k - i && b < a) continue;
                        by_leaves[k].push_back(static_cast<int>(shapes.size()));
                        shapes.push_back({k, a, b});
                    }
    }

    // Emits the subtree; returns the vertex whose out half-edge still needs a partner.
    int emit(int id, std::vector<int>& colors, std::vector<EdgeSpec>& edges) const {
        const Shape& s = shapes[id];
        const int v = static_cast<int>(colors.size());
        if (s.left < 0) {
            colors.push_back(color_leaf);
            return v;
        }
        colors.push_back(color_internal);
        int a = emit(s.left, colors, edges);
        int b = emit(s.right, colors, edges);
        edges.push_back({a, v, tag_out, tag_in});
        edges.push_back({b, v, tag_out, tag_in});
        return v;
    }
};

}  // namespace

std::vector<IsoClass> enumerate_transfer_graphs(int leaves, TransferKind kind) {
    if (leaves < 1) throw std::invalid_argument("transfer graphs need at least one leaf");
    ShapeTable table(leaves);
    std::vector<Graph> graphs;
    if (kind == TransferKind::tree) {
        for (int id : table.by_leaves[leaves]) {
            std::vector<int> colors{color_root};
            std::vector<EdgeSpec> edges;
            int top = table.emit(id, colors, edges);
            edges.push_back({top, 0, tag_out, tag_in});
            graphs.push_back(graph_from_edges(colors, edges));
        }
    } else {
        // cyclic sequences of tree shapes, one per cycle vertex, leaf counts summing to `leaves`
        std::set<std::vector<int>> seen;
        std::vector<int> seq;
        std::function<void(int)> rec = [&](int remaining) {
            if (remaining == 0) {
                std::vector<int> best = seq;
                for (std::size_t r = 1; r < seq.size(); ++r) {
                    std::vector<int> rot(seq.begin() + r, seq.end());
                    rot.insert(rot.end(), seq.begin(), seq.begin() + r);
                    best = std::min(best, rot);
                }
                if (!seen.insert(best).second) return;
                std::vector<int> colors;
                std::vector<EdgeSpec> edges;
                const int m = static_cast<int>(best.size());
                for (int i = 0; i < m; ++i) colors.push_back(color_internal);
                for (int i = 0; i < m; ++i) edges.push_back({i, (i + 1) % m, tag_out, tag_in});
                for (int i = 0; i < m; ++i) {
                    int top = table.emit(best[i], colors, edges);
                    edges.push_back({top, i, tag_out, tag_in});
                }
                graphs.push_back(graph_from_edges(colors, edges));
                return;
            }
            for (int k = 1; k <= remaining; ++k)
                for (int id : table.by_leaves[k]) {
                    seq.push_back(id);
                    rec(remaining - k);
                    seq.pop_back();
                }
        };
        rec(leaves);
    }
    std::map<Code, IsoClass> found;
    for (const auto& g : graphs) {
        Canonical c = canonicalize(g);
        IsoClass ic;
        ic.form = c.form;
        ic.aut = c.aut;
        ic.components = {{c.form, 1}};
        if (!found.emplace(std::move(c.code), std::move(ic)).second)
            throw std::logic_error("transfer graph generated twice");
    }
    std::vector<IsoClass> out;
    for (auto& [code, ic] : found) out.push_back(std::move(ic));
    return out;
}

}  // namespace bvlab::feyn
