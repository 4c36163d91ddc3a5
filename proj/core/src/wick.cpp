#include "bvlab/wick.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bvlab::wick {

using graded::GradedPolynomial;
using graded::GradedVariable;
using graded::Monomial;

// ---------------------------------------------------------------- QI

QI QI::i_power(int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return QI(1, 0);
        case 1: return QI(0, 1);
        case 2: return QI(-1, 0);
        default: return QI(0, -1);
    }
}

QI& QI::operator+=(const QI& o) {
    re += o.re;
    im += o.im;
    return *this;
}

QI& QI::operator-=(const QI& o) {
    re -= o.re;
    im -= o.im;
    return *this;
}

QI operator*(const QI& a, const QI& b) {
    return QI(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
}

std::string QI::to_string() const {
    if (sgn(im) == 0) return bvlab::to_string(re);
    return bvlab::to_string(re) + "+" + bvlab::to_string(im) + "*i";
}

// ---------------------------------------------------------------- QuadraticData

QuadraticData QuadraticData::make(RMatrix q, Kind kind) {
    const std::size_t n = q.size();
    for (const auto& row : q)
        if (row.size() != n) throw std::invalid_argument("quadratic form must be square");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (kind == Kind::even && q[i][j] != q[j][i])
                throw std::invalid_argument("even quadratic form must be symmetric");
            if (kind == Kind::odd && q[i][j] != -q[j][i])
                throw std::invalid_argument("odd quadratic form must be antisymmetric");
        }
    QuadraticData d;
    d.kind = kind;
    d.inv = n == 0 ? RMatrix{} : inverse(q);
    d.q = std::move(q);
    return d;
}

// ---------------------------------------------------------------- SparseTensor

namespace {

int permutation_parity(const std::vector<int>& p) {
    int inv = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j)
            if (p[i] > p[j]) ++inv;
    return inv % 2;
}

}  // namespace

SparseTensor::SparseTensor(int even_rank, int odd_rank) : even_(even_rank), odd_(odd_rank) {
    if (even_rank < 0 || odd_rank < 0) throw std::invalid_argument("negative tensor rank");
}

void SparseTensor::set(const std::vector<int>& idx, const Rational& value) {
    if (static_cast<int>(idx.size()) != rank()) throw std::invalid_argument("tensor index count does not match rank");
    for (int i : idx)
        if (i < 0) throw std::invalid_argument("negative tensor index");
    std::vector<int> oddpart(idx.begin() + even_, idx.end());
    {
        auto s = oddpart;
        std::sort(s.begin(), s.end());
        if (std::adjacent_find(s.begin(), s.end()) != s.end()) {
            if (sgn(value) != 0) throw std::invalid_argument("antisymmetric slots with repeated index must vanish");
            return;
        }
    }
    std::vector<int> pe(even_), po(odd_);
    std::iota(pe.begin(), pe.end(), 0);
    do {
        std::iota(po.begin(), po.end(), 0);
        do {
            std::vector<int> key;
            key.reserve(idx.size());
            for (int i : pe) key.push_back(idx[i]);
            for (int i : po) key.push_back(idx[even_ + i]);
            Rational v = permutation_parity(po) ? Rational(-value) : value;
            if (sgn(v) == 0)
                entries_.erase(key);
            else
                entries_[key] = v;
        } while (std::next_permutation(po.begin(), po.end()));
    } while (std::next_permutation(pe.begin(), pe.end()));
}

Rational SparseTensor::at(const std::vector<int>& idx) const {
    auto it = entries_.find(idx);
    return it == entries_.end() ? Rational(0) : it->second;
}

std::vector<std::string> Perturbation::couplings() const {
    std::vector<std::string> out;
    for (const auto& t : terms)
        if (std::find(out.begin(), out.end(), t.coupling) == out.end()) out.push_back(t.coupling);
    return out;
}

// ---------------------------------------------------------------- Series

Series Series::one(std::vector<std::string> v, int ord) {
    Series s(std::move(v), ord);
    s.add(std::vector<int>(s.vars.size(), 0), QI(1));
    return s;
}

QI Series::coeff(const std::vector<int>& e) const {
    auto it = c.find(e);
    return it == c.end() ? QI() : it->second;
}

void Series::add(const std::vector<int>& e, const QI& x) {
    if (e.size() != vars.size()) throw std::invalid_argument("series exponent size mismatch");
    if (std::accumulate(e.begin(), e.end(), 0) > order) return;
    auto& slot = c[e];
    slot += x;
    if (slot.is_zero()) c.erase(e);
}

Series& Series::operator+=(const Series& o) {
    if (o.vars != vars) throw std::invalid_argument("series variable mismatch");
    order = std::min(order, o.order);
    for (const auto& [e, x] : o.c) add(e, x);
    for (auto it = c.begin(); it != c.end();)
        it = std::accumulate(it->first.begin(), it->first.end(), 0) > order ? c.erase(it) : std::next(it);
    return *this;
}

Series operator*(const Series& a, const Series& b) {
    if (a.vars != b.vars) throw std::invalid_argument("series variable mismatch");
    Series out(a.vars, std::min(a.order, b.order));
    for (const auto& [ea, xa] : a.c)
        for (const auto& [eb, xb] : b.c) {
            std::vector<int> e(ea.size());
            for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
            out.add(e, xa * xb);
        }
    return out;
}

bool operator==(const Series& a, const Series& b) { return a.vars == b.vars && a.order == b.order && a.c == b.c; }

std::string Series::to_string() const {
    std::ostringstream os;
    os << "{\"vars\":[";
    for (std::size_t i = 0; i < vars.size(); ++i) os << (i ? "," : "") << '"' << vars[i] << '"';
    os << "],\"order\":" << order << ",\"terms\":[";
    bool first = true;
    for (const auto& [e, x] : c) {
        os << (first ? "" : ",") << "{\"exp\":[";
        for (std::size_t i = 0; i < e.size(); ++i) os << (i ? "," : "") << e[i];
        os << "],\"re\":\"" << bvlab::to_string(x.re) << "\",\"im\":\"" << bvlab::to_string(x.im) << "\"}";
        first = false;
    }
    os << "]}";
    return os.str();
}

namespace {

Series scaled(const Series& s, const QI& f) {
    Series out(s.vars, s.order);
    for (const auto& [e, x] : s.c) out.add(e, x * f);
    return out;
}

Series without_constant(const Series& s, QI& constant) {
    Series u = s;
    auto zero = std::vector<int>(s.vars.size(), 0);
    constant = s.coeff(zero);
    u.c.erase(zero);
    return u;
}

}  // namespace

Series series_exp(const Series& s) {
    QI c0;
    Series u = without_constant(s, c0);
    if (!c0.is_zero()) throw std::domain_error("series_exp needs zero constant term");
    Series out = Series::one(s.vars, s.order);
    Series pw = Series::one(s.vars, s.order);
    for (int k = 1; k <= s.order; ++k) {
        pw = pw * u;
        out += scaled(pw, QI(Rational(1) / factorial(k)));
    }
    return out;
}

Series series_log(const Series& s) {
    QI c0;
    Series u = without_constant(s, c0);
    if (!(c0 == QI(1))) throw std::domain_error("series_log needs constant term 1");
    Series out(s.vars, s.order);
    Series pw = Series::one(s.vars, s.order);
    for (int k = 1; k <= s.order; ++k) {
        pw = pw * u;
        out += scaled(pw, QI(Rational(k % 2 ? 1 : -1, k)));
    }
    return out;
}

Series series_inverse(const Series& s) {
    QI c0;
    Series u = without_constant(s, c0);
    if (!(c0 == QI(1))) throw std::domain_error("series_inverse needs constant term 1");
    Series out = Series::one(s.vars, s.order);
    Series pw = Series::one(s.vars, s.order);
    for (int k = 1; k <= s.order; ++k) {
        pw = pw * u;
        out += scaled(pw, QI(k % 2 ? -1 : 1));
    }
    return out;
}

// ---------------------------------------------------------------- moments

Rational wick_moment(const QuadraticData& q, const std::vector<int>& indices) {
    if (indices.size() % 2) return 0;
    for (int i : indices)
        if (i < 0 || i >= static_cast<int>(q.dim())) throw std::out_of_range("moment index out of range");
    const bool odd = q.kind == Kind::odd;
    std::function<Rational(std::vector<int>)> rec = [&](std::vector<int> rest) -> Rational {
        if (rest.empty()) return 1;
        Rational total = 0;
        const int a = rest[0];
        for (std::size_t k = 1; k < rest.size(); ++k) {
            const Rational& e = q.inv[a][rest[k]];
            if (sgn(e) == 0) continue;
            std::vector<int> sub;
            for (std::size_t m = 1; m < rest.size(); ++m)
                if (m != k) sub.push_back(rest[m]);
            Rational v = e * rec(std::move(sub));
            if (odd && (k - 1) % 2) v = -v;
            total += v;
        }
        return total;
    };
    return rec(indices);
}

namespace {

// <x^alpha> by Gaussian integration by parts, memoized
class MomentCache {
public:
    explicit MomentCache(const RMatrix& eta) : eta_(eta) {}
    Rational get(std::vector<int> a) {
        std::size_t i = 0;
        while (i < a.size() && a[i] == 0) ++i;
        if (i == a.size()) return 1;
        if (std::accumulate(a.begin(), a.end(), 0) % 2) return 0;
        auto it = memo_.find(a);
        if (it != memo_.end()) return it->second;
        auto key = a;
        --a[i];
        Rational total = 0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            if (a[j] == 0 || sgn(eta_[i][j]) == 0) continue;
            auto b = a;
            --b[j];
            total += eta_[i][j] * a[j] * get(std::move(b));
        }
        memo_.emplace(std::move(key), total);
        return total;
    }

private:
    const RMatrix& eta_;
    std::map<std::vector<int>, Rational> memo_;
};

}  // namespace

Rational gaussian_moment(const QuadraticData& q, const std::vector<int>& exponents) {
    if (q.kind != Kind::even) throw std::invalid_argument("gaussian_moment needs even kind");
    if (exponents.size() != q.dim()) throw std::invalid_argument("exponent vector size mismatch");
    MomentCache cache(q.inv);
    return cache.get(exponents);
}

// ---------------------------------------------------------------- graph sums

namespace {

struct Propagators {
    const RMatrix* even = nullptr;
    const RMatrix* odd = nullptr;
};

void check_tensor(const SparseTensor& t, const Propagators& pr) {
    const int ne = pr.even ? static_cast<int>(pr.even->size()) : 0;
    const int no = pr.odd ? static_cast<int>(pr.odd->size()) : 0;
    if (t.even_rank() > 0 && !pr.even) throw std::invalid_argument("tensor has even slots but there are no even variables");
    if (t.odd_rank() > 0 && !pr.odd) throw std::invalid_argument("tensor has odd slots but there are no odd variables");
    if (t.odd_rank() % 2) throw std::invalid_argument("vertex tensors need an even number of odd slots");
    for (const auto& [idx, v] : t.entries())
        for (int s = 0; s < t.rank(); ++s)
            if (idx[s] >= (s < t.even_rank() ? ne : no)) throw std::out_of_range("tensor index out of range");
}

// Phi(Gamma) with sign (-1)^{sigma_o}: odd half-edges are ordered by vertex, then slot;
// an odd edge reads its propagator from the earlier half-edge to the later one.
Rational state_sum(const feyn::Graph& g, const std::vector<const SparseTensor*>& vt, const Propagators& pr) {
    const int nv = static_cast<int>(g.num_vertices());
    const int nh = static_cast<int>(g.num_half_edges());
    std::vector<std::vector<int>> slots(nv);
    std::vector<int> owner_slot(nh, -1);
    for (int v = 0; v < nv; ++v) {
        auto hs = g.half_edges_at(v);
        for (int h : hs)
            if (g.tag[h] == feyn::tag_even) slots[v].push_back(h);
        for (int h : hs)
            if (g.tag[h] == feyn::tag_odd) slots[v].push_back(h);
        if (static_cast<int>(slots[v].size()) != vt[v]->rank())
            throw std::logic_error("vertex valence does not match its tensor");
        for (std::size_t s = 0; s < slots[v].size(); ++s) owner_slot[slots[v][s]] = static_cast<int>(s);
    }
    std::vector<int> odd_pos(nh, -1);
    int npos = 0;
    for (int v = 0; v < nv; ++v)
        for (int h : slots[v])
            if (g.tag[h] == feyn::tag_odd) odd_pos[h] = npos++;
    int sign = 1;
    if (npos > 0) {
        std::vector<int> perm;
        for (int h = 0; h < nh; ++h) {
            if (g.tag[h] != feyn::tag_odd) continue;
            const int o = g.matching[h];
            if (odd_pos[h] < odd_pos[o]) {
                perm.push_back(odd_pos[h]);
                perm.push_back(odd_pos[o]);
            }
        }
        if (permutation_parity(perm)) sign = -1;
    }
    auto prop = [&](int tag, int a, int b) -> const Rational& {
        return tag == feyn::tag_even ? (*pr.even)[a][b] : (*pr.odd)[a][b];
    };

    std::vector<int> open;
    std::map<std::vector<int>, Rational> frontier{{{}, Rational(1)}};
    for (int v = 0; v < nv && !frontier.empty(); ++v) {
        enum { close, self_first, self_second, fresh };
        const auto& sl = slots[v];
        std::vector<int> plan(sl.size()), arg(sl.size(), -1);
        std::vector<bool> closed(open.size(), false);
        std::vector<int> new_open;
        for (std::size_t s = 0; s < sl.size(); ++s) {
            const int h = sl[s], o = g.matching[h];
            const int u = g.incidence[o];
            if (u == v) {
                const int so = owner_slot[o];
                plan[s] = so > static_cast<int>(s) ? self_first : self_second;
                arg[s] = so;
            } else if (u < v) {
                auto it = std::find(open.begin(), open.end(), o);
                plan[s] = close;
                arg[s] = static_cast<int>(it - open.begin());
                closed[arg[s]] = true;
            } else {
                plan[s] = fresh;
            }
        }
        std::vector<int> keep;
        for (std::size_t i = 0; i < open.size(); ++i)
            if (!closed[i]) {
                keep.push_back(static_cast<int>(i));
                new_open.push_back(open[i]);
            }
        for (std::size_t s = 0; s < sl.size(); ++s)
            if (plan[s] == fresh) new_open.push_back(sl[s]);

        std::map<std::vector<int>, Rational> next;
        for (const auto& [key, w] : frontier)
            for (const auto& [idx, val] : vt[v]->entries()) {
                Rational f = w * val;
                for (std::size_t s = 0; s < sl.size() && sgn(f) != 0; ++s) {
                    const int tag = g.tag[sl[s]];
                    if (plan[s] == close)
                        f *= prop(tag, key[arg[s]], idx[s]);
                    else if (plan[s] == self_first)
                        f *= prop(tag, idx[s], idx[arg[s]]);
                }
                if (sgn(f) == 0) continue;
                std::vector<int> nk;
                nk.reserve(new_open.size());
                for (int i : keep) nk.push_back(key[i]);
                for (std::size_t s = 0; s < sl.size(); ++s)
                    if (plan[s] == fresh) nk.push_back(idx[s]);
                next[std::move(nk)] += f;
            }
        for (auto it = next.begin(); it != next.end();) it = sgn(it->second) == 0 ? next.erase(it) : std::next(it);
        frontier = std::move(next);
        open = std::move(new_open);
    }
    auto it = frontier.find({});
    Rational total = it == frontier.end() ? Rational(0) : it->second;
    return sign < 0 ? Rational(-total) : total;
}

struct GraphSumInput {
    Propagators pr;
    std::vector<const SparseTensor*> neutral;           // color = index
    std::vector<std::vector<const SparseTensor*>> obs;  // per observable, its homogeneous pieces
    bool fresnel = false;
    bool connected_only = false;
    bool components_need_observable = false;
    int cap = 16;
};

// Visits every graph with counts[t] neutral vertices of term t and one vertex per observable.
void visit_graphs(const GraphSumInput& in, const std::vector<int>& counts,
                  const std::function<void(GraphTerm&&)>& callback) {
    const int nt = static_cast<int>(in.neutral.size());
    std::vector<int> color_base;
    int next_color = nt;
    for (const auto& o : in.obs) {
        color_base.push_back(next_color);
        next_color += static_cast<int>(o.size());
    }
    std::vector<const SparseTensor*> by_color(next_color);
    for (int t = 0; t < nt; ++t) by_color[t] = in.neutral[t];
    for (std::size_t j = 0; j < in.obs.size(); ++j)
        for (std::size_t k = 0; k < in.obs[j].size(); ++k) by_color[color_base[j] + k] = in.obs[j][k];

    std::vector<int> choice(in.obs.size(), 0);
    std::function<void(std::size_t)> pick = [&](std::size_t j) {
        if (j < in.obs.size()) {
            for (std::size_t k = 0; k < in.obs[j].size(); ++k) {
                choice[j] = static_cast<int>(k);
                pick(j + 1);
            }
            return;
        }
        feyn::ValencyProfile prof;
        int even_he = 0, odd_he = 0;
        auto add_kind = [&](int color, const SparseTensor* t, int n) {
            if (n == 0) return;
            prof.counts[{color, t->rank(), t->odd_rank()}] += n;
            even_he += n * t->even_rank();
            odd_he += n * t->odd_rank();
        };
        for (int t = 0; t < nt; ++t) add_kind(t, in.neutral[t], counts[t]);
        for (std::size_t jj = 0; jj < in.obs.size(); ++jj)
            add_kind(color_base[jj] + choice[jj], in.obs[jj][choice[jj]], 1);
        if (even_he % 2 || odd_he % 2) return;
        feyn::EnumerateOptions eo;
        eo.cap_half_edges = in.cap;
        eo.connected_only = in.connected_only;
        const int nv_neutral = std::accumulate(counts.begin(), counts.end(), 0);
        for (auto& cls : feyn::enumerate(prof, eo)) {
            if (in.components_need_observable) {
                bool ok = true;
                for (const auto& [comp, mult] : cls.components) {
                    bool touches = false;
                    for (int c : comp.vertex_color) touches = touches || c >= nt;
                    ok = ok && touches;
                }
                if (!ok) continue;
            }
            std::vector<const SparseTensor*> vt;
            for (int c : cls.form.vertex_color) vt.push_back(by_color[c]);
            Rational phi = state_sum(cls.form, vt, in.pr);
            GraphTerm term;
            term.aut = cls.aut;
            term.vertex_counts = counts;
            term.weight = QI(phi / Rational(Integer(std::to_string(cls.aut))));
            if (in.fresnel)
                term.weight = term.weight *
                              QI::i_power(static_cast<int>(cls.form.num_edges()) + nv_neutral);
            term.graph = std::move(cls.form);
            callback(std::move(term));
        }
    };
    pick(0);
}

// all count vectors over n terms with total <= order
void for_each_counts(int nterms, int order, const std::function<void(const std::vector<int>&)>& f) {
    std::vector<int> c(nterms, 0);
    std::function<void(int, int)> rec = [&](int t, int left) {
        if (t == nterms) {
            f(c);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            c[t] = k;
            rec(t + 1, left - k);
        }
        c[t] = 0;
    };
    rec(0, order);
}

struct CouplingMap {
    std::vector<std::string> vars;
    std::vector<int> of_term;
    explicit CouplingMap(const Perturbation& p) : vars(p.couplings()) {
        for (const auto& t : p.terms)
            of_term.push_back(static_cast<int>(std::find(vars.begin(), vars.end(), t.coupling) - vars.begin()));
    }
    std::vector<int> exponent(const std::vector<int>& counts) const {
        std::vector<int> e(vars.size(), 0);
        for (std::size_t t = 0; t < counts.size(); ++t) e[of_term[t]] += counts[t];
        return e;
    }
};

Propagators propagators_of(const QuadraticData& q) {
    Propagators pr;
    (q.kind == Kind::even ? pr.even : pr.odd) = &q.inv;
    return pr;
}

Series graph_series(const GraphSumInput& in, const CouplingMap& cm, int order, std::vector<GraphTerm>* keep) {
    Series out(cm.vars, order);
    for_each_counts(static_cast<int>(in.neutral.size()), order, [&](const std::vector<int>& counts) {
        visit_graphs(in, counts, [&](GraphTerm&& t) {
            out.add(cm.exponent(counts), t.weight);
            if (keep) keep->push_back(std::move(t));
        });
    });
    return out;
}

GraphSumInput make_input(const Propagators& pr, const Perturbation& p, const ExpectationOptions& opts) {
    GraphSumInput in;
    in.pr = pr;
    for (const auto& t : p.terms) {
        check_tensor(t.tensor, pr);
        in.neutral.push_back(&t.tensor);
    }
    in.fresnel = opts.fresnel;
    in.connected_only = opts.connected_only;
    in.cap = opts.cap_half_edges;
    return in;
}

}  // namespace

std::vector<GraphTerm> graph_terms(const QuadraticData& q, const Perturbation& p, int order,
                                   const ExpectationOptions& opts) {
    if (order < 0) throw std::invalid_argument("negative order");
    std::vector<GraphTerm> out;
    graph_series(make_input(propagators_of(q), p, opts), CouplingMap(p), order, &out);
    return out;
}

std::vector<GraphTerm> graphs_for_counts(const QuadraticData& q, const std::vector<SparseTensor>& neutral,
                                         const std::vector<int>& counts, const std::vector<SparseTensor>& marked,
                                         const ExpectationOptions& opts) {
    if (counts.size() != neutral.size()) throw std::invalid_argument("one count per neutral tensor expected");
    auto pr = propagators_of(q);
    GraphSumInput in;
    in.pr = pr;
    for (const auto& t : neutral) {
        check_tensor(t, pr);
        in.neutral.push_back(&t);
    }
    for (const auto& t : marked) {
        check_tensor(t, pr);
        in.obs.push_back({&t});
    }
    in.fresnel = opts.fresnel;
    in.connected_only = opts.connected_only;
    in.cap = opts.cap_half_edges;
    std::vector<GraphTerm> out;
    visit_graphs(in, counts, [&](GraphTerm&& t) { out.push_back(std::move(t)); });
    return out;
}

Series perturbative_expectation(const QuadraticData& q, const Perturbation& p, int order,
                                const ExpectationOptions& opts) {
    if (order < 0) throw std::invalid_argument("negative order");
    return graph_series(make_input(propagators_of(q), p, opts), CouplingMap(p), order, nullptr);
}

Series expectation_with_observables(const QuadraticData& q, const Perturbation& p, const std::vector<Observable>& obs,
                                    int order, const ExpectationOptions& opts) {
    if (order < 0) throw std::invalid_argument("negative order");
    auto pr = propagators_of(q);
    GraphSumInput in = make_input(pr, p, opts);
    for (const auto& o : obs) {
        if (o.empty()) throw std::invalid_argument("observable without pieces");
        std::vector<const SparseTensor*> pieces;
        for (const auto& t : o) {
            check_tensor(t, pr);
            pieces.push_back(&t);
        }
        in.obs.push_back(std::move(pieces));
    }
    in.components_need_observable = true;
    return graph_series(in, CouplingMap(p), order, nullptr);
}

Series super_perturbative(const SuperQuadraticData& s, int order, std::vector<GraphTerm>* terms, int cap_half_edges) {
    if (s.even.kind != Kind::even || s.odd.kind != Kind::odd) throw std::invalid_argument("super data block kinds");
    Propagators pr;
    if (s.even.dim() > 0) pr.even = &s.even.inv;
    if (s.odd.dim() > 0) pr.odd = &s.odd.inv;
    ExpectationOptions opts;
    opts.cap_half_edges = cap_half_edges;
    return graph_series(make_input(pr, s.p, opts), CouplingMap(s.p), order, terms);
}

LoopExpansion loop_expansion(const QuadraticData& q, const std::vector<SparseTensor>& p, int hbar_order) {
    if (q.kind != Kind::even) throw std::invalid_argument("loop expansion needs an even quadratic form");
    if (hbar_order < 0) throw std::invalid_argument("negative order");
    auto pr = propagators_of(q);
    GraphSumInput in;
    in.pr = pr;
    for (const auto& t : p) {
        if (t.rank() < 3) throw std::invalid_argument("loop expansion needs perturbation degrees >= 3");
        check_tensor(t, pr);
        in.neutral.push_back(&t);
    }
    LoopExpansion out;
    out.full.assign(hbar_order + 1, 0);
    out.connected.assign(hbar_order + 1, 0);
    // E - V = sum_t n_t (d_t/2 - 1); collect count vectors with 2(E - V) <= 2 * hbar_order
    const int nt = static_cast<int>(p.size());
    std::vector<int> c(nt, 0);
    std::function<void(int, int)> rec = [&](int t, int twice_left) {
        if (t == nt) {
            int twice = 0;
            for (int i = 0; i < nt; ++i) twice += c[i] * (p[i].rank() - 2);
            if (twice % 2) return;
            const int k = twice / 2;
            visit_graphs(in, c, [&](GraphTerm&& g) {
                out.full[k] += g.weight.re;
                if (feyn::is_connected(g.graph)) out.connected[k] += g.weight.re;
            });
            return;
        }
        const int step = p[t].rank() - 2;
        for (int n = 0; n * step <= twice_left; ++n) {
            c[t] = n;
            rec(t + 1, twice_left - n * step);
        }
        c[t] = 0;
    };
    rec(0, 2 * hbar_order);
    return out;
}

// ---------------------------------------------------------------- polynomial oracles

namespace {

GradedPolynomial nilpotent_exp(const GradedPolynomial& x) {
    GradedPolynomial out = GradedPolynomial::constant(x.context(), 1, x.truncation());
    GradedPolynomial pw = out;
    for (int k = 1;; ++k) {
        pw = multiply(pw, x) * Rational(1, k);
        if (pw.is_zero()) break;
        out += pw;
    }
    return out;
}

Rational constant_of(const GradedPolynomial& p) {
    return p.coefficient(Monomial(p.context()->size(), 0));
}

// Integrates polynomials in (x, theta) against the normalized Gaussian measures.
class PolyOracle {
public:
    PolyOracle(const RMatrix* even_inv, const RMatrix* odd_q)
        : ne_(even_inv ? even_inv->size() : 0), no_(odd_q ? odd_q->size() : 0), moments_(even_inv ? *even_inv : empty_) {
        std::vector<GradedVariable> vars;
        for (std::size_t i = 0; i < ne_; ++i) vars.push_back({"x" + std::to_string(i), 0});
        for (std::size_t a = 0; a < no_; ++a) vars.push_back({"t" + std::to_string(a), 1});
        ctx_ = graded::make_context(vars);
        if (no_ > 0) {
            GradedPolynomial quad(ctx_, 1);
            for (std::size_t a = 0; a < no_; ++a)
                for (std::size_t b = 0; b < no_; ++b)
                    if (sgn((*odd_q)[a][b]) != 0)
                        quad += multiply(var(ne_ + a), var(ne_ + b)) * Rational((*odd_q)[a][b] * Rational(-1, 2));
            weight_ = nilpotent_exp(quad);
            for (std::size_t a = 0; a < no_; ++a) odd_names_.push_back("t" + std::to_string(a));
            z_ = constant_of(berezin_integrate(weight_, odd_names_));
            if (sgn(z_) == 0) throw std::domain_error("degenerate odd Gaussian");
        }
    }

    const graded::ContextPtr& context() const { return ctx_; }
    GradedPolynomial var(std::size_t i) const { return GradedPolynomial::variable(ctx_, i, 1); }

    // sum_entries val * prod slot variables / (j! k!)
    GradedPolynomial vertex(const SparseTensor& t) const {
        GradedPolynomial out(ctx_, 1);
        for (const auto& [idx, val] : t.entries()) {
            GradedPolynomial m = GradedPolynomial::constant(ctx_, val, 1);
            for (int s = 0; s < t.rank(); ++s)
                m = multiply(m, var(s < t.even_rank() ? idx[s] : ne_ + idx[s]));
            out += m;
        }
        return out * (Rational(1) / (factorial(t.even_rank()) * factorial(t.odd_rank())));
    }

    Rational integrate(const GradedPolynomial& f) {
        Rational total = 0;
        for (const auto& [m, s] : f.terms()) {
            const Rational& c = s.coeff(0);
            if (sgn(c) == 0) continue;
            std::vector<int> alpha(m.begin(), m.begin() + ne_);
            Monomial odd_part(m.size(), 0);
            bool any_odd = false;
            for (std::size_t a = 0; a < no_; ++a) {
                odd_part[ne_ + a] = m[ne_ + a];
                any_odd = any_odd || m[ne_ + a];
            }
            Rational om = any_odd ? odd_moment(odd_part) : Rational(1);
            if (sgn(om) == 0) continue;
            total += c * om * moments_.get(alpha);
        }
        return total;
    }

private:
    Rational odd_moment(const Monomial& m) {
        auto it = odd_cache_.find(m);
        if (it != odd_cache_.end()) return it->second;
        GradedPolynomial mono(ctx_, 1);
        mono.add_term(m, 1);
        Rational v = constant_of(berezin_integrate(multiply(mono, weight_), odd_names_)) / z_;
        odd_cache_.emplace(m, v);
        return v;
    }

    static inline const RMatrix empty_{};
    std::size_t ne_, no_;
    MomentCache moments_;
    graded::ContextPtr ctx_;
    GradedPolynomial weight_;
    std::vector<std::string> odd_names_;
    Rational z_ = 1;
    std::map<Monomial, Rational> odd_cache_;
};

// product over terms of p_t^{n_t}/n_t!, powers cached
class ExpansionCache {
public:
    ExpansionCache(PolyOracle& o, const Perturbation& p, int order) {
        for (const auto& t : p.terms) {
            std::vector<GradedPolynomial> pw{GradedPolynomial::constant(o.context(), 1, 1)};
            GradedPolynomial v = o.vertex(t.tensor);
            for (int k = 1; k <= order; ++k) pw.push_back(multiply(pw.back(), v) * Rational(1, k));
            powers_.push_back(std::move(pw));
            degree_.push_back(t.tensor.rank());
        }
        one_ = GradedPolynomial::constant(o.context(), 1, 1);
    }
    GradedPolynomial product(const std::vector<int>& counts) const {
        GradedPolynomial out = one_;
        for (std::size_t t = 0; t < counts.size(); ++t)
            if (counts[t]) out = multiply(out, powers_[t][counts[t]]);
        return out;
    }
    int half_edges(const std::vector<int>& counts) const {
        int h = 0;
        for (std::size_t t = 0; t < counts.size(); ++t) h += counts[t] * degree_[t];
        return h;
    }

private:
    std::vector<std::vector<GradedPolynomial>> powers_;
    std::vector<int> degree_;
    GradedPolynomial one_;
};

Series oracle_series(PolyOracle& o, const Perturbation& p, int order, bool fresnel,
                     const GradedPolynomial* extra, int extra_half_edges) {
    CouplingMap cm(p);
    ExpansionCache ex(o, p, order);
    Series out(cm.vars, order);
    for_each_counts(static_cast<int>(p.terms.size()), order, [&](const std::vector<int>& counts) {
        GradedPolynomial f = ex.product(counts);
        if (extra) f = multiply(f, *extra);
        Rational v = o.integrate(f);
        QI w(v);
        if (fresnel) {
            const int nv = std::accumulate(counts.begin(), counts.end(), 0);
            const int h = ex.half_edges(counts) + extra_half_edges;
            if (h % 2 == 0) w = w * QI::i_power(nv + h / 2);
        }
        out.add(cm.exponent(counts), w);
    });
    return out;
}

}  // namespace

Series perturbative_expectation_oracle(const QuadraticData& q, const Perturbation& p, int order, bool fresnel) {
    PolyOracle o(q.kind == Kind::even ? &q.inv : nullptr, q.kind == Kind::odd ? &q.q : nullptr);
    return oracle_series(o, p, order, fresnel, nullptr, 0);
}

Series observables_oracle(const QuadraticData& q, const Perturbation& p, const std::vector<Observable>& obs,
                          int order) {
    if (q.kind != Kind::even) throw std::invalid_argument("observables oracle needs an even quadratic form");
    PolyOracle o(&q.inv, nullptr);
    GradedPolynomial psi = GradedPolynomial::constant(o.context(), 1, 1);
    for (const auto& ob : obs) {
        GradedPolynomial s(o.context(), 1);
        for (const auto& t : ob) s += o.vertex(t);
        psi = multiply(psi, s);
    }
    Series num = oracle_series(o, p, order, false, &psi, 0);
    Series z = oracle_series(o, p, order, false, nullptr, 0);
    return num * series_inverse(z);
}

Series super_perturbative_oracle(const SuperQuadraticData& s, int order) {
    PolyOracle o(s.even.dim() ? &s.even.inv : nullptr, s.odd.dim() ? &s.odd.q : nullptr);
    return oracle_series(o, s.p, order, false, nullptr, 0);
}

Series exp_operator_form(const QuadraticData& q, const Perturbation& p, int order) {
    if (q.kind != Kind::even) throw std::invalid_argument("exp_operator_form needs an even quadratic form");
    PolyOracle o(&q.inv, nullptr);
    CouplingMap cm(p);
    ExpansionCache ex(o, p, order);
    const std::size_t n = q.dim();
    auto apply_l = [&](const GradedPolynomial& f) {
        GradedPolynomial out(o.context(), 1);
        for (std::size_t i = 0; i < n; ++i) {
            GradedPolynomial di = graded::derive(f, i, graded::Side::left);
            if (di.is_zero()) continue;
            for (std::size_t j = 0; j < n; ++j)
                if (sgn(q.inv[i][j]) != 0) out += graded::derive(di, j, graded::Side::left) * q.inv[i][j];
        }
        return out * Rational(1, 2);
    };
    Series out(cm.vars, order);
    for_each_counts(static_cast<int>(p.terms.size()), order, [&](const std::vector<int>& counts) {
        GradedPolynomial f = ex.product(counts);
        Rational total = 0;
        for (int k = 0; !f.is_zero(); ++k) {
            total += constant_of(f) / factorial(k);
            f = apply_l(f);
        }
        out.add(cm.exponent(counts), QI(total));
    });
    return out;
}

// ---------------------------------------------------------------- odd linear algebra

Rational pfaffian(const RMatrix& a) {
    const std::size_t n = a.size();
    if (n % 2) return 0;
    if (n > 30) throw std::length_error("pfaffian size too large");
    std::map<std::uint32_t, Rational> memo;
    std::function<Rational(std::uint32_t)> rec = [&](std::uint32_t mask) -> Rational {
        if (mask == 0) return 1;
        auto it = memo.find(mask);
        if (it != memo.end()) return it->second;
        int i = __builtin_ctz(mask);
        std::uint32_t rest = mask & ~(1u << i);
        Rational total = 0;
        int between = 0;
        for (int j = i + 1; j < static_cast<int>(n); ++j) {
            if (!(rest >> j & 1u)) continue;
            if (sgn(a[i][j]) != 0) {
                Rational v = a[i][j] * rec(rest & ~(1u << j));
                total += between % 2 ? Rational(-v) : v;
            }
            ++between;
        }
        memo.emplace(mask, total);
        return total;
    };
    return rec((n == 32 ? 0u : (1u << n)) - 1u);
}

Rational determinant_cofactor(const RMatrix& a) {
    const std::size_t n = a.size();
    if (n > 30) throw std::length_error("cofactor determinant size too large");
    std::map<std::uint32_t, Rational> memo;
    // rows taken in order; mask holds the columns still free
    std::function<Rational(std::size_t, std::uint32_t)> rec = [&](std::size_t row, std::uint32_t mask) -> Rational {
        if (row == n) return 1;
        auto it = memo.find(mask);
        if (it != memo.end()) return it->second;
        Rational total = 0;
        int pos = 0;
        for (std::size_t c = 0; c < n; ++c) {
            if (!(mask >> c & 1u)) continue;
            if (sgn(a[row][c]) != 0) {
                Rational v = a[row][c] * rec(row + 1, mask & ~(1u << c));
                total += pos % 2 ? Rational(-v) : v;
            }
            ++pos;
        }
        memo.emplace(mask, total);
        return total;
    };
    return rec(0, (1u << n) - 1u);
}

GradedPolynomial berezin_integrate(const GradedPolynomial& f, const std::vector<std::string>& vars) {
    GradedPolynomial out = f;
    for (const auto& v : vars) {
        if (!f.context()->var(f.context()->index(v)).is_odd())
            throw std::invalid_argument("Berezin integration over even variable " + v);
        out = graded::derive(out, v, graded::Side::left);
    }
    return out;
}

Rational det_via_pairs(const RMatrix& b) {
    const std::size_t n = b.size();
    std::vector<GradedVariable> vars;
    std::vector<std::string> order;
    for (std::size_t i = 0; i < n; ++i) {
        vars.push_back({"tb" + std::to_string(i), 1});
        vars.push_back({"t" + std::to_string(i), 1});
        order.push_back("tb" + std::to_string(i));
        order.push_back("t" + std::to_string(i));
    }
    auto ctx = graded::make_context(vars);
    GradedPolynomial x(ctx, 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (sgn(b[i][j]) != 0)
                x += multiply(GradedPolynomial::variable(ctx, 2 * i, 1), GradedPolynomial::variable(ctx, 2 * j + 1, 1)) *
                     b[i][j];
    return constant_of(berezin_integrate(nilpotent_exp(x), order));
}

Rational berezin_gaussian(const RMatrix& q) {
    const std::size_t n = q.size();
    std::vector<GradedVariable> vars;
    std::vector<std::string> order;
    for (std::size_t i = 0; i < n; ++i) {
        vars.push_back({"t" + std::to_string(i), 1});
        order.push_back("t" + std::to_string(i));
    }
    auto ctx = graded::make_context(vars);
    GradedPolynomial x(ctx, 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (sgn(q[i][j]) != 0)
                x += multiply(GradedPolynomial::variable(ctx, i, 1), GradedPolynomial::variable(ctx, j, 1)) *
                     Rational(q[i][j] / 2);
    return constant_of(berezin_integrate(nilpotent_exp(x), order));
}

PolygonCheck polygon_series(const RMatrix& b, const RMatrix& p, int order) {
    const std::size_t n = b.size();
    if (order < 0) throw std::invalid_argument("negative order");
    RMatrix m = mat_mul(inverse(b), p);  // throws on singular B
    RMatrix neg_b = mat_scale(b, -1);
    // exponent L(a) = -sum_k a^k/k tr M^k
    std::vector<Rational> l(order + 1, 0);
    RMatrix mk = identity_matrix(n);
    for (int k = 1; k <= order; ++k) {
        mk = mat_mul(mk, m);
        Rational tr = 0;
        for (std::size_t i = 0; i < n; ++i) tr += mk[i][i];
        l[k] = -tr / k;
    }
    // exp of a series without constant term: e' = L' e
    std::vector<Rational> e(order + 1, 0);
    e[0] = 1;
    for (int k = 1; k <= order; ++k) {
        Rational s = 0;
        for (int j = 1; j <= k; ++j) s += j * l[j] * e[k - j];
        e[k] = s / k;
    }
    Rational d0 = determinant(neg_b);
    PolygonCheck out;
    for (auto& c : e) out.graph_side.push_back(d0 * c);
    // det(-B + a P) is a polynomial of degree <= n: interpolate at a = 0..n
    RMatrix vander(n + 1, std::vector<Rational>(n + 1));
    std::vector<Rational> vals(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        Rational pw = 1;
        for (std::size_t j = 0; j <= n; ++j) {
            vander[k][j] = pw;
            pw *= static_cast<long>(k);
        }
        vals[k] = determinant(mat_add(neg_b, mat_scale(p, static_cast<long>(k))));
    }
    std::vector<Rational> coef;
    if (!solve_linear(vander, vals, coef)) throw std::logic_error("interpolation failed");
    for (int k = 0; k <= order; ++k) out.direct.push_back(k <= static_cast<int>(n) ? coef[k] : Rational(0));
    out.agree = out.direct == out.graph_side;
    return out;
}

Rational sdet(const RMatrix& a, const RMatrix& b, const RMatrix& c, const RMatrix& d) {
    Rational dd = d.empty() ? Rational(1) : determinant(d);
    if (sgn(dd) == 0) throw std::domain_error("sdet: singular odd-odd block");
    if (a.empty()) return 1 / dd;
    RMatrix schur = d.empty() ? a : mat_sub(a, mat_mul(mat_mul(b, inverse(d)), c));
    return determinant(schur) / dd;
}

// ---------------------------------------------------------------- text format

ProblemFile parse_problem(const std::string& text, Kind kind) {
    std::istringstream in(text);
    std::string line;
    std::map<std::pair<int, int>, Rational> qentries;
    std::map<int, SparseTensor> tensors;
    int dim = 0, lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        auto fail = [&](const std::string& why) {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": " + why);
        };
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        auto as_int = [&](const std::string& s) {
            std::size_t used = 0;
            int v = 0;
            try {
                v = std::stoi(s, &used);
            } catch (const std::exception&) {
                fail("expected integer, got '" + s + "'");
            }
            if (used != s.size() || v < 0) fail("expected non-negative integer, got '" + s + "'");
            return v;
        };
        if (tag == "Q") {
            if (tok.size() != 3) fail("Q record needs i j value");
            int i = as_int(tok[0]), j = as_int(tok[1]);
            qentries[{i, j}] = parse_rational(tok[2]);
            dim = std::max(dim, std::max(i, j) + 1);
        } else if (tag == "P") {
            if (tok.empty()) fail("P record needs a degree");
            int d = as_int(tok[0]);
            if (static_cast<int>(tok.size()) != d + 2) fail("P record needs d indices and a value");
            std::vector<int> idx;
            for (int s = 0; s < d; ++s) {
                idx.push_back(as_int(tok[1 + s]));
                dim = std::max(dim, idx.back() + 1);
            }
            auto it = tensors.find(d);
            if (it == tensors.end())
                it = tensors.emplace(d, kind == Kind::even ? SparseTensor(d, 0) : SparseTensor(0, d)).first;
            it->second.set(idx, parse_rational(tok[d + 1]));
        } else {
            fail("unknown record '" + tag + "'");
        }
    }
    ProblemFile pf;
    pf.q = zero_matrix(dim, dim);
    for (const auto& [ij, v] : qentries) {
        auto [i, j] = ij;
        pf.q[i][j] = v;
        if (i != j) {
            Rational mirrored = kind == Kind::even ? v : Rational(-v);
            auto other = qentries.find({j, i});
            if (other != qentries.end() && other->second != mirrored)
                throw std::invalid_argument("Q entries (" + std::to_string(i) + "," + std::to_string(j) +
                                            ") and transpose disagree");
            pf.q[j][i] = mirrored;
        }
    }
    for (auto& [d, t] : tensors) pf.p.terms.push_back({"g" + std::to_string(d), std::move(t)});
    return pf;
}

std::string problem_to_text(const ProblemFile& pf) {
    std::ostringstream out;
    for (std::size_t i = 0; i < pf.q.size(); ++i)
        for (std::size_t j = i; j < pf.q.size(); ++j)
            if (sgn(pf.q[i][j]) != 0) out << "Q " << i << ' ' << j << ' ' << to_string(pf.q[i][j]) << '\n';
    for (const auto& term : pf.p.terms)
        for (const auto& [idx, v] : term.tensor.entries()) {
            if (!std::is_sorted(idx.begin(), idx.end())) continue;
            out << "P " << idx.size();
            for (int i : idx) out << ' ' << i;
            out << ' ' << to_string(v) << '\n';
        }
    return out.str();
}

}  // namespace bvlab::wick
