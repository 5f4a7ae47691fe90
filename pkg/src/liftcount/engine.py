"""Incremental lifted counting over c1-type configurations.

The domain grows one element at a time. The DP state is a configuration K:
how many existing elements realise each c1-type (1-type index, c-type),
where a c-type records, per counting axis, how many witnesses an element has
seen so far (saturating at the bound, overflow is discarded) or, per modulo
axis, the witness count modulo the axis modulus.

Configurations are sparse: sorted tuples of (c1 index, count) with
c1 index = one_type * C + ctype_code.
"""
import itertools
import logging
import math
import time
from fractions import Fraction

from .arith import Poly, Registry, canon, coefficient_of
from .cells import Axis, build_cell_table
from .logic import Affine, compare

log = logging.getLogger(__name__)


class Engine:
    def __init__(self, problem, n_max=None, prune=True):
        self.problem = problem
        self.prune = prune
        self.n_max = n_max
        axes = [Axis(p, k) for p, _, k in problem.binary_counting]
        axes += [Axis(p, k, True) for p, _, _, k in problem.binary_modulo]
        self.axes = axes
        self.M = len(axes)

        # symbolic weights for binary cardinality constraints
        weights = dict(problem.weights)
        names = []
        for pred, _ in problem.cardinality:
            if pred not in names:
                names.append(pred)
        caps = None
        if n_max is not None and names:
            caps = tuple(
                max(t.at(n_max) for p, t in problem.cardinality if p == name) for name in names
            )
        self.registry = Registry(tuple(names), caps) if names else None
        for name in names:
            w, wb = weights.get(name, (1, 1))
            z = self.registry.unit(name)
            weights[name] = (z * w, self.registry.const(wb))
        self.cell = build_cell_table(problem.psi, problem.vocabulary, weights, axes, problem.order)
        self._setup_ctypes()
        self._setup_acceptance()
        self._f = {}
        self._entries_cache = {}
        self.trace = []

    # ------------------------------------------------------------ c-types

    def _setup_ctypes(self):
        sizes = [ax.size for ax in self.axes]
        self.ctypes = list(itertools.product(*[range(s) for s in sizes]))
        self.code = {c: i for i, c in enumerate(self.ctypes)}
        self.C = len(self.ctypes)
        C, M = self.C, self.M

        def add_vec(a, b):
            out = []
            for ax, x, y in zip(self.axes, a, b):
                s = x + y
                if ax.modular:
                    s %= ax.bound
                elif s > ax.bound:
                    return -1
                out.append(s)
            return self.code[tuple(out)]

        self.cadd = [[add_vec(a, b) for b in self.ctypes] for a in self.ctypes]
        # c + sigma for a 0/1 increment bitmask sigma
        bits = [tuple((m >> k) & 1 for k in range(M)) for m in range(1 << M)]
        self.csig = [[add_vec(c, b) for b in bits] for c in self.ctypes]
        self.zero = self.code[tuple(0 for _ in self.axes)]
        self.base = [self.csig[self.zero][m] for m in self.cell.self_inc]
        self.p = self.cell.p
        self.D = self.p * C

    def theorem_exponent(self):
        """Exponent of the polynomial runtime bound: 2*D + 2^M - 2."""
        return 2 * self.D + 2 ** self.M - 2

    # ------------------------------------------------------------ acceptance

    def _setup_acceptance(self):
        pr = self.problem
        nc = len(pr.binary_counting)
        ok = []
        eq_need = []
        for c in self.ctypes:
            good = True
            need = 0
            for a, (_, cmp, k) in enumerate(pr.binary_counting):
                if cmp == "=":
                    if c[a] != k:
                        good = False
                    need = max(need, k - c[a])
            for a, (_, cmp, r, k) in enumerate(pr.binary_modulo):
                if not compare(cmp, c[nc + a], r):
                    good = False
            ok.append(good)
            eq_need.append(need)
        self.ok_ctype = ok
        self.need = eq_need
        idx = {lit: i for i, lit in enumerate(self.cell.unary)}
        self.unary_member = []
        for pred, cmp, target in pr.unary_counting:
            i = idx[(pred, "u")]
            self.unary_member.append([t[i] for t in self.cell.one_types])
        self.unary_mod_member = []
        for pred, cmp, r, k in pr.unary_modulo:
            i = idx[(pred, "u")]
            self.unary_mod_member.append([t[i] for t in self.cell.one_types])
        # per '=' axis: bound on back-increments one new element can hand out
        self.back_cap = []
        for a, (_, cmp, k) in enumerate(pr.binary_counting):
            if cmp != "=":
                self.back_cap.append(None)
                continue
            best = None
            for b, (_, cmp_b, k_b) in enumerate(pr.binary_counting):
                if all(not (s >> a) & 1 or (t >> b) & 1
                       for g in self.cell.grouped.values() for (t, s) in g):
                    best = k_b if best is None else min(best, k_b)
            self.back_cap.append(best)

    def _unary_counts(self, K):
        C = self.C
        counts = [0] * len(self.unary_member)
        mcounts = [0] * len(self.unary_mod_member)
        for b, cnt in K:
            i = b // C
            for j, mem in enumerate(self.unary_member):
                if mem[i]:
                    counts[j] += cnt
            for j, mem in enumerate(self.unary_mod_member):
                if mem[i]:
                    mcounts[j] += cnt
        return counts, mcounts

    def accept(self, K, n):
        C = self.C
        for b, _ in K:
            if not self.ok_ctype[b % C]:
                return False
        counts, mcounts = self._unary_counts(K)
        for cnt, (_, cmp, target) in zip(counts, self.problem.unary_counting):
            if not compare(cmp, cnt, _resolve(target, n)):
                return False
        for cnt, (_, cmp, r, k) in zip(mcounts, self.problem.unary_modulo):
            if not compare(cmp, cnt % k, r):
                return False
        return True

    def viable(self, K, h, n):
        """Can K (with h elements) still grow into an accepted configuration of size n?"""
        left = n - h
        C = self.C
        need = self.need
        for b, _ in K:
            if need[b % C] > left:
                return False
        if left == 0:
            return self.accept(K, n)
        for a, cap in enumerate(self.back_cap):
            if cap is None:
                continue
            k = self.problem.binary_counting[a][2]
            deficit = 0
            for b, cnt in K:
                deficit += (k - self.ctypes[b % C][a]) * cnt
            if deficit > left * cap:
                return False
        counts, _ = self._unary_counts(K)
        for cnt, (_, cmp, target) in zip(counts, self.problem.unary_counting):
            t = _resolve(target, n)
            if cnt > t:
                return False
            if cmp == "=" and cnt + left < t:
                return False
        return True

    # ------------------------------------------------------------ f: updater weights

    def f_table(self, i, j, d):
        """Weights of all d-order c-type updates between a new element of 1-type i
        and d old elements of 1-type j: {(u, U): weight}, U a histogram over
        back-increment bitmasks."""
        tables = self._f.get((i, j))
        if tables is None:
            S = 1 << self.M
            tables = [{(self.zero, (0,) * S): 1}]
            self._f[(i, j)] = tables
        grouped = list(self.cell.grouped[(i, j)].items())
        csig = self.csig
        while len(tables) <= d:
            prev = tables[-1]
            nxt = {}
            for (u, U), W in prev.items():
                row = csig[u]
                for (t, s), r in grouped:
                    un = row[t]
                    if un < 0:
                        continue
                    key = (un, U[:s] + (U[s] + 1,) + U[s + 1:])
                    v = W * r
                    if key in nxt:
                        v = nxt[key] + v
                        if v:
                            nxt[key] = v
                        else:
                            del nxt[key]
                    elif v:
                        # a truncated product of non-zero polynomials can vanish
                        nxt[key] = v
            tables.append(nxt)
        return tables[d]

    def _entries(self, l, j, cb, d):
        """f(l, j, d) restricted to updates that keep a group at c-type cb valid,
        as (u, ((new ctype, amount), ...), weight)."""
        key = (l, j, cb, d)
        out = self._entries_cache.get(key)
        if out is not None:
            return out
        row = self.csig[cb]
        out = []
        for (u, U), W in self.f_table(l, j, d).items():
            contrib = {}
            valid = True
            for s, cnt in enumerate(U):
                if not cnt:
                    continue
                c = row[s]
                if c < 0:
                    valid = False
                    break
                contrib[c] = contrib.get(c, 0) + cnt
            if valid:
                out.append((u, tuple(sorted(contrib.items())), W))
        self._entries_cache[key] = out
        return out

    # ------------------------------------------------------------ F: extension weights

    def extension(self, Kp, l, order=None):
        """All configurations reachable from Kp by adding one element of 1-type l,
        with their extension weights (not including w_l)."""
        C = self.C
        cadd = self.cadd
        base = self.base[l]
        if base < 0:
            return {}
        groups = Kp if order is None else [Kp[t] for t in order]
        slots = {}
        per_group = []
        for b, d in groups:
            j, cb = divmod(b, C)
            ents = self._entries(l, j, cb, d)
            if not ents:
                return {}
            conv = []
            for u, contrib, W in ents:
                local = tuple((slots.setdefault(j * C + c, len(slots)), a) for c, a in contrib)
                conv.append((u, local, W))
            per_group.append(conv)
        G = {(self.zero, (0,) * len(slots)): 1}
        for conv in per_group:
            nxt = {}
            for (us, ks), Wo in G.items():
                row = cadd[us]
                for u, local, W in conv:
                    un = row[u]
                    if un < 0:
                        continue
                    lst = list(ks)
                    for s, a in local:
                        lst[s] += a
                    key = (un, tuple(lst))
                    v = Wo * W
                    if key in nxt:
                        nxt[key] += v
                    else:
                        nxt[key] = v
            G = nxt
            if not G:
                return {}
        ids = sorted(slots, key=slots.get)
        out = {}
        brow = cadd[base]
        for (us, ks), W in G.items():
            if not W:
                continue
            c = brow[us]
            if c < 0:
                continue
            me = l * C + c
            acc = {me: 1}
            for g, cnt in zip(ids, ks):
                if cnt:
                    acc[g] = acc.get(g, 0) + cnt
            K = tuple(sorted(acc.items()))
            out[K] = out.get(K, 0) + W
        return out

    # ------------------------------------------------------------ layers

    def first_layer(self):
        T = {}
        for l in range(self.p):
            if self.base[l] < 0:
                continue
            K = ((l * self.C + self.base[l], 1),)
            T[K] = T.get(K, 0) + self.cell.one_weights[l]
        return T

    def step(self, T, order_fn=None):
        Tn = {}
        w = self.cell.one_weights
        for Kp, W in T.items():
            for l in range(self.p):
                Wl = W * w[l]
                order = order_fn(Kp) if order_fn else None
                for K, Wf in self.extension(Kp, l, order).items():
                    v = Wl * Wf
                    if K in Tn:
                        Tn[K] += v
                    else:
                        Tn[K] = v
        return {K: v for K, v in Tn.items() if v}

    def layers(self, n_max, prune_n=None):
        """Yield (h, T_h) for h = 1..n_max. Pruning targets domain size prune_n."""
        prune_n = n_max if prune_n is None else prune_n
        T = None
        for h in range(1, n_max + 1):
            t0 = time.perf_counter()
            T = self.first_layer() if h == 1 else self.step(T)
            if self.prune:
                T = {K: v for K, v in T.items() if self.viable(K, h, prune_n)}
            self.trace.append((h, len(T), time.perf_counter() - t0))
            log.debug("layer %d: %d configurations", h, len(T))
            yield h, T

    def accepted_total(self, T, n):
        total = 0
        for K, v in T.items():
            if self.accept(K, n):
                total = total + v
        return total

    def labelled(self, K):
        """K with readable keys, as produced by the configuration histogram oracle."""
        out = []
        for b, cnt in K:
            l, c = divmod(b, self.C)
            one = tuple((f"{p}(x)" if kind == "u" else f"{p}(x,x)", v)
                        for (p, kind), v in zip(self.cell.unary, self.cell.one_types[l]))
            out.append(((tuple(sorted(one)), self.ctypes[c]), cnt))
        return tuple(sorted(out))

    def extract(self, value, n, exponents=None):
        """Apply cardinality coefficient extraction and the correction divisors.
        `exponents` overrides the cardinality targets (one per indeterminate)."""
        pr = self.problem
        if self.registry is not None:
            if exponents is None:
                exponents = []
                for name in self.registry.names:
                    targets = {t.at(n) for p, t in pr.cardinality if p == name}
                    if len(targets) != 1:
                        return 0
                    exponents.append(targets.pop())
            if min(exponents) < 0:
                return 0
            caps = self.registry.caps
            if caps is not None and any(e > c for e, c in zip(exponents, caps)):
                raise ValueError("coefficient requested beyond the truncation degree")
            if isinstance(value, Poly):
                value = coefficient_of(value, exponents)
            elif any(exponents):
                value = 0
        for r in pr.divisors:
            value = Fraction(value) / math.comb(n, r)
        return canon(Fraction(value))

    def run(self, ns):
        """Exact counts for every n in ns (layers are shared)."""
        ns = sorted(set(ns))
        out = {}
        if not ns:
            return out
        for h, T in self.layers(max(ns)):
            if h in ns:
                out[h] = self.extract(self.accepted_total(T, h), h)
        return out


def _resolve(target, n):
    return target.at(n) if isinstance(target, Affine) else target


def count_normalized(problem, n, prune=True):
    eng = Engine(problem, n_max=n, prune=prune)
    return eng.run([n])[n]


# ------------------------------------------------------------ baseline

def incremental_wfomc(cell, n):
    """Layer recurrence over 1-type configurations for universal sentences
    (no counting axes). Returns the total weight over domain size n."""
    p = cell.p
    if p == 0:
        return 0
    r = [[cell.pair_weight(l, i) for i in range(p)] for l in range(p)]
    T = {}
    for l in range(p):
        k = tuple(1 if i == l else 0 for i in range(p))
        T[k] = cell.one_weights[l]
    for _ in range(2, n + 1):
        nxt = {}
        for k, W in T.items():
            for l in range(p):
                v = W * cell.one_weights[l]
                for i in range(p):
                    if k[i]:
                        v = v * r[l][i] ** k[i]
                key = tuple(c + (1 if i == l else 0) for i, c in enumerate(k))
                nxt[key] = nxt.get(key, 0) + v
        T = nxt
    total = 0
    for v in T.values():
        total = total + v
    return total
