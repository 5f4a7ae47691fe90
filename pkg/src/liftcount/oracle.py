"""Brute-force WFOMC by enumerating every interpretation of the Herbrand base.

Interpretations are enumerated in batches: the low atoms of the base vary
inside a batch and are packed 64 per machine word, the high atoms are fixed
per batch. The ground sentence is evaluated with bitwise numpy operations,
so one pass handles 2^22 interpretations at a time.
"""
import logging

import numpy as np

from .arith import power
from .logic import compare, ground, herbrand_base, order_atoms

log = logging.getLogger(__name__)

DEFAULT_MAX_ATOMS = 24
BATCH_BITS = 22
ONES = np.uint64(0xFFFFFFFFFFFFFFFF)
_LOW_PATTERNS = [
    0xAAAAAAAAAAAAAAAA,
    0xCCCCCCCCCCCCCCCC,
    0xF0F0F0F0F0F0F0F0,
    0xFF00FF00FF00FF00,
    0xFFFF0000FFFF0000,
    0xFFFFFFFF00000000,
]


class BudgetExceeded(RuntimeError):
    def __init__(self, needed, budget):
        super().__init__(f"Herbrand base has {needed} atoms, oracle budget is {budget}")
        self.needed = needed
        self.budget = budget


class _Batches:
    """Bit patterns for the atoms of a base, batch by batch."""

    def __init__(self, natoms, batch_bits=BATCH_BITS):
        self.natoms = natoms
        self.low = min(natoms, batch_bits)
        self.words = max(1, (1 << self.low) // 64)
        nvalid = 1 << self.low
        if nvalid < 64:
            self.valid = np.array([(1 << nvalid) - 1], dtype=np.uint64)
        else:
            self.valid = np.full(self.words, ONES, dtype=np.uint64)
        idx = np.arange(self.words, dtype=np.uint64)
        self.low_arrays = []
        for j in range(self.low):
            if j < 6:
                arr = np.full(self.words, np.uint64(_LOW_PATTERNS[j]), dtype=np.uint64)
            else:
                bit = (idx >> np.uint64(j - 6)) & np.uint64(1)
                arr = np.where(bit == 1, ONES, np.uint64(0)).astype(np.uint64)
            self.low_arrays.append(arr & self.valid)
        self.zeros = np.zeros(self.words, dtype=np.uint64)
        self.count = 1 << (natoms - self.low)

    def arrays(self, b):
        """Atom arrays for batch b (an integer fixing the high atoms)."""
        out = list(self.low_arrays)
        for j in range(self.low, self.natoms):
            out.append(self.valid if (b >> (j - self.low)) & 1 else self.zeros)
        return out


def _exact_masks(arrs, valid, upto=None):
    """masks[v] = interpretations where exactly v of arrs are true."""
    m = len(arrs)
    upto = m if upto is None else min(m, upto)
    masks = [valid.copy()] + [None] * upto
    for x in arrs:
        nx = ~x
        for v in range(upto, 0, -1):
            prev = masks[v - 1]
            if prev is None:
                continue
            cur = prev & x
            if masks[v] is not None:
                cur |= masks[v] & nx
            masks[v] = cur
        masks[0] = masks[0] & nx
    return masks


def _count_condition(cmp, k, mod, arrs, valid, zeros):
    m = len(arrs)
    if mod is None and cmp in ("=", "<="):
        masks = _exact_masks(arrs, valid, upto=k + 1)
    else:
        masks = _exact_masks(arrs, valid)
    out = zeros.copy()
    for v in range(m + 1):
        if v >= len(masks) or masks[v] is None:
            continue
        val = v % mod if mod is not None else v
        if compare(cmp, val, k):
            out |= masks[v]
    return out & valid


def _evaluate(g, atom_arr, valid, zeros):
    tag = g[0]
    if tag == "atom":
        return atom_arr[g[1]]
    if tag == "const":
        return valid if g[1] else zeros
    if tag == "not":
        return ~_evaluate(g[1], atom_arr, valid, zeros) & valid
    if tag == "and":
        out = valid
        for c in g[1]:
            out = out & _evaluate(c, atom_arr, valid, zeros)
            if not out.any():
                return zeros
        return out
    if tag == "or":
        out = zeros
        for c in g[1]:
            out = out | _evaluate(c, atom_arr, valid, zeros)
        return out
    _, cmp, k, mod, items = g
    arrs = [_evaluate(c, atom_arr, valid, zeros) for c in items]
    return _count_condition(cmp, k, mod, arrs, valid, zeros)


def _setup(problem, n, max_atoms):
    preds = {p: a for p, a in problem.predicates.items() if p != problem.order}
    atoms = herbrand_base(preds, n)
    if len(atoms) > max_atoms:
        raise BudgetExceeded(len(atoms), max_atoms)
    return preds, atoms


def _atom_table(problem, n, atoms, arrays, valid, zeros):
    table = dict(zip(atoms, arrays))
    if problem.order:
        fixed = order_atoms(problem.order, n)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                key = (problem.order, (i, j))
                table[key] = valid if key in fixed else zeros
    return table


def oracle_wfomc(problem, n, max_atoms=DEFAULT_MAX_ATOMS, batch_bits=BATCH_BITS):
    """Exact WFOMC of a ProblemInput over the domain 1..n by enumeration."""
    if n < 1:
        raise ValueError("domain size must be at least 1")
    preds, atoms = _setup(problem, n, max_atoms)
    g = ground(problem.sentence, n)
    batches = _Batches(len(atoms), batch_bits)
    valid, zeros = batches.valid, batches.zeros

    by_pred = {}
    for i, (p, _) in enumerate(atoms):
        by_pred.setdefault(p, []).append(i)
    card = {}
    for name, target in problem.cardinality:
        card.setdefault(name, set()).add(target.at(n))
    # predicates whose true-atom count matters: non-uniform weight or cardinality
    tracked = []
    constant = 1
    for p in sorted(preds):
        w, wb = problem.weight(p)
        size = len(by_pred.get(p, ()))
        if p in card or w != wb:
            tracked.append(p)
        else:
            constant = constant * power(w, size)
    if problem.order:
        w, wb = problem.weight(problem.order)
        t = n * (n + 1) // 2
        constant = constant * power(w, t) * power(wb, n * n - t)

    hist = {}
    for b in range(batches.count):
        arrays = batches.arrays(b)
        table = _atom_table(problem, n, atoms, arrays, valid, zeros)
        sat = _evaluate(g, table, valid, zeros)
        if not sat.any():
            continue
        groups = {(): sat}
        for p in tracked:
            masks = _exact_masks([arrays[i] for i in by_pred.get(p, ())], valid)
            allowed = card.get(p)
            nxt = {}
            for key, m in groups.items():
                for v, mv in enumerate(masks):
                    if allowed is not None and (len(allowed) > 1 or v not in allowed):
                        continue
                    sub = m & mv
                    if sub.any():
                        nxt[key + (v,)] = sub
            groups = nxt
            if not groups:
                break
        for key, m in groups.items():
            hist[key] = hist.get(key, 0) + int(np.bitwise_count(m).sum())

    total = 0
    for key, cnt in sorted(hist.items()):
        wt = cnt
        for p, v in zip(tracked, key):
            w, wb = problem.weight(p)
            size = len(by_pred.get(p, ()))
            wt = wt * power(w, v) * power(wb, size - v)
        total = total + wt
    return total * constant


def satisfying_interpretations(problem, n, max_atoms=DEFAULT_MAX_ATOMS):
    """Yield the true-atom sets of all models (slow path, for small tests)."""
    preds, atoms = _setup(problem, n, max_atoms)
    g = ground(problem.sentence, n)
    batches = _Batches(len(atoms))
    fixed = order_atoms(problem.order, n) if problem.order else set()
    for b in range(batches.count):
        arrays = batches.arrays(b)
        table = _atom_table(problem, n, atoms, arrays, batches.valid, batches.zeros)
        sat = _evaluate(g, table, batches.valid, batches.zeros)
        bits = np.unpackbits(sat.view(np.uint8), bitorder="little")
        for local in np.nonzero(bits)[0]:
            index = (b << batches.low) | int(local)
            true = {atoms[j] for j in range(len(atoms)) if (index >> j) & 1}
            ok = True
            for name, target in problem.cardinality:
                if sum(1 for a in true if a[0] == name) != target.at(n):
                    ok = False
            if ok:
                yield true | fixed


def one_type_label(vocabulary, true_atoms, e):
    """The 1-type of element e as a tuple of (literal, truth) pairs."""
    out = []
    for p in sorted(vocabulary):
        a = vocabulary[p]
        if a == 1:
            out.append((f"{p}(x)", (p, (e,)) in true_atoms))
        elif a == 2:
            out.append((f"{p}(x,x)", (p, (e, e)) in true_atoms))
    return tuple(out)


def oracle_configuration_histogram(normalized, n, max_atoms=DEFAULT_MAX_ATOMS):
    """Weight of the models of forall x forall y psi grouped by c1-type configuration.

    Keys are sorted tuples of ((1-type label, c-type), count); a c-type counts
    the witnesses y of each counting axis (saturating models are dropped when
    a count exceeds its bound) or their residue on a modulo axis. Cardinality
    constraints and acceptance are not applied, so the keys line up with the
    engine's final layer without pruning."""
    from .logic import Forall, ProblemInput, interpretation_weight
    np_ = normalized
    preds = dict(np_.vocabulary)
    problem = ProblemInput(Forall("x", Forall("y", np_.psi)), preds, dict(np_.weights), [], np_.order)
    axes = [(p, k, False) for p, _, k in np_.binary_counting]
    axes += [(p, k, True) for p, _, _, k in np_.binary_modulo]
    hist = {}
    for true in satisfying_interpretations(problem, n, max_atoms):
        acc = {}
        ok = True
        for e in range(1, n + 1):
            c = []
            for p, bound, modular in axes:
                cnt = sum(1 for f in range(1, n + 1) if (p, (e, f)) in true)
                if modular:
                    cnt %= bound
                elif cnt > bound:
                    ok = False
                    break
                c.append(cnt)
            if not ok:
                break
            key = (one_type_label(preds, true, e), tuple(c))
            acc[key] = acc.get(key, 0) + 1
        if not ok:
            continue
        K = tuple(sorted(acc.items()))
        w = interpretation_weight(true, np_.weights, preds, n)
        hist[K] = hist.get(K, 0) + w
    return {K: v for K, v in hist.items() if v}
