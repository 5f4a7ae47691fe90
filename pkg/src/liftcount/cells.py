"""1-types, 2-tables and the grouped 2-table weights of a universal matrix psi(x,y).

A 1-type assigns every unary literal of x: P(x) for unary P and R(x,x) for
binary R. A 2-table assigns R(x,y) and R(y,x) for every binary R. In the
engine x is always the newly added element and y an older one.
"""
import itertools
import logging
from dataclasses import dataclass, field

from .logic import And, Atom, Const, Iff, Implies, Not, Or, predicates

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Axis:
    """One coordinate of a c-type: witnesses of pred(x, .) counted up to bound,
    or modulo `bound` when modular."""
    pred: str
    bound: int
    modular: bool = False

    @property
    def size(self):
        return self.bound if self.modular else self.bound + 1


def _compile(psi, unary_index, binary_index):
    """Turn psi into a python function f(a, b, t): a/b are the 1-type tuples of
    x and y, t the 2-table tuple (R(x,y), R(y,x) interleaved per predicate)."""

    def src(f):
        if isinstance(f, Const):
            return "True" if f.value else "False"
        if isinstance(f, Atom):
            if len(f.args) == 1:
                side = "a" if f.args[0] == "x" else "b"
                return f"{side}[{unary_index[(f.pred, 'u')]}]"
            if len(f.args) == 2:
                u, v = f.args
                if u == v:
                    side = "a" if u == "x" else "b"
                    return f"{side}[{unary_index[(f.pred, 'self')]}]"
                j = binary_index[f.pred]
                return f"t[{2 * j if u == 'x' else 2 * j + 1}]"
            raise ValueError(f"nullary atom {f.pred} left in matrix")
        if isinstance(f, Not):
            return f"(not {src(f.body)})"
        if isinstance(f, And):
            return "(" + " and ".join(src(c) for c in f.items) + ")"
        if isinstance(f, Or):
            return "(" + " or ".join(src(c) for c in f.items) + ")"
        if isinstance(f, Implies):
            return f"((not {src(f.left)}) or {src(f.right)})"
        if isinstance(f, Iff):
            return f"({src(f.left)} == {src(f.right)})"
        raise ValueError(f"matrix is not quantifier-free: {f}")

    code = f"lambda a, b, t: {src(psi)}"
    return eval(code, {})  # generated from our own AST only


@dataclass
class CellTable:
    unary: list            # [(pred, 'u' | 'self')]
    binary: list           # [pred] for binary predicates
    axes: list             # [Axis]
    one_types: list        # tuples of bools over `unary`
    one_weights: list
    self_inc: list         # bitmask per 1-type
    compat: dict = field(default_factory=dict)    # (i, j) -> [(table, weight)]
    grouped: dict = field(default_factory=dict)   # (i, j) -> {(t, t'): weight}

    @property
    def p(self):
        return len(self.one_types)

    def describe_one_type(self, i):
        lits = []
        for (pred, kind), v in zip(self.unary, self.one_types[i]):
            atom = f"{pred}(x)" if kind == "u" else f"{pred}(x,x)"
            lits.append(atom if v else "~" + atom)
        return "{" + ", ".join(lits) + "}"

    def describe_table(self, table):
        lits = []
        for j, pred in enumerate(self.binary):
            for k, atom in enumerate((f"{pred}(x,y)", f"{pred}(y,x)")):
                lits.append(atom if table[2 * j + k] else "~" + atom)
        return "{" + ", ".join(lits) + "}"

    def pair_weight(self, i, j):
        """r_{tau_i, tau_j}: total weight of compatible 2-tables."""
        total = 0
        for _, w in self.compat.get((i, j), ()):
            total = total + w
        return total


def build_cell_table(psi, vocabulary, weights, axes=(), order=None):
    """Enumerate valid 1-types and compatible 2-tables of psi.

    vocabulary: name -> arity (unary/binary only; predicates absent from psi
    are unconstrained but still enumerated). weights: name -> (w, wbar).
    """
    if order is not None and order not in predicates(psi):
        raise ValueError(f"order predicate {order} does not occur in the matrix")
    unary, binary = [], []
    for name in sorted(vocabulary):
        a = vocabulary[name]
        if a == 1:
            unary.append((name, "u"))
        elif a == 2:
            unary.append((name, "self"))
            binary.append(name)
        elif a != 0:
            raise ValueError(f"arity {a} not supported")
    unary_index = {lit: i for i, lit in enumerate(unary)}
    binary_index = {p: j for j, p in enumerate(binary)}
    fn = _compile(psi, unary_index, binary_index)

    def wt(name, val):
        w, wb = weights.get(name, (1, 1))
        return w if val else wb

    # 1-types
    forced_u = {}
    if order is not None:
        forced_u[unary_index[(order, "self")]] = True
    free_u = [i for i in range(len(unary)) if i not in forced_u]
    one_types, one_weights, self_inc = [], [], []
    for bits in itertools.product((False, True), repeat=len(free_u)):
        a = [False] * len(unary)
        for i, v in forced_u.items():
            a[i] = v
        for i, v in zip(free_u, bits):
            a[i] = v
        a = tuple(a)
        t = []
        for p in binary:
            s = a[unary_index[(p, "self")]]
            t += [s, s]
        if not fn(a, a, tuple(t)):
            continue
        w = 1
        for (pred, _), v in zip(unary, a):
            w = w * wt(pred, v)
        if not w:
            continue
        mask = 0
        for k, ax in enumerate(axes):
            if a[unary_index[(ax.pred, "self")]]:
                mask |= 1 << k
        one_types.append(a)
        one_weights.append(w)
        self_inc.append(mask)

    # 2-tables
    forced_t = {}
    if order is not None:
        j = binary_index[order]
        forced_t[2 * j] = False      # LEQ(new, old)
        forced_t[2 * j + 1] = True   # LEQ(old, new)
    free_t = [i for i in range(2 * len(binary)) if i not in forced_t]
    tables = []
    for bits in itertools.product((False, True), repeat=len(free_t)):
        t = [False] * (2 * len(binary))
        for i, v in forced_t.items():
            t[i] = v
        for i, v in zip(free_t, bits):
            t[i] = v
        t = tuple(t)
        swapped = []
        for j in range(len(binary)):
            swapped += [t[2 * j + 1], t[2 * j]]
        w = 1
        for j, p in enumerate(binary):
            w = w * wt(p, t[2 * j]) * wt(p, t[2 * j + 1])
        tmask = smask = 0
        for k, ax in enumerate(axes):
            j = binary_index[ax.pred]
            if t[2 * j]:
                tmask |= 1 << k
            if t[2 * j + 1]:
                smask |= 1 << k
        tables.append((t, tuple(swapped), w, tmask, smask))

    cell = CellTable(unary, binary, list(axes), one_types, one_weights, self_inc)
    for i, a in enumerate(one_types):
        for j, b in enumerate(one_types):
            compat = []
            grouped = {}
            for t, swapped, w, tmask, smask in tables:
                if not w or not fn(a, b, t) or not fn(b, a, swapped):
                    continue
                compat.append((t, w))
                key = (tmask, smask)
                v = grouped.get(key, 0) + w
                if v:
                    grouped[key] = v
                else:
                    grouped.pop(key, None)
            cell.compat[(i, j)] = compat
            cell.grouped[(i, j)] = grouped
    log.debug("cell table: %d one-types, %d binary predicates", len(one_types), len(binary))
    return cell
