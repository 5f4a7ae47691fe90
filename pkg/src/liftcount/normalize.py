"""Reduction of a sentence with counting quantifiers to the engine's normal form.

Stages, in order:
  rewrite_ge                      >= quantifiers become negated <= ones
  axiomatize_subformulas          nested counting subformulas get fresh predicates
  eliminate_negation              negated counting subformulas go away (A/B trick)
  shannon_expand                  nullary predicates are split into branches
  eliminate_disjunctive_counting  forall x (G(x) | counting) via auxiliary B, U
  skolemize                       plain exists via weighted Skolem predicates
  extract                         matrix psi plus constraint lists

Each stage maps a list of Branch objects to another; every branch is a full
problem (sentence, weights, cardinalities) together with a multiplier and
binomial divisors, so any stage output can be checked against the oracle.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .arith import canon, format_rational
from .logic import (
    COUNTERS, FALSE, TRUE, And, Atom, Const, Counting, Exists, Forall, Iff, Implies,
    ModCounting, Not, Or, ProblemInput, QUANTIFIERS, close_vocabulary, conj, disj,
    free_vars, has_counting, has_quantifier, other, predicates, simplify, swap_vars,
    to_text, transform,
)

log = logging.getLogger(__name__)

SHANNON_LIMIT = 16


class NormalizationError(ValueError):
    def __init__(self, stage, msg):
        super().__init__(f"[{stage}] {msg}")
        self.stage = stage


@dataclass
class NormalizedProblem:
    psi: object
    vocabulary: dict                                    # name -> arity (1 or 2)
    weights: dict                                       # name -> (w, wbar)
    binary_counting: list = field(default_factory=list)   # (R, cmp, k)
    unary_counting: list = field(default_factory=list)    # (U, cmp, target)
    binary_modulo: list = field(default_factory=list)     # (R, cmp, r, k)
    unary_modulo: list = field(default_factory=list)      # (U, cmp, r, k)
    cardinality: list = field(default_factory=list)       # (P, Affine) for binary P
    divisors: list = field(default_factory=list)          # divide by C(n, r)
    order: Optional[str] = None
    min_domain: int = 1     # the counting lemmas are exact from this size on

    def describe(self):
        lines = [f"psi: {to_text(self.psi)}"]
        for p, cmp, k in self.binary_counting:
            lines.append(f"binary counting: forall x: exists[{cmp}{k}] y: {p}(x,y)")
        for p, cmp, r, k in self.binary_modulo:
            lines.append(f"binary modulo: forall x: exists[{cmp}{r} mod {k}] y: {p}(x,y)")
        for p, cmp, t in self.unary_counting:
            lines.append(f"unary counting: exists[{cmp}{t}] x: {p}(x)")
        for p, cmp, r, k in self.unary_modulo:
            lines.append(f"unary modulo: exists[{cmp}{r} mod {k}] x: {p}(x)")
        for p, t in self.cardinality:
            lines.append(f"cardinality: |{p}| = {t}")
        for r in self.divisors:
            lines.append(f"divisor: C(n,{r})")
        if self.order:
            lines.append(f"order: {self.order}")
        for name in sorted(self.weights):
            w, wb = self.weights[name]
            if (w, wb) != (1, 1):
                lines.append(f"weight {name} {format_rational(w)} {format_rational(wb)}")
        return "\n".join(lines)


@dataclass
class Branch:
    problem: ProblemInput
    multiplier: object = 1
    divisors: list = field(default_factory=list)
    min_domain: int = 1

    @property
    def conjuncts(self):
        s = self.problem.sentence
        return list(s.items) if isinstance(s, And) else [s]

    def with_conjuncts(self, items, predicates=None, weights=None):
        items = list(items)
        if any(isinstance(c, Const) and not c.value for c in items):
            items = [FALSE]
        items = [c for c in items if not (isinstance(c, Const) and c.value)]
        prob = ProblemInput(
            conj(items),
            dict(self.problem.predicates if predicates is None else predicates),
            dict(self.problem.weights if weights is None else weights),
            list(self.problem.cardinality),
            self.problem.order,
        )
        return Branch(prob, self.multiplier, list(self.divisors), self.min_domain)


class Fresh:
    """Fresh predicate names, never colliding with names already in use."""

    def __init__(self, taken):
        self.taken = set(taken)
        self.i = 0

    def __call__(self, stem):
        while True:
            self.i += 1
            name = f"_{stem}{self.i}"
            if name not in self.taken:
                self.taken.add(name)
                return name


# ------------------------------------------------------------ helpers

def split_conjuncts(f):
    """Top-level conjuncts; forall distributes over &, vacuous quantifiers vanish."""
    f = simplify(f)
    if isinstance(f, And):
        out = []
        for c in f.items:
            out.extend(split_conjuncts(c))
        return out
    if isinstance(f, (Forall, Exists)) and f.var not in free_vars(f.body):
        return split_conjuncts(f.body)
    if isinstance(f, Forall):
        body = f.body
        if isinstance(body, And):
            out = []
            for c in body.items:
                out.extend(split_conjuncts(Forall(f.var, c)))
            return out
        if isinstance(body, Forall) and body.var != f.var:
            inner = split_conjuncts(body)
            if len(inner) > 1:
                out = []
                for c in inner:
                    out.extend(split_conjuncts(Forall(f.var, c)))
                return out
        if f.var == "y" and "x" not in free_vars(f):
            return [swap_vars(f)]
    return [f]


def _neg(f):
    return f.body if isinstance(f, Not) else Not(f)


def _disjuncts(f):
    """Flatten a formula into disjuncts, turning -> into |."""
    if isinstance(f, Or):
        out = []
        for c in f.items:
            out.extend(_disjuncts(c))
        return out
    if isinstance(f, Implies):
        return _disjuncts(_neg(f.left)) + _disjuncts(f.right)
    if isinstance(f, Not) and isinstance(f.body, Not):
        return _disjuncts(f.body.body)
    return [f]


def _is_counter(f):
    return isinstance(f, COUNTERS)


def match_counting(c):
    """Recognise a conjunct of the form [forall x:] (G | C) or (G | ~C), C a counting
    subformula with a counting-free body. Returns (var, guard, C, negated) or None.
    var is 'x' for the per-element form and None for the closed form."""
    if isinstance(c, Forall) and c.var == "x":
        var, body = "x", c.body
    else:
        var, body = None, c
    items = _disjuncts(body)
    hits = [i for i, it in enumerate(items)
            if _is_counter(it) or (isinstance(it, Not) and _is_counter(it.body))]
    if len(hits) != 1:
        return None
    item = items[hits[0]]
    negated = isinstance(item, Not)
    C = item.body if negated else item
    if has_counting(C.body):
        return None
    rest = [it for i, it in enumerate(items) if i != hits[0]]
    if any(has_counting(it) for it in rest):
        return None
    guard = disj(rest)
    fv_c = free_vars(C)
    if var is None:
        if fv_c:
            return None
        if any(not (isinstance(a, Atom) and not a.args) for g in rest for a in _atoms_and_quants(g)):
            return None
    else:
        if fv_c and fv_c != {"x"}:
            return None
        if C.var != "y" and fv_c:
            return None
    return var, guard, C, negated


def _atoms_and_quants(f):
    from .logic import walk
    for g in walk(f):
        if isinstance(g, Atom) or isinstance(g, QUANTIFIERS):
            yield g


def _counting_conjunct(var, guard, C, negated):
    item = Not(C) if negated else C
    body = simplify(disj(([guard] if guard != FALSE else []) + [item]))
    return Forall("x", body) if var else body


def _pred_map(branch, extra):
    preds = dict(branch.problem.predicates)
    preds.update(extra)
    return preds


# ------------------------------------------------------------ stage 1

def rewrite_ge(f):
    """>= counting becomes a negated <= (>=0 is true, >=1 is plain exists);
    <=0 and =0 become a universal."""
    def fn(g):
        if isinstance(g, Counting):
            if g.cmp == ">=":
                if g.k == 0:
                    return TRUE
                if g.k == 1:
                    return Exists(g.var, g.body)
                return Not(Counting(g.var, "<=", g.k - 1, g.body))
            if g.k == 0:
                return Forall(g.var, Not(g.body))
        if isinstance(g, ModCounting) and g.cmp == ">=":
            if g.r == 0:
                return TRUE
            return Not(ModCounting(g.var, "<=", g.r - 1, g.k, g.body))
        return g
    return simplify(transform(f, fn))


def stage_rewrite_ge(branches):
    out = []
    for b in branches:
        out.append(b.with_conjuncts(split_conjuncts(rewrite_ge(b.problem.sentence))))
    return out


# ------------------------------------------------------------ stage 2

def axiomatize_subformulas(branch, fresh=None):
    fresh = fresh or Fresh(branch.problem.predicates)
    new_preds = {}
    pending = list(branch.conjuncts)
    out = []

    def define(node):
        """Fresh atom standing for counting node (counting-free body) + definition."""
        fv = free_vars(node)
        if fv:
            (v,) = fv
            name = fresh("P")
            new_preds[name] = 1
            atom = Atom(name, (v,))
            d = Forall(v, Iff(atom, node))
            if v == "y":
                d = swap_vars(d)
        else:
            name = fresh("Q")
            new_preds[name] = 0
            atom = Atom(name, ())
            d = Iff(atom, node)
        pending.append(d)
        return atom

    def lift_all(f):
        def fn(g):
            if _is_counter(g):
                return define(g)
            return g
        return transform(f, fn)

    def innermost(f):
        def fn(g):
            if _is_counter(g) and has_counting(g.body):
                return replace(g, body=lift_all(g.body))
            return g
        return transform(f, fn)

    while pending:
        c = pending.pop(0)
        for c in split_conjuncts(c):
            if not has_counting(c):
                out.append(c)
                continue
            c = innermost(c)
            # an equivalence G <-> C splits into two one-sided clauses
            var, body = ("x", c.body) if isinstance(c, Forall) and c.var == "x" else (None, c)
            if isinstance(body, Iff):
                l, r = body.left, body.right
                if _is_counter(r) or (isinstance(r, Not) and _is_counter(r.body)):
                    l, r = r, l
                if (_is_counter(l) or (isinstance(l, Not) and _is_counter(l.body))) and not has_counting(r):
                    wrap = (lambda b: Forall("x", b)) if var else (lambda b: b)
                    for part in (Or((_neg(r), l)), Or((r, _neg(l)))):
                        m = match_counting(wrap(part))
                        if m is None:
                            pending.append(lift_all(wrap(part)))
                        else:
                            out.append(_counting_conjunct(*m))
                    continue
            m = match_counting(c)
            if m is not None:
                out.append(_counting_conjunct(*m))
            else:
                out.append(lift_all(c))
    weights = dict(branch.problem.weights)
    return branch.with_conjuncts(out, _pred_map(branch, new_preds), weights)


# ------------------------------------------------------------ stage 3

def eliminate_negation(branch, fresh=None):
    fresh = fresh or Fresh(branch.problem.predicates)
    new_preds = {}
    weights = dict(branch.problem.weights)
    out = []
    for c in branch.conjuncts:
        m = match_counting(c)
        if m is None or not m[3]:
            out.append(c)
            continue
        var, guard, C, _ = m
        if guard == FALSE and isinstance(C, ModCounting) and C.cmp == "<=":
            # not (rem <= r) is rem >= r+1, which the engine checks directly
            if C.r + 1 >= C.k:
                out.append(FALSE)
            else:
                out.append(_counting_conjunct(var, FALSE, replace(C, cmp=">=", r=C.r + 1), False))
            continue
        arity = 1 if var else 0
        a, b = fresh("A"), fresh("B")
        new_preds[a] = new_preds[b] = arity
        weights[a] = (1, 1)
        weights[b] = (1, -1)
        args = ("x",) if var else ()
        A, B = Atom(a, args), Atom(b, args)
        wrap = (lambda f: Forall("x", f)) if var else (lambda f: f)
        out.append(wrap(simplify(disj(([guard] if guard != FALSE else []) + [A]))))
        out.append(wrap(Or((A, C))))
        out.append(wrap(Or((B, C))))
        out.append(wrap(Or((A, B))))
    return branch.with_conjuncts(out, _pred_map(branch, new_preds), weights)


# ------------------------------------------------------------ stage 4

def shannon_expand(branch, limit=SHANNON_LIMIT):
    prob = branch.problem
    nullary = sorted(p for p, a in prob.predicates.items() if a == 0)
    if len(nullary) > limit:
        raise NormalizationError(
            "shannon_expand", f"{len(nullary)} nullary predicates exceed the limit of {limit}")
    card = {}
    for p, t in prob.cardinality:
        if p in nullary:
            card.setdefault(p, set()).add(t.b if not t.a else None)
    preds = {p: a for p, a in prob.predicates.items() if a != 0}
    weights = {p: w for p, w in prob.weights.items() if p not in nullary}
    out = []
    for values in itertools.product((True, False), repeat=len(nullary)):
        assign = dict(zip(nullary, values))
        if any(targets != {int(assign[p])} for p, targets in card.items()):
            continue
        mult = branch.multiplier
        for p, v in assign.items():
            w, wb = prob.weight(p)
            mult = mult * (w if v else wb)
        if not mult:
            continue

        def fn(g):
            if isinstance(g, Atom) and g.pred in assign:
                return Const(assign[g.pred])
            return g
        sentence = simplify(transform(prob.sentence, fn))
        items = split_conjuncts(sentence)
        if any(isinstance(c, Const) and not c.value for c in items):
            continue
        nb = Branch(prob, mult, list(branch.divisors), branch.min_domain).with_conjuncts(
            items, preds, weights)
        nb.problem.cardinality = [(p, t) for p, t in prob.cardinality if p not in assign]
        out.append(nb)
    return out


# ------------------------------------------------------------ stage 5

def _canonical_binary(C, fresh, new_preds, defs):
    """Make the body of a per-element counting quantifier a plain R(x,y)."""
    body = C.body
    if isinstance(body, Atom) and body.args == ("x", "y"):
        return C
    name = fresh("R")
    new_preds[name] = 2
    defs.append(Forall("x", Forall("y", Iff(Atom(name, ("x", "y")), body))))
    return replace(C, body=Atom(name, ("x", "y")))


def _canonical_unary(C, fresh, new_preds, defs):
    """Closed counting: make it count a plain U(x)."""
    if C.var == "y":
        C = swap_vars(C)
    body = C.body
    if isinstance(body, Atom) and body.args == ("x",):
        return C
    name = fresh("U")
    new_preds[name] = 1
    defs.append(Forall("x", Iff(Atom(name, ("x",)), body)))
    return replace(C, body=Atom(name, ("x",)))


def eliminate_disjunctive_counting(branch, domain_size=None, fresh=None):
    fresh = fresh or Fresh(branch.problem.predicates)
    new_preds = {}
    weights = dict(branch.problem.weights)
    divisors = list(branch.divisors)
    min_domain = branch.min_domain
    out, defs = [], []
    groups = {}
    for c in branch.conjuncts:
        m = match_counting(c)
        if m is None:
            if has_counting(c):
                raise NormalizationError("eliminate_disjunctive_counting",
                                         f"unexpected counting shape: {to_text(c)}")
            out.append(c)
            continue
        var, guard, C, negated = m
        if negated:
            raise NormalizationError("eliminate_disjunctive_counting",
                                     f"negated counting survived: {to_text(c)}")
        if var is None:
            if guard != FALSE:
                raise NormalizationError("eliminate_disjunctive_counting",
                                         f"guarded closed counting survived: {to_text(c)}")
            out.append(_canonical_unary(C, fresh, new_preds, defs))
        elif guard == FALSE:
            out.append(Forall("x", _canonical_binary(C, fresh, new_preds, defs)))
        else:
            groups.setdefault(C, []).append(guard)
    for C, guards in groups.items():
        G = simplify(conj(guards))
        if isinstance(G, Const):
            out.append(Forall("x", C) if not G.value else TRUE)
            continue
        C = _canonical_binary(C, fresh, new_preds, defs)
        R = C.body
        exact = C.cmp == "="
        param = (C.k if isinstance(C, Counting) else C.r) if exact else None
        if exact and domain_size is not None and param > domain_size:
            # fewer than `param` elements: the counting side can never hold
            out.append(Forall("x", G))
            continue
        b = fresh("B")
        new_preds[b] = 2
        B = Atom(b, ("x", "y"))
        out.append(Forall("x", replace(C, body=B)))
        if exact:
            u = fresh("U")
            new_preds[u] = 1
            out.append(Counting("x", "=", param, Atom(u, ("x",))))
            out.append(Forall("x", Forall("y", Implies(And((G, B)), Atom(u, ("y",))))))
            out.append(Forall("x", Forall("y", Implies(Not(G), Iff(B, R)))))
            divisors.append(param)
            min_domain = max(min_domain, param)
        else:
            out.append(Forall("x", Forall("y", Or((Not(G), Not(B))))))
            out.append(Forall("x", Forall("y", Implies(Not(G), Iff(B, R)))))
    nb = branch.with_conjuncts(out + defs, _pred_map(branch, new_preds), weights)
    nb.divisors = divisors
    nb.min_domain = min_domain
    return nb


# ------------------------------------------------------------ stage 6

def _is_constraint(c):
    if isinstance(c, COUNTERS):
        return True
    return isinstance(c, Forall) and isinstance(c.body, COUNTERS)


def skolemize(branch, fresh=None):
    fresh = fresh or Fresh(branch.problem.predicates)
    new_preds = {}
    weights = dict(branch.problem.weights)
    matrix, out = [], []

    def skolem(chi):
        """forall x exists y chi  ->  forall x forall y (S(x) | ~chi)."""
        s = fresh("S")
        new_preds[s] = 1
        weights[s] = (1, -1)
        matrix.append(Or((Atom(s, ("x",)), Not(chi))))

    def reduce(f):
        def fn(g):
            if not isinstance(g, (Forall, Exists)):
                return g
            fv = free_vars(g)
            w = next(iter(fv)) if fv else other(g.var)
            name = fresh("Z")
            new_preds[name] = 1
            phi = g.body if w == "x" else swap_vars(g.body)
            z = Atom(name, ("x",))
            if isinstance(g, Forall):
                matrix.append(Or((Not(z), phi)))
                skolem(Or((z, Not(phi))))
            else:
                matrix.append(Or((z, Not(phi))))
                skolem(Or((Not(z), phi)))
            return Atom(name, (w,))
        return transform(f, fn)

    def top(c):
        if isinstance(c, Forall):
            if c.var == "y":
                c = swap_vars(c)
            body = c.body
            if isinstance(body, Forall):
                if body.var == "y":
                    matrix.append(reduce(body.body))
                else:
                    top(body)
                return
            if isinstance(body, Exists) and body.var == "y":
                skolem(reduce(body.body))
                return
            matrix.append(reduce(body))
            return
        if isinstance(c, Exists):
            body = c.body if c.var == "y" else swap_vars(c.body)
            skolem(reduce(body))
            return
        matrix.append(reduce(c))

    for c in branch.conjuncts:
        if _is_constraint(c) or not has_quantifier(c):
            if not _is_constraint(c):
                matrix.append(c)
            else:
                out.append(c)
            continue
        top(c)
    clauses = [Forall("x", Forall("y", simplify(m))) for m in matrix]
    return branch.with_conjuncts(clauses + out, _pred_map(branch, new_preds), weights)


# ------------------------------------------------------------ stage 7

def extract(branch):
    prob = branch.problem
    psi_parts = []
    bc, bm, uc, um = [], [], [], []
    for c in branch.conjuncts:
        if isinstance(c, Const):
            if not c.value:
                psi_parts.append(FALSE)
            continue
        if isinstance(c, Forall) and isinstance(c.body, COUNTERS):
            C = c.body
            pred = C.body.pred
            if isinstance(C, Counting):
                bc.append((pred, C.cmp, C.k))
            else:
                bm.append((pred, C.cmp, C.r, C.k))
            continue
        if isinstance(c, COUNTERS):
            pred = c.body.pred
            if isinstance(c, Counting):
                uc.append((pred, c.cmp, c.k))
            else:
                um.append((pred, c.cmp, c.r, c.k))
            continue
        body = c
        while isinstance(body, Forall):
            body = body.body
        if has_quantifier(body):
            raise NormalizationError("extract", f"quantifier left in matrix: {to_text(c)}")
        psi_parts.append(body)
    card = []
    for p, t in prob.cardinality:
        a = prob.predicates[p]
        if a == 1:
            uc.append((p, "=", t if t.a else t.b))
        elif a == 2:
            card.append((p, t))
    # constrained predicates must occur in psi so the cell table sees them
    used = [p for p, *_ in bc + bm + uc + um] + [p for p, _ in card]
    if prob.order:
        used.append(prob.order)
    mentioned = predicates(conj(psi_parts))
    for p in dict.fromkeys(used):
        if p not in mentioned:
            atom = Atom(p, ("x",) if prob.predicates[p] == 1 else ("x", "y"))
            psi_parts.append(Or((atom, Not(atom))))
    psi = simplify(conj(psi_parts)) if psi_parts else TRUE
    vocab = {p: a for p, a in prob.predicates.items() if a in (1, 2)}
    weights = {p: prob.weight(p) for p in vocab}
    return NormalizedProblem(psi, vocab, weights, bc, uc, bm, um, card,
                             list(branch.divisors), prob.order, branch.min_domain)


# ------------------------------------------------------------ pipeline

STAGES = (
    "rewrite_ge", "axiomatize_subformulas", "eliminate_negation", "shannon_expand",
    "eliminate_disjunctive_counting", "skolemize",
)


def stages(problem, domain_size=None, shannon_limit=SHANNON_LIMIT):
    """Run the pipeline, returning [(stage name, [Branch])] after every stage."""
    problem = close_vocabulary(ProblemInput(
        problem.sentence, dict(problem.predicates), dict(problem.weights),
        list(problem.cardinality), problem.order))
    fresh = Fresh(problem.predicates)
    branches = [Branch(problem)]
    history = []
    for name in STAGES:
        try:
            if name == "rewrite_ge":
                branches = stage_rewrite_ge(branches)
            elif name == "axiomatize_subformulas":
                branches = [axiomatize_subformulas(b, fresh) for b in branches]
            elif name == "eliminate_negation":
                branches = [eliminate_negation(b, fresh) for b in branches]
            elif name == "shannon_expand":
                branches = [nb for b in branches for nb in shannon_expand(b, shannon_limit)]
            elif name == "eliminate_disjunctive_counting":
                branches = [eliminate_disjunctive_counting(b, domain_size, fresh) for b in branches]
            elif name == "skolemize":
                branches = [skolemize(b, fresh) for b in branches]
        except NormalizationError:
            raise
        except (ValueError, KeyError) as e:
            raise NormalizationError(name, str(e)) from e
        history.append((name, branches))
    return history


def normalize(problem, domain_size=None, shannon_limit=SHANNON_LIMIT):
    """List of (NormalizedProblem, multiplier) whose weighted sum is the WFOMC."""
    branches = stages(problem, domain_size, shannon_limit)[-1][1]
    return [(extract(b), b.multiplier) for b in branches]


def branch_value(branch, n, value):
    """Combine a branch's raw count with its multiplier and divisors."""
    v = value * branch.multiplier
    for r in branch.divisors:
        v = Fraction(v) / math.comb(n, r)
    return canon(Fraction(v))
