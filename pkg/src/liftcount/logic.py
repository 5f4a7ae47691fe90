"""First-order formulas with counting quantifiers: AST, text format, grounding.

Only the variables x and y exist. Domain elements are the integers 1..n.
"""
import re
from dataclasses import dataclass, field, replace
from typing import Optional

from .arith import format_rational, parse_rational

VARS = ("x", "y")


def other(v):
    return "y" if v == "x" else "x"


# ---------------------------------------------------------------- AST

@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple = ()


@dataclass(frozen=True)
class Const:
    value: bool


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Not:
    body: object


@dataclass(frozen=True)
class And:
    items: tuple


@dataclass(frozen=True)
class Or:
    items: tuple


@dataclass(frozen=True)
class Implies:
    left: object
    right: object


@dataclass(frozen=True)
class Iff:
    left: object
    right: object


@dataclass(frozen=True)
class Forall:
    var: str
    body: object


@dataclass(frozen=True)
class Exists:
    var: str
    body: object


@dataclass(frozen=True)
class Counting:
    """exists[cmp k] var: body, cmp one of '=', '<=', '>='."""
    var: str
    cmp: str
    k: int
    body: object


@dataclass(frozen=True)
class ModCounting:
    """exists[cmp r mod k] var: body; compares (count mod k) with r."""
    var: str
    cmp: str
    r: int
    k: int
    body: object


QUANTIFIERS = (Forall, Exists, Counting, ModCounting)
COUNTERS = (Counting, ModCounting)


def conj(items):
    items = tuple(items)
    if not items:
        return TRUE
    if len(items) == 1:
        return items[0]
    return And(items)


def disj(items):
    items = tuple(items)
    if not items:
        return FALSE
    if len(items) == 1:
        return items[0]
    return Or(items)


def compare(cmp, value, bound):
    if cmp == "=":
        return value == bound
    if cmp == "<=":
        return value <= bound
    if cmp == ">=":
        return value >= bound
    raise ValueError(cmp)


def children(f):
    if isinstance(f, (Atom, Const)):
        return ()
    if isinstance(f, (And, Or)):
        return f.items
    if isinstance(f, (Implies, Iff)):
        return (f.left, f.right)
    return (f.body,)


def rebuild(f, kids):
    """Same node type with new children."""
    if isinstance(f, (Atom, Const)):
        return f
    if isinstance(f, (And, Or)):
        return type(f)(tuple(kids))
    if isinstance(f, (Implies, Iff)):
        return type(f)(kids[0], kids[1])
    return replace(f, body=kids[0])


def transform(f, fn):
    """Bottom-up rewrite: fn is applied to every node after its children."""
    kids = children(f)
    if kids:
        new = [transform(c, fn) for c in kids]
        if any(a is not b for a, b in zip(new, kids)):
            f = rebuild(f, new)
    return fn(f)


def walk(f):
    yield f
    for c in children(f):
        yield from walk(c)


def free_vars(f):
    if isinstance(f, Atom):
        return set(a for a in f.args if a in VARS)
    if isinstance(f, Const):
        return set()
    if isinstance(f, QUANTIFIERS):
        return free_vars(f.body) - {f.var}
    out = set()
    for c in children(f):
        out |= free_vars(c)
    return out


def predicates(f):
    out = {}
    for g in walk(f):
        if isinstance(g, Atom):
            out.setdefault(g.pred, len(g.args))
    return out


def has_counting(f):
    return any(isinstance(g, COUNTERS) for g in walk(f))


def has_quantifier(f):
    return any(isinstance(g, QUANTIFIERS) for g in walk(f))


def swap_vars(f):
    """Rename x <-> y everywhere (bound and free)."""
    def fn(g):
        if isinstance(g, Atom):
            return Atom(g.pred, tuple(other(a) for a in g.args))
        if isinstance(g, QUANTIFIERS):
            return replace(g, var=other(g.var))
        return g
    return transform(f, fn)


def rename_free(f, mapping):
    """Substitute free variables (mapping var -> var). Bound occurrences untouched."""
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(mapping.get(a, a) for a in f.args))
    if isinstance(f, Const):
        return f
    if isinstance(f, QUANTIFIERS):
        inner = {k: v for k, v in mapping.items() if k != f.var}
        return replace(f, body=rename_free(f.body, inner))
    return rebuild(f, [rename_free(c, mapping) for c in children(f)])


def substitute_atoms(f, fn):
    """Replace atoms by fn(atom) (returning a formula or None to keep)."""
    def g(node):
        if isinstance(node, Atom):
            new = fn(node)
            return node if new is None else new
        return node
    return transform(f, g)


def simplify(f):
    """Constant folding and flattening; keeps the formula otherwise intact."""
    def fn(g):
        if isinstance(g, Not):
            b = g.body
            if isinstance(b, Const):
                return Const(not b.value)
            if isinstance(b, Not):
                return b.body
            return g
        if isinstance(g, (And, Or)):
            is_and = isinstance(g, And)
            out = []
            for it in g.items:
                if isinstance(it, Const):
                    if it.value == is_and:
                        continue
                    return it
                if type(it) is type(g):
                    out.extend(it.items)
                else:
                    out.append(it)
            return (conj if is_and else disj)(out)
        if isinstance(g, Implies):
            a, b = g.left, g.right
            if isinstance(a, Const):
                return b if a.value else TRUE
            if isinstance(b, Const):
                return TRUE if b.value else fn(Not(a))
            return g
        if isinstance(g, Iff):
            a, b = g.left, g.right
            if isinstance(a, Const):
                return b if a.value else fn(Not(b))
            if isinstance(b, Const):
                return a if b.value else fn(Not(a))
            return g
        if isinstance(g, (Forall, Exists)):
            if isinstance(g.body, Const):
                return g.body
            return g
        if isinstance(g, Counting):
            if g.cmp == ">=" and g.k == 0:
                return TRUE
            if isinstance(g.body, Const) and not g.body.value:
                return Const(compare(g.cmp, 0, g.k))
            return g
        if isinstance(g, ModCounting):
            if isinstance(g.body, Const) and not g.body.value:
                return Const(compare(g.cmp, 0, g.r))
            return g
        return g
    return transform(f, fn)


# ---------------------------------------------------------------- problems

@dataclass(frozen=True)
class Affine:
    """a*n + b, used for cardinality targets that scale with the domain."""
    a: int = 0
    b: int = 0

    def at(self, n):
        return self.a * n + self.b

    def __str__(self):
        if not self.a:
            return str(self.b)
        s = "n" if self.a == 1 else f"{self.a}*n"
        if self.b > 0:
            s += f"+{self.b}"
        elif self.b < 0:
            s += f"-{-self.b}"
        return s


_AFFINE = re.compile(r"^\s*(?:(\d+)\s*\*?\s*)?n\s*(?:([+-])\s*(\d+))?\s*$")


def parse_affine(text):
    text = text.strip()
    if re.fullmatch(r"\d+", text):
        return Affine(0, int(text))
    m = _AFFINE.match(text)
    if not m:
        raise ValueError(f"bad cardinality target {text!r}")
    a = int(m.group(1)) if m.group(1) else 1
    b = int(m.group(3)) if m.group(3) else 0
    if m.group(2) == "-":
        b = -b
    return Affine(a, b)


@dataclass
class ProblemInput:
    sentence: object
    predicates: dict = field(default_factory=dict)   # name -> arity
    weights: dict = field(default_factory=dict)      # name -> (w, wbar)
    cardinality: list = field(default_factory=list)  # (name, Affine)
    order: Optional[str] = None

    def weight(self, name):
        return self.weights.get(name, (1, 1))

    def herbrand_size(self, n, include_order=False):
        total = 0
        for p, a in self.predicates.items():
            if p == self.order and not include_order:
                continue
            total += n ** a
        return total


def close_vocabulary(problem):
    """Make sure every predicate of the sentence is registered."""
    for p, a in predicates(problem.sentence).items():
        if problem.predicates.setdefault(p, a) != a:
            raise ValueError(f"predicate {p} used with arity {a} and {problem.predicates[p]}")
    return problem


# ---------------------------------------------------------------- parser

class ParseError(ValueError):
    def __init__(self, msg, line=None, col=None):
        where = f"line {line}, col {col}: " if line is not None else ""
        super().__init__(where + msg)
        self.line = line
        self.col = col


_TOKEN = re.compile(
    r"\s*(?:(?P<op><->|->|<=|>=|[~&|():,\[\]=!])|(?P<num>\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_']*))"
)
_BINOPS = {"&", "|", "->", "<->"}


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize_line(text, lineno):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}", lineno, pos + 1)
        col = m.start(m.lastgroup) + 1
        out.append(Tok(m.lastgroup, m.group(m.lastgroup), lineno, col))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, toks, arities):
        self.toks = toks
        self.i = 0
        self.arities = arities

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def error(self, msg, tok=None):
        tok = tok or self.peek() or (self.toks[-1] if self.toks else None)
        if tok is None:
            raise ParseError(msg)
        raise ParseError(msg, tok.line, tok.col)

    def take(self, text=None, kind=None):
        t = self.peek()
        if t is None:
            self.error(f"unexpected end of input, expected {text or kind}")
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            self.error(f"expected {text or kind}, got {t.text!r}", t)
        self.i += 1
        return t

    def at(self, text):
        t = self.peek()
        return t is not None and t.kind == "op" and t.text == text

    # precedence: <-> < -> < | < & < ~
    def formula(self):
        left = self.implication()
        while self.at("<->"):
            self.i += 1
            left = Iff(left, self.implication())
        return left

    def implication(self):
        left = self.disjunction()
        if self.at("->"):
            self.i += 1
            return Implies(left, self.implication())
        return left

    def disjunction(self):
        items = [self.conjunction()]
        while self.at("|"):
            self.i += 1
            items.append(self.conjunction())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def conjunction(self):
        items = [self.unary()]
        while self.at("&"):
            self.i += 1
            items.append(self.unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def variable(self):
        t = self.take(kind="id")
        if t.text not in VARS:
            self.error(f"variable {t.text!r} not allowed: only x and y (two-variable fragment)", t)
        return t.text

    def unary(self):
        t = self.peek()
        if t is None:
            self.error("unexpected end of input")
        if t.kind == "op" and t.text in ("~", "!"):
            self.i += 1
            return Not(self.unary())
        if t.kind == "op" and t.text == "(":
            self.i += 1
            f = self.formula()
            self.take(")")
            return f
        if t.kind == "id" and t.text == "forall":
            self.i += 1
            v = self.variable()
            self.take(":")
            return Forall(v, self.formula())
        if t.kind == "id" and t.text == "exists":
            self.i += 1
            if self.at("["):
                return self.counting()
            v = self.variable()
            self.take(":")
            return Exists(v, self.formula())
        if t.kind == "id" and t.text in ("true", "false"):
            self.i += 1
            return Const(t.text == "true")
        if t.kind == "id":
            return self.atom()
        self.error(f"unexpected token {t.text!r}", t)

    def counting(self):
        self.take("[")
        t = self.peek()
        if t is None or t.kind != "op" or t.text not in ("=", "<=", ">="):
            self.error("expected =, <= or >= in counting quantifier")
        self.i += 1
        cmp = t.text
        num = int(self.take(kind="num").text)
        mod = None
        t2 = self.peek()
        if t2 is not None and t2.kind == "id" and t2.text == "mod":
            self.i += 1
            mtok = self.take(kind="num")
            mod = int(mtok.text)
            if mod < 1 or not (0 <= num < mod):
                self.error(f"modulo parameters need 0 <= r < k and k >= 1 (got r={num}, k={mod})", mtok)
        self.take("]")
        v = self.variable()
        self.take(":")
        body = self.formula()
        if mod is None:
            return Counting(v, cmp, num, body)
        return ModCounting(v, cmp, num, mod, body)

    def atom(self):
        t = self.take(kind="id")
        name = t.text
        args = []
        if self.at("("):
            self.i += 1
            if not self.at(")"):
                while True:
                    a = self.peek()
                    if a is None:
                        self.error("unterminated argument list")
                    if a.kind == "num" or (a.kind == "id" and a.text not in VARS):
                        if a.kind == "id" and len(a.text) == 1 and a.text.islower():
                            self.error(f"variable {a.text!r} not allowed: only x and y (two-variable fragment)", a)
                        self.error(f"constants are not supported ({a.text!r})", a)
                    args.append(self.variable())
                    if self.at(","):
                        self.i += 1
                        continue
                    break
            self.take(")")
        if len(args) > 2:
            self.error(f"arity {len(args)} > 2 for {name}", t)
        known = self.arities.get(name)
        if known is not None and known != len(args):
            self.error(f"arity mismatch for {name}: declared/used {known}, here {len(args)}", t)
        self.arities[name] = len(args)
        return Atom(name, tuple(args))


def _continues(prev_line_toks, next_line_toks, depth):
    if depth > 0:
        return True
    if prev_line_toks and prev_line_toks[-1].kind == "op" and prev_line_toks[-1].text in _BINOPS | {":", "~", "(", "["}:
        return True
    if next_line_toks and next_line_toks[0].kind == "op" and next_line_toks[0].text in _BINOPS:
        return True
    return False


def parse_formula(text, arities=None):
    toks = []
    for i, line in enumerate(text.splitlines() or [text]):
        toks.extend(_tokenize_line(line, i + 1))
    p = _Parser(toks, {} if arities is None else arities)
    f = p.formula()
    if p.peek() is not None:
        p.error(f"unexpected token {p.peek().text!r}")
    return f


def parse_problem(text):
    arities = {}
    declared = {}
    weights = {}
    card = []
    order = None
    groups = []  # list of token lists, one per conjunct
    current = []
    depth = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        head = stripped.split()[0]
        if head in ("predicate", "order", "card", "weight"):
            _declaration(stripped, lineno, declared, weights, card)
            if head == "order":
                order = stripped.split()[1]
            continue
        toks = _tokenize_line(line, lineno)
        if current and not _continues(current, toks, depth):
            groups.append(current)
            current = []
        current.extend(toks)
        for t in toks:
            if t.kind == "op" and t.text == "(":
                depth += 1
            elif t.kind == "op" and t.text == ")":
                depth -= 1
    if current:
        groups.append(current)
    for name, a in declared.items():
        arities[name] = a
    if order is not None:
        if arities.setdefault(order, 2) != 2:
            raise ParseError(f"order predicate {order} must be binary")
    conjuncts = []
    for g in groups:
        p = _Parser(g, arities)
        f = p.formula()
        if p.peek() is not None:
            p.error(f"unexpected token {p.peek().text!r}")
        fv = free_vars(f)
        if fv:
            raise ParseError(f"free variable(s) {sorted(fv)} in sentence", g[0].line, g[0].col)
        conjuncts.append(f)
    sentence = conj(conjuncts)
    for name, _ in card:
        if name not in arities:
            raise ParseError(f"cardinality constraint on unknown predicate {name}")
    return ProblemInput(sentence, dict(arities), weights, card, order)


def _declaration(line, lineno, declared, weights, card):
    parts = line.split()
    head = parts[0]
    try:
        if head == "predicate":
            m = re.fullmatch(r"predicate\s+([A-Za-z_][A-Za-z0-9_']*)\s*/\s*(\d+)", line)
            if not m:
                raise ValueError("expected 'predicate Name/arity'")
            a = int(m.group(2))
            if a > 2:
                raise ValueError(f"arity {a} > 2")
            declared[m.group(1)] = a
        elif head == "order":
            if len(parts) != 2:
                raise ValueError("expected 'order Name'")
            declared[parts[1]] = 2
        elif head == "card":
            m = re.fullmatch(r"card\s*\|\s*([A-Za-z_][A-Za-z0-9_']*)\s*\|\s*=\s*(.+)", line)
            if not m:
                raise ValueError("expected 'card |P| = d'")
            card.append((m.group(1), parse_affine(m.group(2))))
        elif head == "weight":
            if len(parts) != 4:
                raise ValueError("expected 'weight P w wbar'")
            weights[parts[1]] = (parse_rational(parts[2]), parse_rational(parts[3]))
    except (ValueError, ZeroDivisionError) as e:
        raise ParseError(str(e), lineno, 1) from None


# ---------------------------------------------------------------- printer

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5}


def to_text(f, ctx=0):
    if isinstance(f, Atom):
        if not f.args:
            return f.pred
        return f"{f.pred}({','.join(f.args)})"
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, QUANTIFIERS):
        if isinstance(f, Forall):
            head = f"forall {f.var}:"
        elif isinstance(f, Exists):
            head = f"exists {f.var}:"
        elif isinstance(f, Counting):
            head = f"exists[{f.cmp}{f.k}] {f.var}:"
        else:
            head = f"exists[{f.cmp}{f.r} mod {f.k}] {f.var}:"
        s = f"{head} {to_text(f.body, 0)}"
        return f"({s})" if ctx > 0 else s
    p = _PREC[type(f)]
    if isinstance(f, Not):
        s = "~" + to_text(f.body, p)
    elif isinstance(f, (And, Or)):
        op = " & " if isinstance(f, And) else " | "
        s = op.join(to_text(c, p + 1) for c in f.items)
    else:
        op = " -> " if isinstance(f, Implies) else " <-> "
        s = to_text(f.left, p + 1) + op + to_text(f.right, p + 1)
    return f"({s})" if ctx >= p and not isinstance(f, Not) else s


def problem_to_text(problem):
    lines = []
    for name, a in sorted(problem.predicates.items()):
        if name == problem.order:
            continue
        lines.append(f"predicate {name}/{a}")
    if problem.order:
        lines.append(f"order {problem.order}")
    for name, (w, wb) in sorted(problem.weights.items()):
        lines.append(f"weight {name} {format_rational(w)} {format_rational(wb)}")
    for name, t in problem.cardinality:
        lines.append(f"card |{name}| = {t}")
    s = problem.sentence
    items = s.items if isinstance(s, And) else (s,)
    lines.extend(to_text(c) for c in items)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- semantics

def herbrand_base(preds, n):
    """All ground atoms (pred, args) over 1..n, in a fixed order."""
    out = []
    for p in sorted(preds):
        a = preds[p]
        if a == 0:
            out.append((p, ()))
        elif a == 1:
            out.extend((p, (i,)) for i in range(1, n + 1))
        else:
            out.extend((p, (i, j)) for i in range(1, n + 1) for j in range(1, n + 1))
    return out


def order_atoms(order, n):
    """True atoms of the natural order <= on 1..n."""
    return {(order, (i, j)) for i in range(1, n + 1) for j in range(i, n + 1)}


def holds(f, true_atoms, n, env=None):
    """Direct semantic evaluation of f in the interpretation given by its true atoms."""
    env = env or {}
    if isinstance(f, Atom):
        return (f.pred, tuple(env[a] for a in f.args)) in true_atoms
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Not):
        return not holds(f.body, true_atoms, n, env)
    if isinstance(f, And):
        return all(holds(c, true_atoms, n, env) for c in f.items)
    if isinstance(f, Or):
        return any(holds(c, true_atoms, n, env) for c in f.items)
    if isinstance(f, Implies):
        return (not holds(f.left, true_atoms, n, env)) or holds(f.right, true_atoms, n, env)
    if isinstance(f, Iff):
        return holds(f.left, true_atoms, n, env) == holds(f.right, true_atoms, n, env)
    vals = (holds(f.body, true_atoms, n, {**env, f.var: e}) for e in range(1, n + 1))
    if isinstance(f, Forall):
        return all(vals)
    if isinstance(f, Exists):
        return any(vals)
    count = sum(vals)
    if isinstance(f, Counting):
        return compare(f.cmp, count, f.k)
    return compare(f.cmp, count % f.k, f.r)


# Ground formulas are nested tuples:
#   ("atom", key) ("const", bool) ("not", g) ("and", [g..]) ("or", [g..])
#   ("count", cmp, k, mod, [g..])   mod None for plain counting, else r is k and mod the modulus

def ground(f, n, env=None):
    if n < 1:
        raise ValueError("domain size must be at least 1")
    env = env or {}
    if isinstance(f, Atom):
        return ("atom", (f.pred, tuple(env[a] for a in f.args)))
    if isinstance(f, Const):
        return ("const", f.value)
    if isinstance(f, Not):
        return ("not", ground(f.body, n, env))
    if isinstance(f, And):
        return ("and", [ground(c, n, env) for c in f.items])
    if isinstance(f, Or):
        return ("or", [ground(c, n, env) for c in f.items])
    if isinstance(f, Implies):
        return ("or", [("not", ground(f.left, n, env)), ground(f.right, n, env)])
    if isinstance(f, Iff):
        a, b = ground(f.left, n, env), ground(f.right, n, env)
        return ("or", [("and", [a, b]), ("and", [("not", a), ("not", b)])])
    inst = [ground(f.body, n, {**env, f.var: e}) for e in range(1, n + 1)]
    if isinstance(f, Forall):
        return ("and", inst)
    if isinstance(f, Exists):
        return ("or", inst)
    if isinstance(f, Counting):
        return ("count", f.cmp, f.k, None, inst)
    return ("count", f.cmp, f.r, f.k, inst)


def eval_ground(g, true_atoms):
    tag = g[0]
    if tag == "atom":
        return g[1] in true_atoms
    if tag == "const":
        return g[1]
    if tag == "not":
        return not eval_ground(g[1], true_atoms)
    if tag == "and":
        return all(eval_ground(c, true_atoms) for c in g[1])
    if tag == "or":
        return any(eval_ground(c, true_atoms) for c in g[1])
    _, cmp, k, mod, items = g
    count = sum(eval_ground(c, true_atoms) for c in items)
    if mod is not None:
        count %= mod
    return compare(cmp, count, k)


def interpretation_weight(true_atoms, weights, preds, n):
    """Product of w over true atoms and wbar over false atoms of the Herbrand base."""
    total = 1
    for atom in herbrand_base(preds, n):
        w, wb = weights.get(atom[0], (1, 1))
        total = total * (w if atom in true_atoms else wb)
    return total
