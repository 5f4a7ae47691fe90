"""Shared sentence corpus: name -> (category, problem text)."""

GRAPH = """\
predicate E/2
forall x: ~E(x,x)
forall x: forall y: E(x,y) -> E(y,x)
"""

CORPUS = {
    "coin": ("ufo2", """\
predicate H/1
predicate T/1
weight H 2 1
forall x: (H(x) | T(x)) & ~(H(x) & T(x))
"""),
    "smokers": ("ufo2", """\
predicate S/1
predicate F/2
weight S 3/2 1
weight F 1 1/2
forall x: forall y: (S(x) & F(x,y)) -> S(y)
"""),
    "two-colored": ("ufo2", """\
predicate R/1
predicate E/2
forall x: ~E(x,x)
forall x: forall y: E(x,y) -> E(y,x)
forall x: forall y: E(x,y) -> ~(R(x) <-> R(y))
"""),
    "negative-weights": ("ufo2", """\
predicate P/1
predicate E/2
weight P -1 2
weight E 2 -1/3
forall x: forall y: E(x,y) -> (P(x) | P(y))
"""),
    "serial": ("skolem", """\
predicate E/2
forall x: ~E(x,x)
forall x: exists y: E(x,y)
"""),
    "guarded-exists": ("skolem", """\
predicate P/1
predicate Q/1
predicate E/2
forall x: P(x) -> exists y: (E(x,y) & Q(y))
exists x: Q(x)
"""),
    "two-regular": ("counting", GRAPH + "forall x: exists[=2] y: E(x,y)\n"),
    "at-most-one": ("counting", "predicate E/2\nforall x: exists[<=1] y: E(x,y)\n"),
    "at-least-two": ("counting", "predicate E/2\nforall x: exists[>=2] y: E(x,y)\n"),
    "guarded-counting": ("counting", """\
predicate P/1
predicate E/2
forall x: P(x) | exists[=1] y: E(x,y)
"""),
    "negated-counting": ("counting", "predicate E/2\nforall x: ~exists[=1] y: E(x,y)\n"),
    "nested-counting": ("counting", """\
predicate E/2
forall x: exists[=1] y: (E(x,y) & exists[=1] x: E(x,y))
"""),
    "odd-regular": ("modulo", GRAPH + "forall x: exists[=1 mod 2] y: E(x,y)\n"),
    "residue-ge": ("modulo", "predicate E/2\nforall x: exists[>=1 mod 3] y: E(x,y)\n"),
    "odd-iff": ("modulo", GRAPH + """\
predicate Odd/1
forall x: Odd(x) <-> exists[=1 mod 2] y: E(x,y)
"""),
    "parity-coins": ("unary", """\
predicate H/1
predicate T/1
weight H 2 1
forall x: (H(x) | T(x)) & ~(H(x) & T(x))
exists[=1 mod 2] x: H(x)
"""),
    "closed-pair": ("unary", """\
predicate P/1
predicate E/2
exists[=2] x: P(x)
forall x: forall y: (P(x) & E(x,y)) -> P(y)
"""),
    "closed-choice": ("unary", """\
predicate P/1
predicate Q/1
(exists[<=1] x: P(x)) | (forall x: Q(x))
"""),
    "edge-count": ("cardinality", GRAPH + "card |E| = 2\n"),
    "unary-card": ("cardinality", """\
predicate P/1
predicate E/2
card |P| = n-1
forall x: forall y: E(x,y) -> (P(x) & ~P(y))
"""),
    "upward-closed": ("order", """\
predicate P/1
order LEQ
forall x: forall y: (P(x) & LEQ(x,y)) -> P(y)
"""),
    "earlier-choice": ("order", """\
predicate E/2
order LEQ
forall x: forall y: E(x,y) -> LEQ(y,x)
forall x: exists[=1] y: E(x,y)
"""),
}
