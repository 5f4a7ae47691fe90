import itertools

import pytest

from liftcount.logic import (
    Affine, And, Atom, Counting, Forall, Implies, ModCounting, Not, ParseError, eval_ground,
    free_vars, ground, herbrand_base, holds, interpretation_weight, parse_formula, parse_problem,
    problem_to_text, to_text,
)

from corpus import CORPUS

ROUNDTRIP = [
    "forall x: ~E(x,x)",
    "forall x: exists[=2] y: E(x,y)",
    "forall x: exists[=1 mod 2] y: E(x,y)",
    "forall x: exists[<=3] y: E(x,y)",
    "forall x: exists[>=2] y: E(x,y)",
    "forall x: exists[<=1 mod 3] y: E(x,y)",
    "forall x: exists[>=2 mod 5] y: E(x,y)",
    "exists[=0 mod 1] x: P(x)",
    "exists x: P(x)",
    "exists y: P(y) & Q(y)",
    "forall x: forall y: E(x,y) -> E(y,x)",
    "forall x: forall y: E(x,y) <-> E(y,x)",
    "forall x: (H(x) | T(x)) & ~(H(x) & T(x))",
    "forall x: P(x) -> Q(x) -> R(x)",
    "forall x: (P(x) -> Q(x)) -> R(x)",
    "forall x: P(x) <-> Q(x) <-> R(x)",
    "forall x: P(x) <-> (Q(x) <-> R(x))",
    "forall x: ~~P(x)",
    "forall x: ~(forall y: E(x,y))",
    "forall x: P(x) | (exists[=1] y: E(x,y))",
    "forall x: Odd(x) <-> exists[=1 mod 2] y: E(x,y)",
    "forall x: exists[=1] y: (E(x,y) & exists[=1] x: E(x,y))",
    "(exists[<=1] x: P(x)) | (forall x: Q(x))",
    "Q | ~Q",
    "true",
    "false | forall x: P(x)",
    "forall x: P(x) & (Q(x) & R(x))",
    "forall x: (P(x) | Q(x)) | R(x)",
    "forall x: forall y: (S(x) & F(x,y)) -> S(y)",
    "forall x: forall y: R(x,y) & ~(K(x) & K(y)) -> LEQ(y,x)",
    "forall x: forall y: K(x) & K(y) & ~Eq(x,y) -> R(x,y)",
    "forall x: forall y: Eq(x,y) <-> (LEQ(x,y) & LEQ(y,x))",
    "forall x: exists y: forall x: E(x,y)",
    "forall y: exists x: E(x,y)",
]


def test_roundtrip_corpus_size():
    assert len(ROUNDTRIP) >= 30


@pytest.mark.parametrize("text", ROUNDTRIP)
def test_print_parse_roundtrip(text):
    f = parse_formula(text)
    printed = to_text(f)
    assert parse_formula(printed) == f
    assert to_text(parse_formula(printed)) == printed


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_problem_roundtrip(name):
    p = parse_problem(CORPUS[name][1])
    q = parse_problem(problem_to_text(p))
    assert q.sentence == p.sentence
    assert q.weights == p.weights and q.cardinality == p.cardinality and q.order == p.order


def test_parse_examples():
    assert parse_formula("forall x: ~E(x,x)") == Forall("x", Not(Atom("E", ("x", "x"))))
    assert parse_formula("forall x: exists[=2] y: E(x,y)") == Forall(
        "x", Counting("y", "=", 2, Atom("E", ("x", "y"))))
    assert parse_formula("forall x: exists[=1 mod 2] y: E(x,y)") == Forall(
        "x", ModCounting("y", "=", 1, 2, Atom("E", ("x", "y"))))


def test_implication_is_right_associative():
    f = parse_formula("A -> B -> C")
    assert f == Implies(Atom("A", ()), Implies(Atom("B", ()), Atom("C", ())))


def test_precedence():
    f = parse_formula("~A & B | C")
    assert to_text(f) == "(~A & B) | C"
    assert f.items[0] == And((Not(Atom("A", ())), Atom("B", ())))


@pytest.mark.parametrize("text, fragment", [
    ("forall z: P(z)", "only x and y"),
    ("forall x: P(x,y,x)", "arity 3"),
    ("forall x: P(x) & P(x,x)", "arity mismatch"),
    ("forall x: exists[=2 mod 2] y: E(x,y)", "0 <= r < k"),
    ("forall x: exists[=1 mod 0] y: E(x,y)", "0 <= r < k"),
    ("forall x: P(c)", "only x and y"),
    ("forall x: P(bob)", "constants"),
    ("forall x: P(1)", "constants"),
    ("forall x: (P(x)", "expected )"),
    ("forall x: P(x) $", "unexpected character"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError) as e:
        parse_formula(text)
    assert fragment in str(e.value)


def test_parse_error_position():
    with pytest.raises(ParseError) as e:
        parse_problem("predicate E/2\nforall x:\n  E(x,q)\n")
    assert e.value.line == 3 and e.value.col == 7


def test_problem_declarations():
    p = parse_problem("""\
predicate E/2   # edges
order LEQ
weight E 2 -1/2
card |E| = 2n+1
forall x: forall y:
  E(x,y) -> LEQ(x,y)
exists x: P(x)
""")
    assert p.order == "LEQ" and p.predicates == {"E": 2, "LEQ": 2, "P": 1}
    assert p.weights["E"] == (2, -0.5)
    assert p.cardinality == [("E", Affine(2, 1))]
    assert isinstance(p.sentence, And) and len(p.sentence.items) == 2


def test_free_variable_rejected():
    with pytest.raises(ParseError):
        parse_problem("P(x)")


def test_declared_arity_enforced():
    with pytest.raises(ParseError):
        parse_problem("predicate E/2\nforall x: E(x)")


def test_ground_examples():
    g = ground(parse_formula("exists[=1] x: H(x)"), 2)
    assert g[0] == "count" and len(g[4]) == 2
    g = ground(parse_formula("exists[=1 mod 2] x: H(x)"), 3)
    sat = [bits for bits in itertools.product((0, 1), repeat=3)
           if eval_ground(g, {("H", (i + 1,)) for i, b in enumerate(bits) if b})]
    assert sorted(sum(b) for b in sat) == [1, 1, 1, 3]
    with pytest.raises(ValueError):
        ground(parse_formula("forall x: P(x)"), 0)


SEMANTIC = [
    "forall x: exists[=1] y: E(x,y)",
    "forall x: exists[<=1] y: E(x,y)",
    "forall x: exists[>=2] y: E(x,y)",
    "forall x: exists[=1 mod 2] y: E(x,y)",
    "forall x: exists[>=1 mod 3] y: E(x,y)",
    "exists[=2] x: P(x) | exists y: E(x,y)",
    "forall x: P(x) <-> exists[<=0 mod 2] y: (E(x,y) & P(y))",
    "exists[=1] x: forall y: (E(x,y) -> P(y))",
]


@pytest.mark.parametrize("text", SEMANTIC)
def test_ground_matches_direct_semantics(text):
    f = parse_formula(text)
    preds = {"E": 2, "P": 1}
    for n in (1, 2):
        base = herbrand_base(preds, n)
        g = ground(f, n)
        for bits in itertools.product((False, True), repeat=len(base)):
            true = {a for a, b in zip(base, bits) if b}
            assert eval_ground(g, true) == holds(f, true, n)


@pytest.mark.parametrize("text", SEMANTIC)
def test_ground_matches_direct_semantics_n3(text):
    # n = 3 has 12 atoms over {E, P}: exhaustive is 4096 interpretations
    f = parse_formula(text)
    preds = {"E": 2, "P": 1}
    base = herbrand_base(preds, 3)
    g = ground(f, 3)
    for bits in itertools.product((False, True), repeat=len(base)):
        true = {a for a, b in zip(base, bits) if b}
        assert eval_ground(g, true) == holds(f, true, 3)


def test_interpretation_weight():
    preds = {"H": 1, "T": 1}
    true = {("H", (1,)), ("H", (2,)), ("T", (3,))}
    assert interpretation_weight(true, {"H": (2, 1)}, preds, 3) == 4
    assert interpretation_weight(set(), {}, {}, 3) == 1
    assert interpretation_weight(set(), {"H": (5, 1)}, preds, 3) == 1


def test_free_vars():
    assert free_vars(parse_formula("exists y: E(x,y)")) == {"x"}
    assert free_vars(parse_formula("forall x: exists y: E(x,y)")) == set()
