"""Benchmark families as sentence templates."""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .arith import canon
from .logic import parse_problem

GRAPH = """\
predicate E/2
forall x: ~E(x,x)
forall x: forall y: E(x,y) -> E(y,x)
"""


class PresetError(ValueError):
    pass


@dataclass
class Preset:
    name: str
    params: dict
    text: str
    postprocess: Optional[Callable] = None

    @property
    def problem(self):
        return parse_problem(self.text)

    def finish(self, n, value):
        return self.postprocess(n, value) if self.postprocess else value

    def label(self):
        return ",".join(f"{k}={v}" for k, v in self.params.items())


def _int(params, key, lo=0, default=None):
    if key not in params:
        if default is None:
            raise PresetError(f"missing parameter {key}")
        return default
    try:
        v = int(params[key])
    except (TypeError, ValueError):
        raise PresetError(f"parameter {key} must be an integer, got {params[key]!r}")
    if v < lo:
        raise PresetError(f"parameter {key} must be >= {lo}")
    return v


def _by_factorial(n, value):
    return canon(Fraction(value) / math.factorial(n))


def k_regular(params):
    k = _int(params, "k")
    return Preset("k-regular", {"k": k}, GRAPH + f"forall x: exists[={k}] y: E(x,y)\n")


def k_regular_colored(params):
    k = _int(params, "k")
    l = _int(params, "l", lo=1, default=2)
    colors = ["R", "B"] if l == 2 else [f"C{i}" for i in range(1, l + 1)]
    lines = [f"predicate {c}/1" for c in colors]
    lines.append("forall x: " + " | ".join(f"{c}(x)" for c in colors))
    for i in range(l):
        for j in range(i + 1, l):
            lines.append(f"forall x: ~{colors[i]}(x) | ~{colors[j]}(x)")
    same = " & ".join(f"~({c}(x) & {c}(y))" for c in colors)
    lines.append(f"forall x: forall y: E(x,y) -> ({same})")
    text = k_regular({"k": k}).text + "\n".join(lines) + "\n"
    return Preset("k-regular-colored", {"k": k, "l": l}, text)


def k_regular_digraph(params):
    k = _int(params, "k")
    text = f"""\
predicate E/2
forall x: ~E(x,x)
forall x: exists[={k}] y: E(x,y)
forall x: exists[={k}] y: E(y,x)
"""
    return Preset("k-regular-digraph", {"k": k}, text)


_BA = """\
predicate Eq/2
predicate R/2
predicate K/1
order LEQ
forall x: Eq(x,x) & ~R(x,x)
{eq}
exists[={k1}] x: K(x)
forall x: forall y: K(x) & K(y) & ~Eq(x,y) -> R(x,y)
forall x: exists[={k}] y: R(x,y)
forall x: forall y: R(x,y) & ~(K(x) & K(y)) -> LEQ(y,x)
forall x: forall y: K(x) & ~K(y) -> LEQ(x,y)
"""


def ba(params):
    k = _int(params, "k", lo=1)
    text = _BA.format(eq="card |Eq| = n", k=k, k1=k + 1)
    return Preset("ba", {"k": k}, text, _by_factorial)


def ba_nocc(params):
    k = _int(params, "k", lo=1)
    eq = "forall x: forall y: Eq(x,y) <-> (LEQ(x,y) & LEQ(y,x))"
    return Preset("ba-nocc", {"k": k}, _BA.format(eq=eq, k=k, k1=k + 1), _by_factorial)


def r_mod_k_regular(params):
    r = _int(params, "r")
    k = _int(params, "k", lo=1)
    if r >= k:
        raise PresetError("need 0 <= r < k")
    return Preset("r-mod-k-regular", {"r": r, "k": k},
                  GRAPH + f"forall x: exists[={r} mod {k}] y: E(x,y)\n")


def m_odd_degree(params):
    m = _int(params, "m")
    k = params.get("k")
    if k is None:
        raise PresetError("missing parameter k")
    if str(k).strip() == "2n":
        # the k = 2n rule: 2n undirected edges, 4n true E atoms
        card, shown = "4n", "2n"
    else:
        k = _int(params, "k")
        card, shown = str(2 * k), k
    text = GRAPH + f"""\
predicate Odd/1
forall x: Odd(x) <-> exists[=1 mod 2] y: E(x,y)
exists[={m}] x: Odd(x)
card |E| = {card}
"""
    return Preset("m-odd-degree", {"m": m, "k": shown}, text)


PRESETS = {
    "k-regular": k_regular,
    "k-regular-colored": k_regular_colored,
    "k-regular-digraph": k_regular_digraph,
    "ba": ba,
    "ba-nocc": ba_nocc,
    "r-mod-k-regular": r_mod_k_regular,
    "m-odd-degree": m_odd_degree,
}


def preset(name, params=None):
    params = dict(params or {})
    if name not in PRESETS:
        raise PresetError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return PRESETS[name](params)


def parse_params(text):
    """'k=3,l=2' -> {'k': '3', 'l': '2'}"""
    out = {}
    if not text:
        return out
    for part in text.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise PresetError(f"bad parameter {part!r}, expected key=value")
        key, value = part.split("=", 1)
        out[key.strip()] = value.strip()
    return out
