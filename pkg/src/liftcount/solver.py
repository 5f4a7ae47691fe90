"""Counting entry points: normalize, run the engine per branch, recombine."""
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .arith import canon
from .engine import Engine
from .normalize import normalize


@dataclass
class SweepResult:
    counts: dict                                   # n -> count
    wall_ms: dict = field(default_factory=dict)    # n -> ms
    layer_entries: dict = field(default_factory=dict)  # n -> configurations at layer n
    engines: list = field(default_factory=list)


def _combine(value, mult, divisors, n):
    v = Fraction(value) * Fraction(mult)
    for r in divisors:
        v /= math.comb(n, r)
    return canon(v)


def sweep(problem, ns, prune=True, trace=None):
    """Exact WFOMC of `problem` for every n in ns, sharing layers across n."""
    ns = sorted(set(ns))
    if not ns:
        return SweepResult({})
    if ns[0] < 1:
        raise ValueError("domain size must be at least 1")
    n_max = ns[-1]
    branches = normalize(problem)
    min_domain = max((np.min_domain for np, _ in branches), default=1)
    big = [n for n in ns if n >= min_domain]
    small = [n for n in ns if n < min_domain]
    res = SweepResult({n: 0 for n in ns})
    t0 = time.perf_counter()
    entries = {n: 0 for n in ns}
    if big:
        for np_, mult in branches:
            eng = Engine(np_, n_max=n_max, prune=prune)
            res.engines.append(eng)
            for h, T in eng.layers(n_max):
                if h in big:
                    v = eng.extract(eng.accepted_total(T, h), h)
                    res.counts[h] = res.counts[h] + _combine(v, mult, [], h)
                    res.wall_ms[h] = (time.perf_counter() - t0) * 1000.0
                    entries[h] += len(T)
            if trace is not None:
                trace.extend(eng.trace)
    for n in small:
        t1 = time.perf_counter()
        for np_, mult in normalize(problem, domain_size=n):
            eng = Engine(np_, n_max=n, prune=prune)
            for h, T in eng.layers(n):
                if h == n:
                    v = eng.extract(eng.accepted_total(T, h), h)
                    res.counts[n] = res.counts[n] + _combine(v, mult, [], h)
                    entries[n] += len(T)
        res.wall_ms[n] = (time.perf_counter() - t1) * 1000.0
    res.layer_entries = entries
    res.counts = {n: canon(Fraction(v)) for n, v in res.counts.items()}
    return res


def wfomc(problem, n, prune=True):
    return sweep(problem, [n], prune=prune).counts[n]
