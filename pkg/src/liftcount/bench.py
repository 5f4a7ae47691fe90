"""Preset sweeps, CSV rows and the odd-degree sequence table."""
import csv
import io
import itertools
import math
import time
from dataclasses import dataclass

from .arith import format_rational
from .engine import Engine
from .logic import Affine
from .normalize import normalize
from .presets import m_odd_degree, preset
from .solver import sweep

CSV_COLUMNS = ("preset", "params", "n", "count", "wall_ms", "layer_entries")


@dataclass
class Row:
    preset: str
    params: str
    n: int
    count: object
    wall_ms: float
    layer_entries: int

    def cells(self):
        return [self.preset, self.params, str(self.n), format_rational(self.count),
                f"{self.wall_ms:.1f}", str(self.layer_entries)]


def bench_rows(name, params, ns, prune=True):
    p = preset(name, params)
    res = sweep(p.problem, ns, prune=prune)
    rows = []
    for n in sorted(res.counts):
        rows.append(Row(p.name, p.label(), n, p.finish(n, res.counts[n]),
                        res.wall_ms.get(n, 0.0), res.layer_entries.get(n, 0)))
    return rows


def write_csv(rows, fh, timings=True):
    """Rows in n order. Without timings the output is byte-identical across runs."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        cells = r.cells()
        if not timings:
            cells[4] = ""
        w.writerow(cells)


def rows_to_csv(rows, timings=True):
    buf = io.StringIO()
    write_csv(rows, buf, timings)
    return buf.getvalue()


def sequence_table(n_max, k_max, m_max=None, n_min=1):
    """T(n, m, k): labelled simple graphs on n vertices with m odd-degree
    vertices and k edges, for n_min <= n <= n_max, m <= min(n, m_max), k <= k_max.
    One engine run per m; every edge count is a coefficient of the same layer."""
    m_max = n_max if m_max is None else m_max
    table = {}
    for m in range(0, m_max + 1):
        branches = normalize(m_odd_degree({"m": m, "k": k_max}).problem)
        for np_, mult in branches:
            if np_.min_domain > 1:
                raise RuntimeError("odd-degree reduction unexpectedly needs a minimum domain")
            eng = Engine(np_, n_max=n_max)
            for n, T in eng.layers(n_max):
                if n < n_min or m > n:
                    continue
                value = eng.accepted_total(T, n)
                for k in range(k_max + 1):
                    v = eng.extract(value, n, [2 * k]) * mult
                    table[(n, m, k)] = table.get((n, m, k), 0) + v
    return table


def graph_sequence_table(n_max, k_max, m_max=None):
    """Same table by listing every graph, for small n."""
    m_max = n_max if m_max is None else m_max
    table = {}
    for n in range(1, n_max + 1):
        pairs = list(itertools.combinations(range(n), 2))
        for k in range(0, min(k_max, len(pairs)) + 1):
            for edges in itertools.combinations(pairs, k):
                deg = [0] * n
                for a, b in edges:
                    deg[a] += 1
                    deg[b] += 1
                m = sum(d & 1 for d in deg)
                if m <= m_max:
                    table[(n, m, k)] = table.get((n, m, k), 0) + 1
        for m in range(0, min(n, m_max) + 1):
            for k in range(k_max + 1):
                table.setdefault((n, m, k), 0)
    return table


def matchings(n, k):
    """Matchings of size k in the complete graph on n vertices."""
    if 2 * k > n:
        return 0
    return math.factorial(n) // (math.factorial(k) * 2 ** k * math.factorial(n - 2 * k))


def format_table(table, n_max, k_max):
    header = ["n", "m"] + [f"k={k}" for k in range(k_max + 1)]
    lines = ["\t".join(header)]
    for n in range(1, n_max + 1):
        for m in range(0, n + 1):
            if (n, m, 0) not in table:
                continue
            cells = [str(n), str(m)]
            for k in range(k_max + 1):
                v = table.get((n, m, k), 0)
                cells.append(format_rational(v) if v else "")
            lines.append("\t".join(cells))
    return "\n".join(lines)
