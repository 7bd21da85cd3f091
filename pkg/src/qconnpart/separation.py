"""Integer separation of Q-connectivity cuts for assignment solutions.

Cuts are emitted directly in their linear forms::

    single:  Q x[r, b]                <= sum_{c in C} x[r, c]
    pair:    Q (x[r, a] + x[r, b] - 1) <= sum_{c in C} x[r, c]

where ``C`` is a minimal a,b-separator of the whole graph (``a = r`` for
single cuts).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .graph import Graph, connected_components, minimal_separator, minimum_vertex_cutset_for_part
from .model import check_assignment

__all__ = ["SeparatorCut", "separate", "separate_parts"]


@dataclass(frozen=True)
class SeparatorCut:
    root: int
    kind: str  # "single" or "pair"
    a: int
    b: int
    separator: frozenset
    q: int

    def coefficients(self) -> tuple:
        """(coeffs, rhs) of the row ``sum coeffs * x >= rhs``."""
        coeffs = {(self.root, c): 1.0 for c in sorted(self.separator)}
        coeffs[(self.root, self.b)] = coeffs.get((self.root, self.b), 0.0) - self.q
        if self.kind == "single":
            return coeffs, 0.0
        coeffs[(self.root, self.a)] = coeffs.get((self.root, self.a), 0.0) - self.q
        return coeffs, -float(self.q)

    def slack(self, x: np.ndarray) -> float:
        """Right side minus left side; negative when ``x`` violates the cut."""
        r = self.root
        support = sum(int(x[r, c]) for c in self.separator)
        if self.kind == "single":
            return support - self.q * int(x[r, self.b])
        return support - self.q * (int(x[r, self.a]) + int(x[r, self.b]) - 1)

    def violated_by(self, x: np.ndarray) -> bool:
        return self.slack(x) < 0

    def satisfied_by_part(self, part, root: int) -> bool:
        """Whether the cut holds when ``part`` is the part rooted at ``root`` (other rows zero)."""
        if root != self.root:
            return True
        lhs = self.q if self.b in part else 0
        if self.kind == "pair":
            lhs = self.q * ((self.a in part) + (self.b in part) - 1)
        return lhs <= len(self.separator & part)


def _smallest(comp) -> int:
    return min(comp)


def separate_parts(
    g: Graph,
    parts: dict,
    q: int,
    root_resilience: bool = True,
    cut_mode: str = "all",
) -> list:
    """Violated cuts for the parts ``{root: vertex set}`` of an integer solution.

    Returns an empty list exactly when every part is Q-connected, provided
    each vertex has at least ``q`` neighbors in its own part.
    """
    if cut_mode not in ("all", "one"):
        raise ValueError("cut_mode must be 'all' or 'one'")
    cuts = []

    def emit(cut):
        cuts.append(cut)
        return cut_mode == "one"

    for r in sorted(parts):
        part = set(parts[r])
        comps = connected_components(g, part)
        root_comp = next(c for c in comps if r in c)
        for comp in comps:
            if comp is root_comp:
                continue
            b = _smallest(comp)
            sep = minimal_separator(g, comp, r, b)
            if emit(SeparatorCut(r, "single", r, b, frozenset(sep), q)):
                return cuts
        kappa, d = minimum_vertex_cutset_for_part(g, root_comp, r)
        if kappa >= q:
            continue
        dset = set(d.vertices)
        rest = connected_components(g, root_comp - dset)
        if root_resilience and r not in dset:
            for comp in rest:
                if r in comp:
                    continue
                b = _smallest(comp)
                sep = minimal_separator(g, comp, r, b)
                if emit(SeparatorCut(r, "single", r, b, frozenset(sep), q)):
                    return cuts
        else:
            for c1, c2 in combinations(rest, 2):
                a, b = _smallest(c1), _smallest(c2)
                sep = minimal_separator(g, c2, a, b)
                if emit(SeparatorCut(r, "pair", a, b, frozenset(sep), q)):
                    return cuts
    return cuts


def separate(g: Graph, x: np.ndarray, q: int, settings=None) -> list:
    """Separation on an assignment matrix ``x`` (rows are roots).

    ``settings`` supplies ``root_resilience`` and ``cut_mode``; defaults are
    root-resilience on and all cuts.
    """
    x = np.asarray(x)
    check_assignment(x)
    roots = np.flatnonzero(np.diag(x))
    parts = {int(r): set(np.flatnonzero(x[r]).tolist()) for r in roots}
    rr = True if settings is None else settings.root_resilience
    mode = "all" if settings is None else settings.cut_mode
    return separate_parts(g, parts, q, rr, mode)
