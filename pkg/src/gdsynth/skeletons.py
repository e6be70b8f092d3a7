"""Skeleton generators.

Full connectivity uses a 1-factorization of the complete graph so every
pairing recurs as late as possible. Restricted hardware uses star, line or
arbitrary coupling-graph schedules with support-only dressing. Random
one-CNOT-per-layer skeletons serve the failure-rate statistics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .circuit import Dressing, Skeleton


def required_layers(n: int) -> int:
    """Smallest S-layer count ``L`` with ``(2L + 1) n >= 4^n - 1``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return -(-(4**n - 1 - n) // (2 * n))


def one_factorization(n: int) -> list[list[tuple[int, int]]]:
    """Partition the edges of ``K_n`` into ``n - 1`` perfect matchings (circle method).

    Pairs are ``(low, high)``; each matching and the list of matchings are
    sorted, so for ``n = 4`` the result is
    ``[[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]]``.
    """
    if n < 2 or n % 2:
        raise ValueError(
            f"one_factorization needs an even number of qubits >= 2, got {n}; "
            "use a constrained or cyclic generator for odd n"
        )
    m = n - 1
    rounds = []
    for r in range(m):
        pairs = [(r, n - 1)]
        for k in range(1, n // 2):
            pairs.append(((r + k) % m, (r - k) % m))
        rounds.append(sorted(tuple(sorted(p)) for p in pairs))
    return sorted(rounds)


def _cycle(matchings: list, cnot_layers: int) -> list:
    return [matchings[k % len(matchings)] for k in range(cnot_layers)]


def full_skeleton(n: int, layers: int | None = None) -> Skeleton:
    """Fully dressed skeleton cycling the 1-factorization of ``K_n``.

    ``layers`` counts S-layers (``layers - 1`` CNOT layers) and defaults to
    :func:`required_layers`. The lower qubit of each pair is the control.
    """
    if layers is None:
        layers = required_layers(n)
    if layers < 1:
        raise ValueError(f"layers must be >= 1, got {layers}")
    return Skeleton(n, _cycle(one_factorization(n), layers - 1), Dressing.FULL)


def star_skeleton(center: int, leaves: Iterable[int], cnot_layers: int) -> Skeleton:
    """One CNOT per layer from ``center`` (control) to the leaves in turn."""
    leaves = list(leaves)
    if not leaves:
        raise ValueError("star needs at least one leaf")
    n = max(center, *leaves) + 1
    layers = [[(center, leaves[k % len(leaves)])] for k in range(cnot_layers)]
    return Skeleton(n, layers, Dressing.SUPPORT)


def line_skeleton(n: int, cnot_layers: int) -> Skeleton:
    """Nearest-neighbour CNOTs alternating ``{(0,1),(2,3),..}`` and ``{(1,2),(3,4),..}``."""
    if n < 2:
        raise ValueError(f"line needs n >= 2, got {n}")
    odd = [(q, q + 1) for q in range(0, n - 1, 2)]
    even = [(q, q + 1) for q in range(1, n - 1, 2)]
    matchings = [odd, even] if even else [odd]
    return Skeleton(n, _cycle(matchings, cnot_layers), Dressing.SUPPORT)


def cyclic_skeleton(n: int, cnot_layers: int) -> Skeleton:
    """One CNOT per layer, cycling through all ``n(n-1)/2`` pairs.

    The pair order walks the round-robin schedule (with a bye for odd ``n``),
    so consecutive CNOTs never repeat a pair. Works for any ``n >= 2``.
    """
    if n < 2:
        raise ValueError(f"cyclic skeleton needs n >= 2, got {n}")
    order = [p for m in one_factorization(n + n % 2) for p in m if max(p) < n]
    return Skeleton(n, [[order[k % len(order)]] for k in range(cnot_layers)], Dressing.SUPPORT)


def sequential_random_skeleton(n: int, n_cnots: int, rng: np.random.Generator) -> Skeleton:
    """``n_cnots`` layers of a single CNOT on a uniformly random unordered pair."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    idx = rng.integers(0, len(pairs), size=n_cnots)
    return Skeleton(n, [[pairs[i]] for i in idx], Dressing.SUPPORT)


def sequential_skeleton(n: int, pairs: Iterable[tuple[int, int]]) -> Skeleton:
    return Skeleton(n, [[tuple(p)] for p in pairs], Dressing.SUPPORT)


@dataclass(frozen=True)
class CouplingGraph:
    n_qubits: int
    edges: frozenset

    def __post_init__(self):
        edges = frozenset(tuple(sorted((int(a), int(b)))) for a, b in self.edges)
        for a, b in edges:
            if a == b:
                raise ValueError(f"self-loop on qubit {a}")
            if not (0 <= a < self.n_qubits and 0 <= b < self.n_qubits):
                raise ValueError(f"edge {(a, b)} out of range for {self.n_qubits} qubits")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_dict(cls, doc: dict) -> "CouplingGraph":
        return cls(int(doc["n_qubits"]), frozenset(tuple(e) for e in doc["edges"]))

    def matchings(self) -> list[list[tuple[int, int]]]:
        """Greedy proper edge colouring; each colour class is one CNOT layer."""
        classes: list[list[tuple[int, int]]] = []
        used: list[set[int]] = []
        for a, b in sorted(self.edges):
            for cls_, qs in zip(classes, used):
                if a not in qs and b not in qs:
                    cls_.append((a, b))
                    qs.update((a, b))
                    break
            else:
                classes.append([(a, b)])
                used.append({a, b})
        return classes


def graph_skeleton(graph: CouplingGraph, cnot_layers: int) -> Skeleton:
    matchings = graph.matchings()
    if not matchings:
        raise ValueError("coupling graph has no edges")
    return Skeleton(graph.n_qubits, _cycle(matchings, cnot_layers), Dressing.SUPPORT)


def required_layers_constrained(
    generator: Callable[[int], Skeleton],
    n: int,
    start: int = 0,
    max_layers: int = 10_000,
    **report_kwargs,
) -> int:
    """Smallest CNOT-layer count for which ``generator(depth)`` has full effective rank.

    Effective parameters are counted numerically (see
    :func:`gdsynth.params.effective_parameters_numeric`); the scan skips ahead
    by the parameter deficit divided by the most a single layer can add.
    """
    from .params import effective_parameters_numeric

    required = 4**n - 1
    report_kwargs.setdefault("method", "tangent")
    depth = start
    while depth <= max_layers:
        s = generator(depth)
        report = effective_parameters_numeric(s, **report_kwargs)
        if report.effective >= required:
            # step back one layer at a time in case the skip overshot
            while depth > start:
                prev = effective_parameters_numeric(generator(depth - 1), **report_kwargs)
                if prev.effective < required:
                    break
                depth -= 1
            return depth
        per_layer = 3 * max(1, max((len(layer) for layer in s.s_layers[1:-1]), default=n))
        depth += max(1, math.floor((required - report.effective) / per_layer))
    raise ValueError(f"no adequate depth found up to {max_layers} layers")
