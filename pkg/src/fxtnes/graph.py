"""Communication graph among players and its Laplacian."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import GraphError


@dataclass(frozen=True)
class CommGraph:
    """Undirected graph on vertices 0..n-1 with no self-loops."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise GraphError("graph needs at least one vertex")
        seen = set()
        normalized = []
        for e in self.edges:
            if len(e) != 2:
                raise GraphError(f"edge {e} is not a pair")
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise GraphError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise GraphError(f"edge ({i},{j}) out of range for n={self.n}")
            key = (min(i, j), max(i, j))
            if key in seen:
                continue
            seen.add(key)
            normalized.append(key)
        object.__setattr__(self, "edges", tuple(sorted(normalized)))

    def adjacency(self) -> np.ndarray:
        # integer arithmetic so row sums of L are exactly zero
        a = np.zeros((self.n, self.n), dtype=int)
        for i, j in self.edges:
            a[i, j] = 1
            a[j, i] = 1
        return a

    def laplacian(self) -> np.ndarray:
        """L = D - A, symmetric positive semidefinite, rows summing to 0."""
        a = self.adjacency()
        d = np.diag(a.sum(axis=1))
        return (d - a).astype(float)

    def neighbors(self, i: int) -> list[int]:
        return [j for j in range(self.n) if (min(i, j), max(i, j)) in set(self.edges) and j != i]

    def is_connected(self) -> bool:
        if self.n == 1:
            return True
        adj = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        seen = {0}
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == self.n


def complete_graph(n: int) -> CommGraph:
    edges = tuple((i, j) for i in range(n) for j in range(i + 1, n))
    return CommGraph(n=n, edges=edges)


def path_graph(n: int) -> CommGraph:
    return CommGraph(n=n, edges=tuple((i, i + 1) for i in range(n - 1)))


def require_connected(g: CommGraph) -> None:
    if not g.is_connected():
        raise GraphError(
            "communication graph must be connected (single component)"
        )


def consensus_matrix(g: CommGraph) -> np.ndarray:
    """kron(L, I_n) + B for the row-stacked estimator state.

    Index (i, j) of the n x n estimator matrix maps to flat index i*n + j.
    B is the diagonal indicator that selects the own-cost entries (i, i).
    """
    n = g.n
    lap = g.laplacian()
    b = np.zeros((n * n, n * n))
    for i in range(n):
        b[i * n + i, i * n + i] = 1.0
    return np.kron(lap, np.eye(n)) + b
