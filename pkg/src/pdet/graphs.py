"""Hamiltonians for graph families, states over node labels, and walk counting."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

FAMILIES = ("ring", "hypercube", "path", "complete", "star", "binary-tree", "custom")

# family -> name of its size parameter in the graph file format
SIZE_KEYS = {
    "ring": "L",
    "hypercube": "B",
    "path": "L",
    "complete": "L",
    "star": "L",
    "binary-tree": "depth",
}


class GraphError(ValueError):
    """Malformed graph description."""


class DarkDisconnected(ValueError):
    """No power of H connects the two states."""


@dataclass(frozen=True)
class GraphSpec:
    family: str
    size: int | None = None
    nodes: tuple[str, ...] | None = None
    edges: tuple[tuple[int, int, float], ...] | None = None
    onsite: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise GraphError(f"unknown graph family {self.family!r}")
        if self.family == "custom":
            if self.nodes is None or self.edges is None:
                raise GraphError("custom graph needs nodes and edges")
            n = len(self.nodes)
            if n == 0:
                raise GraphError("custom graph has no nodes")
            if len(set(self.nodes)) != n:
                raise GraphError("duplicate node labels")
            seen = set()
            for i, j, w in self.edges:
                if not (0 <= i < n and 0 <= j < n):
                    raise GraphError(f"edge ({i}, {j}) out of range for {n} nodes")
                if i == j:
                    raise GraphError(f"self-loop on node {i}; use onsite energies instead")
                key = (min(i, j), max(i, j))
                if key in seen:
                    raise GraphError(f"duplicate edge {key}")
                seen.add(key)
                if not np.isfinite(w) or isinstance(w, complex):
                    raise GraphError("edge weights must be finite reals")
            if self.onsite is not None and len(self.onsite) != n:
                raise GraphError("onsite length does not match node count")
        else:
            if self.size is None:
                raise GraphError(f"{self.family} needs size parameter {SIZE_KEYS[self.family]}")
            minimum = {"ring": 3, "hypercube": 1, "path": 1, "complete": 1, "star": 1, "binary-tree": 0}
            if int(self.size) != self.size or self.size < minimum[self.family]:
                raise GraphError(
                    f"{self.family} {SIZE_KEYS[self.family]} must be an integer >= {minimum[self.family]}"
                )

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "GraphSpec":
        if "family" in doc and doc["family"] != "custom":
            family = doc["family"]
            if family not in SIZE_KEYS:
                raise GraphError(f"unknown graph family {family!r}")
            key = SIZE_KEYS[family]
            if key not in doc:
                raise GraphError(f"{family} needs parameter {key!r}")
            return cls(family=family, size=doc[key])
        if "nodes" not in doc or "edges" not in doc:
            raise GraphError("graph document needs 'family' or 'nodes' and 'edges'")
        try:
            edges = tuple((int(i), int(j), float(w)) for i, j, w in doc["edges"])
        except (TypeError, ValueError) as exc:
            raise GraphError(f"bad edge list: {exc}") from None
        onsite = doc.get("onsite")
        return cls(
            family="custom",
            nodes=tuple(str(x) for x in doc["nodes"]),
            edges=edges,
            onsite=None if onsite is None else tuple(float(x) for x in onsite),
        )

    def to_dict(self) -> dict[str, Any]:
        if self.family != "custom":
            return {"family": self.family, SIZE_KEYS[self.family]: self.size}
        doc: dict[str, Any] = {
            "nodes": list(self.nodes),
            "edges": [[i, j, w] for i, j, w in self.edges],
        }
        if self.onsite is not None:
            doc["onsite"] = list(self.onsite)
        return doc


def load_graph(path) -> GraphSpec:
    with open(path) as fh:
        return GraphSpec.from_dict(json.load(fh))


def dump_graph(spec: GraphSpec, path) -> None:
    with open(path, "w") as fh:
        json.dump(spec.to_dict(), fh)


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    matrix: np.ndarray
    labels: tuple[str, ...]
    integral: bool = False  # integer entries: walk counts computed exactly

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise GraphError("Hamiltonian must be a square matrix")
        if m.shape[0] != len(self.labels):
            raise GraphError("label count does not match dimension")
        if not np.array_equal(m, m.conj().T):
            raise GraphError("Hamiltonian is not Hermitian")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def index(self, label) -> int:
        """Position of a node given by label string or integer index."""
        if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
            if not 0 <= label < self.dim:
                raise GraphError(f"node index {label} out of range")
            return int(label)
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise GraphError(f"unknown node label {label!r}") from None

    def norm_bound(self) -> float:
        """Upper bound on the spectral norm (max absolute row sum)."""
        return float(np.abs(self.matrix).sum(axis=1).max())

    def is_adjacency(self) -> bool:
        """True for a plain 0/1 adjacency matrix with empty diagonal."""
        m = self.matrix
        return bool(np.all(np.diag(m) == 0) and np.all((m == 0) | (m == 1)))

    def is_bipartite(self) -> bool:
        if np.any(np.diag(self.matrix) != 0):
            return False
        adj = self.matrix != 0
        color = -np.ones(self.dim, dtype=int)
        for start in range(self.dim):
            if color[start] >= 0:
                continue
            color[start] = 0
            stack = [start]
            while stack:
                i = stack.pop()
                for j in np.flatnonzero(adj[i]):
                    if color[j] < 0:
                        color[j] = 1 - color[i]
                        stack.append(j)
                    elif color[j] == color[i]:
                        return False
        return True


@dataclass(frozen=True, eq=False)
class State:
    amplitudes: np.ndarray
    labels: tuple[str, ...] = field(default=(), repr=False)

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex)
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def overlap(self, other: "State") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def fix_phase(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate v so its first non-negligible component is real positive."""
    v = np.asarray(v, dtype=complex)
    scale = np.abs(v).max() if v.size else 0.0
    if scale == 0:
        return v
    k = int(np.flatnonzero(np.abs(v) > tol * scale)[0])
    return v * (abs(v[k]) / v[k])


def normalized_state(h: Hamiltonian, vector, *, phase: bool = True) -> State:
    v = np.asarray(vector, dtype=complex)
    if v.shape != (h.dim,):
        raise GraphError(f"state has shape {v.shape}, expected ({h.dim},)")
    n = np.linalg.norm(v)
    if n == 0:
        raise GraphError("cannot normalize the zero vector")
    v = v / n
    return State(fix_phase(v) if phase else v, h.labels)


def _ring(n):
    edges = [(i, (i + 1) % n) for i in range(n)]
    return [str(i) for i in range(n)], edges


def _hypercube(bits):
    labels = ["".join(p) for p in itertools.product("01", repeat=bits)]
    index = {lab: i for i, lab in enumerate(labels)}
    edges = []
    for lab in labels:
        for b in range(bits):
            flipped = lab[:b] + ("1" if lab[b] == "0" else "0") + lab[b + 1 :]
            if index[lab] < index[flipped]:
                edges.append((index[lab], index[flipped]))
    return labels, edges


def _binary_tree(depth):
    n = 2 ** (depth + 1) - 1
    edges = [((i - 1) // 2, i) for i in range(1, n)]
    return [str(i) for i in range(n)], edges


def build_hamiltonian(spec: GraphSpec) -> Hamiltonian:
    """Adjacency-matrix Hamiltonian (plus on-site energies for custom graphs).

    Named families have unit hopping and zero on-site energy. Hypercube labels
    are the lexicographically ordered B-bit strings.
    """
    fam = spec.family
    if fam == "custom":
        n = len(spec.nodes)
        m = np.zeros((n, n))
        for i, j, w in spec.edges:
            m[i, j] = m[j, i] = w
        if spec.onsite is not None:
            m[np.diag_indices(n)] = spec.onsite
        integral = np.all(m == np.round(m))
        return Hamiltonian(m, tuple(spec.nodes), integral=bool(integral))

    n = spec.size
    if fam == "ring":
        labels, edges = _ring(n)
    elif fam == "hypercube":
        labels, edges = _hypercube(n)
    elif fam == "path":
        labels, edges = [str(i) for i in range(n)], [(i, i + 1) for i in range(n - 1)]
    elif fam == "complete":
        labels = [str(i) for i in range(n)]
        edges = list(itertools.combinations(range(n), 2))
    elif fam == "star":
        labels, edges = [str(i) for i in range(n)], [(0, i) for i in range(1, n)]
    else:
        labels, edges = _binary_tree(n)
    m = np.zeros((len(labels), len(labels)))
    for i, j in edges:
        m[i, j] = m[j, i] = 1.0
    return Hamiltonian(m, tuple(labels), integral=True)


def add_disorder(h: Hamiltonian, seed: int, strength: float) -> Hamiltonian:
    """Add i.i.d. uniform on-site energies drawn from [-strength, strength]."""
    if strength < 0:
        raise ValueError("disorder strength must be non-negative")
    if strength == 0:
        return h
    rng = np.random.default_rng(seed)
    m = np.array(h.matrix)
    m[np.diag_indices(h.dim)] += rng.uniform(-strength, strength, h.dim)
    return Hamiltonian(m, h.labels, integral=False)


def make_state(h: Hamiltonian, which) -> State:
    """Build a normalized state.

    ``which`` may be a node label or index (localized state), an iterable of
    ``(label, amplitude)`` pairs, the string ``"uniform"`` (all nodes), or a
    dict ``{"uniform": [labels...]}``.
    """
    v = np.zeros(h.dim, dtype=complex)
    if isinstance(which, str) and which == "uniform":
        v[:] = 1.0
    elif isinstance(which, dict) and "uniform" in which:
        for lab in which["uniform"]:
            v[h.index(lab)] = 1.0
    elif isinstance(which, (str, int, np.integer)):
        v[h.index(which)] = 1.0
    else:
        for lab, amp in which:
            v[h.index(lab)] += complex(amp)
        if not np.any(v):
            raise GraphError("all amplitudes are zero")
    return normalized_state(h, v, phase=False)


def basis_state(h: Hamiltonian, label) -> State:
    v = np.zeros(h.dim, dtype=complex)
    v[h.index(label)] = 1.0
    return State(v, h.labels)


def _exact_matrix(h: Hamiltonian, s: int):
    """Integer matrix for exact walk counts, or None when float is needed."""
    if not h.integral:
        return None
    m = h.matrix.real.astype(np.int64)
    growth = max(h.norm_bound(), 1.0) ** s
    if growth < 2.0**62:
        return m
    return m.astype(object)


def walk_count(h: Hamiltonian, s: int, a, b):
    """<b|H^s|a>: the number of length-s walks a -> b on an unweighted graph."""
    if s < 0:
        raise ValueError("walk length must be non-negative")
    ia, ib = h.index(a), h.index(b)
    m = _exact_matrix(h, s)
    if m is None:
        m = h.matrix
    v = np.zeros(h.dim, dtype=m.dtype)
    v[ia] = 1
    for _ in range(s):
        v = m.dot(v)
    out = v[ib]
    if m.dtype == object or np.issubdtype(m.dtype, np.integer):
        return int(out)
    return out.item()


def scaled_powers(h: Hamiltonian, v: np.ndarray, count: int) -> Iterable[np.ndarray]:
    """Yield H^k v / bound^k for k = 0..count-1, bound = norm_bound(h)."""
    bound = h.norm_bound() or 1.0
    w = np.asarray(v, dtype=complex)
    for _ in range(count):
        yield w
        w = h.matrix.dot(w) / bound


def distance(h: Hamiltonian, psi: State, d: State, rel_zero: float = 1e-10) -> int:
    """Smallest s with <psi|H^s|d> nonzero.

    Powers are scaled by the spectral-norm bound so that the zero test
    |<psi|H^s|d>| > rel_zero * bound^s becomes a fixed threshold.
    """
    for s, w in enumerate(scaled_powers(h, d.amplitudes, h.dim)):
        if abs(np.vdot(psi.amplitudes, w)) > rel_zero:
            return s
    raise DarkDisconnected("state never overlaps H^s|d>: dark-disconnected")


def bfs_distances(h: Hamiltonian, source) -> dict[int, int]:
    """Graph distances from a node over nonzero off-diagonal entries."""
    start = h.index(source)
    dist = {start: 0}
    frontier = [start]
    adj = h.matrix != 0
    while frontier:
        nxt = []
        for i in frontier:
            for j in np.flatnonzero(adj[i]):
                if j not in dist:
                    dist[int(j)] = dist[i] + 1
                    nxt.append(int(j))
        frontier = nxt
    return dist


def nodes_at_distance(h: Hamiltonian, source, xi: int) -> list[str]:
    dist = bfs_distances(h, source)
    return sorted(h.labels[i] for i, k in dist.items() if k == xi)


def named_graph(family: str, size: int) -> Hamiltonian:
    return build_hamiltonian(GraphSpec(family=family, size=size))


def labels_to_indices(h: Hamiltonian, labels: Sequence) -> list[int]:
    return [h.index(x) for x in labels]
