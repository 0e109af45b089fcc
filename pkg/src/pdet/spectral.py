"""Eigendecomposition grouped into degenerate levels, propagators, exceptional periods."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .graphs import Hamiltonian


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (off-diagonal residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True, eq=False)
class EnergyLevel:
    energy: float
    vectors: np.ndarray  # columns are orthonormal eigenvectors

    @property
    def degeneracy(self) -> int:
        return self.vectors.shape[1]

    def projector(self) -> np.ndarray:
        return self.vectors @ self.vectors.conj().T


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    levels: tuple[EnergyLevel, ...]
    tolerance: float
    complete: bool = True

    @property
    def dim(self) -> int:
        return sum(lv.degeneracy for lv in self.levels)

    @property
    def energies(self) -> np.ndarray:
        return np.array([lv.energy for lv in self.levels])

    @property
    def degeneracies(self) -> list[int]:
        return [lv.degeneracy for lv in self.levels]

    def eigenvectors(self) -> np.ndarray:
        """All eigenvectors as columns, level by level."""
        return np.hstack([lv.vectors for lv in self.levels])

    def reconstruct(self) -> np.ndarray:
        return sum(lv.energy * lv.projector() for lv in self.levels)

    def to_json(self) -> str:
        doc = {
            "tolerance": self.tolerance,
            "complete": self.complete,
            "levels": [
                {
                    "energy": lv.energy,
                    "degeneracy": lv.degeneracy,
                    "real": lv.vectors.real.T.tolist(),
                    "imag": lv.vectors.imag.T.tolist(),
                }
                for lv in self.levels
            ],
        }
        return json.dumps(doc)


def _orthonormalize(vectors: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Modified Gram-Schmidt with one re-orthogonalization pass, dropping dependent columns."""
    basis: list[np.ndarray] = []
    for v in vectors.T:
        w = np.array(v, dtype=complex)
        n0 = np.linalg.norm(w)
        for _ in range(2):
            for b in basis:
                w -= b * np.vdot(b, w)
        n = np.linalg.norm(w)
        if n0 > 0 and n > tol * n0:
            basis.append(w / n)
    if not basis:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    return np.column_stack(basis)


def group_levels(
    eigenvalues: np.ndarray, eigenvectors: np.ndarray, eps_deg: float | None = None
) -> SpectralDecomposition:
    """Merge adjacent eigenvalues closer than ``eps_deg`` into degenerate levels.

    Eigenpairs must be sorted ascending. A merged level's energy is the mean
    of its members and its vectors are re-orthonormalized.
    """
    vals = np.asarray(eigenvalues, dtype=float)
    vecs = np.asarray(eigenvectors, dtype=complex)
    if eps_deg is None:
        spread = float(vals[-1] - vals[0]) if vals.size else 0.0
        eps_deg = 1e-9 * spread if spread > 0 else 1e-9
    levels = []
    start = 0
    for k in range(1, len(vals) + 1):
        if k == len(vals) or vals[k] - vals[k - 1] >= eps_deg:
            block = vecs[:, start:k]
            if k - start > 1:
                block = _orthonormalize(block)
            levels.append(EnergyLevel(float(vals[start:k].mean()), block))
            start = k
    return SpectralDecomposition(tuple(levels), float(eps_deg))


def jacobi_eigh(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100):
    """Cyclic Jacobi eigensolver for a real symmetric matrix.

    Returns ascending eigenvalues and the orthogonal matrix of eigenvectors
    (columns). Ties are ordered by original diagonal position.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.abs(a).max(), 1e-300)
    mask = ~np.eye(n, dtype=bool)
    off = 0.0
    for _ in range(max_sweeps):
        # summed directly: total minus diagonal cancels below ~1e-8 relative
        off = float(np.sqrt((a[mask] ** 2).sum()))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps", off / scale)
    w = np.diag(a)
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def _jacobi_hermitian(m: np.ndarray, max_sweeps: int):
    if not np.iscomplexobj(m) or not np.any(m.imag):
        return jacobi_eigh(m.real, max_sweeps=max_sweeps)
    # [[Re, -Im], [Im, Re]] has every eigenvalue of m twice; each pair of
    # real eigenvectors (x, y) maps to the complex vector x + i y.
    n = m.shape[0]
    big = np.block([[m.real, -m.imag], [m.imag, m.real]])
    w2, v2 = jacobi_eigh(big, max_sweeps=max_sweeps)
    cvecs = v2[:n] + 1j * v2[n:]
    spread = float(w2[-1] - w2[0]) or 1.0
    vals, cols = [], []
    start = 0
    for k in range(1, 2 * n + 1):
        if k == 2 * n or w2[k] - w2[k - 1] >= 1e-9 * spread:
            block = _orthonormalize(cvecs[:, start:k], tol=1e-6)
            g = (k - start) // 2
            cols.append(block[:, :g])
            vals.extend([w2[start:k].mean()] * g)
            start = k
    return np.array(vals), np.hstack(cols)


def eigendecompose(
    h: Hamiltonian, eps_deg: float | None = None, method: str = "lapack", max_sweeps: int = 100
) -> SpectralDecomposition:
    """Full eigendecomposition of H grouped into degenerate levels.

    ``method="lapack"`` uses ``numpy.linalg.eigh``; ``method="jacobi"`` uses
    the cyclic Jacobi solver (slow, small matrices only).
    """
    m = h.matrix
    if method == "lapack":
        vals, vecs = np.linalg.eigh(m)
    elif method == "jacobi":
        vals, vecs = _jacobi_hermitian(m, max_sweeps)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    return group_levels(vals, vecs, eps_deg)


@dataclass(frozen=True, eq=False)
class Unitary:
    matrix: np.ndarray
    tau: float
    energies: tuple[float, ...] | None = None


def propagator(decomp: SpectralDecomposition, tau: float) -> Unitary:
    """U(tau) = sum_l exp(-i tau E_l) P_l."""
    vecs = decomp.eigenvectors()
    phases = np.concatenate(
        [np.full(lv.degeneracy, np.exp(-1j * tau * lv.energy)) for lv in decomp.levels]
    )
    u = (vecs * phases) @ vecs.conj().T
    return Unitary(u, float(tau), tuple(float(e) for e in decomp.energies))


def _circle_distance(x: float) -> float:
    r = math.fmod(abs(x), 2 * math.pi)
    return min(r, 2 * math.pi - r)


def exceptional_pairs(energies, tau: float, eps_res: float = 1e-8) -> list[tuple[int, int]]:
    e = list(energies)
    return [
        (i, j)
        for i in range(len(e))
        for j in range(i + 1, len(e))
        if _circle_distance((e[i] - e[j]) * tau) < eps_res
    ]


def is_exceptional_tau(decomp: SpectralDecomposition, tau: float, eps_res: float = 1e-8):
    """Flag periods with (E_l - E_l') tau = 0 mod 2 pi for some pair of levels.

    Returns ``(flag, pairs)`` where pairs are index pairs into ``decomp.levels``.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    pairs = exceptional_pairs(decomp.energies, tau, eps_res)
    return bool(pairs), pairs
