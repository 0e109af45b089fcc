"""Exact total detection probability and the bright/dark decomposition.

The bright space of a detection state |d> is the span of H^k|d>; a state is
eventually detected with probability equal to its squared projection onto
that space. Two independent routes to that number live here: the per-level
spectral formula (``exact_pdet``) and an orthonormal Krylov basis
(``krylov_bright_basis`` + ``bright_fraction``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import Hamiltonian, State, fix_phase
from .spectral import EnergyLevel, SpectralDecomposition

EPS_BRIGHT = 1e-10
EPS_RANK = 1e-9


@dataclass(frozen=True, eq=False)
class BrightDarkSplit:
    bright: tuple[State, ...]
    bright_energies: tuple[float, ...]
    dark: tuple[State, ...]

    @property
    def w(self) -> int:
        return len(self.bright)


@dataclass(frozen=True)
class ExactResult:
    value: float
    raw: float
    contributions: dict[float, float] = field(default_factory=dict)


def _check_dims(decomp: SpectralDecomposition, *states: State) -> None:
    for s in states:
        if s.dim != decomp.dim:
            raise ValueError(f"state dimension {s.dim} does not match Hamiltonian dimension {decomp.dim}")


def exact_pdet_details(
    decomp: SpectralDecomposition, d: State, psi_in: State, eps_bright: float = EPS_BRIGHT
) -> ExactResult:
    _check_dims(decomp, d, psi_in)
    total = 0.0
    contrib = {}
    for lv in decomp.levels:
        dv = lv.vectors.conj().T @ d.amplitudes  # <E_lm|d>
        pv = lv.vectors.conj().T @ psi_in.amplitudes  # <E_lm|psi>
        den = float(np.sum(np.abs(dv) ** 2))
        if den < eps_bright:
            continue
        num = abs(np.vdot(dv, pv)) ** 2
        contrib[lv.energy] = num / den
        total += num / den
    return ExactResult(min(max(total, 0.0), 1.0), total, contrib)


def exact_pdet(
    decomp: SpectralDecomposition, d: State, psi_in: State, eps_bright: float = EPS_BRIGHT
) -> float:
    """Total detection probability from the spectral formula.

    Each level with non-vanishing weight on |d> contributes
    |sum_m <d|E_lm><E_lm|psi>|^2 / sum_m |<d|E_lm>|^2. Levels whose
    denominator falls below ``eps_bright`` are skipped. Clamped to [0, 1];
    see ``exact_pdet_details`` for the raw sum.
    """
    return exact_pdet_details(decomp, d, psi_in, eps_bright).value


def _level_split(lv: EnergyLevel, d: State, eps_bright: float):
    dv = lv.vectors.conj().T @ d.amplitudes
    weight = float(np.sum(np.abs(dv) ** 2))
    if weight < eps_bright:
        return None, [fix_phase(v) for v in lv.vectors.T]
    bright = fix_phase(lv.vectors @ dv / np.sqrt(weight))
    dark = []
    for v in lv.vectors.T:
        if len(dark) == lv.degeneracy - 1:
            break
        w = np.array(v, dtype=complex)
        for _ in range(2):
            w -= bright * np.vdot(bright, w)
            for b in dark:
                w -= b * np.vdot(b, w)
        n = np.linalg.norm(w)
        if n > 1e-6:
            dark.append(fix_phase(w / n))
    return bright, dark


def bright_dark_split(
    decomp: SpectralDecomposition, d: State, eps_bright: float = EPS_BRIGHT
) -> BrightDarkSplit:
    """One bright state per level that overlaps |d>, the rest of each level dark."""
    _check_dims(decomp, d)
    labels = d.labels
    bright, energies, dark = [], [], []
    for lv in decomp.levels:
        b, ds = _level_split(lv, d, eps_bright)
        if b is not None:
            bright.append(State(b, labels))
            energies.append(lv.energy)
        dark.extend(State(v, labels) for v in ds)
    return BrightDarkSplit(tuple(bright), tuple(energies), tuple(dark))


def degenerate_dark_state(level: EnergyLevel, d: State) -> State:
    """Dark state N(<d|E>|E'> - <d|E'>|E>) from the first two vectors of a degenerate level."""
    if level.degeneracy < 2:
        raise ValueError("level must be degenerate")
    e1, e2 = level.vectors[:, 0], level.vectors[:, 1]
    a1, a2 = np.vdot(d.amplitudes, e1), np.vdot(d.amplitudes, e2)
    if abs(a1) < 1e-14 and abs(a2) < 1e-14:
        return State(fix_phase(e1), d.labels)
    v = a1 * e2 - a2 * e1
    return State(fix_phase(v / np.linalg.norm(v)), d.labels)


def krylov_bright_basis(h: Hamiltonian, d: State, eps_rank: float = EPS_RANK) -> list[State]:
    """Orthonormal basis of span{H^k |d>} by Gram-Schmidt.

    Each new direction is H applied to the latest basis vector, orthogonalized
    twice against the whole basis. Stops when the residual is below
    ``eps_rank`` relative to the norm before orthogonalization.
    """
    m = h.matrix
    basis = [d.amplitudes / np.linalg.norm(d.amplitudes)]
    while len(basis) < h.dim:
        w = m @ basis[-1]
        n0 = np.linalg.norm(w)
        if n0 == 0:
            break
        for _ in range(2):
            for b in basis:
                w = w - b * np.vdot(b, w)
        n = np.linalg.norm(w)
        if n < eps_rank * n0:
            break
        basis.append(w / n)
    return [State(fix_phase(b), d.labels) for b in basis]


def bright_fraction(basis, psi: State) -> float:
    """Sum of squared overlaps of psi with an orthonormal set of bright states."""
    if not basis:
        return 0.0
    mat = np.column_stack([b.amplitudes for b in basis])
    return float(np.sum(np.abs(mat.conj().T @ psi.amplitudes) ** 2))


def brightness_certificate(h: Hamiltonian, d: State, psi: State) -> float:
    """Weight of psi inside the bright space of d (1 = bright, 0 = dark)."""
    return min(bright_fraction(krylov_bright_basis(h, d), psi) / psi.norm() ** 2, 1.0)
