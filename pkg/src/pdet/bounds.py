"""Lower and upper bounds on the total detection probability.

Lower bounds come from keeping only a few bright states in the overlap sum:
|d> together with (1 - |d><d|) H^s |d> (uncertainty / path counting), shell
states, or one of the two-seed strategies. The upper bound 1/nu counts the
basis states that produce the same detection amplitudes as the initial node.
None of these need the period tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .detection import EPS_RANK, brightness_certificate, exact_pdet
from .graphs import (
    Hamiltonian,
    State,
    basis_state,
    bfs_distances,
    distance,
    fix_phase,
    named_graph,
    walk_count,
)
from .spectral import SpectralDecomposition

EPS_VAR = 1e-12
EPS_EQ = 1e-9
STRATEGIES = ("reg", "alt", "opp", "opt")


class StrategyError(ValueError):
    """A strategy cannot produce a sound bound for this setup."""


@dataclass(frozen=True)
class Bound:
    value: float
    degenerate: bool = False
    note: str = ""


class Powers:
    """Lazily computed unit vectors along H^k v.

    Only directions are kept, so large k neither overflows nor loses the
    information that matters for the normalized seeds built from them.
    """

    def __init__(self, h: Hamiltonian, v: np.ndarray):
        self.m = h.matrix
        v = np.asarray(v, dtype=complex)
        self.dirs = [v / np.linalg.norm(v)]

    def __getitem__(self, k: int) -> np.ndarray:
        while len(self.dirs) <= k:
            w = self.m @ self.dirs[-1]
            n = np.linalg.norm(w)
            self.dirs.append(w / n if n > 0 else w)
        return self.dirs[k]


def uncertainty_bound(
    h: Hamiltonian, d: State, psi_in: State, s: int, powers: Powers | None = None, eps_var: float = EPS_VAR
) -> Bound:
    """|<d|psi>|^2 + |<d|[H^s, D]|psi>|^2 / Var(H^s)_d.

    A variance below ``EPS_VAR`` (relative to |H^s d|^2) means |d> is an
    eigenvector of H^s; the bound then falls back to |<d|psi>|^2.
    """
    if s < 1:
        raise ValueError("s must be a positive integer")
    dv, pv = d.amplitudes, psi_in.amplitudes
    first = abs(np.vdot(dv, pv)) ** 2
    v = (powers or Powers(h, dv))[s]  # direction of H^s d; the ratio below is scale-free
    mean = np.vdot(dv, v)
    var = np.vdot(v, v).real - abs(mean) ** 2
    if var < eps_var:
        return Bound(first, True, "variance-degenerate")
    comm = np.vdot(v, pv) - mean.conjugate() * np.vdot(dv, pv)
    return Bound(first + abs(comm) ** 2 / var)


def uncertainty_residual(decomp: SpectralDecomposition, h: Hamiltonian, d: State, psi_in: State, s: int) -> float:
    """Delta P * Var(H^s)_d - |<d|[H^s, D]|psi>|^2, with Delta P from the exact formula."""
    hs = np.linalg.matrix_power(h.matrix, s)
    dv, pv = d.amplitudes, psi_in.amplitudes
    hsd = hs @ dv
    mean = np.vdot(dv, hsd)
    var = np.vdot(hsd, hsd).real - abs(mean) ** 2
    comm = np.vdot(dv, hs @ pv) - mean * np.vdot(dv, pv)
    delta_p = exact_pdet(decomp, d, psi_in) - abs(np.vdot(dv, pv)) ** 2
    return float(delta_p * var - abs(comm) ** 2)


def _path_count_fraction(h: Hamiltonian, ir: int, idd: int, s: int) -> Fraction | None:
    n_rd = walk_count(h, s, ir, idd)
    n_dd = walk_count(h, s, idd, idd)
    den = walk_count(h, 2 * s, idd, idd) - n_dd**2
    if den == 0:
        return None
    same = int(ir == idd)
    return same + Fraction((n_rd - n_dd * same) ** 2, den)


def path_count_bound(h: Hamiltonian, r, d, s: int) -> Bound:
    """Walk-count form of the uncertainty bound for localized |r>, |d>.

    N(r->d, s)^2 / (N(d->d, 2s) - N(d->d, s)^2), evaluated with exact integers.
    Gives 0 for s below the graph distance.
    """
    if s < 1:
        raise ValueError("s must be a positive integer")
    if not h.is_adjacency():
        raise ValueError("path counting needs an unweighted adjacency Hamiltonian")
    ir, idd = h.index(r), h.index(d)
    value = _path_count_fraction(h, ir, idd, s)
    if value is None:
        return Bound(float(ir == idd), True, "zero denominator")
    return Bound(float(value))


@dataclass(frozen=True)
class ClosedForm:
    lower: Fraction
    upper: Fraction
    exact: Fraction | None = None


def ring_closed_form(L: int, xi: int) -> ClosedForm:
    """Sandwich for a ring of even length L, start at distance xi from the detector."""
    if L % 2 or L < 4:
        raise ValueError("ring length must be even and >= 4")
    if not 1 <= xi <= L // 2:
        raise ValueError("need 1 <= xi <= L/2")
    if xi == L // 2:
        # opposite node: unique, so nu = 1; no closed form for the lower side
        return ClosedForm(_path_count_fraction(named_graph("ring", L), xi, 0, xi), Fraction(1))
    den = math.comb(2 * xi, xi)
    if xi % 2 == 0:
        den -= math.comb(xi, xi // 2) ** 2
    return ClosedForm(Fraction(1, den), Fraction(1, 2))


def double_factorial(n: int) -> int:
    """n!! with (-1)!! = 0!! = 1."""
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def hypercube_return_walks(B: int, s: int) -> int:
    """Closed walks of length s at a hypercube node: 2^-B sum_l C(B,l) (B-2l)^s."""
    if s < 0:
        raise ValueError("s must be non-negative")
    total = sum(math.comb(B, l) * (B - 2 * l) ** s for l in range(B + 1))
    q, rem = divmod(total, 2**B)
    assert rem == 0
    return q


def hypercube_asymptotic_return_walks(B: int, s: int) -> int:
    """Large-B form B^(s/2) (s-1)!! for even s, 0 for odd s."""
    return 0 if s % 2 else B ** (s // 2) * double_factorial(s - 1)


def hypercube_closed_form(B: int, xi: int) -> ClosedForm:
    if not 1 <= xi <= B:
        raise ValueError("need 1 <= xi <= B")
    den = double_factorial(2 * xi - 1)
    if xi % 2 == 0:
        den -= double_factorial(xi - 1) ** 2
    lower = Fraction(math.factorial(xi) ** 2, B**xi * den)
    exact = Fraction(1, math.comb(B, xi))
    return ClosedForm(lower, exact, exact)


@dataclass(frozen=True)
class EquivalenceClass:
    representative: str
    members: tuple[str, ...]
    tolerance: float

    @property
    def nu(self) -> int:
        return len(self.members)


def amplitude_signatures(h: Hamiltonian, d: State) -> np.ndarray:
    """Row k holds <d|H^k|r> / |H^k d| for every basis node r, k = 0..D-1.

    Two nodes with equal rows give equal <d|U(t)|r> for all t, since U(t) is
    a polynomial in H of degree below D.
    """
    p = Powers(h, d.amplitudes)
    return np.array([p[k].conj() for k in range(h.dim)])


def equivalent_states(
    h: Hamiltonian, d: State, r, eps_eq: float = EPS_EQ, signatures: np.ndarray | None = None
) -> EquivalenceClass:
    sig = amplitude_signatures(h, d) if signatures is None else signatures
    ir = h.index(r)
    diff = np.abs(sig - sig[:, [ir]]).max(axis=0)
    members = [h.labels[j] for j in np.flatnonzero(diff < eps_eq)]
    return EquivalenceClass(h.labels[ir], tuple(members), eps_eq)


@dataclass(frozen=True, eq=False)
class SymmetryBound:
    upper: float
    nu: int
    aus: State
    p_node: float
    p_aus: float

    @property
    def identity_residual(self) -> float:
        return abs(self.p_node - self.p_aus / self.nu)


def symmetry_bound(cls: EquivalenceClass, decomp: SpectralDecomposition, d: State) -> SymmetryBound:
    """1/nu from the auxiliary uniform state over an equivalence class.

    The identity P(r) = P(AUS)/nu is recomputed with the exact formula rather
    than assumed.
    """
    labels = d.labels
    idx = [labels.index(m) for m in cls.members]
    v = np.zeros(len(labels), dtype=complex)
    v[idx] = 1 / math.sqrt(cls.nu)
    aus = State(v, labels)
    r = np.zeros(len(labels), dtype=complex)
    r[labels.index(cls.representative)] = 1
    p_node = exact_pdet(decomp, d, State(r, labels))
    p_aus = exact_pdet(decomp, d, aus)
    return SymmetryBound(1 / cls.nu, cls.nu, aus, p_node, p_aus)


@dataclass(frozen=True, eq=False)
class ShellStates:
    states: tuple[State, ...]
    terminated: bool  # residual vanished before k_max


def shell_states(h: Hamiltonian, d: State, k_max: int, eps_rank: float = EPS_RANK) -> ShellStates:
    """Bright states concentrated on successive shells around |d>.

    Each new state is H applied to the previous one, orthogonalized against
    only the two states before it.
    """
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    out = [d.amplitudes / np.linalg.norm(d.amplitudes)]
    for _ in range(k_max):
        w = h.matrix @ out[-1]
        n0 = np.linalg.norm(w)
        for b in out[-2:]:
            w = w - b * np.vdot(b, w)
        n = np.linalg.norm(w)
        if n0 == 0 or n < eps_rank * n0:
            return ShellStates(tuple(State(fix_phase(v), d.labels) for v in out), True)
        out.append(w / n)
    return ShellStates(tuple(State(fix_phase(v), d.labels) for v in out), False)


def shell_bound(shells: ShellStates, psi_in: State, xi: int) -> float:
    if not 0 <= xi < len(shells.states):
        raise ValueError(f"shell {xi} not available (have {len(shells.states)})")
    return abs(shells.states[xi].overlap(psi_in)) ** 2


def two_seed_bound(seed1: np.ndarray, seed2: np.ndarray, psi: np.ndarray, eps_rank: float = EPS_RANK) -> Bound:
    """|<b1|psi>|^2 + |<b2|psi>|^2 with b2 the part of seed2 orthogonal to b1."""
    n1 = np.linalg.norm(seed1)
    if n1 == 0:
        raise StrategyError("first seed vanishes")
    b1 = seed1 / n1
    first = abs(np.vdot(b1, psi)) ** 2
    n0 = np.linalg.norm(seed2)
    w = seed2
    for _ in range(2):
        w = w - b1 * np.vdot(b1, w)
    n = np.linalg.norm(w)
    if n0 == 0 or n < eps_rank * n0:
        return Bound(first, True, "second seed inside span of first")
    return Bound(first + abs(np.vdot(w / n, psi)) ** 2)


def farthest_node(h: Hamiltonian, d: State) -> str:
    """Unique node at maximal graph distance from a localized |d>."""
    support = np.flatnonzero(np.abs(d.amplitudes) > 1e-12)
    if support.size != 1:
        raise StrategyError("opposite seed needs a localized detection state or an explicit r_B")
    dist = bfs_distances(h, int(support[0]))
    far = max(dist.values())
    nodes = [i for i, k in dist.items() if k == far]
    if len(nodes) != 1:
        raise StrategyError("farthest node is not unique; give r_B explicitly")
    return h.labels[nodes[0]]


@dataclass
class StrategyContext:
    """Cached power sequences shared by many strategy evaluations on one setup."""

    h: Hamiltonian
    d: State
    psi_in: State
    xi: int | None = None
    r_b: str | None = None
    _powers_d: Powers | None = field(default=None, repr=False)
    _powers_rb: Powers | None = field(default=None, repr=False)
    _rb_distance: int | None = field(default=None, repr=False)

    def powers_d(self) -> Powers:
        if self._powers_d is None:
            self._powers_d = Powers(self.h, self.d.amplitudes)
        return self._powers_d

    def distance(self) -> int:
        if self.xi is None:
            self.xi = distance(self.h, self.psi_in, self.d)
        return self.xi

    def opposite(self):
        if self._powers_rb is None:
            label = self.r_b if self.r_b is not None else farthest_node(self.h, self.d)
            rb = basis_state(self.h, label)
            cert = brightness_certificate(self.h, self.d, rb)
            if cert < 1 - 1e-9:
                raise StrategyError(f"seed {label!r} is not bright (certificate {cert:.3e})")
            self.r_b = label
            self._rb_distance = distance(self.h, rb, self.d)
            self._powers_rb = Powers(self.h, rb.amplitudes)
        return self._powers_rb, self._rb_distance


def strategy_bound(h: Hamiltonian, d: State, psi_in: State, strategy: str, ctx: StrategyContext | None = None, **params) -> Bound:
    """Two-seed lower bound.

    reg: d, (1-D) H^s d.  alt: H^xi d, H^(s+xi) d.  opp: r_B, H^(dist(r_B)-s) r_B,
    with r_B certified bright first.  opt: H^s1 d, H^s2 d.
    """
    ctx = ctx or StrategyContext(h, d, psi_in, xi=params.get("xi"), r_b=params.get("r_b"))
    psi = psi_in.amplitudes
    if strategy == "reg":
        p = ctx.powers_d()
        return two_seed_bound(p[0], p[params["s"]], psi)
    if strategy == "alt":
        p, xi = ctx.powers_d(), ctx.distance()
        return two_seed_bound(p[xi], p[params["s"] + xi], psi)
    if strategy == "opp":
        p, far = ctx.opposite()
        s = params["s"]
        if not 0 <= s <= far:
            raise ValueError(f"opp needs 0 <= s <= {far}")
        return two_seed_bound(p[0], p[far - s], psi)
    if strategy == "opt":
        p = ctx.powers_d()
        return two_seed_bound(p[params["s1"]], p[params["s2"]], psi)
    raise ValueError(f"unknown strategy {strategy!r}")
