"""Repeated stroboscopic detection: amplitude recursion and Monte Carlo trajectories."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .graphs import State
from .spectral import Unitary, exceptional_pairs

TRIAL_BLOCK = 4096


@dataclass(frozen=True, eq=False)
class DetectionRecord:
    phis: np.ndarray
    survival: np.ndarray  # |chi|^2 after the n-th failed attempt
    tau: float
    exceptional: bool = False
    exceptional_pairs: tuple[tuple[int, int], ...] = ()

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.phis) ** 2

    @property
    def partial_sums(self) -> np.ndarray:
        return np.cumsum(self.probabilities)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "re_phi", "im_phi", "p_n", "S_n"])
        for n, (phi, p, s) in enumerate(zip(self.phis, self.probabilities, self.partial_sums), 1):
            w.writerow([n, f"{phi.real:.17g}", f"{phi.imag:.17g}", f"{p:.17g}", f"{s:.17g}"])
        return buf.getvalue()


@dataclass(frozen=True)
class DetectionStats:
    curve: np.ndarray
    final: float
    undetected: float  # norm still in play; not an estimate of the tail


@dataclass(frozen=True)
class TrajectoryEstimate:
    fraction: float
    trials: int
    n_max: int
    seed: int

    @property
    def stderr(self) -> float:
        f = self.fraction
        return math.sqrt(f * (1 - f) / self.trials)

    def to_dict(self) -> dict:
        return {
            "detected_fraction": self.fraction,
            "trials": self.trials,
            "n_max": self.n_max,
            "stderr": self.stderr,
            "seed": self.seed,
        }


def first_detection_amplitudes(
    u: Unitary, d: State, psi_in: State, n_max: int, eps_res: float = 1e-8
) -> DetectionRecord:
    """phi_n = <d| U [(1 - |d><d|) U]^(n-1) |psi_in> for n = 1..n_max.

    The unnormalized post-measurement vector is carried along, so |phi_n|^2 is
    the unconditional probability of a first click at attempt n.
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    pairs = () if u.energies is None else tuple(exceptional_pairs(u.energies, u.tau, eps_res))
    dv = d.amplitudes
    phis = np.empty(n_max, dtype=complex)
    survival = np.empty(n_max)
    chi = u.matrix @ psi_in.amplitudes
    for n in range(n_max):
        phi = np.vdot(dv, chi)
        phis[n] = phi
        chi = chi - phi * dv
        survival[n] = np.vdot(chi, chi).real
        chi = u.matrix @ chi
    return DetectionRecord(phis, survival, u.tau, bool(pairs), pairs)


def detection_statistics(record: DetectionRecord) -> DetectionStats:
    curve = record.partial_sums
    if curve.size == 0:
        return DetectionStats(curve, 0.0, 1.0)
    return DetectionStats(curve, float(curve[-1]), float(record.survival[-1]))


def sample_trajectories(
    u: Unitary, d: State, psi_in: State, n_max: int, trials: int, seed: int
) -> TrajectoryEstimate:
    """Monte Carlo of the collapse protocol.

    Each attempt clicks with probability |<d|chi>|^2/|chi|^2; a miss projects
    out |d> and renormalizes. The no-click branch is deterministic, so all
    running trials share one state vector and differ only in their draws.
    Trials run in fixed blocks of ``TRIAL_BLOCK`` with generator
    ``default_rng([seed, block])`` (PCG64 over a SeedSequence), so the outcome
    of trial i depends only on (seed, i).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    dv = d.amplitudes
    chi = psi_in.amplitudes / np.linalg.norm(psi_in.amplitudes)
    n_blocks = -(-trials // TRIAL_BLOCK)
    rngs = [np.random.default_rng([seed, b]) for b in range(n_blocks)]
    ids = np.arange(trials)  # trials still running; trial i belongs to block i // TRIAL_BLOCK
    live = range(n_blocks)
    draws = np.zeros(n_blocks * TRIAL_BLOCK)
    for _ in range(n_max):
        if ids.size == 0:
            break
        # every live block draws a full TRIAL_BLOCK per step, so the stream a
        # trial sees does not depend on how many trials share its block
        for b in live:
            draws[b * TRIAL_BLOCK : (b + 1) * TRIAL_BLOCK] = rngs[b].random(TRIAL_BLOCK)
        chi = u.matrix @ chi
        amp = np.vdot(dv, chi)
        p = abs(amp) ** 2 / np.vdot(chi, chi).real
        miss = draws[ids] >= p
        if not miss.all():
            ids = ids[miss]
            live = np.unique(ids // TRIAL_BLOCK)
        chi = chi - amp * dv
        norm = np.linalg.norm(chi)
        if norm == 0:
            # the state was all |d>: every remaining trial has clicked
            ids = ids[:0]
            break
        chi = chi / norm
    return TrajectoryEstimate((trials - ids.size) / trials, trials, n_max, seed)
