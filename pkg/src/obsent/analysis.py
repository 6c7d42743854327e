"""Eigenstate-ensemble entropy statistics, fits, and finite-size metrics.

The sweep driver diagonalizes once per phase realization and reuses the
eigenvectors for every requested block size and basis.  Entropies are
averaged over the selected eigenstates within each realization first, then
over realizations; the reported spread is the standard error across
realizations.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .entropy import uniform_block_entropy
from .model import (
    EigenSystem,
    ModelParams,
    build_hamiltonian,
    eigendecompose,
    kinetic_index_order,
    momentum_basis,
    to_momentum,
)
from .sampling import phase_sequence


@dataclass(frozen=True)
class SweepPoint:
    """Phase-averaged eigenstate entropy at one (L, delta, m, basis) point."""

    L: int
    delta: float
    m: int
    basis_tag: str
    mean_S: float
    stderr_S: float


@dataclass
class SweepResult:
    """A batch of sweep points sharing the sampling configuration."""

    grid: list[tuple]
    mean_S: np.ndarray
    stderr_S: np.ndarray
    n_phi: int
    seed: int


@dataclass(frozen=True)
class FluctuationResult:
    """Relative spread of the entropy across system sizes."""

    delta: float
    m: int
    f: float
    L_set: tuple[int, ...]


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float

    def __iter__(self):
        return iter((self.slope, self.intercept, self.r_squared))


@dataclass(frozen=True)
class SizeScalingReport:
    """Per-size mean entropies plus the successive doubling differences."""

    delta: float
    m: int
    basis_tag: str
    L_values: tuple[int, ...]
    mean_S: np.ndarray
    stderr_S: np.ndarray
    diffs: np.ndarray  # mean_S[i+1] - mean_S[i]


def mid_spectrum_states(eig: EigenSystem, count: int = 10) -> list[np.ndarray]:
    """The ``count`` eigenstates with energies nearest zero.

    Ties in |E| are broken toward the lower eigenvalue index (stable
    sort), so the selection is deterministic.  States come back ordered by
    their position in the spectrum.
    """
    if count > eig.L:
        raise ValueError(f"count={count} exceeds the {eig.L} available states")
    order = np.argsort(np.abs(eig.energies), kind="stable")
    chosen = np.sort(order[:count])
    return [eig.vectors[:, i] for i in chosen]


def _mid_spectrum_columns(eig: EigenSystem, count: int) -> np.ndarray:
    order = np.argsort(np.abs(eig.energies), kind="stable")
    return eig.vectors[:, np.sort(order[:count])]


def resolve_mid_count(mid_count, L: int) -> int:
    """Turn a state-count spec into a concrete count for lattice size L.

    Accepts a positive integer, "all", or "L/<k>" for a mid-spectrum
    window proportional to the system size (at least 2 states).
    """
    if isinstance(mid_count, str):
        if mid_count == "all":
            return L
        match = re.fullmatch(r"L/(\d+)", mid_count)
        if match:
            return max(2, L // int(match.group(1)))
        raise ValueError(f"mid_count spec not understood: {mid_count!r}")
    count = int(mid_count)
    if count < 1:
        raise ValueError(f"mid_count must be >= 1, got {count}")
    return min(count, L)


def eigenstate_entropy_table(
    L: int,
    delta: float,
    m_list,
    basis_tags=("real",),
    *,
    n_phi: int = 100,
    seed: int = 0,
    mid_count=10,
    selector: str = "mid",
    bc: str = "open",
    alpha: float | None = None,
    momentum_order: str = "index",
):
    """Phase-averaged eigenstate entropies for several (m, basis) at once.

    Returns ``{(m, basis_tag): (mean, stderr)}``.  ``selector`` picks the
    states per realization: "mid" for the mid-spectrum window of
    ``mid_count`` states, "ground" for the lowest-energy state.
    """
    if selector not in ("mid", "ground"):
        raise ValueError(f"selector must be 'mid' or 'ground', got {selector!r}")
    kwargs = {} if alpha is None else {"alpha": alpha}
    params = ModelParams(L=L, delta=delta, bc=bc, **kwargs)
    count = 1 if selector == "ground" else resolve_mid_count(mid_count, L)
    phases = phase_sequence(seed, L, delta, n_phi)
    basis = momentum_basis(L) if "momentum" in basis_tags else None
    perm = kinetic_index_order(L) if momentum_order == "kinetic" else None
    samples = {(m, b): np.empty(n_phi) for m in m_list for b in basis_tags}
    for r, phi in enumerate(phases):
        eig = eigendecompose(build_hamiltonian(params.with_phase(phi)))
        cols = eig.vectors[:, :1] if selector == "ground" else _mid_spectrum_columns(eig, count)
        stacks = {}
        if "real" in basis_tags:
            stacks["real"] = cols
        if basis is not None:
            k_cols = to_momentum(cols, basis)
            stacks["momentum"] = k_cols[perm, :] if perm is not None else k_cols
        for b, stack in stacks.items():
            amp2 = (np.abs(stack) ** 2).T  # (count, L)
            for m in m_list:
                samples[(m, b)][r] = uniform_block_entropy(amp2, m).mean()
    out = {}
    for key, vals in samples.items():
        stderr = vals.std(ddof=1) / math.sqrt(n_phi) if n_phi > 1 else 0.0
        out[key] = (float(vals.mean()), float(stderr))
    return out


def phase_averaged_eigen_entropy(
    L: int,
    delta: float,
    m: int,
    basis_tag: str = "real",
    n_phi: int = 100,
    seed: int = 0,
    count=10,
    **kwargs,
) -> SweepPoint:
    """One phase-averaged mid-spectrum entropy value (see the table driver
    for the knobs; ``selector="ground"`` switches to the ground state)."""
    table = eigenstate_entropy_table(
        L, delta, [m], (basis_tag,), n_phi=n_phi, seed=seed, mid_count=count, **kwargs
    )
    mean, stderr = table[(m, basis_tag)]
    return SweepPoint(L=L, delta=delta, m=m, basis_tag=basis_tag, mean_S=mean, stderr_S=stderr)


def normalized_fluctuation(values_by_L) -> float:
    """Relative population spread sqrt(<S^2> - <S>^2) / <S> across sizes.

    Zero means the per-size values coincide (perfect data collapse); the
    value is invariant under rescaling all inputs by a positive constant.
    """
    v = np.asarray(values_by_L, dtype=float)
    if v.size < 2:
        raise ValueError("need at least two per-size values")
    mean = v.mean()
    if mean <= 0.0:
        raise ValueError(f"mean must be positive, got {mean}")
    return float(np.sqrt(np.maximum((v**2).mean() - mean**2, 0.0)) / mean)


def fit_log_slope(times, entropies, window) -> FitResult:
    """Ordinary least squares of S against ln t inside [t_lo, t_hi]."""
    times = np.asarray(times, dtype=float)
    entropies = np.asarray(entropies, dtype=float)
    t_lo, t_hi = window
    mask = (times >= t_lo) & (times <= t_hi)
    if mask.sum() < 5:
        raise ValueError(f"only {int(mask.sum())} points inside window [{t_lo}, {t_hi}]; need >= 5")
    if np.any(times[mask] <= 0.0):
        raise ValueError("times inside the fit window must be positive")
    x = np.log(times[mask])
    y = entropies[mask]
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = ((y - y.mean()) ** 2).sum()
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - (resid**2).sum() / ss_tot
    return FitResult(slope=float(slope), intercept=float(intercept), r_squared=float(r_squared))


def size_scaling_report(
    delta: float,
    m: int,
    basis_tag: str,
    L_list,
    n_phi: int = 100,
    seed: int = 0,
    *,
    mid_count="L/8",
    bc: str = "open",
    momentum_order: str = "index",
) -> SizeScalingReport:
    """Entropy against system size with successive doubling differences.

    Size comparisons default to a mid-spectrum window proportional to L
    (``"L/8"``) so the state ensembles stay comparable across sizes; a
    fixed count samples an ever narrower energy shell as L grows and
    contaminates the size dependence.
    """
    L_values = tuple(int(L) for L in L_list)
    mean = np.empty(len(L_values))
    stderr = np.empty(len(L_values))
    for i, L in enumerate(L_values):
        table = eigenstate_entropy_table(
            L, delta, [m], (basis_tag,), n_phi=n_phi, seed=seed,
            mid_count=mid_count, bc=bc, momentum_order=momentum_order,
        )
        mean[i], stderr[i] = table[(m, basis_tag)]
    return SizeScalingReport(
        delta=delta, m=m, basis_tag=basis_tag, L_values=L_values,
        mean_S=mean, stderr_S=stderr, diffs=np.diff(mean),
    )


def fluctuation_table(
    delta_list,
    m_list,
    L_list,
    *,
    n_phi: int = 100,
    seed: int = 0,
    mid_count="L/8",
    bc: str = "open",
) -> list[FluctuationResult]:
    """Normalized fluctuation across sizes for every (delta, m) pair."""
    L_values = tuple(int(L) for L in L_list)
    results = []
    means: dict[tuple[float, int, int], float] = {}
    for delta in delta_list:
        for L in L_values:
            table = eigenstate_entropy_table(
                L, float(delta), m_list, ("real",), n_phi=n_phi, seed=seed,
                mid_count=mid_count, bc=bc,
            )
            for m in m_list:
                means[(float(delta), m, L)] = table[(m, "real")][0]
        for m in m_list:
            f = normalized_fluctuation([means[(float(delta), m, L)] for L in L_values])
            results.append(FluctuationResult(delta=float(delta), m=m, f=f, L_set=L_values))
    return results
