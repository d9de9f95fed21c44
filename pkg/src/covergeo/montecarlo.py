"""Uniform sampling from grid sets and empirical coverage probabilities.

Sampling uses a counter-based generator keyed by (seed, trial), so the i-th
point of trial t is a pure function of those integers: trials can run in any
order (or in parallel) and reproduce bit-exactly.

Coverage verdicts are exact at grid scale: a set is covered when every true
cell center lies within the probe radius of a sample's cell center, computed
by one distance transform from the rasterized samples per trial.  Because
rasterization can flatter the verdict by up to half a cell diagonal, every
report also carries the conservative verdict at the radius shrunk by that
amount.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CovergeoError, EmptySourceError
from .grid import GridSet, _edt_sq, _threshold_sq

__all__ = [
    "SampleSet",
    "TrialReport",
    "sample_uniform",
    "covers",
    "covered_fraction",
    "estimate_probability",
    "wilson_interval",
    "ladder_csv",
]

_GENERATOR_ID = "philox4x64/key=(seed,trial)"

# two-sided 95% normal quantile, frozen so reports never drift with library
# internals
_WILSON_Z = 1.959963984540054


@dataclass(frozen=True)
class SampleSet:
    """Points drawn uniformly from a grid set, with the keys that reproduce them."""

    points: np.ndarray  # (N, n) physical coordinates
    cells: np.ndarray  # (N, n) integer indices of the sampled cells
    seed: int
    trial: int
    generator: str = _GENERATOR_ID

    @property
    def n_points(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class TrialReport:
    """Aggregate of repeated coverage experiments at one sample count."""

    trials: int
    successes: int
    p_hat: float
    wilson_lo: float
    wilson_hi: float
    n_samples: int
    radius: float
    mode: str
    seed: int
    conservative_successes: int
    fractions: tuple[float, ...] = ()
    bound_value: float | None = None

    @property
    def sound(self) -> bool | None:
        """Wilson upper bound at least the claimed lower bound (if any)."""
        if self.bound_value is None:
            return None
        return self.wilson_hi >= self.bound_value - 1e-9


def _rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), trial]))


def sample_uniform(e: GridSet, n_samples: int, seed: int, trial: int = 0) -> SampleSet:
    """Draw points i.i.d. uniform over the set.

    A true cell is chosen uniformly (all cells share the measure h^n, so the
    uniform-cell draw is already measure-proportional), then a uniform offset
    inside the cell.  Deterministic given (seed, trial, n_samples, set).
    """
    if e.is_empty:
        raise EmptySourceError("cannot sample from an empty set")
    if n_samples < 1:
        raise CovergeoError(f"need at least one sample, got {n_samples}")
    cells_list = e.true_cells()
    rng = _rng(seed, trial)
    idx = rng.integers(0, len(cells_list), size=n_samples)
    cells = cells_list[idx]
    offsets = rng.random(size=(n_samples, e.ndim))
    origin = np.asarray(e.origin, dtype=np.float64)
    points = origin + (cells + offsets) * e.h
    return SampleSet(points=points, cells=cells, seed=seed, trial=trial)


def _sample_dsq(e: GridSet, s: SampleSet) -> np.ndarray:
    source = np.zeros(e.dims, dtype=bool)
    source[tuple(s.cells[:, ax] for ax in range(e.ndim))] = True
    return _edt_sq(source)


def covers(e: GridSet, s: SampleSet, r: float) -> tuple[bool, bool]:
    """(primary, conservative) verdicts for ball-union coverage of the set.

    Primary: every true cell center within r of a sample's cell center.
    Conservative: same with r shrunk by h*sqrt(n)/2, which dominates the
    worst case of the in-cell sample offset and the covered cell's extent.
    """
    if r <= 0:
        raise CovergeoError(f"coverage radius must be positive, got {r}")
    if s.n_points == 0:
        return False, False
    dsq = _sample_dsq(e, s)[e.mask]
    worst = float(dsq.max())
    primary = worst <= _threshold_sq(r, e.h)
    r_cons = r - e.h * math.sqrt(e.ndim) / 2.0
    conservative = r_cons > 0 and worst <= _threshold_sq(r_cons, e.h)
    return bool(primary), bool(conservative)


def covered_fraction(e: GridSet, s: SampleSet, r: float) -> float:
    """Fraction of the set's measure within r of the samples (primary metric)."""
    if r <= 0:
        raise CovergeoError(f"coverage radius must be positive, got {r}")
    if s.n_points == 0:
        return 0.0
    dsq = _sample_dsq(e, s)[e.mask]
    hit = int((dsq <= _threshold_sq(r, e.h)).sum())
    return hit / int(e.count)


def wilson_interval(successes: int, trials: int, z: float = _WILSON_Z) -> tuple[float, float]:
    """Two-sided score interval; well behaved at p_hat near 0 and 1."""
    if trials <= 0:
        raise CovergeoError("wilson interval needs at least one trial")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials))
    # the score interval always contains p; the min/max against p only
    # repairs float round-off at the endpoints (e.g. successes == trials)
    return max(0.0, min(center - half, p)), min(1.0, max(center + half, p))


def estimate_probability(
    e: GridSet,
    r: float,
    n_samples: int,
    trials: int,
    seed: int,
    mode: str = "full",
    alpha: float = 0.0,
    sample_from: GridSet | None = None,
    bound_value: float | None = None,
) -> TrialReport:
    """Empirical probability of the coverage event over independent trials.

    ``mode="full"``: a trial succeeds when the ball union covers the whole
    set.  ``mode="almost"``: success when the covered fraction reaches
    1 - alpha.  ``sample_from`` lets the sampling domain differ from the
    covered set (the almost-coverage experiments sample the restricted set
    but grade coverage of the full one).
    """
    if mode not in ("full", "almost"):
        raise CovergeoError(f"unknown mode {mode!r}")
    if trials < 1:
        raise CovergeoError("need at least one trial")
    source = sample_from if sample_from is not None else e
    if not source.same_frame(e):
        raise CovergeoError("sampling domain lives on a different grid frame")
    successes = 0
    conservative = 0
    fractions: list[float] = []
    thr = _threshold_sq(r, e.h)
    r_cons = r - e.h * math.sqrt(e.ndim) / 2.0
    thr_cons = _threshold_sq(r_cons, e.h) if r_cons > 0 else -1.0
    flat_true = e.mask
    for t in range(trials):
        s = sample_uniform(source, n_samples, seed, trial=t)
        dsq = _sample_dsq(e, s)[flat_true]
        if mode == "full":
            worst = float(dsq.max())
            ok = worst <= thr
            ok_cons = worst <= thr_cons
        else:
            frac = int((dsq <= thr).sum()) / int(e.count)
            frac_cons = int((dsq <= thr_cons).sum()) / int(e.count)
            fractions.append(frac)
            ok = frac >= 1.0 - alpha
            ok_cons = frac_cons >= 1.0 - alpha
        successes += ok
        conservative += ok_cons
    p_hat = successes / trials
    lo, hi = wilson_interval(successes, trials)
    return TrialReport(
        trials=trials,
        successes=successes,
        p_hat=p_hat,
        wilson_lo=lo,
        wilson_hi=hi,
        n_samples=n_samples,
        radius=r,
        mode=mode if mode == "full" else f"almost({alpha:g})",
        seed=seed,
        conservative_successes=conservative,
        fractions=tuple(fractions),
        bound_value=bound_value,
    )


def ladder_csv(rows: list[tuple[int, float, TrialReport]]) -> str:
    """CSV table (N, bound, p_hat, wilson_lo, wilson_hi) for plotting."""
    lines = ["N,bound,p_hat,wilson_lo,wilson_hi"]
    for n_samples, bound, rep in rows:
        lines.append(
            f"{n_samples},{bound:.9f},{rep.p_hat:.6f},"
            f"{rep.wilson_lo:.6f},{rep.wilson_hi:.6f}"
        )
    return "\n".join(lines) + "\n"
