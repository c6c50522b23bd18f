"""Closed-form structure of the imaging function and the peak-shift laws.

For a uniform circular array the projection norm admits a Bessel-harmonic
representation: with x = |k_aw r - k_bw r*| and phi the direction angle of
that difference vector,

    |P_noise W(r)| ~ (N^2-2N)/(N^2-2N+1) * sqrt(1 - |J_0(x) + E(x, phi)|^2),
    E(x, phi) = (1/N) sum_n sum_{q != 0} i^q J_q(x) e^{iq(theta_n - phi)},

so the reciprocal map peaks where x vanishes, i.e. near Re(k_bw/k_aw) r*.
This module evaluates that representation, the predicted peak location
under a permeability / permittivity / conductivity mismatch, and the
quantitative agreement between an empirical norm map and the closed form.

Complex-argument convention: for lossy media k_aw r - k_bw r* has complex
components. We take x as the Euclidean norm of the 4 real components and
phi from the real parts. Under the low-loss validity condition the
imaginary parts are a few percent of the real parts, which keeps this
within the small-loss reading; the choice is pinned here and exercised by
the tests rather than left implicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateDataError, DomainError
from .forward import ASYMPTOTIC, ScatteringMatrix
from .music import DEFAULT_CEILING, ImageMap, ImagingGrid
from .scene import AntennaArray, Medium, Scene, Wavenumber, contrast, wavenumber
from .specfun import Q_MAX, bessel_j_grid, jacobi_anger_truncation

MISMATCH_KINDS = ("permeability", "permittivity", "conductivity")

# fixed tail tolerance for the Bessel-harmonic truncation
_SERIES_TOL = 1e-10


@dataclass(frozen=True)
class MismatchSpec:
    """One wrong-background assumption: which parameter and by what ratio."""

    kind: str
    ratio: float

    def __post_init__(self):
        if self.kind not in MISMATCH_KINDS:
            raise DomainError(f"kind must be one of {MISMATCH_KINDS}, got {self.kind!r}")
        if not (math.isfinite(self.ratio) and self.ratio > 0):
            raise DomainError(f"ratio must be finite and > 0, got {self.ratio!r}")


def mismatched_wavenumber(background: Medium, omega: float, spec: MismatchSpec) -> Wavenumber:
    """Wavenumber computed with one background parameter replaced by ratio * true."""
    if spec.kind == "permeability":
        med = Medium(
            background.permittivity, background.conductivity, spec.ratio * background.permeability
        )
    elif spec.kind == "permittivity":
        med = Medium(
            spec.ratio * background.permittivity, background.conductivity, background.permeability
        )
    else:
        med = Medium(
            background.permittivity, spec.ratio * background.conductivity, background.permeability
        )
    return wavenumber(med, omega)


@dataclass(frozen=True)
class TheoryContext:
    """Everything the closed form needs: both wavenumbers, the anomaly
    location, the array geometry, and the truncation ceiling."""

    k_bw: Wavenumber
    k_aw: Wavenumber
    r_star: tuple[float, float]
    array: AntennaArray
    q_max: int = Q_MAX

    def __post_init__(self):
        if not (0 < self.q_max <= Q_MAX):
            raise DomainError(f"q_max must lie in (0, {Q_MAX}]")
        object.__setattr__(self, "r_star", (float(self.r_star[0]), float(self.r_star[1])))

    @property
    def c_constant(self) -> float:
        """Subspace normalization constant 1/(N-1)^2."""
        return 1.0 / (self.array.count - 1) ** 2

    @cached_property
    def _norm_prefactor(self) -> float:
        n = self.array.count
        return (n * n - 2 * n) / (n * n - 2 * n + 1)


def _difference_polar(ctx: TheoryContext, points: np.ndarray):
    """x = |k_aw r - k_bw r*| (4-real-component norm) and phi (real-part angle)."""
    d0 = ctx.k_aw.value * points[:, 0] - ctx.k_bw.value * ctx.r_star[0]
    d1 = ctx.k_aw.value * points[:, 1] - ctx.k_bw.value * ctx.r_star[1]
    x = np.sqrt(np.abs(d0) ** 2 + np.abs(d1) ** 2)
    phi = np.arctan2(d1.real, d0.real)
    return x, phi


def _bessel_circle_sum(ctx: TheoryContext, x: np.ndarray, phi: np.ndarray, big_q: int):
    """J_0(x) and the off-center harmonic sum E for each (x, phi) pair.

    Pairs the +q and -q harmonics into 2 cos(q (theta_n - phi)) terms, which
    is exact for integer orders.
    """
    table = bessel_j_grid(x, big_q)
    j0 = table[:, 0].astype(complex)
    err = np.zeros_like(j0)
    thetas = ctx.array.angles
    delta = thetas[None, :] - phi[:, None]
    inv_n = 1.0 / ctx.array.count
    for q in range(1, big_q + 1):
        circle = 2.0 * inv_n * np.cos(q * delta).sum(axis=1)
        err += (1j**q) * table[:, q] * circle
    return j0, err


def error_series(ctx: TheoryContext, r) -> complex:
    """Harmonic correction E(k_aw r, k_bw r*) at a single location."""
    pts = np.asarray([[float(r[0]), float(r[1])]])
    x, phi = _difference_polar(ctx, pts)
    big_q = jacobi_anger_truncation(float(x[0]), _SERIES_TOL)
    if big_q > ctx.q_max:
        raise DomainError(f"required truncation {big_q} exceeds context ceiling {ctx.q_max}")
    if big_q == 0:
        return 0.0 + 0.0j
    _, err = _bessel_circle_sum(ctx, x, phi, big_q)
    return complex(err[0])


def _norm_factor(ctx: TheoryContext, points: np.ndarray) -> np.ndarray:
    """|J_0 + E| per point, clamped into [0, 1]."""
    x, phi = _difference_polar(ctx, points)
    big_q = jacobi_anger_truncation(float(np.max(x)), _SERIES_TOL)
    if big_q > ctx.q_max:
        raise DomainError(f"required truncation {big_q} exceeds context ceiling {ctx.q_max}")
    j0, err = _bessel_circle_sum(ctx, x, phi, big_q)
    return np.minimum(np.abs(j0 + err), 1.0)


def closed_form_norm_map(ctx: TheoryContext, grid: ImagingGrid) -> np.ndarray:
    """Predicted |P_noise W| over the grid (NaN at masked cells)."""
    g = _norm_factor(ctx, grid.cell_centers)
    out = np.full((grid.resolution, grid.resolution), np.nan)
    out[grid.mask] = ctx._norm_prefactor * np.sqrt(np.clip(1.0 - g * g, 0.0, None))
    return out


def closed_form_map(ctx: TheoryContext, grid: ImagingGrid, ceiling: float = DEFAULT_CEILING) -> ImageMap:
    """Closed-form counterpart of the reciprocal projection map."""
    norm = closed_form_norm_map(ctx, grid)
    values = np.full_like(norm, np.nan)
    mask = grid.mask
    with np.errstate(divide="ignore"):
        values[mask] = np.minimum(
            np.where(norm[mask] > 0, 1.0 / norm[mask], np.inf), ceiling
        )
    return ImageMap(grid=grid, values=values, raw_norm=norm, k_aw=ctx.k_aw.value)


def predicted_peak(k_bw: Wavenumber, k_aw: Wavenumber, r_star) -> tuple[float, float]:
    """Shifted peak location Re(k_bw / k_aw) * r*.

    The real part of the complex ratio is the only component with a
    geometric meaning as a location scale; under the low-loss condition it
    differs from the modulus by well under a percent.
    """
    if k_aw.value == 0:
        raise DomainError("alternative wavenumber must be nonzero")
    scale = (k_bw.value / k_aw.value).real
    return (scale * float(r_star[0]), scale * float(r_star[1]))


@dataclass(frozen=True)
class MapComparison:
    """Agreement metrics between an empirical norm map and the closed form."""

    rms: float
    max_abs: float
    argmin_distance_cells: float
    pearson: float

    def as_dict(self) -> dict:
        return {
            "rms": self.rms,
            "max_abs": self.max_abs,
            "argmin_distance_cells": self.argmin_distance_cells,
            "pearson": self.pearson,
        }

    def as_text(self) -> str:
        return "\n".join(f"{key}: {value!r}" for key, value in self.as_dict().items())


def compare_maps(empirical: ImageMap, ctx: TheoryContext, grid: ImagingGrid) -> MapComparison:
    """RMS / max / argmin-shift / correlation between measured projection
    norms and the closed-form prediction, over unmasked cells.

    The empirical map must carry the raw projection norms (values in [0, 1]),
    not the clipped reciprocal map.
    """
    if empirical.grid != grid:
        raise DomainError("empirical map and comparison grid do not match")
    emp = empirical.raw_norm if empirical.raw_norm is not None else empirical.values
    mask = grid.mask
    emp_vals = emp[mask]
    if np.any(emp_vals > 1.0 + 1e-9) or np.any(emp_vals < 0.0):
        raise DomainError("expected a projection-norm map with values in [0, 1]")
    theo = closed_form_norm_map(ctx, grid)
    theo_vals = theo[mask]
    diff = emp_vals - theo_vals
    rms = float(np.sqrt(np.mean(diff**2)))
    max_abs = float(np.max(np.abs(diff)))

    def argmin_cell(field):
        filled = np.where(mask, field, np.inf)
        return np.unravel_index(int(np.argmin(filled)), filled.shape)

    ey, ex = argmin_cell(emp)
    ty, tx = argmin_cell(theo)
    dist_cells = math.hypot(ey - ty, ex - tx)
    pearson = float(np.corrcoef(emp_vals, theo_vals)[0, 1])
    return MapComparison(rms=rms, max_abs=max_abs, argmin_distance_cells=dist_cells, pearson=pearson)


def c_identity_check(
    k_asym: ScatteringMatrix, scene: Scene, k_bw: Wavenumber, tau1: float
) -> float:
    """C (N-1)^2 with C = |a^2 O k_bw e^{-2 i k_bw R} / (32 R omega mu tau_1)|^2.

    The far-field data matrix is (a^2 O k_bw e^{-2 i k_bw R} / (32 R omega mu))
    times a phase matrix whose leading singular value is N-1 for a real
    wavenumber, which makes the product exactly 1 in that regime. The
    propagation factor e^{-2 i k_bw R} must stay inside the modulus: it is
    unimodular only for lossless backgrounds, and dropping it for a lossy
    background multiplies the result by e^{-4 Im(k) R} (about 0.049 for the
    reference configuration). For lossy backgrounds the remaining deviation
    from 1 measures the modulus spread e^{-2 Im(k) theta_n . r*} that the
    rank-one normalization ignores; it vanishes for an anomaly at the origin.

    Requires a single-anomaly scene and far-field-mode data; tau1 is the
    leading singular value of that data matrix.
    """
    if k_asym.mode != ASYMPTOTIC:
        raise DomainError("the identity applies to the far-field-mode data matrix")
    if len(scene.anomalies) != 1:
        raise DomainError("the identity applies to single-anomaly scenes")
    if not (math.isfinite(tau1) and tau1 > 0):
        raise DegenerateDataError("tau_1 must be positive")
    an = scene.anomalies[0]
    omega = scene.omega
    o_val = contrast(an, scene.background, omega)
    big_r = scene.array.radius
    coef = (
        an.radius**2
        * o_val
        * k_bw.value
        * np.exp(-2j * k_bw.value * big_r)
        / (32.0 * big_r * omega * scene.background.permeability * tau1)
    )
    return abs(coef) ** 2 * (scene.array.count - 1) ** 2
