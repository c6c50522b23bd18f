"""Subspace imaging: decomposition of the data matrix, steering vectors,
noise-space projection, and the reciprocal-projection map over a grid.

The decomposition diagonalizes K K^H with cyclic complex Jacobi rotations.
Only the left singular vectors and the singular values are needed by the
imaging function, and at the array sizes used here (N <= 64) Jacobi sweeps
are simple, accurate, and fast. The squaring costs half the digits for the
smallest singular values, which is acceptable because only directions with
tau_j above a fraction of tau_1 are ever retained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateDataError,
    DomainError,
    NumericalError,
)
from .forward import ScatteringMatrix, incident_field_matrix
from .scene import AntennaArray, Wavenumber

EXACT_FIELD = "exact_field"
PLANE_WAVE = "plane_wave"
VARIANTS = (EXACT_FIELD, PLANE_WAVE)

# reciprocal-map ceiling where the projection norm underflows
DEFAULT_CEILING = 1.0e8
DEFAULT_THRESHOLD_RATIO = 0.1


@dataclass(frozen=True)
class SubspaceDecomposition:
    """Singular values (descending) and left singular vectors (columns) of K."""

    singular_values: np.ndarray
    left_vectors: np.ndarray
    signal_dim: int | None = None

    def with_signal_dim(self, m: int) -> "SubspaceDecomposition":
        if not (1 <= m <= self.singular_values.size):
            raise DomainError(f"signal_dim must lie in [1, {self.singular_values.size}]")
        return replace(self, signal_dim=int(m))


def _hermitian_jacobi(a: np.ndarray, tol_factor: float, max_sweeps: int):
    """Cyclic Jacobi diagonalization of a Hermitian matrix.

    Returns (eigenvalues desc, eigenvectors as columns). Convergence is
    declared when the off-diagonal Frobenius norm falls below
    tol_factor * ||A||_F.
    """
    n = a.shape[0]
    a = a.astype(np.complex128).copy()
    v = np.eye(n, dtype=np.complex128)
    norm = float(np.linalg.norm(a))
    if norm == 0.0:
        return np.zeros(n), v

    def off_norm() -> float:
        off = a - np.diag(np.diagonal(a))
        return float(np.linalg.norm(off))

    for _ in range(max_sweeps):
        if off_norm() <= tol_factor * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                phase = apq / abs(apq)
                tau = (aqq - app) / (2.0 * abs(apq))
                if tau == 0.0:
                    t = 1.0
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                # columns: [p q] <- [p q] @ [[c, s], [-s conj(phase), c conj(phase)]]
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * np.conj(phase) * col_q
                a[:, q] = s * col_p + c * np.conj(phase) * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * phase * row_q
                a[q, :] = s * row_p + c * phase * row_q
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * np.conj(phase) * vq
                v[:, q] = s * vp + c * np.conj(phase) * vq
    else:
        resid = off_norm() / norm
        if resid > tol_factor:
            raise NumericalError(
                f"Jacobi sweeps did not converge within {max_sweeps} sweeps "
                f"(relative off-diagonal residual {resid:.3e})",
                residual=resid,
            )
    eigvals = np.real(np.diagonal(a)).copy()
    order = np.argsort(eigvals)[::-1]
    return eigvals[order], v[:, order]


def svd_leading(k_mat, tol_factor: float = 1e-14, max_sweeps: int = 50) -> SubspaceDecomposition:
    """All singular values and left singular vectors of the data matrix.

    Computed through the self-adjoint eigendecomposition of K K^H; accepts a
    ScatteringMatrix or a plain complex square ndarray.
    """
    entries = k_mat.entries if isinstance(k_mat, ScatteringMatrix) else np.asarray(k_mat)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise DomainError("a square matrix is required")
    n = entries.shape[0]
    if n < 3:
        raise DomainError("subspace decomposition needs at least a 3x3 matrix")
    gram = entries @ entries.conj().T
    gram = 0.5 * (gram + gram.conj().T)
    eigvals, vecs = _hermitian_jacobi(gram, tol_factor, max_sweeps)
    taus = np.sqrt(np.clip(eigvals, 0.0, None))
    taus.flags.writeable = False
    vecs.flags.writeable = False
    return SubspaceDecomposition(singular_values=taus, left_vectors=vecs)


def signal_subspace_dim(singular_values, threshold_ratio: float = DEFAULT_THRESHOLD_RATIO) -> int:
    """Number of singular values at or above threshold_ratio * tau_1."""
    taus = np.asarray(singular_values, dtype=float)
    if taus.size == 0:
        raise DomainError("empty singular value list")
    if np.any(np.diff(taus) > 0):
        raise DomainError("singular values must be sorted descending")
    if taus[0] <= 0.0:
        raise DegenerateDataError("all singular values vanish; no signal subspace")
    if not (0.0 <= threshold_ratio <= 1.0):
        raise DomainError("threshold_ratio must lie in [0, 1]")
    return int(max(1, np.count_nonzero(taus >= threshold_ratio * taus[0])))


def _steering_rows(
    k_aw: Wavenumber, points: np.ndarray, array: AntennaArray, variant: str
) -> np.ndarray:
    """Unit steering vectors for each point, shape (npoints, N)."""
    if variant == EXACT_FIELD:
        rows = incident_field_matrix(k_aw, points, array.positions)
    elif variant == PLANE_WAVE:
        rows = np.exp(1j * k_aw.value * (points @ array.directions.T))
    else:
        raise DomainError(f"unknown test-vector variant {variant!r}")
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def test_vector(
    k_aw: Wavenumber,
    r,
    array: AntennaArray,
    variant: str = EXACT_FIELD,
    roi_radius: float | None = None,
) -> np.ndarray:
    """Unit steering vector at location r.

    exact_field uses the point-source field at each antenna; plane_wave uses
    the far-field phases e^{i k (a_n/|a_n|) . r}. Both are normalized to unit
    Euclidean length (for a real wavenumber the plane-wave normalization is
    exactly 1/sqrt(N)).
    """
    r = np.asarray(r, dtype=float)
    rad = math.hypot(r[0], r[1])
    if roi_radius is not None and rad >= roi_radius:
        raise DomainError(f"point {tuple(r)} is not strictly inside the region of interest")
    if rad >= array.radius:
        raise DomainError(f"point {tuple(r)} is not inside the antenna ring")
    d = np.hypot(*(array.positions - r).T)
    if np.any(d < 1e-12):
        raise DomainError("test vector requested at an antenna position")
    return _steering_rows(k_aw, r[None, :], array, variant)[0]


def projection_norm(dec: SubspaceDecomposition, w: np.ndarray) -> float:
    """|w - sum_{j<=M} U_j <U_j, w>|, the distance to the signal subspace."""
    if dec.signal_dim is None:
        raise DomainError("decomposition has no signal_dim set")
    w = np.asarray(w, dtype=np.complex128)
    if w.shape != (dec.left_vectors.shape[0],):
        raise DomainError("test vector length does not match the decomposition")
    u = dec.left_vectors[:, : dec.signal_dim]
    resid = w - u @ (u.conj().T @ w)
    return float(np.linalg.norm(resid))


@dataclass(frozen=True)
class ImagingGrid:
    """Square cell-centered raster over [-L, L]^2 with a disk mask of the ROI."""

    resolution: int
    half_extent: float
    roi_radius: float

    def __post_init__(self):
        if self.resolution < 1:
            raise ConfigurationError("resolution must be >= 1")
        if not (math.isfinite(self.half_extent) and self.half_extent > 0):
            raise ConfigurationError("half_extent must be finite and > 0")
        if not (math.isfinite(self.roi_radius) and self.roi_radius > 0):
            raise ConfigurationError("roi_radius must be finite and > 0")

    @property
    def cell_size(self) -> float:
        return 2.0 * self.half_extent / self.resolution

    @cached_property
    def ticks(self) -> np.ndarray:
        """Cell-center coordinates along one axis, ascending."""
        h = self.cell_size
        t = -self.half_extent + h * (np.arange(self.resolution) + 0.5)
        t.flags.writeable = False
        return t

    @cached_property
    def mask(self) -> np.ndarray:
        """True where the cell center lies inside the ROI disk; shape [iy, ix]."""
        xx, yy = np.meshgrid(self.ticks, self.ticks)
        m = np.hypot(xx, yy) <= self.roi_radius
        m.flags.writeable = False
        return m

    @cached_property
    def cell_centers(self) -> np.ndarray:
        """Unmasked cell centers (n, 2), matching mask order (y rows, x fastest)."""
        xx, yy = np.meshgrid(self.ticks, self.ticks)
        pts = np.column_stack([xx[self.mask], yy[self.mask]])
        pts.flags.writeable = False
        return pts

    def point_of(self, iy: int, ix: int) -> tuple[float, float]:
        return (float(self.ticks[ix]), float(self.ticks[iy]))


def grid_for_roi(roi_radius: float, resolution: int) -> ImagingGrid:
    """Grid with bounds matching the ROI disk."""
    return ImagingGrid(resolution=resolution, half_extent=roi_radius, roi_radius=roi_radius)


@dataclass(frozen=True)
class ImageMap:
    """Scalar field over the grid; masked cells carry NaN.

    values holds the reciprocal-projection map (clipped at the ceiling);
    raw_norm, when present, holds the unclipped projection norms.
    """

    grid: ImagingGrid
    values: np.ndarray
    raw_norm: np.ndarray | None = None
    k_aw: complex | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        shape = (self.grid.resolution, self.grid.resolution)
        if v.shape != shape:
            raise DomainError(f"values must have shape {shape}")
        if not np.all(np.isfinite(v[self.grid.mask])):
            raise DomainError("unmasked map values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if self.raw_norm is not None:
            r = np.asarray(self.raw_norm, dtype=float)
            if r.shape != shape:
                raise DomainError(f"raw_norm must have shape {shape}")
            r.flags.writeable = False
            object.__setattr__(self, "raw_norm", r)

    def argmax_cell(self) -> tuple[int, int]:
        masked = np.where(self.grid.mask, self.values, -np.inf)
        iy, ix = np.unravel_index(int(np.argmax(masked)), masked.shape)
        return int(iy), int(ix)

    def argmax_point(self) -> tuple[float, float]:
        iy, ix = self.argmax_cell()
        return self.grid.point_of(iy, ix)


def imaging_map(
    k_mat: ScatteringMatrix,
    k_aw: Wavenumber,
    array: AntennaArray,
    grid: ImagingGrid,
    variant: str = EXACT_FIELD,
    threshold_ratio: float = DEFAULT_THRESHOLD_RATIO,
    signal_dim: int | None = None,
    ceiling: float = DEFAULT_CEILING,
) -> ImageMap:
    """Reciprocal projection-norm map 1 / |P_noise W(r)| over unmasked cells.

    Values are clipped at the ceiling where the norm underflows; the
    unclipped norms are retained in raw_norm for quantitative comparison.
    """
    if grid.resolution < 16:
        raise ConfigurationError("imaging grid resolution must be >= 16")
    entries_n = k_mat.n if isinstance(k_mat, ScatteringMatrix) else np.asarray(k_mat).shape[0]
    if array.count != entries_n:
        raise DomainError("antenna count does not match the data matrix size")
    dec = svd_leading(k_mat)
    m = signal_dim if signal_dim is not None else signal_subspace_dim(
        dec.singular_values, threshold_ratio
    )
    dec = dec.with_signal_dim(m)
    u = dec.left_vectors[:, :m]

    rows = _steering_rows(k_aw, grid.cell_centers, array, variant)
    resid = rows - (rows @ u.conj()) @ u.T
    norms = np.linalg.norm(resid, axis=1)

    values = np.full((grid.resolution, grid.resolution), np.nan)
    raw = np.full_like(values, np.nan)
    with np.errstate(divide="ignore"):
        values[grid.mask] = np.minimum(np.where(norms > 0, 1.0 / norms, np.inf), ceiling)
    raw[grid.mask] = norms
    return ImageMap(grid=grid, values=values, raw_norm=raw, k_aw=k_aw.value)


# ---------------------------------------------------------------------------
# ImageMap export: CSV (x, y, value per unmasked cell) and binary PGM.
# Both writers are deterministic so repeated runs produce identical bytes.
# ---------------------------------------------------------------------------

def write_map_csv(image: ImageMap, path, which: str = "values") -> None:
    """CSV with a resolution/bounds/k_aw header and one x,y,value row per
    unmasked cell (y rows ascending, x fastest)."""
    grid = image.grid
    data = image.values if which == "values" else image.raw_norm
    if data is None:
        raise DomainError(f"image has no {which!r} layer")
    k_re, k_im = (image.k_aw.real, image.k_aw.imag) if image.k_aw is not None else (0.0, 0.0)
    lines = [
        f"# resolution,{grid.resolution}",
        f"# bounds,{float(-grid.half_extent)!r},{float(grid.half_extent)!r}",
        f"# k_aw,{float(k_re)!r},{float(k_im)!r}",
        "x,y,value",
    ]
    ticks = grid.ticks
    mask = grid.mask
    for iy in range(grid.resolution):
        for ix in range(grid.resolution):
            if mask[iy, ix]:
                lines.append(
                    f"{float(ticks[ix])!r},{float(ticks[iy])!r},{float(data[iy, ix])!r}"
                )
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_map_csv(path, roi_radius: float) -> ImageMap:
    """Rebuild an ImageMap (values layer only) written by write_map_csv."""
    with open(path, "r", encoding="ascii") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    header = {}
    body_start = 0
    for i, line in enumerate(lines):
        if line.startswith("#"):
            key, *vals = line.lstrip("# ").split(",")
            header[key] = vals
        elif line == "x,y,value":
            body_start = i + 1
            break
    else:
        raise DomainError(f"{path}: missing x,y,value header row")
    try:
        resolution = int(header["resolution"][0])
        lo, hi = (float(v) for v in header["bounds"])
        k_aw = complex(float(header["k_aw"][0]), float(header["k_aw"][1]))
    except (KeyError, ValueError, IndexError) as exc:
        raise DomainError(f"{path}: malformed CSV header") from exc
    if not math.isclose(-lo, hi, rel_tol=1e-12):
        raise DomainError(f"{path}: bounds must be symmetric")
    grid = ImagingGrid(resolution=resolution, half_extent=hi, roi_radius=roi_radius)
    values = np.full((resolution, resolution), np.nan)
    h = grid.cell_size
    for line in lines[body_start:]:
        try:
            xs, ys, vs = line.split(",")
            x, y, v = float(xs), float(ys), float(vs)
        except ValueError as exc:
            raise DomainError(f"{path}: bad data row {line!r}") from exc
        ix = int(round((x + grid.half_extent) / h - 0.5))
        iy = int(round((y + grid.half_extent) / h - 0.5))
        if not (0 <= ix < resolution and 0 <= iy < resolution):
            raise DomainError(f"{path}: point ({x}, {y}) falls outside the grid")
        values[iy, ix] = v
    filled = ~np.isnan(values)
    if not np.array_equal(filled, grid.mask):
        raise DomainError(f"{path}: rows do not cover exactly the unmasked cells")
    return ImageMap(grid=grid, values=values, k_aw=k_aw)


def write_map_pgm(image: ImageMap, path) -> None:
    """8-bit binary PGM (P5), min-max normalized over unmasked cells.

    Rows run top to bottom with y descending (image convention); masked
    cells are black; a constant map renders as all-255.
    """
    grid = image.grid
    vals = image.values
    mask = grid.mask
    if not mask.any():
        raise DomainError("image has no unmasked cells")
    vmin = float(np.min(vals[mask]))
    vmax = float(np.max(vals[mask]))
    pixels = np.zeros((grid.resolution, grid.resolution), dtype=np.uint8)
    if vmax == vmin:
        pixels[mask] = 255
    else:
        scaled = np.rint(255.0 * (vals[mask] - vmin) / (vmax - vmin))
        pixels[mask] = scaled.astype(np.uint8)
    flipped = pixels[::-1, :]  # top row carries the largest y
    header = f"P5\n{grid.resolution} {grid.resolution}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(flipped.tobytes())


def extract_peaks(image: ImageMap, count: int) -> list[tuple[tuple[float, float], float]]:
    """Greedy maxima with non-maximum suppression over a 4-cell radius.

    Ties break lexicographically by (row, column); at most `count` peaks are
    returned, sorted by value descending.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    mask = image.grid.mask
    if not mask.any():
        raise DomainError("image has no unmasked cells")
    iy, ix = np.nonzero(mask)
    vals = image.values[iy, ix]
    order = np.lexsort((ix, iy, -vals))
    picked: list[tuple[int, int]] = []
    out: list[tuple[tuple[float, float], float]] = []
    suppress_sq = 4.0**2
    for idx in order:
        cy, cx = int(iy[idx]), int(ix[idx])
        if any((cy - py) ** 2 + (cx - px) ** 2 <= suppress_sq for py, px in picked):
            continue
        picked.append((cy, cx))
        out.append((image.grid.point_of(cy, cx), float(vals[idx])))
        if len(out) == count:
            break
    return out
