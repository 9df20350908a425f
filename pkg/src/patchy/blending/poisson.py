"""
Poisson image interpolation.

Blends the content of a source image into the context of a destination image
in the gradient domain. Inside the patch the result follows a guidance field
that mixes the alpha-weighted finite differences of both images (the larger
one wins), while its values on the one-pixel ring around it are pinned to the
destination. The discrete Poisson equation over the patch pixels is

    |N_p| f_p - sum_{q in N_p, inside} f_q = sum_{q in N_p, on ring} dest_q + sum_{q in N_p} v_pq

which is a symmetric positive definite 5-point Laplacian system, solved by
conjugate gradient (default) or a dense direct solve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg
from numpy.typing import NDArray

from patchy.blending.base import BaseBlender, BlendResult
from patchy.core.schema import ImageGrid, PatchRegion, PatchSpec, SolverStats
from patchy.errors import NonConvergenceError, ShapeMismatchError

logger = logging.getLogger(__name__)

# Neighbour offsets (row, col): up, down, left, right
NEIGHBOURS: tuple[tuple[int, int], ...] = ((-1, 0), (1, 0), (0, -1), (0, 1))

SolverMethod = Literal["conjugate_gradient", "direct_dense"]
SOLVER_METHODS: tuple[str, ...] = ("conjugate_gradient", "direct_dense")

# Per neighbour direction: (mask over the region, image rows, image cols) of ring neighbours
Ring = list[tuple[NDArray[np.bool_], NDArray[np.intp], NDArray[np.intp]]]


@dataclass(frozen=True)
class SolverConfig:
    """
    Configuration for the patch solve.

    Attributes:
        rel_tolerance: Required ||A f - b|| / ||b|| (absolute ||A f|| when b = 0)
        max_iterations: Iteration cap per channel; None means 10 x patch pixel count
        method: "conjugate_gradient" or "direct_dense"
    """
    rel_tolerance: float = 1e-8
    max_iterations: int | None = None
    method: SolverMethod = "conjugate_gradient"

    def __post_init__(self) -> None:
        if not self.rel_tolerance > 0:
            raise ValueError(f"rel_tolerance must be > 0, got {self.rel_tolerance}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.method not in SOLVER_METHODS:
            raise ValueError(f"Unknown solver method {self.method!r}; use one of {SOLVER_METHODS}")

    def iteration_cap(self, unknowns: int) -> int:
        return self.max_iterations if self.max_iterations is not None else 10 * unknowns

    def to_dict(self) -> dict[str, Any]:
        return {
            "rel_tolerance": self.rel_tolerance,
            "max_iterations": self.max_iterations,
            "method": self.method,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SolverConfig:
        return cls(
            rel_tolerance=float(data["rel_tolerance"]),
            max_iterations=data.get("max_iterations"),
            method=data.get("method", "conjugate_gradient"),
        )


@dataclass(frozen=True, eq=False)
class GuidanceField:
    """
    Guidance values v_pq for every pixel p of a patch and each 4-neighbour q.

    Attributes:
        region: The patch the field is defined over
        values: Array of shape (4, height, width, channels); axis 0 follows NEIGHBOURS
    """
    region: PatchRegion
    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 4 or values.shape[:3] != (
            len(NEIGHBOURS),
            self.region.height,
            self.region.width,
        ):
            raise ShapeMismatchError(
                f"Guidance shape {values.shape} does not match region "
                f"{self.region.height}x{self.region.width}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("Guidance values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def channels(self) -> int:
        return int(self.values.shape[3])

    def divergence(self) -> NDArray[np.float64]:
        """sum_q v_pq per pixel, shape (height, width, channels)."""
        return self.values.sum(axis=0)

    def transpose(self) -> GuidanceField:
        """Field of the transposed images (up/down swap with left/right)."""
        swapped = self.values[[2, 3, 0, 1]].transpose(0, 2, 1, 3)
        return GuidanceField(self.region.transpose(), swapped)


@dataclass(frozen=True, eq=False)
class PoissonSolution:
    """
    Solved patch values f_in.

    Attributes:
        values: Array of shape (height, width, channels)
        residual_norm: Worst relative residual over channels
        iterations: Total solver iterations over channels
    """
    values: NDArray[np.float64]
    residual_norm: float
    iterations: int

    @property
    def stats(self) -> SolverStats:
        return SolverStats(residual_norm=self.residual_norm, iterations=self.iterations)


def finite_differences(image: ImageGrid, region: PatchRegion) -> NDArray[np.float64]:
    """
    x_p - x_q for every pixel p of the region and each neighbour q.

    Returns:
        Array of shape (4, height, width, channels)
    """
    region.check_fits(image.height, image.width)
    rows, cols = region.slices
    centre = image.data[rows, cols]
    out = np.empty((len(NEIGHBOURS),) + centre.shape, dtype=np.float64)
    for k, (dr, dc) in enumerate(NEIGHBOURS):
        neighbour = image.data[
            region.top + dr : region.bottom + dr, region.left + dc : region.right + dc
        ]
        out[k] = centre - neighbour
    return out


def build_guidance(dest: ImageGrid, source: ImageGrid, spec: PatchSpec) -> GuidanceField:
    """
    Mix destination and source gradients, each weighted by alpha.

    With d = (1 - alpha)(dest_p - dest_q) and s = alpha (source_p - source_q):
    v_pq = d if |d| > |s|, otherwise s (ties go to the source).

    Raises:
        ShapeMismatchError: If dest and source differ in shape
        RegionOutOfBoundsError: If the patch does not fit the images
    """
    dest.check_same_shape(source)
    alpha = spec.alpha
    dest_term = (1.0 - alpha) * finite_differences(dest, spec.region)
    source_term = alpha * finite_differences(source, spec.region)
    mixed = np.where(np.abs(dest_term) > np.abs(source_term), dest_term, source_term)
    return GuidanceField(region=spec.region, values=mixed)


def _laplacian(
    region: PatchRegion, image_height: int, image_width: int
) -> tuple[scipy.sparse.csr_matrix, Ring]:
    """
    Sparse 5-point matrix over the region pixels plus, per neighbour direction,
    the (mask, rows, cols) of neighbours that fall on the boundary ring.
    """
    h, w = region.height, region.width
    n = h * w
    index = np.arange(n).reshape(h, w)
    diagonal = np.zeros((h, w), dtype=np.float64)
    rows: list[NDArray[np.intp]] = []
    cols: list[NDArray[np.intp]] = []
    ring: Ring = []

    for dr, dc in NEIGHBOURS:
        qr = np.broadcast_to(np.arange(h)[:, None] + dr, (h, w))
        qc = np.broadcast_to(np.arange(w)[None, :] + dc, (h, w))
        in_region = (qr >= 0) & (qr < h) & (qc >= 0) & (qc < w)
        ir = qr + region.top
        ic = qc + region.left
        in_image = (ir >= 0) & (ir < image_height) & (ic >= 0) & (ic < image_width)

        # |N_p| counts neighbours that exist in the image
        diagonal += in_image
        rows.append(index[in_region])
        cols.append(index[qr[in_region], qc[in_region]])
        on_ring = in_image & ~in_region
        ring.append((on_ring, ir[on_ring], ic[on_ring]))

    off_rows = np.concatenate(rows)
    off_cols = np.concatenate(cols)
    data = np.concatenate([diagonal.ravel(), -np.ones(off_rows.size)])
    all_rows = np.concatenate([np.arange(n), off_rows])
    all_cols = np.concatenate([np.arange(n), off_cols])
    matrix = scipy.sparse.csr_matrix((data, (all_rows, all_cols)), shape=(n, n))
    return matrix, ring


def assemble_system(
    dest: ImageGrid, guidance: GuidanceField, channel: int = 0
) -> tuple[scipy.sparse.csr_matrix, NDArray[np.float64]]:
    """
    The linear system A f = b for one channel of the patch.

    Unknowns are the region pixels in row-major order. Boundary values are
    read from dest on the ring around the region.

    Returns:
        (A as CSR matrix, b as 1-D array)
    """
    region = guidance.region
    region.check_fits(dest.height, dest.width)
    matrix, ring = _laplacian(region, dest.height, dest.width)
    return matrix, _rhs(dest, guidance, channel, ring)


def _rhs(
    dest: ImageGrid,
    guidance: GuidanceField,
    channel: int,
    ring: Ring,
) -> NDArray[np.float64]:
    rhs = guidance.divergence()[:, :, channel].copy()
    plane = dest.channel(channel)
    for mask, ir, ic in ring:
        rhs[mask] += plane[ir, ic]
    return rhs.ravel()


def _relative_residual(
    matrix: scipy.sparse.csr_matrix, x: NDArray[np.float64], rhs: NDArray[np.float64]
) -> float:
    residual = float(np.linalg.norm(rhs - matrix @ x))
    rhs_norm = float(np.linalg.norm(rhs))
    return residual / rhs_norm if rhs_norm > 0 else residual


def _solve_cg(
    matrix: scipy.sparse.csr_matrix,
    rhs: NDArray[np.float64],
    x0: NDArray[np.float64],
    config: SolverConfig,
) -> tuple[NDArray[np.float64], float, int]:
    if not np.any(rhs):
        # SPD system with b = 0 has the unique solution 0
        return np.zeros_like(rhs), 0.0, 0

    cap = config.iteration_cap(rhs.size)
    used = 0
    x = x0
    residual = _relative_residual(matrix, x, rhs)
    while residual > config.rel_tolerance:
        remaining = cap - used
        if remaining <= 0:
            break
        steps = [0]

        def count(_: NDArray[np.float64]) -> None:
            steps[0] += 1

        # scipy stops on its recursive residual; restarting from x re-checks the true one
        x, _info = scipy.sparse.linalg.cg(
            matrix,
            rhs,
            x0=x,
            rtol=config.rel_tolerance,
            atol=0.0,
            maxiter=remaining,
            callback=count,
        )
        used += steps[0]
        residual = _relative_residual(matrix, x, rhs)
        if steps[0] == 0:
            break
    return np.asarray(x, dtype=np.float64), residual, used


def _solve_dense(
    matrix: scipy.sparse.csr_matrix, rhs: NDArray[np.float64]
) -> tuple[NDArray[np.float64], float, int]:
    x = scipy.linalg.solve(matrix.toarray(), rhs, assume_a="pos")
    return x, _relative_residual(matrix, x, rhs), 1


def solve_patch(
    dest: ImageGrid,
    guidance: GuidanceField,
    spec: PatchSpec,
    config: SolverConfig | None = None,
) -> PoissonSolution:
    """
    Solve the discrete Poisson equation over the patch, channel by channel.

    Args:
        dest: Destination image (supplies the boundary values on the patch ring)
        guidance: Guidance field over spec.region
        spec: The patch
        config: Solver settings (defaults to SolverConfig())

    Returns:
        PoissonSolution whose residual is within config.rel_tolerance

    Raises:
        ShapeMismatchError: If the guidance does not cover spec.region or dest's channels
        NonConvergenceError: If the tolerance is not reached within the iteration cap
    """
    config = config or SolverConfig()
    region = spec.region
    if guidance.region != region:
        raise ShapeMismatchError(f"Guidance covers {guidance.region}, patch is {region}")
    if guidance.channels != dest.channels:
        raise ShapeMismatchError(
            f"Guidance has {guidance.channels} channels, image has {dest.channels}"
        )
    region.check_fits(dest.height, dest.width)

    matrix, ring = _laplacian(region, dest.height, dest.width)
    rows, cols = region.slices
    values = np.empty((region.height, region.width, dest.channels), dtype=np.float64)
    worst = 0.0
    total = 0

    for c in range(dest.channels):
        rhs = _rhs(dest, guidance, c, ring)
        if config.method == "direct_dense":
            x, residual, iterations = _solve_dense(matrix, rhs)
        else:
            x0 = dest.data[rows, cols, c].ravel().copy()
            x, residual, iterations = _solve_cg(matrix, rhs, x0, config)
        total += iterations
        worst = max(worst, residual)
        if residual > config.rel_tolerance:
            raise NonConvergenceError(
                f"Patch solve stopped at residual {residual:.3e} > {config.rel_tolerance:.1e} "
                f"after {total} iterations (channel {c}, {rhs.size} unknowns)",
                residual_norm=residual,
                iterations=total,
            )
        values[:, :, c] = x.reshape(region.height, region.width)

    logger.debug(
        "Solved %dx%d patch: residual %.2e in %d iterations",
        region.height,
        region.width,
        worst,
        total,
    )
    values.flags.writeable = False
    return PoissonSolution(values=values, residual_norm=worst, iterations=total)


def _pii(
    dest: ImageGrid, source: ImageGrid, spec: PatchSpec, config: SolverConfig | None
) -> tuple[ImageGrid, PoissonSolution]:
    guidance = build_guidance(dest, source, spec)
    solution = solve_patch(dest, guidance, spec, config)
    out = dest.to_array()
    out[spec.region.slices] = solution.values
    return ImageGrid(out), solution


def pii_blend(
    dest: ImageGrid,
    source: ImageGrid,
    spec: PatchSpec,
    config: SolverConfig | None = None,
) -> ImageGrid:
    """
    Poisson-blend source into dest inside the patch.

    Pixels outside the patch are copied from dest unchanged; solved values are not clipped.

    Example:
        >>> out = pii_blend(dest, source, spec)
        >>> out = pii_blend(dest, source, spec, SolverConfig(method="direct_dense"))
    """
    image, _ = _pii(dest, source, spec, config)
    return image


class PoissonBlender(BaseBlender):
    """
    Blender wrapper for pii_blend that also reports solver statistics.

    Example:
        blender = PoissonBlender(SolverConfig(rel_tolerance=1e-10))
        result = blender.blend(dest, source, spec)
        print(result.solver_stats.iterations)
    """

    _name: str = "pii"

    def __init__(self, config: SolverConfig | None = None) -> None:
        self.config = config or SolverConfig()

    def blend(self, dest: ImageGrid, source: ImageGrid, spec: PatchSpec) -> BlendResult:
        image, solution = _pii(dest, source, spec, self.config)
        return BlendResult(image=image, solver_stats=solution.stats)
