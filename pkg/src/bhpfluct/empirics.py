"""Histogram densities, collapse distances and tail diagnostics.

The comparison of a pooled fluctuation sample against the tabulated
reference density is quantified rather than eyeballed: a Kolmogorov-Smirnov
sup-gap (reported as a collapse distance, not a hypothesis test, since
pooled fluctuations are not i.i.d. across days), a Pearson chi-square over
tail-merged bins, straight-line and curvature fits to the log-density tails,
and quantile-quantile points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distribution import BhpDistribution, quantile

__all__ = [
    "GofReport",
    "HistogramDensity",
    "TailDiagnostics",
    "chi_square",
    "gof_report",
    "histogram_density",
    "ks_distance",
    "qq_points",
    "tail_diagnostics",
]

_AUTO_BIN_RANGE = (20, 200)
_MIN_EXPECTED_COUNT = 5.0


@dataclass(frozen=True)
class HistogramDensity:
    """Density-normalized histogram: sum(densities * widths) == 1."""

    bin_edges: np.ndarray
    densities: np.ndarray
    counts: np.ndarray
    total_count: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)


@dataclass(frozen=True)
class TailDiagnostics:
    """Line fit on the lower log-density tail, mean curvature on the upper.

    ``curvature_above`` is the mean discrete second derivative of the log
    density (per unit fluctuation squared); an exponential tail gives zero,
    a double-exponential decay gives an increasingly negative value.
    """

    slope_below: float
    residual_rms_below: float
    curvature_above: float
    lower_window_used: tuple[float, float]
    upper_window_used: tuple[float, float]


@dataclass
class GofReport:
    """Collapse-quality summary of one sample against the reference density."""

    ks_distance: float
    ks_n: int
    chi_square: float | None
    degrees_of_freedom: int | None
    tail_slope_below: float | None
    tail_residual_rms_below: float | None
    tail_curvature_above: float | None
    qq_points: np.ndarray

    def to_dict(self) -> dict:
        return {
            "ks_distance": self.ks_distance,
            "ks_n": self.ks_n,
            "chi_square": self.chi_square,
            "degrees_of_freedom": self.degrees_of_freedom,
            "tail_slope_below": self.tail_slope_below,
            "tail_residual_rms_below": self.tail_residual_rms_below,
            "tail_curvature_above": self.tail_curvature_above,
            "qq_points": [[float(a), float(b)] for a, b in self.qq_points],
        }


def _checked_sample(sample) -> np.ndarray:
    arr = np.asarray(sample, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError("sample must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sample must be finite")
    return arr


def histogram_density(sample, binning="auto") -> HistogramDensity:
    """Histogram normalized to a probability density.

    ``binning`` is ``"auto"`` (Freedman-Diaconis width, clipped to 20..200
    bins), an integer bin count, or an explicit strictly increasing edge
    array.
    """
    arr = _checked_sample(sample)
    if isinstance(binning, str):
        if binning != "auto":
            raise ValueError(f"unknown binning mode {binning!r}")
        edges = _freedman_diaconis_edges(arr)
    elif isinstance(binning, (int, np.integer)):
        if binning < 1:
            raise ValueError(f"bin count must be >= 1, got {binning}")
        lo, hi = float(arr.min()), float(arr.max())
        if lo == hi:
            raise ValueError("sample range is degenerate; pass explicit edges")
        edges = np.linspace(lo, hi, int(binning) + 1)
    else:
        edges = np.asarray(binning, dtype=float)
        if edges.ndim != 1 or edges.size < 2:
            raise ValueError("explicit edges need at least 2 values")
        if np.any(np.diff(edges) <= 0.0):
            raise ValueError("explicit edges must be strictly increasing")

    counts, edges = np.histogram(arr, bins=edges)
    total = int(counts.sum())
    if total == 0:
        raise ValueError("no sample points fall inside the bin edges")
    densities = counts / (total * np.diff(edges))
    return HistogramDensity(
        bin_edges=edges, densities=densities, counts=counts, total_count=total
    )


def _freedman_diaconis_edges(arr: np.ndarray) -> np.ndarray:
    lo, hi = float(arr.min()), float(arr.max())
    if lo == hi:
        raise ValueError("sample range is degenerate; pass explicit edges")
    q25, q75 = np.percentile(arr, [25.0, 75.0])
    width = 2.0 * (q75 - q25) / arr.size ** (1.0 / 3.0)
    if width > 0.0:
        n_bins = int(math.ceil((hi - lo) / width))
    else:
        n_bins = _AUTO_BIN_RANGE[0]
    n_bins = int(np.clip(n_bins, *_AUTO_BIN_RANGE))
    return np.linspace(lo, hi, n_bins + 1)


def ks_distance(sample, reference: BhpDistribution) -> tuple[float, int]:
    """Sup-gap between the empirical CDF and the tabulated reference CDF.

    Both one-sided gaps are taken at every order statistic, which realizes
    the exact supremum for a right-continuous step function against a
    continuous reference.
    """
    arr = np.sort(_checked_sample(sample))
    n = arr.size
    ref = np.interp(arr, reference.grid, reference.cdf_values)
    ranks = np.arange(1, n + 1, dtype=float)
    d_plus = np.max(ranks / n - ref)
    d_minus = np.max(ref - (ranks - 1.0) / n)
    return float(max(d_plus, d_minus)), n


def chi_square(hist: HistogramDensity, reference: BhpDistribution) -> tuple[float, int]:
    """Pearson statistic against expected counts from reference CDF differences.

    The outermost bins absorb the open tails of the reference.  Sparse bins
    are merged from the tails inward until every remaining expected count is
    at least 5; fewer than two surviving bins is an error.
    """
    edge_cdf = np.interp(hist.bin_edges, reference.grid, reference.cdf_values)
    probs = np.diff(edge_cdf)
    probs[0] += edge_cdf[0]
    probs[-1] += 1.0 - edge_cdf[-1]
    expected = hist.total_count * probs
    observed = hist.counts.astype(float)

    expected, observed = _merge_sparse_tails(expected, observed)
    if expected.size < 2:
        raise ValueError(
            "fewer than 2 bins with expected count >= 5 after merging; "
            "chi-square is undefined"
        )
    if np.any(expected < _MIN_EXPECTED_COUNT):
        raise ValueError(
            "interior bins with expected count < 5 remain after tail merging"
        )
    statistic = float(np.sum((observed - expected) ** 2 / expected))
    return statistic, expected.size - 1


def _merge_sparse_tails(
    expected: np.ndarray, observed: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    expected = expected.copy()
    observed = observed.copy()
    lo, hi = 0, expected.size - 1
    while lo < hi and expected[lo] < _MIN_EXPECTED_COUNT:
        expected[lo + 1] += expected[lo]
        observed[lo + 1] += observed[lo]
        lo += 1
    while hi > lo and expected[hi] < _MIN_EXPECTED_COUNT:
        expected[hi - 1] += expected[hi]
        observed[hi - 1] += observed[hi]
        hi -= 1
    return expected[lo : hi + 1], observed[lo : hi + 1]


def _density_points(source) -> tuple[np.ndarray, np.ndarray, float]:
    """(x, density, reliability floor) from a tabulation or a histogram."""
    if isinstance(source, BhpDistribution):
        floor = 10.0 * source.config.abs_tol if source.config is not None else 0.0
        return source.grid, source.pdf_values, floor
    if isinstance(source, HistogramDensity):
        return source.centers, source.densities, 0.0
    raise TypeError(
        f"expected BhpDistribution or HistogramDensity, got {type(source).__name__}"
    )


def tail_diagnostics(
    source,
    lower_window: tuple[float, float] = (-8.0, -4.0),
    upper_window: tuple[float, float] = (2.0, 4.0),
) -> TailDiagnostics:
    """Exponential-tail line fit below the mean, log-density curvature above.

    Points whose density is nonpositive (or, for a tabulation, below ten
    times the quadrature tolerance, where the log is pure noise) are dropped
    and the windows shrink accordingly; an empty usable window is an error.
    """
    x, dens, floor = _density_points(source)

    x_lo, d_lo = _usable_window(x, dens, lower_window, floor)
    if x_lo.size < 2:
        raise ValueError(f"no usable density in the lower window {lower_window}")
    log_lo = np.log(d_lo)
    slope, intercept = np.polyfit(x_lo, log_lo, 1)
    residuals = log_lo - (slope * x_lo + intercept)
    rms = float(np.sqrt(np.mean(residuals**2)))

    x_up, d_up = _usable_window(x, dens, upper_window, floor)
    if x_up.size < 3:
        raise ValueError(f"no usable density in the upper window {upper_window}")
    curvature = float(np.mean(_second_derivative(x_up, np.log(d_up))))

    return TailDiagnostics(
        slope_below=float(slope),
        residual_rms_below=rms,
        curvature_above=curvature,
        lower_window_used=(float(x_lo[0]), float(x_lo[-1])),
        upper_window_used=(float(x_up[0]), float(x_up[-1])),
    )


def _usable_window(
    x: np.ndarray, dens: np.ndarray, window: tuple[float, float], floor: float
) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = window
    inside = (x >= lo) & (x <= hi)
    usable = inside & (dens > max(floor, 0.0))
    return x[usable], dens[usable]


def _second_derivative(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Central divided second differences; reduces to diff(f, 2)/h^2 on uniform x."""
    h1 = x[1:-1] - x[:-2]
    h2 = x[2:] - x[1:-1]
    return 2.0 * (
        f[:-2] / (h1 * (h1 + h2)) - f[1:-1] / (h1 * h2) + f[2:] / (h2 * (h1 + h2))
    )


def qq_points(sample, reference: BhpDistribution, count: int) -> np.ndarray:
    """(empirical quantile, reference quantile) pairs at ranks (i - 0.5)/count."""
    arr = _checked_sample(sample)
    count = int(count)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    probs = (np.arange(count) + 0.5) / count
    empirical = np.quantile(arr, probs)
    ref = quantile(probs, reference)
    return np.column_stack([empirical, ref])


def gof_report(
    sample,
    reference: BhpDistribution,
    binning="auto",
    qq_count: int = 99,
) -> tuple[GofReport, HistogramDensity]:
    """Full collapse report; chi-square and tail fields are None when undefined.

    Sparse-data preconditions (too few expected counts, empty tail windows)
    are survey conditions of the sample, not errors of the comparison, so the
    affected fields degrade to None instead of failing the whole report.
    """
    hist = histogram_density(sample, binning=binning)
    ks, n = ks_distance(sample, reference)

    try:
        chi2, dof = chi_square(hist, reference)
    except ValueError:
        chi2, dof = None, None

    try:
        tails = tail_diagnostics(hist)
        slope, rms, curvature = (
            tails.slope_below,
            tails.residual_rms_below,
            tails.curvature_above,
        )
    except ValueError:
        slope, rms, curvature = None, None, None

    report = GofReport(
        ks_distance=ks,
        ks_n=n,
        chi_square=chi2,
        degrees_of_freedom=dof,
        tail_slope_below=slope,
        tail_residual_rms_below=rms,
        tail_curvature_above=curvature,
        qq_points=qq_points(sample, reference, qq_count),
    )
    return report, hist
