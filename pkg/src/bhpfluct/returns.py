"""Rescaled daily returns and per-day ensemble-normalized fluctuations.

For a panel of closing prices Y_i(t) the pipeline computes, per stock and
day, the raw return r = (Y(t+1) - Y(t)) / Y(t) and the rescaled return
r^(2/3).  The 2/3 power of a negative base is not real-valued under the
principal branch, so two readings are exposed:

    magnitude mode (default):  S = |r|^(2/3)  (the real value of (r^2)^(1/3))
    signed mode:               S = sign(r) |r|^(2/3)

Each day's ensemble of rescaled returns is then normalized by its own
cross-sectional mean and population standard deviation,

    F_i(t) = (S_i(t) - mu(t)) / sigma(t)

and the F values are pooled across days and stocks.  Days with too few
observations or a degenerate sigma are skipped and reported, never silently
dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TRANSFORM_MODES",
    "DayStats",
    "FluctuationSample",
    "PricePanel",
    "RescaledReturnPanel",
    "day_stats",
    "pool_fluctuations",
    "rescale_returns",
]

TRANSFORM_MODES = ("magnitude", "signed")


@dataclass(frozen=True)
class PricePanel:
    """Dates x tickers matrix of positive closing prices; NaN marks missing."""

    dates: np.ndarray
    tickers: tuple[str, ...]
    closes: np.ndarray
    universe_label: str = ""

    def __post_init__(self) -> None:
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        closes = np.asarray(self.closes, dtype=float)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "closes", closes)
        if dates.ndim != 1 or len(dates) < 1:
            raise ValueError("panel needs at least one date")
        if np.any(np.diff(dates).astype(int) <= 0):
            raise ValueError("dates must be strictly increasing")
        if closes.shape != (len(dates), len(self.tickers)):
            raise ValueError(
                f"closes shape {closes.shape} does not match "
                f"{len(dates)} dates x {len(self.tickers)} tickers"
            )
        present = np.isfinite(closes)
        if not np.all(closes[present] > 0.0):
            raise ValueError("all present closing prices must be positive")

    @property
    def n_dates(self) -> int:
        return len(self.dates)

    @property
    def n_tickers(self) -> int:
        return len(self.tickers)


@dataclass(frozen=True)
class RescaledReturnPanel:
    """Rescaled returns S_i(t), timestamped at t (one fewer date than prices)."""

    dates: np.ndarray
    tickers: tuple[str, ...]
    values: np.ndarray
    transform_mode: str


@dataclass(frozen=True)
class DayStats:
    """Cross-sectional ensemble statistics of one day's rescaled returns."""

    date: np.datetime64
    n_available: int
    mu: float
    sigma: float

    @property
    def usable(self) -> bool:
        return self.n_available >= 1


@dataclass
class FluctuationSample:
    """Pooled normalized fluctuations with their provenance and day statistics."""

    values: np.ndarray
    dates: np.ndarray
    tickers: np.ndarray
    retained_days: list[DayStats]
    skipped_days: list[tuple[np.datetime64, str]] = field(default_factory=list)

    @property
    def provenance(self) -> list[tuple[np.datetime64, str]]:
        return list(zip(self.dates, self.tickers))


def rescale_returns(panel: PricePanel, mode: str = "magnitude") -> RescaledReturnPanel:
    """Daily returns raised to the 2/3 power, elementwise, NaN where a price is missing."""
    if mode not in TRANSFORM_MODES:
        raise ValueError(f"transform mode must be one of {TRANSFORM_MODES}, got {mode!r}")
    if panel.n_dates < 2:
        raise ValueError("at least 2 dates are required to form returns")
    closes = panel.closes
    with np.errstate(invalid="ignore"):
        raw = (closes[1:] - closes[:-1]) / closes[:-1]
        magnitude = np.abs(raw) ** (2.0 / 3.0)
        values = magnitude if mode == "magnitude" else np.sign(raw) * magnitude
    return RescaledReturnPanel(
        dates=panel.dates[:-1],
        tickers=panel.tickers,
        values=values,
        transform_mode=mode,
    )


def _ensemble_stats(row: np.ndarray) -> tuple[int, float, float]:
    """(n, mean, population sigma) over the finite entries of one day's row.

    Sigma is evaluated two-pass (subtract the mean, then average squares):
    mathematically the population form sqrt(E S^2 - mu^2), but immune to the
    cancellation that would make a constant ensemble report sigma ~ 1e-9
    instead of 0 in double precision.
    """
    present = row[np.isfinite(row)]
    n = present.size
    if n == 0:
        return 0, float("nan"), float("nan")
    mu = float(np.mean(present))
    sigma = float(np.sqrt(np.mean((present - mu) ** 2)))
    return n, mu, sigma


def day_stats(returns: RescaledReturnPanel, date) -> DayStats:
    """Ensemble mean and population standard deviation for one day."""
    date = np.datetime64(date, "D")
    matches = np.nonzero(returns.dates == date)[0]
    if matches.size == 0:
        raise ValueError(f"date {date} not present in the return panel")
    n, mu, sigma = _ensemble_stats(returns.values[matches[0]])
    return DayStats(date=date, n_available=n, mu=mu, sigma=sigma)


def pool_fluctuations(
    returns: RescaledReturnPanel,
    min_n: int = 10,
    sigma_floor: float = 1e-12,
) -> FluctuationSample:
    """Normalize each retained day by its own ensemble statistics and pool.

    A day is retained when it has at least ``min_n`` observations and its
    ensemble sigma is at least ``sigma_floor``; every skipped day is recorded
    with the reason (``insufficient_ensemble`` or ``degenerate_sigma``).
    Pooled output is ordered by date, then ticker name.
    """
    if min_n < 1:
        raise ValueError(f"min_n must be >= 1, got {min_n}")
    if not (sigma_floor > 0.0):
        raise ValueError(f"sigma_floor must be positive, got {sigma_floor}")

    ticker_order = np.argsort(np.asarray(returns.tickers, dtype=object))
    sorted_tickers = np.asarray(returns.tickers, dtype=object)[ticker_order]

    pooled: list[np.ndarray] = []
    pooled_dates: list[np.ndarray] = []
    pooled_tickers: list[np.ndarray] = []
    retained: list[DayStats] = []
    skipped: list[tuple[np.datetime64, str]] = []

    for d, date in enumerate(returns.dates):
        row = returns.values[d, ticker_order]
        present = np.isfinite(row)
        n = int(present.sum())
        stats_n, mu, sigma = _ensemble_stats(row)
        if n < min_n:
            skipped.append((date, "insufficient_ensemble"))
            continue
        if sigma < sigma_floor:
            skipped.append((date, "degenerate_sigma"))
            continue
        pooled.append((row[present] - mu) / sigma)
        pooled_dates.append(np.repeat(date, n))
        pooled_tickers.append(sorted_tickers[present])
        retained.append(DayStats(date=date, n_available=stats_n, mu=mu, sigma=sigma))

    if pooled:
        values = np.concatenate(pooled)
        dates = np.concatenate(pooled_dates)
        tickers = np.concatenate(pooled_tickers)
    else:
        values = np.empty(0, dtype=float)
        dates = np.empty(0, dtype="datetime64[D]")
        tickers = np.empty(0, dtype=object)
    return FluctuationSample(
        values=values,
        dates=dates,
        tickers=tickers,
        retained_days=retained,
        skipped_days=skipped,
    )
