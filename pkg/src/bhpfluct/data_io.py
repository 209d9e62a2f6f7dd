"""Price-panel file ingestion and synthetic fixture generation.

Two strict text layouts are supported, both CSV with an optional block of
``#`` comment lines before the header:

    long:  header ``date,ticker,close``, one observation per line
    wide:  header ``date,<ticker>,...``, one date per line

Dates are parsed strictly against the declared format (ISO-8601 by
default); a configurable missing marker (default: empty field) makes absent
observations explicit.  Duplicate (date, ticker) keys and nonpositive
prices are errors that name the offending line.

The synthetic generators exist so the pipeline can be tested against known
truth: ``planted`` panels are built by inverting the fluctuation pipeline
from chosen per-day statistics and fluctuations (whose exact values are
returned), ``walk`` panels are plain geometric random walks.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import numpy as np

from . import __version__
from .distribution import sample as bhp_sample
from .returns import TRANSFORM_MODES, PricePanel
from .spectrum import laplacian_eigenvalues

__all__ = [
    "PanelFileSpec",
    "PanelFormatError",
    "SynthConfig",
    "load_price_panel",
    "save_price_panel",
    "synth_panel",
]

# Independent deterministic stream for signs/paths: flipping the high word of
# the 128-bit philox key can never collide with a fluctuation stream, which
# is keyed by the plain seed.
_MACHINERY_KEY_OFFSET = 1 << 64

_SYNTH_MODES = ("planted", "walk")
_FLUCTUATION_DISTS = ("bhp", "normal")


class PanelFormatError(ValueError):
    """Malformed panel file; message carries the path and line number."""


@dataclass(frozen=True)
class PanelFileSpec:
    """Declared layout of a price-panel file (nothing is guessed)."""

    path: str | Path
    layout: str = "long"
    date_format: str = "%Y-%m-%d"
    missing_marker: str = ""

    def __post_init__(self) -> None:
        if self.layout not in ("long", "wide"):
            raise ValueError(f"layout must be 'long' or 'wide', got {self.layout!r}")


def load_price_panel(spec: PanelFileSpec) -> PricePanel:
    """Parse a panel file into a validated PricePanel."""
    path = Path(spec.path)
    lines = path.read_text().splitlines()
    rows: list[tuple[int, list[str]]] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parsed = next(csv.reader([line]))
        rows.append((lineno, [cell.strip() for cell in parsed]))
    if not rows:
        raise PanelFormatError(f"{path}: no header found")

    header_line, header = rows[0]
    body = rows[1:]
    if spec.layout == "long":
        observations, tickers = _parse_long(path, spec, header_line, header, body)
    else:
        observations, tickers = _parse_wide(path, spec, header_line, header, body)
    if not observations:
        raise PanelFormatError(f"{path}: no observations")

    dates = sorted({date for date, _, _ in observations})
    date_index = {d: i for i, d in enumerate(dates)}
    ticker_index = {t: j for j, t in enumerate(tickers)}
    closes = np.full((len(dates), len(tickers)), np.nan)
    for date, ticker, close in observations:
        closes[date_index[date], ticker_index[ticker]] = close
    return PricePanel(
        dates=np.array(dates, dtype="datetime64[D]"),
        tickers=tuple(tickers),
        closes=closes,
        universe_label=path.stem,
    )


def _parse_long(path, spec, header_line, header, body):
    if [h.lower() for h in header] != ["date", "ticker", "close"]:
        raise PanelFormatError(
            f"{path}:{header_line}: expected header 'date,ticker,close', got {','.join(header)!r}"
        )
    observations = []
    tickers: list[str] = []
    seen: set[tuple] = set()
    for lineno, cells in body:
        if len(cells) != 3:
            raise PanelFormatError(f"{path}:{lineno}: expected 3 fields, got {len(cells)}")
        date = _parse_date(path, spec, lineno, cells[0])
        ticker = cells[1]
        if not ticker:
            raise PanelFormatError(f"{path}:{lineno}: empty ticker")
        key = (date, ticker)
        if key in seen:
            raise PanelFormatError(f"{path}:{lineno}: duplicate observation for {ticker} on {date}")
        seen.add(key)
        if ticker not in tickers:
            tickers.append(ticker)
        close = _parse_close(path, spec, lineno, cells[2])
        if close is not None:
            observations.append((date, ticker, close))
    return observations, tickers


def _parse_wide(path, spec, header_line, header, body):
    if not header or header[0].lower() != "date":
        raise PanelFormatError(f"{path}:{header_line}: wide header must start with 'date'")
    tickers = header[1:]
    if not tickers or any(not t for t in tickers):
        raise PanelFormatError(f"{path}:{header_line}: wide header needs nonempty ticker columns")
    if len(set(tickers)) != len(tickers):
        raise PanelFormatError(f"{path}:{header_line}: duplicate ticker columns")
    observations = []
    seen_dates: set = set()
    for lineno, cells in body:
        if len(cells) != len(tickers) + 1:
            raise PanelFormatError(
                f"{path}:{lineno}: expected {len(tickers) + 1} fields, got {len(cells)}"
            )
        date = _parse_date(path, spec, lineno, cells[0])
        if date in seen_dates:
            raise PanelFormatError(f"{path}:{lineno}: duplicate date {date}")
        seen_dates.add(date)
        for ticker, cell in zip(tickers, cells[1:]):
            close = _parse_close(path, spec, lineno, cell)
            if close is not None:
                observations.append((date, ticker, close))
    return observations, list(tickers)


def _parse_date(path, spec, lineno, cell):
    try:
        return np.datetime64(datetime.strptime(cell, spec.date_format).date(), "D")
    except ValueError as exc:
        raise PanelFormatError(f"{path}:{lineno}: bad date {cell!r}: {exc}") from None


def _parse_close(path, spec, lineno, cell):
    if cell == spec.missing_marker:
        return None
    try:
        value = float(cell)
    except ValueError:
        raise PanelFormatError(f"{path}:{lineno}: bad close {cell!r}") from None
    if not math.isfinite(value) or value <= 0.0:
        raise PanelFormatError(f"{path}:{lineno}: nonpositive close {cell!r}")
    return value


def save_price_panel(
    panel: PricePanel,
    path: str | Path,
    layout: str = "long",
    meta: dict | None = None,
) -> None:
    """Write a panel in the given layout, with a comment header echoing ``meta``."""
    if layout not in ("long", "wide"):
        raise ValueError(f"layout must be 'long' or 'wide', got {layout!r}")
    path = Path(path)
    lines = [f"# bhpfluct {__version__}"]
    for key, value in (meta or {}).items():
        lines.append(f"# {key}: {value}")
    if layout == "long":
        lines.append("date,ticker,close")
        for i, date in enumerate(panel.dates):
            for j, ticker in enumerate(panel.tickers):
                close = panel.closes[i, j]
                if np.isfinite(close):
                    lines.append(f"{date},{ticker},{float(close)!r}")
    else:
        lines.append("date," + ",".join(panel.tickers))
        for i, date in enumerate(panel.dates):
            cells = [
                repr(float(c)) if np.isfinite(c) else ""
                for c in panel.closes[i]
            ]
            lines.append(f"{date}," + ",".join(cells))
    path.write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class SynthConfig:
    """Configuration of the synthetic panel generators."""

    n_stocks: int
    n_days: int
    seed: int
    mode: str = "planted"
    fluctuation_dist: str = "bhp"
    lattice_side: int = 10
    volatility: float = 0.02
    transform_mode: str = "magnitude"

    def __post_init__(self) -> None:
        if self.n_stocks < 2:
            raise ValueError(f"n_stocks must be >= 2, got {self.n_stocks}")
        if self.n_days < 3:
            raise ValueError(f"n_days must be >= 3, got {self.n_days}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        if self.mode not in _SYNTH_MODES:
            raise ValueError(f"mode must be one of {_SYNTH_MODES}, got {self.mode!r}")
        if self.fluctuation_dist not in _FLUCTUATION_DISTS:
            raise ValueError(
                f"fluctuation_dist must be one of {_FLUCTUATION_DISTS}, "
                f"got {self.fluctuation_dist!r}"
            )
        if self.volatility < 0.0:
            raise ValueError(f"volatility must be >= 0, got {self.volatility}")
        if self.transform_mode not in TRANSFORM_MODES:
            raise ValueError(
                f"transform_mode must be one of {TRANSFORM_MODES}, "
                f"got {self.transform_mode!r}"
            )


def synth_panel(config: SynthConfig) -> tuple[PricePanel, np.ndarray | None]:
    """Deterministic synthetic panel; planted mode also returns the true fluctuations.

    Planted construction: draw fluctuations (BHP or standard normal),
    re-standardize each day to mean 0 / population std 1, combine with smooth
    positive mean and sigma paths into rescaled returns S = mu + sigma * F,
    then invert the rescaling to prices (|r| = S^(3/2) with a deterministic
    auxiliary sign stream in magnitude mode, r = sign(S)|S|^(3/2) in signed
    mode).  Pooling the panel back through the pipeline reproduces the
    returned fluctuation matrix exactly, up to float round-off.
    """
    machinery = np.random.Generator(
        np.random.Philox(key=config.seed + _MACHINERY_KEY_OFFSET)
    )
    n_return_days = config.n_days - 1
    dates = np.datetime64("2000-01-03", "D") + np.arange(config.n_days)
    tickers = tuple(f"S{i:02d}" for i in range(config.n_stocks))

    if config.mode == "walk":
        steps = config.volatility * machinery.standard_normal(
            (n_return_days, config.n_stocks)
        )
        closes = 100.0 * np.vstack(
            [np.ones(config.n_stocks), np.exp(np.cumsum(steps, axis=0))]
        )
        panel = PricePanel(
            dates=dates, tickers=tickers, closes=closes, universe_label="synthetic-walk"
        )
        return panel, None

    count = n_return_days * config.n_stocks
    if config.fluctuation_dist == "bhp":
        spectrum = laplacian_eigenvalues(config.lattice_side)
        flat = bhp_sample(count, spectrum, seed=config.seed)
    else:
        fluct_rng = np.random.Generator(np.random.Philox(key=config.seed))
        flat = fluct_rng.standard_normal(count)
    planted = flat.reshape(n_return_days, config.n_stocks)

    day_mean = planted.mean(axis=1, keepdims=True)
    day_std = np.sqrt(np.mean((planted - day_mean) ** 2, axis=1, keepdims=True))
    if np.any(day_std == 0.0):
        raise ValueError("degenerate fluctuation draw: a day has zero spread")
    planted = (planted - day_mean) / day_std

    t = np.arange(n_return_days)
    mu_path = 0.3 + 0.03 * np.sin(2.0 * np.pi * t / 250.0)
    sigma_path = 0.015 + 0.003 * np.cos(2.0 * np.pi * t / 250.0)
    rescaled = mu_path[:, None] + sigma_path[:, None] * planted

    if config.transform_mode == "magnitude":
        if np.any(rescaled <= 0.0):
            raise ValueError(
                "planted rescaled returns not strictly positive; magnitude-mode "
                "inversion is undefined (extreme fluctuation draw)"
            )
        signs = 2.0 * machinery.integers(0, 2, size=rescaled.shape) - 1.0
        returns = signs * rescaled**1.5
    else:
        returns = np.sign(rescaled) * np.abs(rescaled) ** 1.5
    if np.any(np.abs(returns) >= 1.0):
        raise ValueError("planted returns reach -100%; prices would go nonpositive")

    closes = 100.0 * np.vstack(
        [np.ones(config.n_stocks), np.cumprod(1.0 + returns, axis=0)]
    )
    panel = PricePanel(
        dates=dates,
        tickers=tickers,
        closes=closes,
        universe_label=f"synthetic-planted-{config.fluctuation_dist}",
    )
    return panel, planted
