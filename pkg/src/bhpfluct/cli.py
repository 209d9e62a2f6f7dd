"""Command-line surface: tabulate, sample, analyze, synth, spectrum.

Every output file starts with ``#`` comment lines echoing the tool version
and the full configuration, and is byte-identical across reruns with the
same inputs.  Exit codes: 0 success, 1 usage error, 2 data error, 3
numerical-convergence error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data_io import (
    PanelFileSpec,
    PanelFormatError,
    SynthConfig,
    load_price_panel,
    save_price_panel,
    synth_panel,
)
from .distribution import (
    GENERATOR_ID,
    QuadratureConfig,
    QuadratureConvergenceError,
    sample,
    tabulate,
)
from .empirics import gof_report
from .returns import pool_fluctuations, rescale_returns
from .spectrum import laplacian_eigenvalues, mode_table

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

_DEFAULT_GRID = (-12.0, 8.0, 2001)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _binning_arg(text: str):
    if text == "auto":
        return "auto"
    return int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="bhpfluct",
        description=(
            "Tabulate and sample the universal lattice fluctuation density, "
            "generate synthetic price panels, and quantify the collapse of "
            "panel fluctuations onto the reference curve."
        ),
    )
    parser.add_argument("--version", action="version", version=f"bhpfluct {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[], help="dump the lattice eigenvalue table")
    p.add_argument("--L", type=int, default=10, help="lattice side length (default 10)")
    p.add_argument("-o", "--output", required=True, help="output TSV path")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("tabulate", help="tabulate the density and CDF on a grid")
    p.add_argument("--L", type=int, default=10)
    p.add_argument(
        "--grid",
        nargs=3,
        type=float,
        default=list(_DEFAULT_GRID),
        metavar=("LO", "HI", "COUNT"),
        help="uniform grid specification (default -12 8 2001)",
    )
    _add_quadrature_flags(p)
    p.add_argument("-o", "--output", required=True, help="output TSV path")
    p.set_defaults(func=cmd_tabulate)

    p = sub.add_parser("sample", help="draw from the exact sampler")
    p.add_argument("--L", type=int, default=10)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0, help="stream seed (default 0)")
    p.add_argument("-o", "--output", required=True, help="output path, one value per line")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("synth", help="generate a synthetic price panel")
    p.add_argument("--mode", choices=("planted", "walk"), default="planted")
    p.add_argument("--stocks", type=int, default=30)
    p.add_argument("--days", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--fluctuations",
        choices=("bhp", "normal"),
        default="bhp",
        help="planted fluctuation source (default bhp)",
    )
    p.add_argument("--L", type=int, default=10, help="lattice side for bhp fluctuations")
    p.add_argument("--volatility", type=float, default=0.02, help="walk-mode volatility")
    p.add_argument("--transform-mode", choices=("magnitude", "signed"), default="magnitude")
    p.add_argument("--layout", choices=("long", "wide"), default="long")
    p.add_argument("-o", "--output", required=True, help="panel CSV path")
    p.add_argument("--planted-out", help="optional TSV path for the planted fluctuations")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("analyze", help="run the fluctuation pipeline against a panel")
    p.add_argument("--input", required=True, help="panel file path")
    p.add_argument("--layout", choices=("long", "wide"), default="long")
    p.add_argument("--date-format", default="%Y-%m-%d")
    p.add_argument("--missing-marker", default="")
    p.add_argument("--transform-mode", choices=("magnitude", "signed"), default="magnitude")
    p.add_argument("--min-n", type=int, default=10)
    p.add_argument("--sigma-floor", type=float, default=1e-12)
    p.add_argument("--binning", type=_binning_arg, default="auto", help="auto or a bin count")
    p.add_argument("--L", type=int, default=10)
    p.add_argument(
        "--grid",
        nargs=3,
        type=float,
        default=list(_DEFAULT_GRID),
        metavar=("LO", "HI", "COUNT"),
        help="reference tabulation grid (default -12 8 2001)",
    )
    _add_quadrature_flags(p)
    p.add_argument("--out-dir", required=True, help="directory for the report files")
    p.set_defaults(func=cmd_analyze)

    return parser


def _add_quadrature_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--x-max", type=float, default=None, help="override the certified truncation point")
    p.add_argument("--abs-tol", type=float, default=1e-10)
    p.add_argument("--max-subdivisions", type=int, default=200)


def _quadrature_config(args, spectrum) -> QuadratureConfig:
    if args.x_max is not None:
        return QuadratureConfig(
            x_max=args.x_max,
            abs_tol=args.abs_tol,
            max_subdivisions=args.max_subdivisions,
        )
    return QuadratureConfig.for_spectrum(
        spectrum, abs_tol=args.abs_tol, max_subdivisions=args.max_subdivisions
    )


def _header_lines(command: str, params: dict) -> list[str]:
    lines = [f"# bhpfluct {__version__}", f"# command: {command}"]
    lines.extend(f"# {key}: {value}" for key, value in params.items())
    return lines


def _write_table(path, header_lines: list[str], column_names: list[str], rows) -> None:
    lines = list(header_lines)
    lines.append("\t".join(column_names))
    lines.extend("\t".join(row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_spectrum(args) -> int:
    p, q, lam = mode_table(args.L)
    rows = (
        [str(i), str(int(pi)), str(int(qi)), repr(float(li))]
        for i, (pi, qi, li) in enumerate(zip(p, q, lam))
    )
    _write_table(
        args.output,
        _header_lines("spectrum", {"L": args.L, "N": args.L * args.L}),
        ["index", "p", "q", "lambda"],
        rows,
    )
    return EXIT_OK


def cmd_tabulate(args) -> int:
    lo, hi, count = args.grid
    spectrum = laplacian_eigenvalues(args.L)
    config = _quadrature_config(args, spectrum)
    dist = tabulate(spectrum, (lo, hi, int(count)), config)
    rows = (
        [repr(float(mu)), repr(float(pv)), repr(float(cv))]
        for mu, pv, cv in zip(dist.grid, dist.pdf_values, dist.cdf_values)
    )
    _write_table(
        args.output,
        _header_lines(
            "tabulate",
            {
                "L": args.L,
                "N": spectrum.N,
                "grid": f"{lo!r} {hi!r} {int(count)}",
                "x_max": repr(config.x_max),
                "abs_tol": repr(config.abs_tol),
                "max_subdivisions": config.max_subdivisions,
            },
        ),
        ["mu", "pdf", "cdf"],
        rows,
    )
    return EXIT_OK


def cmd_sample(args) -> int:
    spectrum = laplacian_eigenvalues(args.L)
    draws = sample(args.count, spectrum, seed=args.seed)
    lines = _header_lines(
        "sample",
        {
            "L": args.L,
            "count": args.count,
            "seed": args.seed,
            "generator": GENERATOR_ID,
        },
    )
    lines.extend(repr(float(v)) for v in draws)
    Path(args.output).write_text("\n".join(lines) + "\n")
    print(f"seed: {args.seed}")
    return EXIT_OK


def cmd_synth(args) -> int:
    config = SynthConfig(
        n_stocks=args.stocks,
        n_days=args.days,
        seed=args.seed,
        mode=args.mode,
        fluctuation_dist=args.fluctuations,
        lattice_side=args.L,
        volatility=args.volatility,
        transform_mode=args.transform_mode,
    )
    panel, planted = synth_panel(config)
    meta = {
        "command": "synth",
        "mode": config.mode,
        "stocks": config.n_stocks,
        "days": config.n_days,
        "seed": config.seed,
        "generator": GENERATOR_ID,
        "transform_mode": config.transform_mode,
    }
    if config.mode == "planted":
        meta["fluctuations"] = config.fluctuation_dist
        if config.fluctuation_dist == "bhp":
            meta["L"] = config.lattice_side
    else:
        meta["volatility"] = repr(config.volatility)
    save_price_panel(panel, args.output, layout=args.layout, meta=meta)

    if args.planted_out is not None:
        if planted is None:
            raise ValueError("--planted-out requires --mode planted")
        rows = (
            [str(panel.dates[i]), panel.tickers[j], repr(float(planted[i, j]))]
            for i in range(planted.shape[0])
            for j in range(planted.shape[1])
        )
        _write_table(
            args.planted_out,
            _header_lines("synth", meta),
            ["date", "ticker", "F"],
            rows,
        )
    print(f"seed: {args.seed}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    spec = PanelFileSpec(
        path=args.input,
        layout=args.layout,
        date_format=args.date_format,
        missing_marker=args.missing_marker,
    )
    panel = load_price_panel(spec)
    returns = rescale_returns(panel, mode=args.transform_mode)
    fluct = pool_fluctuations(returns, min_n=args.min_n, sigma_floor=args.sigma_floor)

    if fluct.values.size == 0:
        reasons: dict[str, int] = {}
        for _, reason in fluct.skipped_days:
            reasons[reason] = reasons.get(reason, 0) + 1
        summary = ", ".join(f"{k}: {v}" for k, v in sorted(reasons.items()))
        print(
            f"error: no usable days in panel ({summary or 'no days at all'})",
            file=sys.stderr,
        )
        return EXIT_DATA

    spectrum = laplacian_eigenvalues(args.L)
    config = _quadrature_config(args, spectrum)
    lo, hi, count = args.grid
    dist = tabulate(spectrum, (lo, hi, int(count)), config)
    report, hist = gof_report(fluct.values, dist, binning=args.binning)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    echo = {
        "input": str(args.input),
        "layout": args.layout,
        "transform_mode": args.transform_mode,
        "min_n": args.min_n,
        "sigma_floor": repr(args.sigma_floor),
        "binning": str(args.binning),
        "L": args.L,
        "grid": f"{lo!r} {hi!r} {int(count)}",
        "x_max": repr(config.x_max),
        "abs_tol": repr(config.abs_tol),
        "max_subdivisions": config.max_subdivisions,
        "universe_label": panel.universe_label,
    }
    header = _header_lines("analyze", echo)

    _write_table(
        out_dir / "fluctuations.tsv",
        header,
        ["date", "ticker", "F"],
        (
            [str(d), str(t), repr(float(v))]
            for d, t, v in zip(fluct.dates, fluct.tickers, fluct.values)
        ),
    )
    meta = dict(echo)
    meta["n_values"] = int(fluct.values.size)
    meta["n_retained_days"] = len(fluct.retained_days)
    meta["skipped_days"] = [
        {"date": str(d), "reason": r} for d, r in fluct.skipped_days
    ]
    (out_dir / "fluctuations_meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n"
    )

    _write_table(
        out_dir / "day_stats.tsv",
        header,
        ["date", "n_available", "mu", "sigma"],
        (
            [str(s.date), str(s.n_available), repr(s.mu), repr(s.sigma)]
            for s in fluct.retained_days
        ),
    )

    centers = hist.centers
    with np.errstate(divide="ignore"):
        log10_density = np.log10(hist.densities)
    reference = np.interp(centers, dist.grid, dist.pdf_values)
    _write_table(
        out_dir / "histogram.tsv",
        header,
        ["bin_center", "density", "log10_density", "reference_pdf"],
        (
            [repr(float(c)), repr(float(d)), repr(float(ld)), repr(float(rp))]
            for c, d, ld, rp in zip(centers, hist.densities, log10_density, reference)
        ),
    )

    gof = report.to_dict()
    gof["config"] = echo
    (out_dir / "gof.json").write_text(json.dumps(gof, indent=2, sort_keys=True) + "\n")

    print(f"ks_distance: {report.ks_distance!r}")
    print(f"n: {report.ks_n}")
    print(f"skipped_days: {len(fluct.skipped_days)}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except PanelFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except QuadratureConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
