"""Universal lattice fluctuation density and stock-fluctuation collapse toolkit.

The package realizes the non-parametric BHP probability density (the
order-parameter fluctuation law of the two-dimensional XY model under the
spin-wave approximation) by characteristic-function inversion over the
periodic-lattice Laplacian spectrum, provides an exact sampler for it, and
implements the cross-sectional pipeline that maps a panel of daily closing
prices onto pooled normalized fluctuations, together with goodness-of-fit
diagnostics quantifying how well those fluctuations collapse onto the
reference density.
"""

__version__ = "0.1.0"

from .spectrum import (
    LatticeSpectrum,
    laplacian_eigenvalues,
    mode_table,
    variance_prefactor,
)
from .distribution import (
    GENERATOR_ID,
    BhpDistribution,
    GumbelApprox,
    QuadratureConfig,
    QuadratureConvergenceError,
    cdf,
    evaluate_pdf,
    gumbel_approx_pdf,
    moments,
    quantile,
    sample,
    tabulate,
)
from .returns import (
    TRANSFORM_MODES,
    DayStats,
    FluctuationSample,
    PricePanel,
    RescaledReturnPanel,
    day_stats,
    pool_fluctuations,
    rescale_returns,
)
from .empirics import (
    GofReport,
    HistogramDensity,
    TailDiagnostics,
    chi_square,
    gof_report,
    histogram_density,
    ks_distance,
    qq_points,
    tail_diagnostics,
)
from .data_io import (
    PanelFileSpec,
    PanelFormatError,
    SynthConfig,
    load_price_panel,
    save_price_panel,
    synth_panel,
)

__all__ = [
    "__version__",
    "GENERATOR_ID",
    "TRANSFORM_MODES",
    "BhpDistribution",
    "DayStats",
    "FluctuationSample",
    "GofReport",
    "GumbelApprox",
    "HistogramDensity",
    "LatticeSpectrum",
    "PanelFileSpec",
    "PanelFormatError",
    "PricePanel",
    "QuadratureConfig",
    "QuadratureConvergenceError",
    "RescaledReturnPanel",
    "SynthConfig",
    "TailDiagnostics",
    "cdf",
    "chi_square",
    "day_stats",
    "evaluate_pdf",
    "gof_report",
    "gumbel_approx_pdf",
    "histogram_density",
    "ks_distance",
    "laplacian_eigenvalues",
    "load_price_panel",
    "mode_table",
    "moments",
    "pool_fluctuations",
    "qq_points",
    "quantile",
    "rescale_returns",
    "sample",
    "save_price_panel",
    "synth_panel",
    "tabulate",
    "variance_prefactor",
]
