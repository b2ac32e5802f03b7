"""Figure rendering for oscsim harness CSV outputs."""

from .render import (
    EmptyData,
    MissingColumn,
    PlotError,
    PlotSpec,
    RenderResult,
    fit_loglog_slope,
    read_csv_columns,
    render,
)

__version__ = "0.1.0"
