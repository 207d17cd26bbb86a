"""Publication figures for sweep and condition-delta CSV artifacts."""

from .csvio import EmptyDataError, SchemaError
from .render import FigureJob, build_figure, render

__version__ = "0.1.0"
