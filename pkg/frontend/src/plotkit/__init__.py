"""Read-only figure pipeline for the dead-core laboratory CSV reports."""

__version__ = "0.1.0"

from .render import SCHEMAS, PlotJob, RenderResult, SchemaError, render
