"""Figure rendering for phasemin CSV outputs.

Consumes only the documented CSV contracts (fg-curve, phase-diagram,
run-trajectory files); never touches phasemin library internals, so the
solver package runs fully without this one.
"""

from .render import FigureSpec, SchemaError, load_table, render

__version__ = "0.1.0"

__all__ = ["FigureSpec", "SchemaError", "load_table", "render", "__version__"]
