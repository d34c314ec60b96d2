"""Figure rendering for momentum-lab sweep tables."""

__version__ = "0.1.0"

from .render import FigureSpec, aggregate, read_sweep_rows, render

__all__ = ["FigureSpec", "aggregate", "read_sweep_rows", "render", "__version__"]
