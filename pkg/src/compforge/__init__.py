"""compforge: design-space pools, performance analysis, and configuration recommendation."""

__version__ = "0.1.0"
