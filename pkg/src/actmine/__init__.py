"""Activity-travel pattern mining from categorized spatiotemporal time series.

The library turns per-person activity sequences into topological features
(sequency spectrum -> persistence landscape) and geometric features
(edit distance + agenda dissimilarity), clusters the population with an
affinity-propagation-initialized refinement, and produces validity metrics
and descriptive reports.
"""

__version__ = "0.1.0"

from .errors import ActmineError, ConfigError, SchemaError

__all__ = ["ActmineError", "ConfigError", "SchemaError", "__version__"]
