"""Per-layer rank selection for SVD-based network compression.

Given a network description, the package builds per-layer rank-accuracy
curves, fits a linear complexity model, maps complexity budgets to rank
configurations, and searches a hierarchical candidate space for the
configuration that maximizes an accuracy metric inside a complexity
window.  See the README for the CLI and file formats.
"""

__version__ = "0.1.0"
