"""sparse-carath - sparse convex combinations and the equilibrium, subgraph and geometry searches built on them."""

__version__ = "0.1.0"
__author__ = "Developer"
__email__ = "dev@example.com"
