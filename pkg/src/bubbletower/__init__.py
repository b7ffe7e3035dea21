"""bubbletower: a numerical laboratory for radial critical wave equations,
equivariant wave maps and the radial Yang-Mills reduction.

Subpackages follow the pipeline: models -> grid -> solver -> diagnostics ->
selector / bubbles, with a batch CLI on top.  The leapfrog inner loop runs
through a compiled extension when available (see bubbletower._core).
"""

__version__ = "0.1.0"

from . import models, grid, solver, diagnostics, selector, bubbles, data  # noqa: F401
from ._core import HAVE_COMPILED, USING_COMPILED  # noqa: F401
