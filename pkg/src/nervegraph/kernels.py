"""Kernel dispatch: compiled extension when available, pure Python otherwise.

``BACKEND`` names the implementation in use. Both implementations stay
importable (``compiled`` may be ``None``) so tests and the benchmark can
compare them directly.
"""
from __future__ import annotations

import logging

from nervegraph import _kernels_py as python

logger = logging.getLogger(__name__)

try:
    from nervegraph import _kernels as compiled
except ImportError:  # extension not built
    compiled = None
    logger.debug("compiled kernels unavailable, using pure-Python fallback")

_impl = compiled if compiled is not None else python
BACKEND = "compiled" if compiled is not None else "python"

miniball_radius = _impl.miniball_radius
decomposable_edges = _impl.decomposable_edges
close_pair_count = _impl.close_pair_count
clayton_factor_logdensity = _impl.clayton_factor_logdensity
