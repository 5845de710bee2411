"""Sparse goal-conditioned value completion on graphs with greedy-planner audits.

The compiled extension carries the full API; this package re-exports it.
"""

try:
    from ._pdeplan import *  # noqa: F401,F403  (installed package layout)
    from ._pdeplan import __doc__ as _doc
except ImportError:  # extension on sys.path (in-tree test runs)
    from _pdeplan import *  # noqa: F401,F403
    from _pdeplan import __doc__ as _doc

__doc__ = _doc
__version__ = "0.1.0"
