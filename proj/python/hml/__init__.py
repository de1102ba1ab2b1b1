"""Hermite moving averages: chaos calculus, process simulation, limit-theorem
verification. Thin wrapper over the compiled _hml extension."""

try:
    from ._hml import *  # noqa: F401,F403
    from ._hml import __version__  # noqa: F401
except ImportError:  # build-tree layout: extension sits next to this package
    from _hml import *  # type: ignore # noqa: F401,F403
    from _hml import __version__  # type: ignore # noqa: F401
