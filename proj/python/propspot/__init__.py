"""Propaganda span identification and technique classification toolkit."""

try:
    from ._propspot import *  # noqa: F401,F403
    from ._propspot import __doc__ as _doc
except ImportError:
    from _propspot import *  # noqa: F401,F403
    from _propspot import __doc__ as _doc

__doc__ = _doc
__version__ = "0.1.0"
