"""Movable-antenna channel simulation toolkit."""

try:
    from ._machansim import *  # noqa: F401,F403
    from . import _machansim as _core
except ImportError:  # pragma: no cover - in-tree builds put the module at top level
    from _machansim import *  # noqa: F401,F403
    import _machansim as _core

__all__ = [name for name in dir(_core) if not name.startswith("_")]
