"""Select the compiled kernels when available, else the pure-Python ones."""
from . import _fallback

try:
    from . import _kernels as _impl
    COMPILED = True
except ImportError:
    _impl = _fallback
    COMPILED = False

hessenberg_eigvals = _impl.hessenberg_eigvals
backward_recurrence = _impl.backward_recurrence

__all__ = ["COMPILED", "hessenberg_eigvals", "backward_recurrence"]
