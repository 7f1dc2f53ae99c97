"""Latent-dynamics surrogates for parameterized PDEs.

Generate trajectory datasets from small 1D reference solvers, train
liquid/ODE latent models, run chunked full-grid inference, and evaluate
predictions. All operations are deterministic for fixed seeds.
"""

try:
    # Installed layout: the compiled module sits inside this package.
    from . import _lfld as _impl
except ImportError:
    # Development layout: the compiled module is on PYTHONPATH from the
    # CMake build tree, next to (not inside) this pure-python package.
    import _lfld as _impl

from_impl = [name for name in dir(_impl) if not name.startswith("_")]
globals().update({name: getattr(_impl, name) for name in from_impl})

__all__ = sorted(from_impl)
__version__ = "0.1.0"

del from_impl, _impl
