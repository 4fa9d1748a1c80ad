"""Kernel backend selection.

The compiled extension is preferred; the pure-Python module is a drop-in
replacement with identical numerical behavior. ``BACKEND`` reports which
one is live; ``benchmarks/bench_backends.py`` compares their speed.
"""

from . import _fallback

try:
    from . import _native as _impl

    BACKEND = "native"
except ImportError:  # extension not built
    _impl = _fallback
    BACKEND = "python"

ray_feature_samples = _impl.ray_feature_samples
chebyshev_ring_distance = _impl.chebyshev_ring_distance
felzenszwalb_labels = _impl.felzenszwalb_labels

__all__ = [
    "BACKEND",
    "ray_feature_samples",
    "chebyshev_ring_distance",
    "felzenszwalb_labels",
]
