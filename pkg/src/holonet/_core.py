"""Kernel backend selection.

The compiled extension is used when importable; ``HOLONET_PURE=1`` forces
the pure-Python fallback (used by the benchmark and the backend tests).
"""
import os

from holonet import _fallback

BACKEND = "python"
kernels = _fallback

if not os.environ.get("HOLONET_PURE"):
    try:
        from holonet import _kernels as kernels  # noqa: F811

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        kernels = _fallback

greedy_net = kernels.greedy_net
gauge2d = kernels.gauge2d
