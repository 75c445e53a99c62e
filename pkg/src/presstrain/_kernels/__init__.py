"""Hot-loop kernels with backend selection at import time.

The compiled Cython extension is preferred; the pure-Python module is a
drop-in fallback producing bit-identical results.  Set PRESSTRAIN_PURE_KERNELS=1
to force the fallback (used by the benchmark and the parity tests).
"""

import os

from . import _pure

if os.environ.get("PRESSTRAIN_PURE_KERNELS"):
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _speed as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

track_hold = _impl.track_hold
play_round = _impl.play_round

__all__ = ["BACKEND", "track_hold", "play_round", "_pure"]
