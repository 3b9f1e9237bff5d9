"""Kernel selector: compiled extension when available, numpy otherwise.

Set CIDERIVE_PURE=1 to force the numpy implementations (useful for
benchmarking and for debugging suspected extension issues).
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("CIDERIVE_PURE") == "1":
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykernels

IMPL = _impl.IMPL
entropy_bits = _impl.entropy_bits
batch_entropy_rows = _impl.batch_entropy_rows
gamma_scores = _impl.gamma_scores
