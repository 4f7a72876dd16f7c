"""Select the scoring kernels at import time.

The compiled extension is used when it imports cleanly. Setting
``PEER_RANK_BACKEND=python`` forces the pure-Python kernels.
"""
import logging
import os

from . import _pure

log = logging.getLogger(__name__)

_requested = os.environ.get("PEER_RANK_BACKEND", "auto").lower()

compiled = None
if _requested != "python":
    try:
        from . import _kernels as compiled
    except ImportError:
        if _requested == "compiled":
            raise
        log.debug("compiled kernels unavailable, using pure-Python fallback")

active = compiled if compiled is not None else _pure
BACKEND = "compiled" if compiled is not None else "python"

score_review = active.score_review
apply_round = active.apply_round
