"""Search-kernel selection: compiled extension when available, else pure Python.

Set ``TEMPMOD_SEARCH_BACKEND=pure`` (or ``compiled``) to force a backend;
the default prefers the compiled kernel.
"""

from __future__ import annotations

import os

from ._search_py import run_search as run_search_pure

try:
    from ._search_cy import run_search as run_search_compiled
except ImportError:
    run_search_compiled = None


def active_backend() -> str:
    forced = os.environ.get("TEMPMOD_SEARCH_BACKEND", "").lower()
    if forced == "pure":
        return "pure"
    if forced == "compiled":
        if run_search_compiled is None:
            raise RuntimeError("compiled search kernel requested but not built")
        return "compiled"
    return "compiled" if run_search_compiled is not None else "pure"


def get_kernel():
    return run_search_compiled if active_backend() == "compiled" else run_search_pure
