import os

_DISABLE_FLAG = "CHANPRED_DISABLE_NUMBA"


def _flag_set(name):
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _flag_set(_DISABLE_FLAG)


def jit(func):
    """Compile ``func`` in nopython mode, or return None when numba is missing."""
    if not HAVE_NUMBA:
        return None
    return numba.njit(cache=True, nogil=True)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
