"""Backend selection for the hot loops.

The compiled extension is used when it imports; set ``FPC_PURE_PYTHON=1`` to
force the numpy fallback (the test-suite runs both).
"""
import os

from . import _fallback

_FUNCS = (
    "mod_matmul",
    "gf2_matmul",
    "mod_mul_elementwise",
    "gf2_mul_elementwise",
    "mod_rref",
    "gf2_rref",
    "jacobi_singular_values",
)


def _load(name):
    if name == "python":
        return _fallback
    from . import _kernels  # noqa: F401  (raises ImportError when not built)

    return _kernels


def use_backend(name: str) -> str:
    """Switch backend at runtime ("compiled" or "python"); returns the old one."""
    global BACKEND
    mod = _load(name)
    old = BACKEND
    for fn in _FUNCS:
        globals()[fn] = getattr(mod, fn)
    BACKEND = name
    return old


def compiled_available() -> bool:
    try:
        _load("compiled")
    except ImportError:
        return False
    return True


BACKEND = "python"
if os.environ.get("FPC_PURE_PYTHON", "") not in ("", "0") or not compiled_available():
    use_backend("python")
else:
    use_backend("compiled")
