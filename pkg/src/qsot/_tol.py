import os

DEFAULT_TOL = 1e-10
ENV_VAR = "QSOT_DEFAULT_TOL"


def default_tol():
    """Tolerance used by boolean checks when none is passed explicitly.

    Reads ``QSOT_DEFAULT_TOL`` on every call so the override also applies to
    long-lived processes that set it late.
    """
    raw = os.environ.get(ENV_VAR)
    if raw is None or raw.strip() == "":
        return DEFAULT_TOL
    value = float(raw)
    if not value > 0:
        raise ValueError(f"{ENV_VAR} must be a positive number, got {raw!r}")
    return value


def resolve_tol(tol):
    return default_tol() if tol is None else float(tol)
