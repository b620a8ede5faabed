import os

DEFAULT_DENSE_LIMIT = 500
EPS_SING = 1e-14


def dense_limit():
    """Largest matrix dimension allowed for dense reconstructions.

    Overridden by the ``TRICFRAC_DENSE_LIMIT`` environment variable.
    """
    raw = os.environ.get("TRICFRAC_DENSE_LIMIT")
    if raw is None:
        return DEFAULT_DENSE_LIMIT
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"TRICFRAC_DENSE_LIMIT must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("TRICFRAC_DENSE_LIMIT must be positive")
    return value
