"""Input validation helpers shared by the estimators and free functions."""

from numbers import Integral, Real

import numpy as np
from sklearn.utils.validation import check_array


def check_vector(v, name="v", allow_empty=False):
    """Return ``v`` as a finite 1-d float array."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0 and not allow_empty:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_matrix(A, name="A", min_rows=1, min_cols=1):
    """Return ``A`` as a finite 2-d float array (rows are samples)."""
    try:
        arr = check_array(
            A,
            dtype=np.float64,
            ensure_2d=True,
            ensure_min_samples=min_rows,
            ensure_min_features=min_cols,
            ensure_all_finite=True,
        )
    except TypeError:  # older scikit-learn
        arr = check_array(
            A,
            dtype=np.float64,
            ensure_2d=True,
            ensure_min_samples=min_rows,
            ensure_min_features=min_cols,
            force_all_finite=True,
        )
    return arr


def check_points(T, name="T", dim=None):
    """A finite nonempty list of vectors as an ``(m, n)`` array."""
    arr = np.asarray(T, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"{name} must be a nonempty list of vectors")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    if dim is not None and arr.shape[1] != dim:
        raise ValueError(f"{name} has dimension {arr.shape[1]}, expected {dim}")
    return arr


def check_int(x, name, low=None, high=None):
    if isinstance(x, bool) or not isinstance(x, (Integral, np.integer)):
        if isinstance(x, (float, np.floating)) and float(x).is_integer():
            x = int(x)
        else:
            raise TypeError(f"{name} must be an integer, got {x!r}")
    x = int(x)
    if low is not None and x < low:
        raise ValueError(f"{name} must be >= {low}, got {x}")
    if high is not None and x > high:
        raise ValueError(f"{name} must be <= {high}, got {x}")
    return x


def check_real(x, name, low=None, high=None, strict_low=False):
    if isinstance(x, bool) or not isinstance(x, (Real, np.floating, np.integer)):
        raise TypeError(f"{name} must be a real number, got {x!r}")
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"{name} must be finite")
    if low is not None:
        if strict_low and x <= low:
            raise ValueError(f"{name} must be > {low}, got {x}")
        if not strict_low and x < low:
            raise ValueError(f"{name} must be >= {low}, got {x}")
    if high is not None and x > high:
        raise ValueError(f"{name} must be <= {high}, got {x}")
    return x
