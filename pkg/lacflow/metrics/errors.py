"""Primitive accuracy measures; every report table is composed from these."""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

from lacflow.constants import NEAR_ZERO_PU
from lacflow.exceptions import EmptyFilter, Undefined


class FilteredError(NamedTuple):
    eps: float
    n_included: int
    n_near_zero: int = 0


class AbsDeviation(NamedTuple):
    sad: float
    mean: float
    n: int


def _same_length(*arrays: np.ndarray) -> None:
    if len({a.size for a in arrays}) != 1:
        raise ValueError("input vectors must have the same length")


def filtered_mape(
    model_vals,
    ac_vals,
    filter_vals,
    tol: float,
    *,
    near_zero: float = NEAR_ZERO_PU,
) -> FilteredError:
    """Mean absolute relative error over entries with |filter| >= tol.

    Entries whose AC value is within ``near_zero`` of zero are skipped and counted in
    ``n_near_zero``.

    Raises:
        EmptyFilter: no entry survives the filter
    """
    model = np.asarray(model_vals, dtype=float).ravel()
    ac = np.asarray(ac_vals, dtype=float).ravel()
    filt = np.asarray(filter_vals, dtype=float).ravel()
    _same_length(model, ac, filt)
    passes = np.abs(filt) >= tol
    nonzero = np.abs(ac) > near_zero
    included = passes & nonzero
    n = int(included.sum())
    if n == 0:
        raise EmptyFilter(f"no values pass tolerance {tol}")
    eps = float(np.mean(np.abs(model[included] - ac[included]) / np.abs(ac[included])))
    return FilteredError(eps, n, int((passes & ~nonzero).sum()))


def improvement(eps_a: float, eps_b: float) -> float:
    """Relative improvement of model b over baseline a: (eps_a - eps_b) / eps_a.

    Raises:
        Undefined: baseline error is zero
    """
    if eps_a == 0:
        raise Undefined("improvement over a zero-error baseline is undefined")
    return (eps_a - eps_b) / eps_a


def abs_dev_stats(model_vals, ac_vals, mask: Optional[np.ndarray] = None) -> AbsDeviation:
    """Sum and mean of absolute deviations over ``mask`` (all entries when None).

    Raises:
        EmptyFilter: the mask selects nothing
    """
    model = np.asarray(model_vals, dtype=float).ravel()
    ac = np.asarray(ac_vals, dtype=float).ravel()
    _same_length(model, ac)
    keep = np.ones(model.size, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    n = int(keep.sum())
    if n == 0:
        raise EmptyFilter("absolute deviation over an empty selection")
    sad = float(np.sum(np.abs(model[keep] - ac[keep])))
    return AbsDeviation(sad, sad / n, n)
