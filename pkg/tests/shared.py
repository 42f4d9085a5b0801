"""Cached grids and z vectors shared between test modules (z at n = 4095 costs seconds)."""

from functools import lru_cache

from barycheb import binned, error_model


@lru_cache(maxsize=None)
def grid(n: int, layout: str = "0"):
    lay = binned.parse_layout(layout)
    return error_model.usual_grid(n) if lay is None else error_model.binned_grid(n, lay)


@lru_cache(maxsize=None)
def zvec(n: int, layout: str = "0"):
    return error_model.compute_z(grid(n, layout))
