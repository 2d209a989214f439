"""scikit-learn style wrapper around the exact distance engine.

Nothing is learned: ``fit`` validates the configuration and resolves the
overlap profiles, ``predict`` maps a column of times to squared distances.
This makes the engine usable inside pipelines and grid searches over ``x``
or the profile string.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .distance import annealed_distance_sq, infinite_time_exact
from .profiles import OverlapProfile, parse_profile, self_profile
from .validation import CircuitGeometry, check_engine_geometry


class AnnealedDistance(BaseEstimator):
    """Squared annealed distance as a function of time.

    Parameters
    ----------
    q, two_l, x : circuit geometry.
    profile : profile spec string (``"pair:beta=0.7"``) or an ``OverlapProfile``.
    self_profile_a, self_profile_b : optional denominators; default to the
        canonical self profile of ``profile``.
    """

    def __init__(self, q=2, two_l=20, x=1, profile="pair:beta=0.7",
                 self_profile_a=None, self_profile_b=None):
        self.q = q
        self.two_l = two_l
        self.x = x
        self.profile = profile
        self.self_profile_a = self_profile_a
        self.self_profile_b = self_profile_b

    def _resolve(self, spec):
        if spec is None or isinstance(spec, OverlapProfile):
            return spec
        return parse_profile(spec, self.two_l)

    def fit(self, X=None, y=None):
        geom = CircuitGeometry(self.q, self.two_l, self.x)
        check_engine_geometry(geom)
        cross = self._resolve(self.profile)
        sa = self._resolve(self.self_profile_a)
        if sa is None:
            sa = self_profile(cross, geom.two_l)
        sb = self._resolve(self.self_profile_b)
        self.geometry_ = geom
        self.profiles_ = (cross, sa, sa if sb is None else sb)
        self.infinite_time_ = infinite_time_exact(geom, *self.profiles_)
        return self

    def predict(self, X):
        """``X`` holds nonnegative integer times, as a 1-d array or one column."""
        check_is_fitted(self, "profiles_")
        arr = check_array(np.asarray(X).reshape(-1, 1), ensure_2d=True, dtype=None)
        times = arr.ravel()
        if not np.all(np.equal(np.mod(times, 1), 0)) or np.any(times < 0):
            raise ValueError("times must be nonnegative integers")
        return np.array(
            [annealed_distance_sq(self.geometry_, int(t), *self.profiles_) for t in times]
        )

    def transform(self, X):
        return self.predict(X).reshape(-1, 1)

    def score(self, X, y):
        """Negative max absolute deviation from reference distances ``y``."""
        return -float(np.max(np.abs(self.predict(X) - np.asarray(y, dtype=float))))
