"""Numerical tolerances used by every predicate and decomposition."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Bundle of the three cutoffs that control all rank/comparison decisions.

    rank_rtol : singular values below ``rank_rtol * sigma_max`` are treated
        as zero when computing pseudoinverses and ranks.
    psd_atol : eigenvalue floor for positive-semidefiniteness tests,
        applied relative to ``1 + ||M||``.
    eq_atol : entrywise/operator-norm floor for matrix equality tests,
        applied relative to ``1 + scale``.
    """

    rank_rtol: float = 1e-10
    psd_atol: float = 1e-9
    eq_atol: float = 1e-9

    def __post_init__(self):
        for name in ("rank_rtol", "psd_atol", "eq_atol"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must lie strictly between 0 and 1, got {v}")


DEFAULT = Tolerances()

#: Named presets selectable via the MOMENTFORGE_TOL_PROFILE environment
#: variable or the CLI --tol-profile flag.
PROFILES = {
    "default": DEFAULT,
    "strict": Tolerances(rank_rtol=1e-12, psd_atol=1e-11, eq_atol=1e-11),
    "loose": Tolerances(rank_rtol=1e-8, psd_atol=1e-7, eq_atol=1e-7),
}


def profile(name: str) -> Tolerances:
    try:
        return PROFILES[name]
    except KeyError:
        raise KeyError(f"unknown tolerance profile {name!r}; choose from {sorted(PROFILES)}")
