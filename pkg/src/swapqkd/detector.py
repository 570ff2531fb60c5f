"""Threshold single-photon detector model with efficiency and dark counts.

A threshold detector reports only click / no-click.  With effective
efficiency ``eta`` (intrinsic efficiency times channel transmission) and
dark-count probability ``dark``, the no-click probability for ``i``
incident photons is

    P(q=0 | i) = (1 - dark) * (1 - eta * (1 - dark))**i

Note the ``(1 - dark)`` factor *inside* the bracket.  This is implemented
verbatim; it differs from the more common ``(1 - dark) * (1 - eta)**i`` by
terms of order ``eta * dark`` per photon.  A side effect of the verbatim
form is that P(q=1|i) is not monotone in ``dark`` once
``eta * (1 - dark) * (i + 1) > 1`` (e.g. eta=1, i=1); at the operating
points used here (eta well below 1, dark below 1e-2) the difference is
negligible and monotonicity holds.

Four detectors at a station are independent, so pattern likelihoods are
plain products of the four marginals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

__all__ = [
    "ClickPattern",
    "PhotonCountPattern",
    "DetectorParams",
    "ImpossiblePatternError",
    "EvidenceUnderflowError",
    "p_no_click",
    "p_click",
    "p_pattern",
    "bayes_invert",
]

#: Evidence below this is treated as numerical underflow rather than a
#: structurally impossible pattern.
EVIDENCE_FLOOR = 1e-300


class ImpossiblePatternError(ValueError):
    """The conditioning click pattern has exactly zero probability."""


class EvidenceUnderflowError(ArithmeticError):
    """The conditioning click pattern has probability below EVIDENCE_FLOOR."""


class ClickPattern(NamedTuple):
    """Threshold outcomes (0 = no click, 1 = click) at four detectors.

    At a Bell-measurement station the order is (q, r, s, t) =
    (H at port 1, H at port 2, V at port 1, V at port 2); at the outer
    parties it is (A_H, A_V, B_H, B_V).  See ``swapqkd.chain`` for the
    pattern-to-Bell-state mapping.
    """

    q: int
    r: int
    s: int
    t: int


class PhotonCountPattern(NamedTuple):
    """Ideal (photon-number-resolved) counts at four detectors."""

    i: int
    j: int
    k: int
    l: int


def _check_rates(eta: float, dark: float) -> None:
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if not 0.0 <= dark < 1.0:
        raise ValueError(f"dark must lie in [0, 1), got {dark}")


@dataclass(frozen=True)
class DetectorParams:
    """Intrinsic efficiency, channel transmission and dark-count probability.

    The effective efficiency seen by the click model is
    ``eta = eta0 * eta_t``.
    """

    eta0: float
    eta_t: float = 1.0
    dark: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta0 <= 1.0:
            raise ValueError(f"eta0 must lie in [0, 1], got {self.eta0}")
        if not 0.0 <= self.eta_t <= 1.0:
            raise ValueError(f"eta_t must lie in [0, 1], got {self.eta_t}")
        if not 0.0 <= self.dark < 1.0:
            raise ValueError(f"dark must lie in [0, 1), got {self.dark}")

    @property
    def eta(self) -> float:
        return self.eta0 * self.eta_t

    @classmethod
    def from_eta(cls, eta: float, dark: float = 0.0) -> "DetectorParams":
        """Build params from an already-effective efficiency."""
        return cls(eta0=eta, eta_t=1.0, dark=dark)


def p_no_click(i: int, eta: float, dark: float) -> float:
    """P(q=0 | i incident photons)."""
    if i < 0:
        raise ValueError(f"photon count must be non-negative, got {i}")
    _check_rates(eta, dark)
    return (1.0 - dark) * (1.0 - eta * (1.0 - dark)) ** i


def p_click(i: int, eta: float, dark: float) -> float:
    """P(q=1 | i incident photons) = 1 - P(q=0 | i)."""
    return 1.0 - p_no_click(i, eta, dark)


def p_outcome(bit: int, i: int, eta: float, dark: float) -> float:
    """Likelihood of a single threshold outcome (0 or 1) given ``i`` photons."""
    if bit not in (0, 1):
        raise ValueError(f"click outcomes are binary, got {bit}")
    p0 = p_no_click(i, eta, dark)
    return p0 if bit == 0 else 1.0 - p0


def p_pattern(
    clicks: tuple[int, int, int, int],
    counts: tuple[int, int, int, int],
    params: DetectorParams,
) -> float:
    """Joint likelihood P(qrst | ijkl) for four independent detectors."""
    eta, dark = params.eta, params.dark
    out = 1.0
    for bit, n in zip(clicks, counts):
        out *= p_outcome(bit, n, eta, dark)
    return out


def bayes_invert(
    prior: Mapping[tuple[int, int, int, int], float],
    clicks: tuple[int, int, int, int],
    params: DetectorParams,
) -> dict[PhotonCountPattern, float]:
    """Posterior over ideal photon counts given a threshold click pattern.

    ``prior`` maps count patterns to probabilities and may sum to less than
    one (truncated priors are allowed).  Raises ImpossiblePatternError when
    the click pattern has zero evidence and EvidenceUnderflowError when the
    evidence is positive but below ``EVIDENCE_FLOOR``.
    """
    weighted = {}
    for counts, p in prior.items():
        if p == 0.0:
            continue
        w = p_pattern(clicks, counts, params) * p
        if w != 0.0:
            weighted[PhotonCountPattern(*counts)] = w
    evidence = math.fsum(weighted.values())
    if evidence == 0.0:
        raise ImpossiblePatternError(
            f"click pattern {tuple(clicks)} has zero probability under the prior"
        )
    if evidence < EVIDENCE_FLOOR:
        raise EvidenceUnderflowError(
            f"evidence for click pattern {tuple(clicks)} underflowed ({evidence!r})"
        )
    return {k: v / evidence for k, v in weighted.items()}
