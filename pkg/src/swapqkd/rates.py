"""Scalar key-rate figures of merit for the swapping chain.

All channel losses use dB semantics: transmission 10^-(alpha*l + alpha0)/10.
The source equation for the channel efficiency is printed with base e but
carries the /10 dB scaling, while the sifted-rate expression uses base 10
explicitly; base 10 is adopted throughout, with a switch for the literal
base-e reading.

Rates below ~1e-300 are handled in log10 form to avoid underflow in deep
chains; every result object carries both the linear and the log10 value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import chain
from .detector import ImpossiblePatternError

__all__ = [
    "LinkParams",
    "KeyRateResult",
    "channel_efficiency",
    "qber",
    "binary_entropy",
    "shor_preskill_rate",
    "sifted_rate",
    "sifted_rate_log10",
    "net_key_rate",
    "tgw_bound",
    "ingaas_dark_count",
    "evaluate_key_rate",
]

#: InGaAs efficiency / dark-count trade-off constants.
INGAAS_A = 6.1e-7
INGAAS_B = 17.0


class UnphysicalParameterError(ValueError):
    """A derived quantity left its physical domain (e.g. dark count >= 1)."""


@dataclass(frozen=True)
class LinkParams:
    """Fiber parameters: loss slope, fixed loss, length and reconciliation."""

    alpha: float = 0.25
    alpha0: float = 4.0
    length_km: float = 0.0
    kappa: float = 1.0

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.alpha0 < 0 or self.length_km < 0:
            raise ValueError("loss parameters and length must be non-negative")
        if not 0.0 < self.kappa <= 1.0:
            raise ValueError(f"kappa must lie in (0, 1], got {self.kappa}")


@dataclass(frozen=True)
class KeyRateResult:
    """Visibility, QBER and the rate stack at one parameter point."""

    visibility: float
    qber: float
    r_sifted: float
    r_shor_preskill: float
    r_net: float
    log10_r_net: float | None
    # provenance
    chi: float
    eta0: float
    dark: float
    n_swaps: int
    length_km: float
    truncation_deficit: float = 0.0


def channel_efficiency(
    alpha: float, length_km: float, alpha0: float = 0.0, base10: bool = True
) -> float:
    """Channel transmission for a fiber of the given length."""
    if alpha < 0 or length_km < 0 or alpha0 < 0:
        raise ValueError("channel parameters must be non-negative")
    exponent = -(alpha * length_km + alpha0) / 10.0
    return 10.0**exponent if base10 else math.exp(exponent)


def qber(visibility: float) -> float:
    """Quantum bit error rate (1 - V) / 2."""
    if not -1.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [-1, 1], got {visibility}")
    return (1.0 - visibility) / 2.0


def binary_entropy(x: float) -> float:
    """H2(x) with the continuity convention H2(0) = H2(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy argument must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def shor_preskill_rate(q: float, kappa: float = 1.0) -> float:
    """Key fraction 1 - kappa*H2(Q) - H2(Q), clamped at zero."""
    if not 0.0 < kappa <= 1.0:
        raise ValueError(f"kappa must lie in (0, 1], got {kappa}")
    h = binary_entropy(q)
    return max(0.0, 1.0 - kappa * h - h)


def sifted_rate(n_swaps: int, chi: float, eta: float, alpha: float, length_km: float) -> float:
    """Sifted key rate per pulse for the 2N-source chain.

    ``eta`` is the distance-independent per-detector efficiency (intrinsic
    efficiency times any fixed loss); the distance-dependent factor is the
    explicit 10^((-alpha*l/40N)*4N), which algebraically equals
    10^(-alpha*l/10).
    """
    if n_swaps < 1:
        raise ValueError(f"n_swaps must be at least 1, got {n_swaps}")
    return (
        0.5
        * (chi**2) ** (2 * n_swaps)
        * 10.0 ** ((-alpha * length_km / (40.0 * n_swaps)) * 4 * n_swaps)
        * (eta**2 / 2.0) ** (2 * n_swaps - 1)
        * eta**2
    )


def sifted_rate_log10(
    n_swaps: int, chi: float, eta: float, alpha: float, length_km: float
) -> float:
    """log10 of :func:`sifted_rate`, safe against underflow; -inf when zero."""
    if n_swaps < 1:
        raise ValueError(f"n_swaps must be at least 1, got {n_swaps}")
    if chi == 0.0 or eta == 0.0:
        return -math.inf
    return (
        math.log10(0.5)
        + 4 * n_swaps * math.log10(chi)
        - alpha * length_km / 10.0
        + (2 * n_swaps - 1) * (2 * math.log10(eta) - math.log10(2.0))
        + 2 * math.log10(eta)
    )


def tgw_bound(alpha: float, length_km: float) -> float:
    """Repeaterless upper bound log2((1 + eta_t)/(1 - eta_t)).

    Diverges as the transmission approaches one, so a zero-length link is
    reported as unbounded.
    """
    if length_km <= 0.0:
        raise ValueError("the bound diverges at zero length")
    eta_t = 10.0 ** (-alpha * length_km / 10.0)
    # log1p keeps the deep-loss tail (eta_t below 1e-16) from cancelling to 0
    return (math.log1p(eta_t) - math.log1p(-eta_t)) / math.log(2.0)


def ingaas_dark_count(eta0: float, a: float = INGAAS_A, b: float = INGAAS_B) -> float:
    """Dark-count probability A*exp(B*eta0) of the InGaAs trade-off."""
    if not 0.0 <= eta0 <= 1.0:
        raise ValueError(f"eta0 must lie in [0, 1], got {eta0}")
    dark = a * math.exp(b * eta0)
    if dark >= 1.0:
        raise UnphysicalParameterError(
            f"trade-off gives unphysical dark-count probability {dark} at eta0={eta0}"
        )
    return dark


def net_key_rate(
    visibility: float,
    sifted: float,
    kappa: float = 1.0,
    *,
    log10_sifted: float | None = None,
    chi: float = math.nan,
    eta0: float = math.nan,
    dark: float = math.nan,
    n_swaps: int = 0,
    length_km: float = math.nan,
    truncation_deficit: float = 0.0,
) -> KeyRateResult:
    """Combine visibility and sifted rate into the net key rate R."""
    q = qber(visibility)
    r_sp = shor_preskill_rate(q, kappa)
    r_net = sifted * r_sp
    if r_sp > 0.0 and log10_sifted is not None and log10_sifted > -math.inf:
        log10_r = log10_sifted + math.log10(r_sp)
    elif r_net > 0.0:
        log10_r = math.log10(r_net)
    else:
        log10_r = None
    return KeyRateResult(
        visibility=visibility,
        qber=q,
        r_sifted=sifted,
        r_shor_preskill=r_sp,
        r_net=r_net,
        log10_r_net=log10_r,
        chi=chi,
        eta0=eta0,
        dark=dark,
        n_swaps=n_swaps,
        length_km=length_km,
        truncation_deficit=truncation_deficit,
    )


def evaluate_key_rate(
    n_swaps: int,
    chi: float,
    eta0: float,
    dark: float,
    link: LinkParams,
    truncation: int = 3,
) -> KeyRateResult:
    """Full rate stack at one parameter point.

    The visibility is evaluated with the per-detector efficiency of
    :func:`swapqkd.chain.effective_eta` (each of the 4N arms carries
    length l/4N plus the fixed loss alpha0); the sifted rate receives the
    matching distance-independent efficiency eta0 * 10^(-alpha0/10) so
    that its explicit distance factor completes the same 4N-arm budget.
    """
    eta_det = chain.effective_eta(eta0, link.alpha, link.alpha0, link.length_km, n_swaps)
    config = chain.ChainConfig(
        n_swaps=n_swaps, chi=chi, eta=eta_det, dark=dark, truncation=truncation
    )
    table = chain.coincidence_table(config)
    if table.q_max + table.q_min == 0.0:
        raise ImpossiblePatternError("no outer coincidences at this configuration")
    eta_fixed = eta0 * 10.0 ** (-link.alpha0 / 10.0)
    sifted = sifted_rate(n_swaps, chi, eta_fixed, link.alpha, link.length_km)
    log10_sifted = sifted_rate_log10(n_swaps, chi, eta_fixed, link.alpha, link.length_km)
    return net_key_rate(
        table.visibility,
        sifted,
        link.kappa,
        log10_sifted=log10_sifted,
        chi=chi,
        eta0=eta0,
        dark=dark,
        n_swaps=n_swaps,
        length_km=link.length_km,
        truncation_deficit=table.truncation_deficit,
    )
