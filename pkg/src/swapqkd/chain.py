"""Closed-form coincidence probabilities for concatenated entanglement swapping.

A chain of ``N`` swaps uses ``2N`` down-conversion sources in a line with a
Bell-state measurement (BSM) station between neighbours (``2N - 1`` stations)
and one free mode at each end, rotated by delta_A / delta_B and measured by
party A / party B.  Every detector (inner and outer) uses the threshold model
from ``swapqkd.detector`` with one effective efficiency.

Station click patterns follow the ideal BSM signatures:

    psi+  ->  (1,0,1,0) or (0,1,0,1)      (one H and one V in the same port)
    psi-  ->  (0,1,1,0) or (1,0,0,1)      (H and V in different ports)
    phi+- ->  two photons on one detector (not resolvable by threshold
              detectors, which see them as a single click)

with pattern order (q, r, s, t) = (H@1, H@2, V@1, V@2).  Outer patterns are
ordered (A_H, A_V, B_H, B_V), so the correlated coincidences are (1,0,1,0)
and (0,1,0,1).

Evaluation strategy
-------------------
Each source emits p H-pairs and q V-pairs with amplitude
``(i tanh chi)^(p+q) sech(chi)^2``, placing identical counts on its two
arms.  Photon-number conservation at each 50:50 splitter then fixes the
whole H occupation profile of the chain from the leftmost count p1 (and
likewise for V), so the conditional state of the outer modes is obtained by
a station-major transfer-tensor contraction:

* per-station tensors hold the splitter amplitudes (expressed through the
  exact integer ``omega`` coefficients) times the click likelihoods of the
  conditioning pattern, summed over the unobserved ideal counts;
* Kronecker photon-number constraints appear as the bond recursion
  ``p_{s+1} = (i_s + j_s) - p_s``;
* the outer rotation kernels carry the cos(delta/2) / i sin(delta/2)
  trigonometric sums.

A single integer ``truncation`` bounds every photon-number index (source
pair counts, station counts, outer counts), which makes the N=1 result
identical, term by term, to the brute-force oracle in ``swapqkd.fock`` at
equal truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .detector import ClickPattern, ImpossiblePatternError, p_no_click

__all__ = [
    "ChainConfig",
    "ChainClickPattern",
    "CoincidenceTable",
    "TruncationError",
    "PSI_PLUS",
    "PSI_PLUS_ALT",
    "omega",
    "bell_signature",
    "effective_eta",
    "conditional_outer_counts",
    "conditional_probability",
    "coincidence_table",
    "coincidence_q",
    "visibility",
    "certify_visibility",
]

#: Click patterns at every station of a chain, one per BSM.
ChainClickPattern = tuple[ClickPattern, ...]

#: psi+ herald patterns in (H@1, H@2, V@1, V@2) order.
PSI_PLUS = ClickPattern(1, 0, 1, 0)
PSI_PLUS_ALT = ClickPattern(0, 1, 0, 1)

#: Outer click patterns entering the visibility sums, (A_H, A_V, B_H, B_V).
CORRELATED_PATTERNS = ((1, 0, 1, 0), (0, 1, 0, 1))
ANTICORRELATED_PATTERNS = ((1, 0, 0, 1), (0, 1, 1, 0))


class TruncationError(ValueError):
    """A requested photon-number index exceeds the configured truncation."""


def _comb(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


@lru_cache(maxsize=None)
def omega(mu: int, lam: int, i_out: int, l_out: int) -> int:
    """Combinatorial factor of a BSM joining adjacent swaps.

    Exact integer value of

        sum_gamma C(mu+lam, gamma) * C(i+l-mu-lam, i-gamma) * (-1)^(mu+lam-gamma)

    Binomials with impossible indices vanish, so this is total on
    non-negative integers; it depends on (mu, lam) only through mu + lam.
    """
    if min(mu, lam, i_out, l_out) < 0:
        raise ValueError("omega arguments must be non-negative integers")
    n1 = mu + lam
    n2 = i_out + l_out - n1
    return sum(
        _comb(n1, g) * _comb(n2, i_out - g) * (-1) ** (n1 - g) for g in range(n1 + 1)
    )


def bell_signature(counts: tuple[int, int, int, int]) -> str | None:
    """Classify ideal BSM counts (i, j, k, l) per the swap heralding table."""
    if counts in ((1, 0, 1, 0), (0, 1, 0, 1)):
        return "psi+"
    if counts in ((0, 1, 1, 0), (1, 0, 0, 1)):
        return "psi-"
    if counts in ((2, 0, 0, 0), (0, 2, 0, 0), (0, 0, 2, 0), (0, 0, 0, 2)):
        return "phi"
    return None


@lru_cache(maxsize=None)
def _splitter_amplitude(c1: int, c2: int, n1: int, n2: int) -> complex:
    """<c1, c2| U_BS |n1, n2> for the symmetric 50:50 splitter."""
    if c1 + c2 != n1 + n2:
        return 0.0j
    core = omega(n1, 0, c1, c2)
    if core == 0:
        return 0.0j
    mag = math.sqrt(
        math.factorial(c1) * math.factorial(c2) / (math.factorial(n1) * math.factorial(n2))
    )
    return mag * 2.0 ** (-(n1 + n2) / 2.0) * (1j) ** (n1 + c1) * (-1.0) ** n1 * core


def _rotation_amplitude(a: int, b: int, p: int, q: int, delta: float) -> complex:
    """<a, b| U(delta) |p, q> for the half-angle polarization rotator."""
    if a + b != p + q:
        return 0.0j
    c = math.cos(delta / 2.0)
    s = math.sin(delta / 2.0)
    total = 0.0j
    for x in range(max(0, a - q), min(p, a) + 1):
        total += (
            _comb(p, x)
            * _comb(q, a - x)
            * c ** (2 * x + q - a)
            * (1j * s) ** (p + a - 2 * x)
        )
    return total * math.sqrt(
        math.factorial(a) * math.factorial(b) / (math.factorial(p) * math.factorial(q))
    )


@dataclass(frozen=True)
class ChainConfig:
    """Parameters of one chain evaluation.

    ``eta`` is the effective per-detector efficiency (intrinsic times
    channel, see :func:`effective_eta`); ``inner_pattern`` holds the click
    pattern conditioned on at each of the ``2N - 1`` stations and defaults
    to the psi+ signature (1,0,1,0) everywhere.
    """

    n_swaps: int
    chi: float
    eta: float
    dark: float = 0.0
    delta_a: float = math.pi / 2
    delta_b: float = math.pi / 2
    truncation: int = 3
    inner_pattern: tuple[ClickPattern, ...] | None = None

    def __post_init__(self) -> None:
        if self.n_swaps < 1:
            raise ValueError(f"n_swaps must be at least 1, got {self.n_swaps}")
        if self.chi < 0:
            raise ValueError(f"chi must be non-negative, got {self.chi}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if not 0.0 <= self.dark < 1.0:
            raise ValueError(f"dark must lie in [0, 1), got {self.dark}")
        if self.truncation < 1:
            raise ValueError(f"truncation must be at least 1, got {self.truncation}")
        if self.inner_pattern is not None:
            pattern = tuple(ClickPattern(*p) for p in self.inner_pattern)
            if len(pattern) != self.n_stations:
                raise ValueError(
                    f"inner_pattern must list {self.n_stations} station patterns, "
                    f"got {len(pattern)}"
                )
            if any(bit not in (0, 1) for p in pattern for bit in p):
                raise ValueError("click patterns are binary")
            object.__setattr__(self, "inner_pattern", pattern)

    @property
    def n_stations(self) -> int:
        return 2 * self.n_swaps - 1

    def station_patterns(self) -> tuple[ClickPattern, ...]:
        if self.inner_pattern is None:
            return (PSI_PLUS,) * self.n_stations
        return self.inner_pattern


@dataclass
class CoincidenceTable:
    """Conditional outer click probabilities plus the visibility sums.

    ``q_max`` / ``q_min`` are the correlated and anticorrelated coincidence
    sums; at delta_A = delta_B = pi/2 they are the extremal coincidences
    from which the visibility is defined.
    """

    q_values: dict[tuple[int, int, int, int], float]
    q_max: float
    q_min: float
    visibility: float
    truncation_deficit: float = 0.0

    def __post_init__(self) -> None:
        for pattern, value in self.q_values.items():
            if not -1e-12 <= value <= 1.0 + 1e-12:
                raise ValueError(f"Q({pattern}) = {value} outside [0, 1]")


def effective_eta(
    eta0: float, alpha: float, alpha0: float, length_km: float, n_swaps: int
) -> float:
    """Per-detector efficiency for total distance ``length_km``.

    The end-to-end line has 4N equal fiber arms (two per source), so each
    detector sees channel transmission 10^-(alpha*l/(4N) + alpha0)/10 on
    top of the intrinsic efficiency.
    """
    if length_km < 0:
        raise ValueError(f"length must be non-negative, got {length_km}")
    arm = length_km / (4.0 * n_swaps)
    return eta0 * 10.0 ** (-(alpha * arm + alpha0) / 10.0)


def _click_likelihoods(bit: int, eta: float, dark: float, truncation: int) -> np.ndarray:
    probs = np.array([p_no_click(n, eta, dark) for n in range(truncation + 1)])
    return 1.0 - probs if bit else probs


@lru_cache(maxsize=512)
def _station_tensor(
    bits: tuple[int, int], eta: float, dark: float, truncation: int
) -> np.ndarray:
    """Single-polarization transfer tensor of one station.

    ``T[p, p', r, r']`` sums the splitter amplitudes over the unobserved
    ideal counts (c1, c2) at the station's two detectors of this
    polarization, weighted by the likelihood of the conditioning bits;
    p and r are the pair counts on the incoming arms and primed indices
    belong to the conjugated branch.  Cached (and therefore read-only):
    the tensor is independent of chi, so optimizer scans reuse it across
    the chi grid.
    """
    like1 = _click_likelihoods(bits[0], eta, dark, truncation)
    like2 = _click_likelihoods(bits[1], eta, dark, truncation)
    d = truncation + 1
    tensor = np.zeros((d, d, d, d), dtype=complex)
    for p in range(d):
        for r in range(d):
            total = p + r
            for pp in range(d):
                rr = total - pp
                if not 0 <= rr < d:
                    continue
                acc = 0.0j
                for c1 in range(max(0, total - truncation), min(truncation, total) + 1):
                    c2 = total - c1
                    acc += (
                        like1[c1]
                        * like2[c2]
                        * _splitter_amplitude(c1, c2, p, r)
                        * _splitter_amplitude(c1, c2, pp, rr).conjugate()
                    )
                tensor[p, pp, r, rr] = acc
    tensor.setflags(write=False)
    return tensor


def _chain_density(
    station_bits: list[tuple[int, int]], chi: float, eta: float, dark: float, truncation: int
) -> np.ndarray:
    """Contract one polarization chain into rho[p1, p1', pL, pL'].

    Includes the (i tanh chi)^p source weights on every bond; the overall
    sech(chi)^2 normalization per source is left out since it cancels in
    the conditional probabilities.
    """
    d = truncation + 1
    t = math.tanh(chi)
    w = np.array([(1j * t) ** p for p in range(d)])
    pair = np.einsum("c,C->cC", w, w.conj())
    rho = np.zeros((d, d, d, d), dtype=complex)
    for p in range(d):
        for pp in range(d):
            rho[p, pp, p, pp] = pair[p, pp]
    for bits in station_bits:
        step = _station_tensor(bits, eta, dark, truncation)
        rho = np.einsum("aAbB,bBcC->aAcC", rho, step)
        rho = rho * pair[None, None, :, :]
    return rho


@lru_cache(maxsize=512)
def _rotation_tensor(delta: float, truncation: int) -> np.ndarray:
    d = truncation + 1
    out = np.zeros((d, d, d, d), dtype=complex)
    for a in range(d):
        for b in range(d):
            for p in range(d):
                q = a + b - p
                if 0 <= q < d:
                    out[a, b, p, q] = _rotation_amplitude(a, b, p, q, delta)
    out.setflags(write=False)
    return out


def _conditional_array(config: ChainConfig) -> np.ndarray:
    """P(i'j'k'l' | qrst) as an array over outer counts within truncation."""
    patterns = config.station_patterns()
    h_bits = [(p.q, p.r) for p in patterns]
    v_bits = [(p.s, p.t) for p in patterns]
    rho_h = _chain_density(h_bits, config.chi, config.eta, config.dark, config.truncation)
    rho_v = _chain_density(v_bits, config.chi, config.eta, config.dark, config.truncation)
    d = config.truncation + 1
    idx = np.arange(d)
    s_h = rho_h[idx[:, None], idx[:, None], idx[None, :], idx[None, :]].sum().real
    s_v = rho_v[idx[:, None], idx[:, None], idx[None, :], idx[None, :]].sum().real
    evidence = s_h * s_v
    if evidence <= 0.0:
        raise ImpossiblePatternError(
            "conditioning click pattern has zero probability for this configuration"
        )
    rot_a = _rotation_tensor(config.delta_a, config.truncation)
    rot_b = _rotation_tensor(config.delta_b, config.truncation)
    # staged contraction of
    #   rotA[abpq] rotA*[abPQ] rotB[cdmn] rotB*[cdMN] rhoH[pPmM] rhoV[qQnN]
    # (one flat einsum degenerates to the naive 12-index loop)
    end_a = np.einsum("abpq,abPQ,pPmM->abqQmM", rot_a, rot_a.conj(), rho_h, optimize=True)
    end_b = np.einsum("cdmn,cdMN,qQnN->cdqQmM", rot_b, rot_b.conj(), rho_v, optimize=True)
    joint = np.einsum("abqQmM,cdqQmM->abcd", end_a, end_b, optimize=True).real
    table = joint / evidence
    # clip float noise; anything beyond noise level is a real bug
    if table.min() < -1e-10:
        raise ArithmeticError(f"negative conditional probability {table.min()}")
    return np.clip(table, 0.0, None)


def conditional_outer_counts(
    config: ChainConfig,
) -> dict[tuple[int, int, int, int], float]:
    """Conditional distribution of ideal outer counts given the inner pattern.

    Keys run over all (A_H, A_V, B_H, B_V) within the truncation; the
    missing mass (outer components pushed beyond the truncation) equals
    one minus the sum of the values.
    """
    table = _conditional_array(config)
    d = config.truncation + 1
    return {
        (a, b, c, e): float(table[a, b, c, e])
        for a in range(d)
        for b in range(d)
        for c in range(d)
        for e in range(d)
    }


def conditional_probability(
    config: ChainConfig, outer_counts: tuple[int, int, int, int]
) -> float:
    """Single entry of :func:`conditional_outer_counts` with bounds checking."""
    for axis, value in enumerate(outer_counts):
        if value < 0 or value > config.truncation:
            raise TruncationError(
                f"outer count index {axis} = {value} exceeds truncation "
                f"{config.truncation}"
            )
    return float(_conditional_array(config)[outer_counts])


def table_from_counts(
    counts: dict[tuple[int, int, int, int], float], eta: float, dark: float
) -> CoincidenceTable:
    """Convolve an ideal outer-count distribution with the detector model."""
    truncation = max(max(key) for key in counts)
    like = {
        bit: _click_likelihoods(bit, eta, dark, truncation) for bit in (0, 1)
    }
    q_values: dict[tuple[int, int, int, int], float] = {}
    for q in (0, 1):
        for r in (0, 1):
            for s in (0, 1):
                for t in (0, 1):
                    acc = 0.0
                    for (a, b, c, e), p in counts.items():
                        if p == 0.0:
                            continue
                        acc += p * like[q][a] * like[r][b] * like[s][c] * like[t][e]
                    q_values[(q, r, s, t)] = acc
    deficit = max(0.0, 1.0 - math.fsum(counts.values()))
    return _finish_table(q_values, deficit)


def _finish_table(
    q_values: dict[tuple[int, int, int, int], float], deficit: float
) -> CoincidenceTable:
    q_max = math.fsum(q_values[p] for p in CORRELATED_PATTERNS)
    q_min = math.fsum(q_values[p] for p in ANTICORRELATED_PATTERNS)
    if q_max + q_min > 0.0:
        vis = (q_max - q_min) / (q_max + q_min)
        vis = min(1.0, max(-1.0, vis))
    else:
        vis = math.nan
    return CoincidenceTable(
        q_values=q_values,
        q_max=q_max,
        q_min=q_min,
        visibility=vis,
        truncation_deficit=deficit,
    )


def coincidence_table(config: ChainConfig) -> CoincidenceTable:
    """All sixteen outer click probabilities Q(q'r's't' | qrst)."""
    table = _conditional_array(config)
    d = config.truncation + 1
    like = {
        bit: _click_likelihoods(bit, config.eta, config.dark, config.truncation)
        for bit in (0, 1)
    }
    q_values: dict[tuple[int, int, int, int], float] = {}
    for q in (0, 1):
        for r in (0, 1):
            for s in (0, 1):
                for t in (0, 1):
                    q_values[(q, r, s, t)] = float(
                        np.einsum(
                            "abcd,a,b,c,d->", table, like[q], like[r], like[s], like[t]
                        )
                    )
    deficit = max(0.0, 1.0 - float(table.sum()))
    return _finish_table(q_values, deficit)


def coincidence_q(config: ChainConfig, outer_clicks: tuple[int, int, int, int]) -> float:
    """Single conditional click probability Q(q'r's't' | qrst)."""
    if any(bit not in (0, 1) for bit in outer_clicks):
        raise ValueError(f"outer clicks must be binary, got {outer_clicks}")
    return coincidence_table(config).q_values[tuple(outer_clicks)]


def visibility(config: ChainConfig, extremize_delta_b: bool = False) -> float:
    """Four-photon visibility (Q_max - Q_min) / (Q_max + Q_min).

    By convention both sums are evaluated at delta_A = delta_B = pi/2:
    the correlated coincidences Q(1010)+Q(0101) as the maximum candidate
    and the anticorrelated Q(1001)+Q(0110) as the minimum candidate (the
    latter equals the correlated sum at delta_B = -pi/2).  With
    ``extremize_delta_b`` the correlated sum is instead extremized over a
    delta_B scan.
    """
    base = _at_reference_angles(config)
    if not extremize_delta_b:
        table = coincidence_table(base)
        if table.q_max + table.q_min == 0.0:
            raise ImpossiblePatternError("no outer coincidences at this configuration")
        return table.visibility
    corr = []
    for delta_b in np.linspace(-math.pi, math.pi, 49):
        t = coincidence_table(
            ChainConfig(
                n_swaps=base.n_swaps,
                chi=base.chi,
                eta=base.eta,
                dark=base.dark,
                delta_a=base.delta_a,
                delta_b=float(delta_b),
                truncation=base.truncation,
                inner_pattern=base.inner_pattern,
            )
        )
        corr.append(t.q_max)
    q_max, q_min = max(corr), min(corr)
    if q_max + q_min == 0.0:
        raise ImpossiblePatternError("no outer coincidences at this configuration")
    return min(1.0, max(-1.0, (q_max - q_min) / (q_max + q_min)))


def _at_reference_angles(config: ChainConfig) -> ChainConfig:
    if config.delta_a == math.pi / 2 and config.delta_b == math.pi / 2:
        return config
    return ChainConfig(
        n_swaps=config.n_swaps,
        chi=config.chi,
        eta=config.eta,
        dark=config.dark,
        delta_a=math.pi / 2,
        delta_b=math.pi / 2,
        truncation=config.truncation,
        inner_pattern=config.inner_pattern,
    )


def certify_visibility(config: ChainConfig, tol: float = 1e-6) -> tuple[float, float, bool]:
    """Visibility at the configured truncation and at truncation + 1.

    Returns ``(v, v_next, converged)`` where ``converged`` means the two
    agree within ``tol``.
    """
    v = visibility(config)
    bumped = ChainConfig(
        n_swaps=config.n_swaps,
        chi=config.chi,
        eta=config.eta,
        dark=config.dark,
        delta_a=config.delta_a,
        delta_b=config.delta_b,
        truncation=config.truncation + 1,
        inner_pattern=config.inner_pattern,
    )
    v_next = visibility(bumped)
    return v, v_next, abs(v - v_next) < tol
