"""Brute-force truncated Fock-space simulation of the single-swap circuit.

This module is the independent oracle used to validate the closed-form
chain evaluator in ``swapqkd.chain``: it evolves the full multimode state
of one entanglement swap (two down-conversion sources, a 50:50 beam
splitter on the inner modes, polarization rotators on the outer modes)
and obtains coincidence probabilities by explicit projection.

Mode conventions
----------------
Spatial modes are numbered left to right; each carries an H and a V
polarization mode.  Occupation vectors are flat tuples in spatial-major,
polarization-minor order::

    (m0_H, m0_V, m1_H, m1_V, ...)

The single-swap circuit uses four spatial modes

    0: outer mode of party A        1: inner mode, left source
    2: inner mode, right source     3: outer mode of party B

Beam splitter: symmetric 50:50 with imaginary reflection,
``a1 -> (b1 + i b2)/sqrt(2)``, ``a2 -> (i b1 + b2)/sqrt(2)``, applied
identically to the H and the V submodes.

Polarization rotator at angle ``delta``: half-angle mixing
``a_H -> cos(delta/2) a_H + i sin(delta/2) a_V`` (and symmetrically for
``a_V``).

Inner detector counts are ordered (i, j, k, l) = (H@port1, H@port2,
V@port1, V@port2); this is what makes the psi+ Bell state herald as
(1,0,1,0) or (0,1,0,1).  Outer counts are ordered (A_H, A_V, B_H, B_V).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .chain import CoincidenceTable, table_from_counts
from .detector import DetectorParams, ImpossiblePatternError, p_pattern

__all__ = [
    "FockState",
    "CircuitParams",
    "vacuum_state",
    "basis_state",
    "pdc_state",
    "tensor",
    "apply_beam_splitter",
    "apply_polarization_rotator",
    "project_inner",
    "oracle_single_swap",
]

#: Amplitudes below this magnitude are pruned after each unitary; the
#: pruned probability mass is accounted to ``norm_deficit``.
PRUNE_EPS = 1e-15

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
#: Mode matrix of the 50:50 beam splitter, columns are images of the inputs.
_BS_MATRIX = ((_INV_SQRT2, 1j * _INV_SQRT2), (1j * _INV_SQRT2, _INV_SQRT2))


def _rotator_matrix(delta: float):
    c = math.cos(delta / 2.0)
    s = math.sin(delta / 2.0)
    return ((c, 1j * s), (1j * s, c))


@dataclass
class FockState:
    """Sparse multimode pure state truncated at ``n_max`` photons per mode.

    ``amplitudes`` maps flat occupation tuples (see module docstring) to
    complex amplitudes.  ``norm_deficit`` is the probability mass lost to
    truncation (and pruning), so ``norm_sq() + norm_deficit == 1`` holds
    for any state produced by the constructors and unitaries here.
    """

    spatial_modes: tuple[int, ...]
    n_max: int
    amplitudes: dict[tuple[int, ...], complex] = field(default_factory=dict)
    norm_deficit: float = 0.0

    def __post_init__(self) -> None:
        if self.n_max < 1:
            raise ValueError(f"n_max must be at least 1, got {self.n_max}")

    @property
    def n_flat(self) -> int:
        return 2 * len(self.spatial_modes)

    def norm_sq(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.amplitudes.values())

    def flat_index(self, spatial_mode: int, pol: int) -> int:
        return 2 * self.spatial_modes.index(spatial_mode) + pol

    def _pruned(self) -> "FockState":
        kept, lost = {}, 0.0
        for key, amp in self.amplitudes.items():
            if abs(amp) < PRUNE_EPS:
                lost += abs(amp) ** 2
            else:
                kept[key] = amp
        return FockState(self.spatial_modes, self.n_max, kept, self.norm_deficit + lost)


def vacuum_state(spatial_modes: tuple[int, ...], n_max: int) -> FockState:
    key = (0,) * (2 * len(spatial_modes))
    return FockState(tuple(spatial_modes), n_max, {key: 1.0 + 0.0j})


def basis_state(
    occupations: tuple[int, ...], spatial_modes: tuple[int, ...], n_max: int
) -> FockState:
    """Single Fock basis vector with the given flat occupations."""
    if len(occupations) != 2 * len(spatial_modes):
        raise ValueError("occupation vector length must be twice the spatial mode count")
    if any(n < 0 or n > n_max for n in occupations):
        raise ValueError(f"occupations must lie in [0, {n_max}]")
    return FockState(tuple(spatial_modes), n_max, {tuple(occupations): 1.0 + 0.0j})


def pdc_state(chi: float, n_max: int, spatial_modes: tuple[int, int] = (0, 1)) -> FockState:
    """Two-mode polarization-entangled down-conversion state.

    Emits perfectly correlated H pairs and V pairs into the two spatial
    modes: the component with p H-pairs and q V-pairs has amplitude
    ``sech(chi)^2 * (i tanh chi)^(p+q)``.  The vacuum amplitude is
    ``sech(chi)^2``; mass beyond the per-mode cutoff goes to
    ``norm_deficit``.
    """
    if chi < 0:
        raise ValueError(f"chi must be non-negative, got {chi}")
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    t = math.tanh(chi)
    pref = 1.0 / math.cosh(chi) ** 2
    amps: dict[tuple[int, ...], complex] = {}
    for p in range(n_max + 1):
        for q in range(n_max + 1):
            amps[(p, q, p, q)] = pref * (1j * t) ** (p + q)
    # geometric tails beyond the cutoff, exact
    tail = t ** (2 * (n_max + 1))
    kept = (1.0 - tail) ** 2
    return FockState(tuple(spatial_modes), n_max, amps, 1.0 - kept)


def tensor(state_a: FockState, state_b: FockState) -> FockState:
    """Product state on the union of the two (disjoint) mode sets.

    The combined state is re-indexed to ascending spatial-mode order.
    Surviving probability is the product of the factors' survivals, so
    deficits combine as ``1 - (1-dA)(1-dB)``.
    """
    if set(state_a.spatial_modes) & set(state_b.spatial_modes):
        raise ValueError(
            f"overlapping spatial modes: {state_a.spatial_modes} and {state_b.spatial_modes}"
        )
    if state_a.n_max != state_b.n_max:
        raise ValueError("tensor factors must share the same truncation")
    modes = tuple(sorted(state_a.spatial_modes + state_b.spatial_modes))
    # position of each factor's flat entries in the combined key
    place: list[tuple[int, int]] = []
    for src, st in ((0, state_a), (1, state_b)):
        for pos, m in enumerate(st.spatial_modes):
            place.append((src, 2 * pos))
    amps: dict[tuple[int, ...], complex] = {}
    for ka, va in state_a.amplitudes.items():
        for kb, vb in state_b.amplitudes.items():
            key = [0] * (2 * len(modes))
            for m in state_a.spatial_modes:
                u = 2 * modes.index(m)
                v = 2 * state_a.spatial_modes.index(m)
                key[u], key[u + 1] = ka[v], ka[v + 1]
            for m in state_b.spatial_modes:
                u = 2 * modes.index(m)
                v = 2 * state_b.spatial_modes.index(m)
                key[u], key[u + 1] = kb[v], kb[v + 1]
            amps[tuple(key)] = va * vb
    deficit = 1.0 - (1.0 - state_a.norm_deficit) * (1.0 - state_b.norm_deficit)
    return FockState(modes, state_a.n_max, amps, deficit)


def _mix_flat_pair(state: FockState, f1: int, f2: int, matrix) -> FockState:
    """Apply a 2x2 mode unitary to two flat modes of the state.

    ``matrix`` columns are the images of the input creation operators.
    Output components exceeding the truncation contribute their squared
    magnitude to the norm deficit.
    """
    (m00, m01), (m10, m11) = matrix
    out: dict[tuple[int, ...], complex] = {}
    # overflow amplitudes are accumulated coherently before their squared
    # mass is charged to the deficit (dropped branches still interfere)
    overflow: dict[tuple[int, ...], complex] = {}
    n_max = state.n_max
    for key, amp in state.amplitudes.items():
        n1, n2 = key[f1], key[f2]
        base = amp / math.sqrt(math.factorial(n1) * math.factorial(n2))
        for a in range(n1 + 1):
            for b in range(n2 + 1):
                o1 = a + b
                o2 = (n1 - a) + (n2 - b)
                coeff = (
                    math.comb(n1, a)
                    * math.comb(n2, b)
                    * m00**a
                    * m10 ** (n1 - a)
                    * m01**b
                    * m11 ** (n2 - b)
                )
                c = base * coeff * math.sqrt(math.factorial(o1) * math.factorial(o2))
                new = list(key)
                new[f1], new[f2] = o1, o2
                nk = tuple(new)
                if o1 > n_max or o2 > n_max:
                    overflow[nk] = overflow.get(nk, 0.0) + c
                else:
                    out[nk] = out.get(nk, 0.0) + c
    deficit = state.norm_deficit + math.fsum(abs(c) ** 2 for c in overflow.values())
    return FockState(state.spatial_modes, n_max, out, deficit)._pruned()


def apply_beam_splitter(state: FockState, spatial_pair: tuple[int, int]) -> FockState:
    """50:50 beam splitter on two spatial modes (H and V mixed identically)."""
    m1, m2 = spatial_pair
    if m1 not in state.spatial_modes or m2 not in state.spatial_modes or m1 == m2:
        raise ValueError(f"invalid spatial mode pair {spatial_pair}")
    out = _mix_flat_pair(state, state.flat_index(m1, 0), state.flat_index(m2, 0), _BS_MATRIX)
    return _mix_flat_pair(out, state.flat_index(m1, 1), state.flat_index(m2, 1), _BS_MATRIX)


def apply_polarization_rotator(state: FockState, spatial_mode: int, delta: float) -> FockState:
    """Mix the H and V submodes of one spatial mode at half-angle delta/2."""
    if spatial_mode not in state.spatial_modes:
        raise ValueError(f"invalid spatial mode {spatial_mode}")
    f = state.flat_index(spatial_mode, 0)
    return _mix_flat_pair(state, f, f + 1, _rotator_matrix(delta))


def project_inner(
    state: FockState, ijkl: tuple[int, int, int, int]
) -> tuple[FockState | None, float]:
    """Project the post-beam-splitter state onto ideal inner counts.

    ``ijkl`` = (H@port1, H@port2, V@port1, V@port2) where the ports are
    the two middle spatial modes.  Returns the normalized state of the two
    outer spatial modes together with the projection probability; the
    state is None when the probability is exactly zero.
    """
    if len(state.spatial_modes) != 4:
        raise ValueError("project_inner expects the four-spatial-mode swap circuit")
    if any(n < 0 or n > state.n_max for n in ijkl):
        raise ValueError(f"inner counts {ijkl} exceed truncation {state.n_max}")
    inner1, inner2 = state.spatial_modes[1], state.spatial_modes[2]
    outer = (state.spatial_modes[0], state.spatial_modes[3])
    sel = (
        state.flat_index(inner1, 0),
        state.flat_index(inner2, 0),
        state.flat_index(inner1, 1),
        state.flat_index(inner2, 1),
    )
    keep = (
        state.flat_index(outer[0], 0),
        state.flat_index(outer[0], 1),
        state.flat_index(outer[1], 0),
        state.flat_index(outer[1], 1),
    )
    amps: dict[tuple[int, ...], complex] = {}
    for key, amp in state.amplitudes.items():
        if tuple(key[f] for f in sel) != tuple(ijkl):
            continue
        amps[tuple(key[f] for f in keep)] = amp
    prob = math.fsum(abs(a) ** 2 for a in amps.values())
    if prob == 0.0:
        return None, 0.0
    scale = 1.0 / math.sqrt(prob)
    normalized = {k: v * scale for k, v in amps.items()}
    return FockState(outer, state.n_max, normalized), prob


@dataclass(frozen=True)
class CircuitParams:
    """Physical parameters of the single-swap optical circuit."""

    chi: float
    delta_a: float = math.pi / 2
    delta_b: float = math.pi / 2
    n_max: int = 3

    def __post_init__(self) -> None:
        if self.chi < 0:
            raise ValueError(f"chi must be non-negative, got {self.chi}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be at least 1, got {self.n_max}")


def swap_circuit_state(chi: float, n_max: int) -> FockState:
    """Both source states with the inner beam splitter applied."""
    left = pdc_state(chi, n_max, (0, 1))
    right = pdc_state(chi, n_max, (2, 3))
    return apply_beam_splitter(tensor(left, right), (1, 2))


def outer_count_distribution(
    circuit: CircuitParams,
    detector: DetectorParams,
    inner_clicks: tuple[int, int, int, int],
) -> dict[tuple[int, int, int, int], float]:
    """P(i'j'k'l' | qrst): ideal outer counts given inner threshold clicks.

    Pipeline: evolve the circuit, enumerate ideal inner counts, weight by
    the detector likelihood of the observed clicks (Bayes inversion),
    rotate the heralded outer states by delta_A and delta_B, and read off
    the outer count distribution.
    """
    state = swap_circuit_state(circuit.chi, circuit.n_max)
    heralds: list[tuple[float, FockState]] = []
    evidence_terms: list[float] = []
    rng = range(circuit.n_max + 1)
    for ijkl in itertools.product(rng, rng, rng, rng):
        outer, prob = project_inner(state, ijkl)
        if outer is None:
            continue
        weight = p_pattern(inner_clicks, ijkl, detector) * prob
        evidence_terms.append(weight)
        if weight != 0.0:
            heralds.append((weight, outer))
    evidence = math.fsum(evidence_terms)
    if evidence == 0.0:
        raise ImpossiblePatternError(
            f"inner click pattern {tuple(inner_clicks)} has zero probability"
        )
    dist: dict[tuple[int, int, int, int], float] = {}
    for weight, outer in heralds:
        rotated = apply_polarization_rotator(outer, outer.spatial_modes[0], circuit.delta_a)
        rotated = apply_polarization_rotator(rotated, outer.spatial_modes[1], circuit.delta_b)
        w = weight / evidence
        for key, amp in rotated.amplitudes.items():
            dist[key] = dist.get(key, 0.0) + w * abs(amp) ** 2
    return dist


def oracle_single_swap(
    circuit: CircuitParams,
    detector: DetectorParams,
    inner_clicks: tuple[int, int, int, int] = (1, 0, 1, 0),
) -> CoincidenceTable:
    """Full conditional click table Q(q'r's't' | qrst) by brute force."""
    counts = outer_count_distribution(circuit, detector, inner_clicks)
    return table_from_counts(counts, detector.eta, detector.dark)
