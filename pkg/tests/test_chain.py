import itertools
import math

import pytest
from hypothesis import given, strategies as st

from swapqkd import chain
from swapqkd.chain import (
    ChainConfig,
    TruncationError,
    bell_signature,
    certify_visibility,
    coincidence_q,
    coincidence_table,
    conditional_outer_counts,
    conditional_probability,
    effective_eta,
    omega,
    visibility,
)
from swapqkd.detector import DetectorParams, ImpossiblePatternError
from swapqkd.fock import CircuitParams, oracle_single_swap


def cfg(n_swaps=1, chi=0.1, eta=0.5, dark=0.0, truncation=3, **kw):
    return ChainConfig(
        n_swaps=n_swaps, chi=chi, eta=eta, dark=dark, truncation=truncation, **kw
    )


class TestOmega:
    def test_hand_values(self):
        assert omega(0, 0, 0, 0) == 1
        assert omega(0, 0, 1, 1) == 2
        assert omega(1, 0, 1, 0) == 1

    def test_total_on_non_negative_integers(self):
        for args in itertools.product(range(4), repeat=4):
            assert isinstance(omega(*args), int)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            omega(-1, 0, 0, 0)

    @given(
        a=st.integers(0, 6),
        b=st.integers(0, 6),
        i=st.integers(0, 6),
        l=st.integers(0, 6),
    )
    def test_depends_only_on_first_pair_sum(self, a, b, i, l):
        assert omega(a, b, i, l) == omega(a + b, 0, i, l)

    def test_splitter_kernel_is_unitary(self):
        # the omega-built 50:50 amplitudes must preserve norm column-wise
        for n1 in range(4):
            for n2 in range(4):
                total = math.fsum(
                    abs(chain._splitter_amplitude(c1, n1 + n2 - c1, n1, n2)) ** 2
                    for c1 in range(n1 + n2 + 1)
                )
                assert total == pytest.approx(1.0, abs=1e-12)


class TestBellSignature:
    def test_table_mapping(self):
        assert bell_signature((1, 0, 1, 0)) == "psi+"
        assert bell_signature((0, 1, 0, 1)) == "psi+"
        assert bell_signature((0, 1, 1, 0)) == "psi-"
        assert bell_signature((1, 0, 0, 1)) == "psi-"
        assert bell_signature((2, 0, 0, 0)) == "phi"
        assert bell_signature((0, 0, 0, 2)) == "phi"
        assert bell_signature((1, 1, 0, 0)) is None


class TestOracleEquivalence:
    @pytest.mark.parametrize("chi", [0.1, 0.24])
    @pytest.mark.parametrize("eta", [1.0, 0.04])
    @pytest.mark.parametrize("dark", [0.0, 1e-5])
    def test_single_swap_matches_brute_force(self, chi, eta, dark):
        circuit = CircuitParams(chi=chi, delta_a=math.pi / 2, delta_b=0.37, n_max=3)
        oracle = oracle_single_swap(circuit, DetectorParams.from_eta(eta, dark))
        closed = coincidence_table(
            cfg(chi=chi, eta=eta, dark=dark, delta_b=0.37, truncation=3)
        )
        worst = max(
            abs(oracle.q_values[p] - closed.q_values[p]) for p in oracle.q_values
        )
        assert worst <= 1e-9

    def test_count_distributions_match(self):
        from swapqkd.fock import outer_count_distribution

        circuit = CircuitParams(chi=0.1, n_max=3)
        detector = DetectorParams.from_eta(0.5, 1e-5)
        brute = outer_count_distribution(circuit, detector, (1, 0, 1, 0))
        closed = conditional_outer_counts(cfg(eta=0.5, dark=1e-5))
        for key, value in closed.items():
            assert value == pytest.approx(brute.get(key, 0.0), abs=1e-12)


class TestConditionalDistribution:
    def test_vacuum_in_vacuum_out(self):
        table = conditional_outer_counts(
            cfg(chi=0.0, eta=1.0, dark=0.0, inner_pattern=((0, 0, 0, 0),))
        )
        assert table[(0, 0, 0, 0)] == pytest.approx(1.0, abs=1e-14)

    def test_low_pumping_bell_signature(self):
        table = conditional_outer_counts(cfg(chi=1e-3, eta=1.0, dark=0.0))
        assert table[(1, 0, 1, 0)] == pytest.approx(0.25, abs=2e-3)
        assert table[(0, 1, 0, 1)] == pytest.approx(0.25, abs=2e-3)
        assert table[(1, 0, 1, 0)] == pytest.approx(table[(0, 1, 0, 1)], rel=1e-9)
        assert table[(1, 0, 0, 1)] < 1e-6
        assert table[(0, 1, 1, 0)] < 1e-6

    def test_psi_plus_propagates_through_deeper_chains(self):
        # conditioning every station on the psi+ signature keeps the outer
        # coincidence sector purely correlated at low pumping, for any depth
        # (heralds with empty outer arms also survive, so the two correlated
        # patterns share the coincidence mass rather than all of it)
        table = conditional_outer_counts(
            cfg(n_swaps=2, chi=1e-3, eta=1.0, dark=0.0, truncation=2)
        )
        assert table[(1, 0, 1, 0)] == pytest.approx(table[(0, 1, 0, 1)], rel=1e-6)
        assert table[(1, 0, 1, 0)] > 0.1
        assert table[(1, 0, 0, 1)] < 1e-5 * table[(1, 0, 1, 0)]
        assert table[(0, 1, 1, 0)] < 1e-5 * table[(1, 0, 1, 0)]

    def test_impossible_conditioning(self):
        with pytest.raises(ImpossiblePatternError):
            conditional_outer_counts(cfg(chi=0.0, eta=1.0, dark=0.0))

    def test_truncation_bound_reported(self):
        with pytest.raises(TruncationError):
            conditional_probability(cfg(), (4, 0, 0, 0))
        assert conditional_probability(cfg(), (1, 0, 1, 0)) > 0.0


class TestCoincidences:
    def test_threshold_table_sums_to_one(self):
        for config in (
            cfg(chi=0.1, eta=0.5, dark=1e-5),
            cfg(n_swaps=2, chi=0.2, eta=0.04, dark=1e-4, truncation=2),
        ):
            table = coincidence_table(config)
            total = math.fsum(table.q_values.values())
            assert total == pytest.approx(1.0, abs=table.truncation_deficit + 1e-9)
            assert all(0.0 <= v <= 1.0 for v in table.q_values.values())

    def test_single_pattern_accessor(self):
        config = cfg(chi=0.1, eta=0.5)
        table = coincidence_table(config)
        assert coincidence_q(config, (1, 0, 1, 0)) == table.q_values[(1, 0, 1, 0)]
        with pytest.raises(ValueError):
            coincidence_q(config, (2, 0, 0, 0))

    def test_delta_periodicity(self):
        base = coincidence_table(cfg(chi=0.2, eta=0.3, dark=1e-5, delta_b=0.4))
        wrapped = coincidence_table(
            cfg(chi=0.2, eta=0.3, dark=1e-5, delta_b=0.4 + 2 * math.pi)
        )
        for pattern, value in base.q_values.items():
            assert wrapped.q_values[pattern] == pytest.approx(value, abs=1e-12)

    def test_half_turn_swaps_correlated_and_anticorrelated(self):
        lhs = coincidence_table(cfg(chi=0.2, eta=0.3, dark=1e-5, delta_b=0.4 - math.pi))
        rhs = coincidence_table(cfg(chi=0.2, eta=0.3, dark=1e-5, delta_b=0.4))
        assert lhs.q_max == pytest.approx(rhs.q_min, abs=1e-12)
        assert lhs.q_min == pytest.approx(rhs.q_max, abs=1e-12)


class TestVisibility:
    def test_near_unity_at_low_pumping(self):
        assert visibility(cfg(chi=0.01, eta=1.0, dark=0.0)) > 0.995

    def test_uses_reference_angles(self):
        tilted = cfg(chi=0.1, eta=0.5, delta_a=0.3, delta_b=1.1)
        assert visibility(tilted) == visibility(cfg(chi=0.1, eta=0.5))

    def test_extremized_matches_fixed_angle_convention(self):
        config = cfg(chi=0.15, eta=0.3, dark=1e-5)
        assert visibility(config, extremize_delta_b=True) == pytest.approx(
            visibility(config), abs=1e-6
        )

    def test_strictly_decreasing_in_chi(self):
        values = [visibility(cfg(chi=c, eta=0.04, dark=1e-5)) for c in (0.1, 0.2, 0.3)]
        assert values[0] > values[1] > values[2]

    def test_chain_depth_ordering(self):
        values = [
            visibility(cfg(n_swaps=n, chi=0.1, eta=0.04, dark=1e-5, truncation=3))
            for n in (1, 2, 3)
        ]
        assert values[0] > values[1] > values[2]

    def test_perfect_detectors_saturate_with_distance(self):
        # with eta0=1 and no dark counts the visibility flattens at long
        # distance instead of collapsing (loss only weakens the heralds)
        def vis_at(length):
            eta = effective_eta(1.0, 0.25, 0.0, length, n_swaps=2)
            return visibility(cfg(n_swaps=2, chi=0.1, eta=eta, truncation=3))

        v250, v500, v1000 = vis_at(250.0), vis_at(500.0), vis_at(1000.0)
        assert v1000 > 0.7
        assert v1000 == pytest.approx(v500, abs=0.01)
        assert v1000 >= 0.94 * v250

    def test_certification(self):
        v, v_next, converged = certify_visibility(cfg(chi=0.01, eta=0.5, dark=1e-5))
        assert converged
        assert v == pytest.approx(v_next, abs=1e-6)

    def test_degenerate_configuration_raises(self):
        with pytest.raises(ImpossiblePatternError):
            visibility(cfg(chi=0.0, eta=1.0, dark=0.0))


class TestEffectiveEta:
    def test_no_distance_keeps_fixed_losses(self):
        assert effective_eta(0.7, 0.25, 4.0, 0.0, 1) == pytest.approx(
            0.7 * 10 ** (-0.4), rel=1e-14
        )

    def test_four_arms_per_swap(self):
        # total distance splits over 4N arms
        eta = effective_eta(1.0, 0.25, 0.0, 800.0, 2)
        assert eta == pytest.approx(10 ** (-0.25 * 100 / 10), rel=1e-14)

    def test_negative_distance_rejected(self):
        with pytest.raises(ValueError):
            effective_eta(0.7, 0.25, 4.0, -1.0, 1)


class TestChainConfig:
    def test_station_count(self):
        assert cfg(n_swaps=3, truncation=2).n_stations == 5

    def test_default_pattern_is_psi_plus(self):
        patterns = cfg(n_swaps=2, truncation=2).station_patterns()
        assert patterns == ((1, 0, 1, 0),) * 3

    def test_pattern_length_enforced(self):
        with pytest.raises(ValueError):
            cfg(n_swaps=2, inner_pattern=((1, 0, 1, 0),))

    def test_domain_validation(self):
        with pytest.raises(ValueError):
            cfg(chi=-0.1)
        with pytest.raises(ValueError):
            cfg(eta=1.5)
        with pytest.raises(ValueError):
            cfg(truncation=0)
        with pytest.raises(ValueError):
            ChainConfig(n_swaps=0, chi=0.1, eta=0.5)
