"""Two-spin prescriptions: flip example, post-basis ambiguity, semicausality."""

from __future__ import annotations

import math

import numpy as np
import pytest

from causalprobe.core import (
    born_ensemble,
    post_measurement_expectation,
    validate_scheme,
)
from causalprobe.spins import (
    alice_rotate,
    bloch_grid,
    identity_scheme,
    measured_flag_observable,
    minus,
    plus,
    random_rotations,
    s2_scheme,
    s2_total,
    spin_observable,
    spin_scheme,
    spin_state,
    sz_scheme,
)

SBZ = spin_observable("sBz")
HALF_PI = math.pi / 2


class TestStates:
    def test_up_up(self):
        assert np.allclose(spin_state("up", "up").amplitudes, [1, 0, 0, 0])

    def test_right_up(self):
        assert np.allclose(spin_state("right", "up").amplitudes,
                           np.array([1, 0, 1, 0]) / math.sqrt(2))

    def test_plus_z_is_up(self):
        assert np.allclose(spin_state(plus((0, 0, 1)), "down").amplitudes,
                           [0, 1, 0, 0])

    def test_plus_x_is_right(self):
        assert spin_state(plus((1, 0, 0)), "up").same_up_to_phase(
            spin_state("right", "up"))

    def test_minus_z_is_down(self):
        assert np.allclose(spin_state(minus((0, 0, 1)), "up").amplitudes,
                           [0, 0, 1, 0])

    def test_non_unit_axis_rejected(self):
        with pytest.raises(ValueError):
            spin_state(plus((1, 1, 0)), "up")


class TestRotations:
    def test_quarter_turn_about_y_gives_right(self):
        got = alice_rotate(spin_state("up", "up"), (0, 1, 0), HALF_PI)
        assert got.same_up_to_phase(spin_state("right", "up"))

    def test_flip_about_x(self):
        got = alice_rotate(spin_state("up", "up"), (1, 0, 0), math.pi)
        assert got.same_up_to_phase(spin_state("down", "up"))

    def test_zero_angle_is_identity(self):
        psi = spin_state("right", "down")
        got = alice_rotate(psi, (0, 0, 1), 0.0)
        assert np.allclose(got.amplitudes, psi.amplitudes)

    def test_norm_preserved(self):
        psi = spin_state("up", "up")
        for axis, ang in random_rotations(10, seed=3):
            assert alice_rotate(psi, axis, ang).norm == pytest.approx(1.0, abs=1e-12)


class TestTotalSpinSquaredScheme:
    def test_standard_probabilities_on_right_up(self):
        ens = born_ensemble(s2_scheme("standard"), spin_state("right", "up"))
        probs = {e.label: e.probability for e in ens.entries}
        assert probs["S=0 singlet"] == pytest.approx(0.25, abs=1e-12)
        assert probs["S=1 m=0 sym"] == pytest.approx(0.25, abs=1e-12)
        assert probs["S=1 up-up"] == pytest.approx(0.5, abs=1e-12)
        assert probs["S=1 down-down"] == pytest.approx(0.0, abs=1e-14)

    def test_bell_probabilities_on_right_up(self):
        ens = born_ensemble(s2_scheme("bell"), spin_state("right", "up"))
        for e in ens.entries:
            assert e.probability == pytest.approx(0.25, abs=1e-12)

    def test_basis_choice_changes_bobs_value(self):
        psi = spin_state("right", "up")
        assert post_measurement_expectation(psi, s2_scheme("standard"), SBZ) \
            == pytest.approx(0.25, abs=1e-12)
        assert post_measurement_expectation(psi, s2_scheme("bell"), SBZ) \
            == pytest.approx(0.0, abs=1e-12)

    def test_flip_example(self):
        # no flip: the product triplet state survives with certainty
        ens = born_ensemble(s2_scheme("standard"), spin_state("up", "up"))
        assert ens.probability("S=1 up-up") == pytest.approx(1.0, abs=1e-12)
        assert post_measurement_expectation(
            spin_state("up", "up"), s2_scheme("standard"), SBZ) \
            == pytest.approx(0.5, abs=1e-12)
        # flipped: half singlet, half symmetric triplet, Bob sees zero
        flipped = spin_state("down", "up")
        ens2 = born_ensemble(s2_scheme("standard"), flipped)
        assert ens2.probability("S=0 singlet") == pytest.approx(0.5, abs=1e-12)
        assert ens2.probability("S=1 m=0 sym") == pytest.approx(0.5, abs=1e-12)
        assert post_measurement_expectation(flipped, s2_scheme("standard"), SBZ) \
            == pytest.approx(0.0, abs=1e-12)

    def test_total_spin_conserved_across_bases(self):
        s2 = s2_total()
        psi = spin_state("right", "up")
        before = s2.expectation(psi)
        assert before == pytest.approx(1.5, abs=1e-12)
        for choice in ("standard", "bell", "luders"):
            after = post_measurement_expectation(psi, s2_scheme(choice), s2)
            assert after == pytest.approx(before, abs=1e-10)

    def test_lueders_matches_standard_on_down_up(self):
        psi = spin_state("down", "up")
        std = born_ensemble(s2_scheme("standard"), psi)
        lud = born_ensemble(s2_scheme("luders"), psi)
        assert lud.probability("S=0") == pytest.approx(
            std.probability("S=0 singlet"), abs=1e-12)
        assert lud.probability("S=1") == pytest.approx(
            std.probability("S=1 m=0 sym"), abs=1e-12)
        # the triplet branch collapses onto the same symmetric state
        lud_triplet = next(e for e in lud.entries if e.label == "S=1")
        std_triplet = next(e for e in std.entries if e.label == "S=1 m=0 sym")
        assert abs(lud_triplet.post_state.overlap(std_triplet.post_state)) \
            == pytest.approx(1.0, abs=1e-12)


class TestTotalSpinZScheme:
    def test_m0_basis_choice_changes_bobs_value(self):
        psi = spin_state("right", "up")
        assert post_measurement_expectation(psi, sz_scheme("standard"), SBZ) \
            == pytest.approx(0.5, abs=1e-12)
        assert post_measurement_expectation(psi, sz_scheme("bell"), SBZ) \
            == pytest.approx(0.25, abs=1e-12)

    def test_eigenstate_passes_through(self):
        ens = born_ensemble(sz_scheme("standard"), spin_state("up", "up"))
        assert ens.probability("m=+1") == pytest.approx(1.0, abs=1e-12)

    def test_schemes_validate(self):
        for choice in ("standard", "bell", "luders"):
            assert validate_scheme(sz_scheme(choice)).within(1e-12)
            assert validate_scheme(s2_scheme(choice)).within(1e-12)


class TestMeasuredFlag:
    def test_semicausal_s2_erases_local_value(self):
        ba = measured_flag_observable(s2_scheme("bell"), spin_state("up", "up"), SBZ)
        assert ba.before == pytest.approx(0.5, abs=1e-12)
        assert ba.after == pytest.approx(0.0, abs=1e-12)

    def test_causal_sz_preserves_it(self):
        ba = measured_flag_observable(sz_scheme("standard"), spin_state("up", "up"), SBZ)
        assert ba.before == pytest.approx(0.5, abs=1e-12)
        assert ba.after == pytest.approx(0.5, abs=1e-12)

    def test_identity_scheme_changes_nothing(self, rng):
        from conftest import random_state

        psi = random_state((2, 2), rng)
        ba = measured_flag_observable(identity_scheme(), psi, SBZ)
        assert ba.before == pytest.approx(ba.after, abs=1e-12)


def _invariance_deviation(scheme, rotations):
    """Max change of any B observable under A-local rotations of up-up."""
    psi = spin_state("up", "up")
    worst = 0.0
    for name in ("sBx", "sBy", "sBz"):
        obs = spin_observable(name)
        ref = post_measurement_expectation(psi, scheme, obs)
        for axis, angle in rotations:
            rotated = alice_rotate(psi, axis, angle)
            val = post_measurement_expectation(rotated, scheme, obs)
            worst = max(worst, abs(val - ref))
    return worst


class TestNoSignalingSuite:
    ROTATIONS = bloch_grid(10) + random_rotations(100, seed=7)

    def test_bell_s2_passes(self):
        assert _invariance_deviation(s2_scheme("bell"), self.ROTATIONS) <= 1e-10

    def test_standard_sz_passes(self):
        assert _invariance_deviation(sz_scheme("standard"), self.ROTATIONS) <= 1e-10

    def test_standard_s2_witness(self):
        a = post_measurement_expectation(spin_state("up", "up"), s2_scheme("standard"), SBZ)
        b = post_measurement_expectation(
            alice_rotate(spin_state("up", "up"), (0, 1, 0), HALF_PI),
            s2_scheme("standard"), SBZ)
        assert abs(a - b) >= 0.25 - 1e-10

    def test_bell_sz_witness(self):
        a = post_measurement_expectation(spin_state("up", "up"), sz_scheme("bell"), SBZ)
        b = post_measurement_expectation(
            alice_rotate(spin_state("up", "up"), (0, 1, 0), HALF_PI),
            sz_scheme("bell"), SBZ)
        assert abs(a - b) >= 0.25 - 1e-10


class TestNoMeasurementEquivalence:
    def test_arbitrary_axis_product_basis_reproduces_plain_expectation(self, rng):
        """A complete orthogonal measurement in any {|+-_A>, |up/down_B>}
        product basis leaves Bob's expectation at its unmeasured value."""
        from causalprobe.core import MeasurementScheme
        from causalprobe.spins import single_spin_vector
        from conftest import random_state

        for axis in [(0, 0, 1), (1, 0, 0),
                     tuple(v / np.linalg.norm([0.3, -1.2, 0.5]) for v in (0.3, -1.2, 0.5))]:
            vecs = []
            for a_label in (plus(axis), minus(axis)):
                for b_label in ("up", "down"):
                    vecs.append(np.kron(single_spin_vector(a_label),
                                        single_spin_vector(b_label)))
            scheme = MeasurementScheme.from_basis(
                (2, 2), [(f"v{i}", v) for i, v in enumerate(vecs)])
            for _ in range(5):
                psi = random_state((2, 2), rng)
                want = SBZ.expectation(psi)
                got = post_measurement_expectation(psi, scheme, SBZ)
                assert got == pytest.approx(want, abs=1e-10)


class TestHbarScaling:
    def test_values_scale_linearly(self):
        psi = spin_state("right", "up")
        obs2 = spin_observable("sBz", hbar=2.0)
        assert post_measurement_expectation(psi, s2_scheme("standard"), obs2) \
            == pytest.approx(0.5, abs=1e-12)


class TestSchemeRegistry:
    def test_ids_resolve(self):
        for sid in ("qndsv", "s2-standard", "s2-bell", "s2-luders",
                    "sz-standard", "sz-bell", "sz-luders", "none"):
            target = ("up", "right") if sid == "qndsv" else None
            scheme = spin_scheme(sid, target=target)
            assert validate_scheme(scheme).within(1e-10)

    def test_unknown_id_rejected(self):
        with pytest.raises(ValueError):
            spin_scheme("s3-standard")

    def test_qndsv_needs_target(self):
        with pytest.raises(ValueError):
            spin_scheme("qndsv")
