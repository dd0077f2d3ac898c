import itertools
import math

import numpy as np
import pytest

from teqkd import downtime as dt
from teqkd.params import binary_entropy


def brute_force_admissible(n, d):
    """All length-n occupancy vectors with detections more than d apart."""
    out = set()
    for bits in itertools.product((0, 1), repeat=n):
        dets = [i for i, b in enumerate(bits) if b]
        if all(b - a > d for a, b in zip(dets, dets[1:])):
            out.add("".join(map(str, bits)))
    return out


class TestStateCounts:
    @pytest.mark.parametrize(
        "n,d,bmcm,rmcm", [(2, 1, 3, 5), (4, 1, 8, 9), (4, 0, 16, 5)]
    )
    def test_reference_counts(self, n, d, bmcm, rmcm):
        assert dt.bmcm_state_count(n, d) == bmcm
        assert dt.rmcm_state_count(n, d) == rmcm

    def test_no_downtime_is_power_of_two(self):
        for n in range(1, 17):
            assert dt.bmcm_state_count(n, 0) == 2**n

    def test_bmcm_counts_match_brute_force(self):
        for n in range(1, 13):
            for d in range(0, n + 1):
                assert dt.bmcm_state_count(n, d) == len(brute_force_admissible(n, d))


class TestEnumeration:
    def test_state_sets_equal_brute_force(self):
        for n in range(1, 13):
            for d in range(0, n + 1):
                labels = {
                    "".join("1" if i in s else "0" for i in range(n))
                    for s in dt.enumerate_bmcm_states(n, d)
                }
                assert labels == brute_force_admissible(n, d), (n, d)

    def test_no_close_detections(self):
        for s in dt.enumerate_bmcm_states(10, 3):
            assert all(b - a > 3 for a, b in zip(s, s[1:]))


class TestSelectMethod:
    def test_reference_points(self):
        assert dt.select_method(16, 12) == "bmcm"
        assert dt.select_method(16, 2) == "rmcm"

    def test_picks_smaller_count(self):
        for n in range(1, 20):
            for d in range(0, n + 1):
                chosen = dt.select_method(n, d)
                nb, nr = dt.bmcm_state_count(n, d), dt.rmcm_state_count(n, d)
                assert (chosen == "bmcm") == (nb < nr)

    def test_half_rule_agreement(self):
        # the d > n/2 shortcut is a coarse guide; the exact-count crossover
        # sits nearer d ~ 0.4 n, so the census lands at 81% on this grid
        # (the shortcut never wins by much where they disagree)
        total = agree = 0
        for n in range(1, 25):
            for d in range(0, n + 1):
                total += 1
                shortcut = "bmcm" if d > n / 2 else "rmcm"
                if shortcut == dt.select_method(n, d):
                    agree += 1
        assert agree / total >= 0.80


class TestDetectorChain:
    def test_bound_no_downtime(self):
        b = dt.detector_chain_bound(0.3, 0, 8)
        assert b.bits_per_frame == pytest.approx(8 * binary_entropy(0.3), rel=1e-14)

    def test_bound_deterministic_occupancy(self):
        assert dt.detector_chain_bound(1.0, 3, 8).bits_per_frame == 0.0

    def test_as_printed_normalization(self):
        b = dt.detector_chain_bound(0.5, 2, 4)
        assert b.as_printed == pytest.approx(b.bits_per_bin / 4, rel=1e-14)

    @pytest.mark.parametrize("p,d", [(0.3, 1), (0.9, 3), (0.5, 5)])
    def test_explicit_chain_matches_closed_form(self, p, d):
        chain = dt.build_detector_chain(p, d)
        result = dt.stationary_distribution(chain)
        assert result.entropy_rate == pytest.approx(binary_entropy(p) / (1 + p * d), abs=1e-10)

    def test_ready_state_stationary_probability(self):
        p, d = 0.37, 4
        res = dt.stationary_distribution(dt.build_detector_chain(p, d))
        assert res.distribution[0] == pytest.approx(1 / (1 + p * d), abs=1e-12)

    def test_d_zero_rejected(self):
        with pytest.raises(ValueError):
            dt.build_detector_chain(0.5, 0)


class TestBuildImc:
    def test_bmcm_toy_structure(self):
        p = 0.3
        q = 1 - p
        chain = dt.build_imc(2, 1, p, "bmcm")
        assert chain.labels == ["00", "01", "10"]
        m = chain.transition_matrix
        assert m[0].tolist() == pytest.approx([q * q, q * p, p])
        assert m[1].tolist() == pytest.approx([q, p, 0.0])
        assert m[2].tolist() == pytest.approx([q * q, q * p, p])

    def test_rmcm_no_downtime_binomial(self):
        p = 0.3
        chain = dt.build_imc(4, 0, p, "rmcm")
        assert chain.labels == ["(0,0,0)", "(0,1,0)", "(0,2,0)", "(0,3,0)", "(0,4,0)"]
        pi = dt.stationary_distribution(chain).distribution
        expected = [math.comb(4, k) * p**k * (1 - p) ** (4 - k) for k in range(5)]
        assert pi.tolist() == pytest.approx(expected, abs=1e-12)

    def test_bmcm_no_downtime_product_distribution(self):
        p = 0.35
        chain = dt.build_imc(3, 0, p, "bmcm")
        pi = dt.stationary_distribution(chain).distribution
        for label, prob in zip(chain.labels, pi):
            ones = label.count("1")
            assert prob == pytest.approx(p**ones * (1 - p) ** (3 - ones), abs=1e-12)

    def test_state_counts_match_formulas(self):
        for n in range(1, 13):
            for d in range(0, n + 1):
                assert dt.build_imc(n, d, 0.5, "bmcm").num_states == dt.bmcm_state_count(n, d)
                assert dt.build_imc(n, d, 0.5, "rmcm").num_states == dt.rmcm_state_count(n, d)

    def test_degenerate_p_rejected(self):
        for p in (0.0, 1.0):
            with pytest.raises(ValueError):
                dt.build_imc(4, 1, p)

    def test_rows_stochastic(self):
        for method in ("bmcm", "rmcm"):
            m = dt.build_imc(6, 2, 0.4, method).transition_matrix
            assert np.abs(m.sum(axis=1) - 1).max() < 1e-12


class TestStationary:
    def test_two_state_symmetric(self):
        chain = dt.FrameChain("detector", ["a", "b"], [0, 0], 1, 1, 0.5,
                              matrix=np.array([[0.2, 0.8], [0.8, 0.2]]))
        res = dt.stationary_distribution(chain)
        assert res.distribution.tolist() == pytest.approx([0.5, 0.5], abs=1e-12)
        assert res.residual < 1e-12

    def test_periodic_chain_converges(self):
        # two-state flip chain has period 2; the lazy iteration still lands
        chain = dt.FrameChain("detector", ["a", "b"], [0, 0], 1, 1, 0.5,
                              matrix=np.array([[0.0, 1.0], [1.0, 0.0]]))
        res = dt.stationary_distribution(chain)
        assert res.distribution.tolist() == pytest.approx([0.5, 0.5], abs=1e-10)
        assert res.entropy_rate == pytest.approx(0.0, abs=1e-12)

    def test_reducible_chain_rejected(self):
        chain = dt.FrameChain("detector", ["a", "b"], [0, 0], 1, 1, 0.5,
                              matrix=np.eye(2))
        with pytest.raises(ValueError, match="irreducible"):
            dt.stationary_distribution(chain)

    def test_bmcm_stationary_matches_bin_simulation(self):
        chain = dt.build_imc(4, 1, 0.5, "bmcm")
        pi = dt.stationary_distribution(chain).distribution
        occ = dt.simulate_bin_occupancy(10_000_000, 0.5, 1, seed=7)
        hist = dt.frame_configuration_counts(occ, 4)
        total = sum(hist.values())
        assert set(hist) <= set(chain.labels)
        for label, prob in zip(chain.labels, pi):
            se = math.sqrt(prob * (1 - prob) / total)
            assert abs(hist.get(label, 0) / total - prob) <= 3 * se + 1e-9, label


class TestRawRate:
    @pytest.mark.parametrize("method", ["bmcm", "rmcm"])
    def test_no_downtime_closed_form(self, method):
        n, p = 8, 0.2
        chain = dt.build_imc(n, 0, p, method)
        expected = math.log2(n) * n * p * (1 - p) ** (n - 1)
        assert dt.raw_rate(chain) == pytest.approx(expected, abs=1e-10)

    def test_saturated_two_bin_frame(self):
        # every frame becomes a valid single-occupancy pattern as occupancy
        # saturates; stationary mass on the empty frame is 2p/(1+p) -> 1
        p = 1 - 1e-4
        chain = dt.build_imc(2, 1, p, "bmcm")
        rate = dt.raw_rate(chain)
        assert rate == pytest.approx(2 * p / (1 + p), abs=1e-9)
        assert rate == pytest.approx(1.0, abs=1e-3)

    def test_methods_agree_across_grid(self):
        for n in range(2, 13):
            for d in range(0, n + 1):
                for p in (0.1, 0.5, 0.9):
                    rb = dt.raw_rate(dt.build_imc(n, d, p, "bmcm"))
                    rr = dt.raw_rate(dt.build_imc(n, d, p, "rmcm"))
                    assert rb == pytest.approx(rr, abs=1e-10), (n, d, p)

    def test_non_ppm_scheme_rejected(self):
        chain = dt.build_imc(4, 0, 0.5, "rmcm")
        with pytest.raises(NotImplementedError):
            dt.raw_rate(chain, scheme="simple")


class TestFrameDistribution:
    @pytest.mark.parametrize("n,d,p", [(4, 1, 0.5), (6, 2, 0.3), (8, 3, 0.7), (10, 4, 0.9), (5, 5, 0.5)])
    def test_rmcm_decompression_equals_bmcm(self, n, d, p):
        fb = dt.frame_distribution(dt.build_imc(n, d, p, "bmcm"))
        fr = dt.frame_distribution(dt.build_imc(n, d, p, "rmcm"))
        assert set(fb) == set(fr)
        for key in fb:
            assert fb[key] == pytest.approx(fr[key], abs=1e-10), key


class TestOmc:
    def test_no_downtime_rows_uniform(self):
        m = dt.build_omc(8, 0, 0.3).transition_matrix
        assert np.abs(m - 1.0 / 8).max() < 1e-12

    def test_two_bin_saturation_repeats_symbol(self):
        m = dt.build_omc(2, 1, 1 - 1e-6).transition_matrix
        assert m[0, 0] > 1 - 3e-6

    def test_rows_match_bin_simulation(self):
        n, d, p = 4, 2, 0.7
        m = dt.build_omc(n, d, p).transition_matrix
        occ = dt.simulate_bin_occupancy(10_000_000, p, d, seed=42)
        syms = dt.valid_symbol_sequence(occ, n)
        counts = np.zeros((n, n))
        np.add.at(counts, (syms[:-1], syms[1:]), 1)
        row_n = counts.sum(axis=1)
        for i in range(n):
            for j in range(n):
                se = math.sqrt(m[i, j] * (1 - m[i, j]) / row_n[i])
                assert abs(counts[i, j] / row_n[i] - m[i, j]) <= 3 * se + 1e-12, (i, j)

    def test_residual_annotation(self):
        chain = dt.build_omc(4, 2, 0.5)
        assert chain.labels == ["0|r0", "1|r0", "2|r1", "3|r2"]


class TestCompressionRatio:
    def test_no_downtime_is_one(self):
        for p in np.arange(0.1, 0.95, 0.1):
            c = dt.compression_ratio(dt.build_omc(8, 0, float(p)))
            assert c == pytest.approx(1.0, abs=1e-10)

    def test_saturated_two_bin_vanishes(self):
        assert dt.compression_ratio(dt.build_omc(2, 1, 1 - 1e-4)) < 0.01

    def test_non_increasing_in_downtime(self):
        values = [1.0] + [dt.compression_ratio(dt.build_omc(16, d, 0.9)) for d in range(1, 9)]
        assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))

    def test_rejects_non_omc(self):
        with pytest.raises(ValueError):
            dt.compression_ratio(dt.build_imc(4, 1, 0.5))


class TestAdjustedRate:
    def test_no_downtime_equals_raw_closed_form(self):
        n, p = 16, 0.2
        assert dt.adjusted_rate(n, 0, p) == pytest.approx(
            math.log2(n) * n * p * (1 - p) ** (n - 1), rel=1e-12
        )

    def test_vanishes_at_saturation_with_downtime(self):
        assert dt.adjusted_rate(2, 1, 1 - 1e-6) < 1e-4

    def test_increases_with_n_at_fixed_time_geometry(self):
        # frame width and dead time fixed in seconds; rate chosen so the
        # single-bin frame would be 90% occupied
        rates = []
        for n in (2, 4, 8, 16, 32, 64, 128):
            p = 1 - math.exp(-2.3 / n)
            rates.append(dt.adjusted_rate(n, n // 2, p))
        assert all(a < b for a, b in zip(rates, rates[1:]))

    def test_agrees_with_chain_based_product(self):
        n, d, p = 8, 3, 0.6
        chain = dt.build_imc(n, d, p)
        raw = dt.raw_rate(chain)
        c = dt.compression_ratio(dt.build_omc(n, d, p))
        assert dt.adjusted_rate(n, d, p) == pytest.approx(raw * c, rel=1e-10)


class TestEntropyBounds:
    def test_entropy_rate_below_log_state_count(self):
        for n, d, p in [(6, 2, 0.5), (8, 1, 0.9), (4, 4, 0.3)]:
            for method in ("bmcm", "rmcm"):
                chain = dt.build_imc(n, d, p, method)
                res = dt.stationary_distribution(chain)
                assert res.entropy_rate <= math.log2(chain.num_states) + 1e-9

    def test_output_entropy_below_source_entropy_per_bin(self):
        # bits emitted per timeline bin cannot exceed the detector process
        # entropy per bin
        for n, d, p in [(4, 2, 0.7), (16, 4, 0.9), (8, 1, 0.2), (16, 8, 0.99), (16, 2, 0.01)]:
            er = dt.stationary_distribution(dt.build_omc(n, d, p)).entropy_rate
            per_bin = er * dt.valid_frame_prob(n, d, p) / n
            assert per_bin <= binary_entropy(p) / (1 + p * d) + 1e-9


class TestValidFrameProb:
    def test_no_downtime_closed_form(self):
        n, p = 8, 0.3
        assert dt.valid_frame_prob(n, 0, p) == n * p * (1 - p) ** (n - 1)

    def test_matches_imc_valid_mass(self):
        n, d, p = 6, 2, 0.4
        chain = dt.build_imc(n, d, p)
        pi = dt.stationary_distribution(chain).distribution
        mass = sum(prob for prob, y in zip(pi, chain.bit_yield) if y > 0)
        assert dt.valid_frame_prob(n, d, p) == pytest.approx(mass, abs=1e-12)


def test_dump_chain_format():
    text = dt.dump_chain(dt.build_imc(2, 1, 0.3, "bmcm"))
    lines = text.strip().splitlines()
    assert len(lines) == 3
    assert lines[1].startswith("01  1.000000000000e+00  row: 00:")


def test_sweep_csv_shape():
    text = dt.sweep_csv([(4, 0, 0.5), (4, 2, 0.5)])
    lines = text.strip().splitlines()
    assert lines[0] == "n,d,p,states,raw_rate,c_dr,adjusted_rate"
    assert len(lines) == 3
    assert text == dt.sweep_csv([(4, 0, 0.5), (4, 2, 0.5)])
