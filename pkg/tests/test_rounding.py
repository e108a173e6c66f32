import itertools

import numpy as np
import pytest

from hirelp import _gkps_py, backend, lp, rounding
from hirelp.instances import tightness_parallel


class TestSimpleDr:
    def test_integral_passthrough(self, rng):
        out = rounding.simple_dr([1.0, 0.0, 1.0], rng)
        assert out.tolist() == [1, 0, 1]

    def test_two_fractional_perfectly_anticorrelated(self, rng):
        for _ in range(200):
            out = rounding.simple_dr([1.0, 0.4, 0.6], rng)
            assert out[0] == 1
            assert out[1] + out[2] == 1  # exactly one of the pair

    def test_single_fractional_marginal(self):
        outs = rounding.dr_outcomes([0.3])
        assert [(o.bits.tolist(), o.probability) for o in outs] == [([1], 0.3), ([0], 0.7)]

    def test_preconditions_rejected(self, rng):
        with pytest.raises(ValueError):
            rounding.simple_dr([0.4, 0.3, 0.2], rng)
        with pytest.raises(ValueError):
            rounding.simple_dr([0.4, 0.3], rng)  # pair not summing to 1

    def test_exact_marginals_by_enumeration(self):
        for y in ([0.25, 1.0], [0.5, 0.5], [1.0, 0.0], [0.0, 0.37, 0.63]):
            outs = rounding.dr_outcomes(y)
            assert sum(o.probability for o in outs) == pytest.approx(1.0)
            marginal = sum(o.probability * o.bits for o in outs)
            assert np.allclose(marginal, y, atol=1e-12)

    def test_outcome_counts(self):
        assert len(rounding.dr_outcomes([1.0, 0.0])) == 1
        assert len(rounding.dr_outcomes([0.25, 1.0])) == 2
        assert len(rounding.dr_outcomes([0.4, 0.6])) == 2

    def test_budget_never_exceeded(self, rng):
        # P2: sum of rounded bits <= ceil(sum y)
        for _ in range(100):
            y = np.zeros(6)
            y[:3] = 1.0
            y[3] = 0.35
            y[4] = 0.65
            out = rounding.simple_dr(y, rng)
            assert out.sum() <= int(np.ceil(y.sum()))


class TestGkps:
    def test_integral_identity(self, rng):
        w = np.array([[1.0, 0.0], [0.0, 1.0]])
        assert np.array_equal(rounding.gkps_round(w, rng), w.astype(np.int8))

    def test_star_picks_exactly_one(self, rng):
        for _ in range(300):
            out = rounding.gkps_round([0.5, 0.5], rng)
            assert out.sum() == 1
        picks = [rounding.gkps_round([0.5, 0.5], rng)[0] for _ in range(4000)]
        assert abs(np.mean(picks) - 0.5) < 3 * 0.5 / np.sqrt(4000)

    def test_degree_preservation_on_lp_solution(self, rng):
        inst = tightness_parallel(2, 2)
        sol = lp.solve_lp_par(inst)
        for bits in rounding.gkps_sample_batch(sol.y, 500, rng):
            assert np.all(bits.sum(axis=0) <= 2)  # round budget per position
            assert np.all(bits.sum(axis=1) <= 1)  # one offer per candidate

    def test_degree_preservation_random_matrices(self, rng):
        for _ in range(10):
            w = rng.uniform(0, 1, (4, 3))
            rows = w.sum(axis=1)
            cols = w.sum(axis=0)
            for bits in rounding.gkps_sample_batch(w, 400, rng):
                r = bits.sum(axis=1)
                c = bits.sum(axis=0)
                assert np.all(np.floor(rows) - 1e-9 <= r) and np.all(r <= np.ceil(rows) + 1e-9)
                assert np.all(np.floor(cols) - 1e-9 <= c) and np.all(c <= np.ceil(cols) + 1e-9)

    def test_marginals_preserved_empirically(self, rng):
        w = rng.uniform(0, 1, (4, 3))
        n_samples = 40_000
        bits = rounding.gkps_sample_batch(w, n_samples, rng)
        emp = bits.mean(axis=0)
        sigma = np.sqrt(w * (1 - w) / n_samples)
        assert np.all(np.abs(emp - w) <= 4 * sigma + 1e-12)

    def test_negative_correlation_one_sided(self, rng):
        # P3 on all same-vertex pairs: joint <= product (within 3 sigma)
        w = rng.uniform(0.2, 0.8, (5, 3))
        n_samples = 50_000
        bits = rounding.gkps_sample_batch(w, n_samples, rng).astype(float)
        pairs = []
        for i in range(5):
            pairs += [((i, a), (i, b)) for a, b in itertools.combinations(range(3), 2)]
        for j in range(3):
            pairs += [((a, j), (b, j)) for a, b in itertools.combinations(range(5), 2)]
        for b_val in (0, 1):
            match = bits == b_val if b_val else 1.0 - bits
            for (i1, j1), (i2, j2) in pairs:
                joint = (match[:, i1, j1] * match[:, i2, j2]).mean()
                prod = match[:, i1, j1].mean() * match[:, i2, j2].mean()
                sigma = np.sqrt(max(joint * (1 - joint), 1e-4) / n_samples)
                assert joint <= prod + 3 * sigma

    def test_enumeration_is_exact(self, rng):
        for _ in range(10):
            w = rng.uniform(0, 1, (3, 2))
            outs = rounding.enumerate_gkps_outcomes(w)
            assert sum(o.probability for o in outs) == pytest.approx(1.0, abs=1e-12)
            marginal = sum(o.probability * o.bits for o in outs)
            assert np.allclose(marginal, w, atol=1e-9)

    def test_weights_validated(self, rng):
        with pytest.raises(ValueError):
            rounding.gkps_round([1.5, 0.2], rng)


class TestTopKSelectionLimitation:
    def test_negative_correlation_need_not_dominate_for_k2(self):
        """Regression: P1+P3 alone do not imply dominance when picking the
        top two of four unit weights. The eight-set scheme (all singletons
        and all triples, uniformly) collects 3/2; independent halves 13/8."""
        sets = [{0}, {1}, {2}, {3}, {0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}]
        dep = sum(min(len(s), 2) for s in sets) / len(sets)
        assert dep == pytest.approx(3 / 2)

        indep = 0.0
        for picks in itertools.product([0, 1], repeat=4):
            indep = indep + (0.5 ** 4) * min(sum(picks), 2)
        assert indep == pytest.approx(13 / 8)

        # the dependent scheme satisfies P1 and same-subset negative correlation
        for i in range(4):
            assert sum(i in s for s in sets) / len(sets) == pytest.approx(0.5)
        joint_all = sum(set(range(4)) <= s for s in sets) / len(sets)
        assert joint_all <= 0.5 ** 4
        assert dep < indep


class TestBackends:
    def test_available_backends_agree_bitwise(self, rng):
        impls = backend.backends()
        if "cython" not in impls:
            pytest.skip("compiled kernel not built")
        for _ in range(50):
            w = rng.uniform(0, 1, (5, 3))
            uniforms = rng.random(16)
            a = w.copy()
            b = w.copy()
            used_py = impls["python"].gkps_core(a, uniforms)
            used_cy = impls["cython"].gkps_core(b, uniforms)
            assert used_py == used_cy
            assert np.array_equal(a, b)

    def test_batch_matches_single(self, rng):
        w = rng.uniform(0, 1, (4, 2))
        uniforms = rng.random((8, 9))
        out = np.empty((8, 4, 2), dtype=np.uint8)
        backend.gkps_batch(w, uniforms, out)
        for s in range(8):
            m = w.copy()
            _gkps_py.gkps_core(m, uniforms[s])
            assert np.array_equal(out[s], (m > 0.5).astype(np.uint8))
