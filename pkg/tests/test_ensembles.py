import numpy as np
import pytest

from speclab.ensembles import (
    CIRCLE_TAGS,
    EnsembleTag,
    compress,
    ginibre_complex,
    gue_wigner,
    haar_orthogonal,
    haar_so,
    haar_so_minus,
    haar_su,
    haar_symplectic,
    haar_unitary,
    randomized_sum,
    sample_circle_ensemble,
    sample_coe,
    sample_cse,
    symplectic_form,
)
from speclab.errors import ContractError
from speclab.matlin import det_lu, eig_hermitian, eig_unitary_angles, hs_norm, op_norm
from speclab.rng import StreamKey

TWO_PI = 2 * np.pi
SEED = 1234


def key(ens, n, r=0, seed=SEED):
    return StreamKey(seed, ens, n, r)


class TestGinibre:
    def test_determinism(self):
        k = key("ginibre", 16)
        assert np.array_equal(ginibre_complex(16, k).entries, ginibre_complex(16, k).entries)

    def test_unit_variance_entries(self):
        # pooled mean of |entry|^2 is within a CLT band around 1
        pooled = np.concatenate([
            np.abs(ginibre_complex(64, key("ginibre_var", 64, r)).entries.ravel()) ** 2
            for r in range(3)
        ])[:10000]
        assert 0.97 <= np.mean(pooled) <= 1.03

    def test_distinct_replicates_differ_everywhere(self):
        g0 = ginibre_complex(8, key("ginibre", 8, 0)).entries
        g1 = ginibre_complex(8, key("ginibre", 8, 1)).entries
        assert np.all(g0 != g1)


class TestHaarUnitary:
    def test_n1_on_circle(self):
        u = haar_unitary(1, key("unitary", 1))
        assert abs(abs(u.entries[0, 0]) - 1) < 1e-14

    def test_mean_trace_near_zero(self):
        # E tr U^k = 0 on U(n) for 1 <= k < n
        traces1, traces2 = [], []
        for r in range(2000):
            u = haar_unitary(8, key("unitary_mom", 8, r))
            ang = eig_unitary_angles(u).angles
            traces1.append(np.sum(np.exp(1j * ang)) / 8)
            traces2.append(np.sum(np.exp(2j * ang)))
        for traces in (np.array(traces1), np.array(traces2)):
            se = np.sqrt((traces.real.var() + traces.imag.var()) / traces.size)
            assert abs(traces.mean()) <= 4 * se


class TestRealGroups:
    def test_so_determinant(self):
        for r in range(20):
            u = haar_so(5, key("so", 5, r))
            assert abs(det_lu(u.inner).real - 1) <= 1e-8

    def test_so_minus_n1_is_minus_one(self):
        u = haar_so_minus(1, key("so_minus", 1))
        assert u.entries[0, 0] == pytest.approx(-1.0)

    def test_so3_fixes_an_axis(self):
        for r in range(20):
            ang = eig_unitary_angles(haar_so(3, key("so3", 3, r))).angles
            nearest = min(ang.min(), TWO_PI - ang.max())
            assert nearest < 1e-8


class TestHaarSu:
    def test_det_is_one(self):
        for r in range(20):
            u = haar_su(6, key("su", 6, r))
            assert abs(det_lu(u.inner) - 1) <= 1e-8

    def test_su1_is_trivial(self):
        u = haar_su(1, key("su", 1))
        assert u.entries[0, 0] == pytest.approx(1.0)


class TestSymplectic:
    def test_preserves_form(self):
        for n, r in [(1, 0), (2, 0), (4, 0), (8, 1), (32, 0)]:
            u = haar_symplectic(n, key("symplectic", 2 * n, r))
            j = symplectic_form(n)
            assert hs_norm(u.entries @ j @ u.entries.T - j) <= 1e-8 * np.sqrt(n)

    def test_angles_closed_under_reflection(self):
        for r in range(10):
            ang = eig_unitary_angles(haar_symplectic(4, key("symplectic", 8, r))).angles
            reflected = np.sort(np.mod(TWO_PI - ang, TWO_PI))
            diff = np.abs(np.sort(ang) - reflected)
            diff = np.minimum(diff, TWO_PI - diff)
            assert np.max(diff) < 1e-8

    def test_sp1_pair(self):
        ang = eig_unitary_angles(haar_symplectic(1, key("symplectic", 2, 3))).angles
        assert ang[0] + ang[1] == pytest.approx(TWO_PI, abs=1e-10)


class TestCircularEnsembles:
    def test_coe_symmetric(self):
        for r in range(20):
            m = sample_coe(9, key("coe", 9, r)).entries
            assert hs_norm(m - m.T) <= 1e-10 * 3

    def test_cse_kramers_doublets(self):
        for r in range(10):
            ang = np.sort(eig_unitary_angles(sample_cse(4, key("cse", 8, r))).angles)
            pairs = ang.reshape(-1, 2)
            assert np.max(np.abs(pairs[:, 0] - pairs[:, 1])) < 1e-6

    def test_coe_pooled_angles_uniform(self):
        from scipy import stats

        pooled = []
        for r in range(500):
            u = sample_coe(16, key("coe_unif", 16, r))
            pooled.append(eig_unitary_angles(u).angles)
        pooled = np.concatenate(pooled) / TWO_PI
        ks = stats.kstest(pooled, "uniform").statistic
        assert ks <= 0.02


class TestGueWigner:
    def test_exactly_hermitian(self):
        a = gue_wigner(10, key("gue", 10)).entries
        assert np.array_equal(a, a.conj().T)

    def test_second_moment_normalization(self):
        # E (1/n) sum lambda_i^2 = 1 under the 1/n entry-variance scaling
        vals = []
        for r in range(200):
            a = gue_wigner(64, key("gue_m2", 64, r))
            vals.append(np.mean(eig_hermitian(a).values ** 2))
        assert abs(np.mean(vals) - 1.0) < 0.05

    def test_operator_norm_bounded(self):
        norms = [op_norm(gue_wigner(256, key("gue_op", 256, r))) for r in range(100)]
        assert np.mean(norms) <= 2.2

    def test_op_norm_std_shrinks_with_n(self):
        # subgaussian concentration predicts std ~ 1/n: factor >= 1.5 per 4x in n
        stds = []
        for n in (32, 128):
            norms = [op_norm(gue_wigner(n, key("gue_conc", n, r))) for r in range(200)]
            stds.append(np.std(norms))
        assert stds[0] / stds[1] >= 1.5


class TestCompress:
    def test_full_compression_is_similarity(self):
        rng_key = key("compress", 6)
        a = gue_wigner(6, rng_key)
        u = haar_unitary(6, key("compress_u", 6))
        m = compress(a, u, 6)
        assert np.allclose(eig_hermitian(m).values, eig_hermitian(a).values, atol=1e-8)

    def test_identity_compresses_to_identity(self):
        from speclab.matlin import hermitian

        a = hermitian(np.eye(5))
        u = haar_unitary(5, key("compress_id", 5))
        m = compress(a, u, 3)
        assert np.allclose(m.entries, np.eye(3), atol=1e-12)

    def test_interlacing_range(self):
        for r in range(50):
            a = gue_wigner(8, key("compress_rng", 8, r))
            u = haar_unitary(8, key("compress_rng_u", 8, r))
            vals_a = eig_hermitian(a).values
            k = 1 + r % 8
            vals_m = eig_hermitian(compress(a, u, k)).values
            assert vals_m[0] >= vals_a[0] - 1e-10
            assert vals_m[-1] <= vals_a[-1] + 1e-10

    def test_dimension_mismatch(self):
        a = gue_wigner(4, key("mismatch", 4))
        u = haar_unitary(5, key("mismatch_u", 5))
        with pytest.raises(ContractError):
            compress(a, u, 2)


class TestRandomizedSum:
    def test_zero_a_gives_b(self):
        from speclab.matlin import hermitian

        b = gue_wigner(5, key("rs_b", 5))
        u = haar_unitary(5, key("rs_u", 5))
        m = randomized_sum(hermitian(np.zeros((5, 5))), b, u)
        assert np.allclose(m.entries, b.entries)

    def test_identity_u_gives_plain_sum(self):
        from speclab.matlin import hermitian, unitary

        a = gue_wigner(5, key("rs_a", 5))
        b = gue_wigner(5, key("rs_b2", 5))
        m = randomized_sum(a, b, unitary(np.eye(5)))
        assert np.allclose(m.entries, a.entries + b.entries)

    def test_weyl_containment(self):
        for r in range(50):
            a = gue_wigner(8, key("rs_w_a", 8, r))
            b = gue_wigner(8, key("rs_w_b", 8, r))
            u = haar_unitary(8, key("rs_w_u", 8, r))
            ea = eig_hermitian(a).values
            eb = eig_hermitian(b).values
            em = eig_hermitian(randomized_sum(a, b, u)).values
            eps = 1e-8 * (op_norm(a) + op_norm(b))
            assert em[0] >= ea[0] + eb[0] - eps
            assert em[-1] <= ea[-1] + eb[-1] + eps


class TestGroupMembership:
    @pytest.mark.parametrize("n", [2, 3, 8, 17, 64])
    def test_unitarity_all_tags(self, n):
        for tag in CIRCLE_TAGS:
            amb = n + 1 if (tag in {EnsembleTag.SYMPLECTIC, EnsembleTag.CSE} and n % 2) else n
            for r in range(5):
                u = sample_circle_ensemble(tag, amb, key(f"member_{tag.value}", amb, r))
                defect = hs_norm(u.entries @ u.entries.conj().T - np.eye(amb))
                assert defect <= 1e-10 * np.sqrt(amb)

    def test_haar_invariance_smoke(self):
        # angles of W U (fixed W) are distributed like angles of U
        from scipy import stats

        w = haar_unitary(8, key("invariance_w", 8)).entries
        plain, shifted = [], []
        for r in range(300):
            u = haar_unitary(8, key("invariance", 8, r))
            plain.append(eig_unitary_angles(u).angles)
            from speclab.matlin import unitary

            shifted.append(eig_unitary_angles(unitary(w @ u.entries)).angles)
        ks = stats.ks_2samp(np.concatenate(plain), np.concatenate(shifted)).pvalue
        assert ks > 0.01


class TestDeterminismAcrossSamplers:
    @pytest.mark.parametrize("tag", sorted(CIRCLE_TAGS, key=lambda t: t.value))
    def test_replay(self, tag):
        n = 8
        k = key(tag.value, n, 3)
        u1 = sample_circle_ensemble(tag, n, k)
        u2 = sample_circle_ensemble(tag, n, k)
        assert np.array_equal(u1.entries, u2.entries)
