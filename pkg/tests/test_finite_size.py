import math

import numpy as np
import pytest
from scipy import integrate, special

from renyigas import entropy_functions as ef
from renyigas import finite_size as fs
from renyigas import thermo
from renyigas.finite_size._bessel import BesselSweep
from renyigas.regions import annulus, axis_box, ball, half_plane
from renyigas.widom import b_coefficient


def gaussian_box_oracle(alpha, L1, L2):
    """tr D(gaussian, box; t^2) from the factorized squared kernel.

    k_alpha(z)^2 = g(z1) g(z2) with g(s) = alpha^2 / (2 pi) exp(-alpha^2 s^2), so
    tr D = -(I^2 L1 L2 - J(L1) J(L2)) with I = int g and J(L) = int g(s) (L - |s|)_+.
    """
    g = lambda s: alpha ** 2 / (2 * math.pi) * math.exp(-(alpha * s) ** 2)
    I = 2 * integrate.quad(g, 0, np.inf, epsabs=1e-14)[0]
    J = lambda L: 2 * integrate.quad(lambda s: g(s) * (L - s), 0, L, epsabs=1e-14)[0]
    return -(I * I * L1 * L2 - J(L1) * J(L2))


class TestKernel:
    def test_gaussian_2d(self, gauss2, rng):
        z = rng.normal(size=(20, 2))
        np.testing.assert_allclose(fs.kernel_transform(gauss2, z),
                                   np.exp(-np.sum(z ** 2, 1) / 2) / (2 * math.pi), atol=1e-13)

    def test_gaussian_3d(self, rng):
        z = rng.normal(size=(10, 3))
        np.testing.assert_allclose(fs.kernel_transform(thermo.gaussian(3), z),
                                   np.exp(-np.sum(z ** 2, 1) / 2) / (2 * math.pi) ** 1.5,
                                   atol=1e-13)

    def test_limit_fermi_origin(self, limit_fermi2):
        # (2 pi)^-2 int dxi / (1 + exp(|xi|^2 / 2)) = ln 2 / (2 pi)
        np.testing.assert_allclose(fs.kernel_transform(limit_fermi2, np.zeros((1, 2))),
                                   math.log(2) / (2 * math.pi), rtol=1e-12)

    def test_anisotropic(self, rng):
        a = thermo.boltzmann(thermo.anisotropic([1.0, 2.0]))
        z = rng.normal(size=(8, 2))
        ref = np.exp(-(z[:, 0] ** 2 + z[:, 1] ** 2 / 2) / 2) / (2 * math.pi * math.sqrt(2))
        np.testing.assert_allclose(fs.kernel_transform(a, z), ref, atol=1e-13)

    def test_table_cached_and_readonly(self, gauss2):
        t1, t2 = fs.kernel_table(gauss2), fs.kernel_table(gauss2)
        assert t1 is t2
        assert t1.radial(np.array([1e3]))[0] == 0.0

    def test_bad_shape(self, gauss2):
        with pytest.raises(ValueError):
            fs.kernel_transform(gauss2, np.zeros((3, 3)))


class TestBesselSweep:
    @pytest.mark.parametrize("spherical", [False, True])
    def test_against_scipy(self, spherical):
        x = np.linspace(0.05, 60.0, 400)
        seen = 0
        for l, vals in BesselSweep(x, 40, spherical):
            ref = special.spherical_jn(l, x) if spherical else special.jv(l, x)
            np.testing.assert_allclose(vals, ref, atol=1e-12)
            seen += 1
        assert seen == 41

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            BesselSweep(np.array([0.0, 1.0]), 3)


class TestBuildW:
    def test_trace_and_symmetry(self, gauss2, disk):
        W = fs.build_w(gauss2, disk, 4.0)
        np.testing.assert_array_equal(W.matrix, W.matrix.T)
        np.testing.assert_allclose(np.trace(W.matrix), W.volume * 16 / (2 * math.pi), rtol=1e-12)
        np.testing.assert_allclose(W.volume, math.pi, rtol=0.02)

    def test_spectrum_in_unit_interval(self, limit_fermi2, disk):
        lam = fs.build_w(limit_fermi2, disk, 4.0).eigenvalues()
        assert lam.min() > -1e-10 and lam.max() < 0.5 + 1e-10

    def test_grid_box_tiles_exactly(self):
        idx, pts = fs.grid_nodes(axis_box([0, 0], [1, 2]), 0.125)
        assert idx.shape[0] == 8 * 16

    def test_node_cap(self, gauss2):
        with pytest.raises(ValueError, match="node cap"):
            fs.build_w(gauss2, ball(3.0), 8.0)

    def test_complement_needs_box(self, gauss2, disk):
        with pytest.raises(ValueError):
            fs.grid_nodes(disk.complemented(), 0.1)

    def test_spacing_rule(self):
        assert fs.spacing_rule(4.0, ball(1.0)) == 1 / 16
        assert fs.spacing_rule(1.0, annulus(0.9, 1.0)) == pytest.approx(0.1 / 8)


class TestTraces:
    def test_polynomial_traces(self, gauss2, disk):
        W = fs.build_w(gauss2, disk, 3.0)
        M = W.matrix
        np.testing.assert_allclose(fs.trace_f_of_w(W, ef.power(1.0, 1)), np.trace(M), rtol=1e-10)
        np.testing.assert_allclose(fs.trace_f_of_w(W, ef.quadratic()), np.sum(M * M), rtol=1e-10)

    def test_affine_exact_zero(self, gauss2, disk):
        res = fs.trace_d(gauss2, disk, 4.0, ef.power(2.0, 1))
        assert res.value == 0.0 and res.method == "exact"

    def test_needs_f0_zero(self, gauss2, disk):
        with pytest.raises(ValueError):
            fs.trace_d(gauss2, disk, 4.0, ef.affine(1.0, 1.0) + ef.quadratic())

    def test_sector_matches_oracle(self, gauss2, disk):
        res = fs.trace_d(gauss2, disk, 4.0, ef.quadratic(), method="sector")
        np.testing.assert_allclose(res.value, fs.hs_oracle_quadratic(gauss2, disk, 4.0),
                                   rtol=1e-8)

    def test_sector_annulus(self, gauss2):
        A = annulus(0.5, 1.0)
        res = fs.trace_d(gauss2, A, 4.0, ef.quadratic(), method="sector")
        np.testing.assert_allclose(res.value, fs.hs_oracle_quadratic(gauss2, A, 4.0), rtol=1e-6)

    def test_pixel_near_oracle(self, gauss2, disk):
        res = fs.trace_d(gauss2, disk, 4.0, ef.quadratic(), method="pixel")
        np.testing.assert_allclose(res.value, fs.hs_oracle_quadratic(gauss2, disk, 4.0),
                                   rtol=0.02)

    def test_pixel_box_against_factorized_oracle(self, gauss2):
        box = axis_box([0, 0], [1, 2])
        ref = gaussian_box_oracle(4.0, 1.0, 2.0)
        np.testing.assert_allclose(fs.hs_oracle_quadratic(gauss2, box, 4.0), ref, rtol=1e-3)
        # pixel route: about 1 % discretization error at h = 1 / (4 alpha)
        np.testing.assert_allclose(fs.trace_d(gauss2, box, 4.0, ef.quadratic()).value, ref,
                                   rtol=0.02)

    def test_sector_vs_pixel_entropy(self, limit_fermi2, disk):
        f = ef.von_neumann()
        s = fs.trace_d(limit_fermi2, disk, 4.0, f, method="sector").value
        p = fs.trace_d(limit_fermi2, disk, 4.0, f, method="pixel").value
        np.testing.assert_allclose(p, s, rtol=0.03)


class TestOracle:
    def test_half_plane(self, gauss2):
        for alpha in (1.0, 4.0):
            np.testing.assert_allclose(fs.hs_oracle_quadratic(gauss2, half_plane(), alpha),
                                       -alpha / (8 * math.pi ** 1.5), rtol=1e-10)

    def test_nonpositive(self, limit_fermi2):
        for region in (ball(1.0), axis_box([0, 0], [1, 1]), annulus(0.3, 1.0)):
            assert fs.hs_oracle_quadratic(limit_fermi2, region, 2.0) <= 0.0

    def test_tends_to_b(self, gauss2, disk):
        devs = []
        for alpha in (8.0, 16.0):
            val = fs.hs_oracle_quadratic(gauss2, disk, alpha) / alpha
            devs.append(abs(val + 1 / (4 * math.sqrt(math.pi))))
        assert devs[1] < devs[0]


class TestEntropy:
    def test_local_entropy_split(self, limit_fermi2, disk):
        le = fs.local_entropy(limit_fermi2, disk, 4.0, 1.0)
        s = thermo.entropy_density(thermo.quadratic(2), 1.0, 0.0, 1.0)
        assert le.value == le.volume_part + le.trace_defect
        vol = fs.build_w(limit_fermi2, disk, 4.0).volume
        np.testing.assert_allclose(le.volume_part, s * 16 * vol, rtol=1e-6)
        assert le.trace_defect > 0

    def test_unbounded(self, limit_fermi2):
        with pytest.raises(ValueError):
            fs.local_entropy(limit_fermi2, half_plane(), 4.0, 1.0)

    def test_ee_estimate(self, limit_fermi2, disk):
        est = fs.ee_estimate(limit_fermi2, disk, 4.0, 1.0)
        inside = fs.trace_d(limit_fermi2, disk, 4.0, ef.von_neumann(), method="sector").value
        assert est.relative_change <= 0.05
        # both sides share the boundary: H ~ 2 tr D(Lambda)
        np.testing.assert_allclose(est.value, 2 * inside, rtol=0.05)

    def test_ee_margin_floor(self, limit_fermi2, disk):
        with pytest.raises(ValueError):
            fs.ee_estimate(limit_fermi2, disk, 4.0, 1.0, box_margin=0.5)


class TestScaling:
    def test_affine_rows_zero(self, gauss2, disk):
        rep = fs.scaling_scan("fixed_symbol", disk, [2.0, 4.0], symbol=gauss2,
                              f=ef.power(3.0, 1))
        assert rep.column("raw_trace").tolist() == [0.0, 0.0]
        assert rep.column("deviation").tolist() == [0.0, 0.0]

    def test_fixed_symbol_quadratic(self, gauss2, disk):
        rep = fs.scaling_scan("fixed_symbol", disk, [4.0, 8.0], symbol=gauss2,
                              f=ef.quadratic(), method="sector")
        np.testing.assert_allclose(rep.column("target"), -1 / (4 * math.sqrt(math.pi)),
                                   rtol=1e-8)
        dev = rep.column("deviation")
        assert dev[1] < dev[0]

    def test_csv_json(self, gauss2, disk):
        rep = fs.scaling_scan("fixed_symbol", disk, [2.0], symbol=gauss2, f=ef.quadratic())
        lines = rep.to_csv().splitlines()
        assert lines[0].split(",") == list(fs.scaling.COLUMNS)
        assert len(lines) == 2
        assert '"mode": "fixed_symbol"' in rep.to_json()

    def test_fixed_mu_targets(self, disk):
        h = thermo.quadratic(2)
        rep = fs.scaling_scan("fixed_mu", disk, [4.0], [1.0], h=h, gammas=[1.0], method="sector")
        ref = b_coefficient(thermo.limit_fermi(h), disk, ef.renyi(1.0)).value
        np.testing.assert_allclose(rep.column("target"), ref, rtol=1e-12)

    def test_bad_mode(self, disk):
        with pytest.raises(ValueError):
            fs.scaling_scan("fixed_T", disk, [1.0])
        with pytest.raises(ValueError):
            fs.scaling_scan("fixed_rho", disk, [1.0], h=thermo.quadratic(2))

    def test_pairs_broadcast(self):
        assert fs.scaling._pairs([2.0], [1, 4]) == [(2.0, 1), (2.0, 4)]
        with pytest.raises(ValueError):
            fs.scaling._pairs([1, 2], [1, 2, 3])

    def test_fit_slope(self):
        x = np.array([1.0, 2.0, 4.0])
        assert fs.fit_slope(x, 3 * x ** -0.5) == pytest.approx(-0.5)
