import numpy as np
import pytest

from ptlattice.lattice import assemble_hamiltonian, build_model_a, build_model_b
from ptlattice.spectrum import (
    BracketError,
    classify_localization,
    classify_spectrum,
    eigendecompose,
    find_boc_disappearance,
    find_threshold,
    spectrum_scan,
)

from conftest import random_pt_lattice

# threshold of the two-defect lattice at delta = 0.3, from the real-axis
# zeros of the closed-form transmission denominator (see test_scattering)
G_TH_A = 0.7525290853
MODEL_A_FAMILY = lambda g, N: build_model_a(0.3, g, N)
MODEL_B_FAMILY = lambda g, N: build_model_b(g, N)


def decompose_model(model):
    return eigendecompose(assemble_hamiltonian(model))


class TestEigendecompose:
    def test_two_site_dimer(self):
        pairs = eigendecompose(np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex))
        assert [p.eigenvalue for p in pairs] == [pytest.approx(-1.0), pytest.approx(1.0)]

    def test_diagonal_conjugate_pair_is_exact(self):
        pairs = eigendecompose(np.diag([0.3 + 0.5j, 0.3 - 0.5j]))
        values = sorted((p.eigenvalue for p in pairs), key=lambda E: E.imag)
        assert values == [0.3 - 0.5j, 0.3 + 0.5j]

    def test_sorted_by_real_then_imag(self):
        pairs = decompose_model(build_model_a(0.3, 0.9, 60))
        values = [p.eigenvalue for p in pairs]
        keys = [(E.real, E.imag) for E in values]
        assert keys == sorted(keys)

    def test_residual_contract(self):
        H = assemble_hamiltonian(build_model_a(0.3, 0.9, 200))
        pairs = eigendecompose(H)
        bound = 1e-10 * H.norm_inf()
        assert all(p.residual <= bound for p in pairs)

    def test_unit_norm_vectors(self):
        pairs = decompose_model(build_model_b(0.7, 40))
        assert all(abs(np.linalg.norm(p.vector) - 1) < 1e-12 for p in pairs)

    def test_model_b_zero_energy_real_spectrum(self):
        values = np.array([p.eigenvalue for p in decompose_model(build_model_b(0.5, 100))])
        assert np.min(np.abs(values)) < 1e-8
        assert np.max(np.abs(values.imag)) < 1e-8

    def test_rejects_trivial_dimension(self):
        with pytest.raises(ValueError):
            eigendecompose(np.array([[1.0 + 0j]]))


class TestClassifyLocalization:
    def test_exponential_profile(self):
        N = 50
        n = np.arange(-N, N + 1)
        v = np.exp(-np.abs(n) / 2.0)
        fit = classify_localization(v / np.linalg.norm(v))
        assert fit.kind == "exponential"
        assert fit.parameter == pytest.approx(0.5, abs=0.01)

    def test_algebraic_profile(self):
        # even-site 1/sqrt(n^2-1) profile decays like 1/n
        N = 400
        n = np.arange(-N, N + 1)
        v = np.zeros(2 * N + 1)
        v[N] = 1.0
        even = (n % 2 == 0) & (n != 0)
        v[even] = 1.0 / np.sqrt(n[even].astype(float) ** 2 - 1.0)
        fit = classify_localization(v / np.linalg.norm(v))
        assert fit.kind == "algebraic"
        assert fit.parameter == pytest.approx(-1.0, abs=0.05)

    def test_plane_wave_is_delocalized(self):
        N = 100
        n = np.arange(-N, N + 1)
        v = np.exp(1j * 0.3 * np.pi * n)
        fit = classify_localization(v / np.linalg.norm(v))
        assert fit.kind == "delocalized"
        assert fit.parameter is None

    def test_small_window_rejected(self):
        with pytest.raises(ValueError):
            classify_localization(np.ones(21))

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            classify_localization(np.zeros(101))


class TestClassifySpectrum:
    def test_single_boc_below_disappearance(self):
        model = build_model_a(0.3, 0.2, 200)
        report = classify_spectrum(decompose_model(model), model)
        assert report.count("boc") == 1
        (idx,) = report.select("boc")
        E = report.eigenpairs[idx].eigenvalue
        assert E.real > 2
        assert abs(E.imag) < 1e-10
        assert not report.is_pt_broken

    def test_two_type1_bic_in_broken_phase(self):
        model = build_model_a(0.3, 0.9, 200)
        report = classify_spectrum(decompose_model(model), model)
        assert report.count("type1_bic") == 2
        i, j = report.select("type1_bic")
        Ei, Ej = report.eigenpairs[i].eigenvalue, report.eigenpairs[j].eigenvalue
        assert abs(Ei - np.conj(Ej)) < 1e-8
        assert abs(Ei.real) < 2 and abs(Ej.real) < 2
        assert report.is_pt_broken

    def test_type1_localization_grows_toward_threshold(self):
        rates = []
        for factor in (1.08, 1.2, 1.5):
            model = build_model_a(0.3, factor * G_TH_A, 200)
            report = classify_spectrum(decompose_model(model), model)
            idx = report.select("type1_bic")
            assert idx, f"no in-band bound pair at factor {factor}"
            fits = [report.localizations[i] for i in idx]
            assert all(f.kind == "exponential" for f in fits)
            rates.append(min(f.parameter for f in fits))
        assert rates[0] < rates[1] < rates[2]

    def test_model_b_type2_bic(self):
        model = build_model_b(0.5, 200)
        report = classify_spectrum(decompose_model(model), model)
        assert report.count("type2_bic") == 1
        (idx,) = report.select("type2_bic")
        assert abs(report.eigenpairs[idx].eigenvalue) < 1e-8
        assert report.localizations[idx].kind == "algebraic"
        assert not report.is_pt_broken


class TestSpectrumScan:
    def test_single_point_matches_classify(self):
        grid = [0.5]
        points = spectrum_scan(MODEL_B_FAMILY, grid, 60)
        assert len(points) == 1
        model = build_model_b(0.5, 60)
        direct = classify_spectrum(decompose_model(model), model)
        assert points[0].report.classes == direct.classes
        assert np.allclose(points[0].report.eigenvalues(), direct.eigenvalues())

    def test_boc_branch_versus_g(self):
        points = spectrum_scan(MODEL_A_FAMILY, [0.2, 0.4, 0.55, 0.6], 200)
        present = {round(p.g, 2): p.report.count("boc") for p in points}
        assert present[0.2] == 1 and present[0.4] == 1
        assert present[0.55] == 0 and present[0.6] == 0

    def test_model_b_branches_across_threshold(self):
        points = spectrum_scan(MODEL_B_FAMILY, [0.2, 0.6, 1.0, 1.2, 1.4], 100)
        for point in points:
            assert point.report.count("type2_bic") == 1, f"zero mode missing at g={point.g}"
        for point in points:
            pairs_idx = point.report.select("type1_bic")
            if point.g <= 1.0:
                assert not pairs_idx
            else:
                assert len(pairs_idx) == 2
                # the complex pair emerges from the band centre
                assert all(
                    abs(point.report.eigenpairs[i].eigenvalue.real) < 1e-6 for i in pairs_idx
                )

    def test_threads_do_not_change_results(self):
        serial = spectrum_scan(MODEL_B_FAMILY, [0.4, 0.8, 1.2], 40, threads=1)
        threaded = spectrum_scan(MODEL_B_FAMILY, [0.4, 0.8, 1.2], 40, threads=3)
        for a, b in zip(serial, threaded):
            assert a.g == b.g
            assert a.report.classes == b.report.classes
            assert np.array_equal(a.report.eigenvalues(), b.report.eigenvalues())

    def test_non_monotone_grid_rejected(self):
        with pytest.raises(ValueError):
            spectrum_scan(MODEL_B_FAMILY, [0.5, 0.4, 0.6], 40)

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            spectrum_scan(MODEL_B_FAMILY, [], 40)


class TestThresholds:
    def test_model_b_threshold(self):
        point = find_threshold(MODEL_B_FAMILY, 0.8, 1.3, 0.01, half_width=100)
        assert point.value == pytest.approx(1.0, abs=0.01)
        assert set(point.per_size) == {100, 200}

    def test_model_a_zero_detuning_threshold(self):
        family = lambda g, N: build_model_a(0.0, g, N)
        point = find_threshold(family, 0.7, 1.4, 0.005, half_width=100)
        assert point.value == pytest.approx(1.0, abs=0.01)

    def test_any_imag_detector_on_model_b(self):
        # model B has no truncation-noise imaginary parts, so the literal
        # predicate agrees with the physical transition
        point = find_threshold(
            MODEL_B_FAMILY, 0.8, 1.3, 0.01, half_width=60, detector="any_imag"
        )
        assert point.value == pytest.approx(1.0, abs=0.05)
        assert point.per_size == {60: point.value}

    def test_unbracketed_raises(self):
        with pytest.raises(BracketError):
            find_threshold(MODEL_B_FAMILY, 1.5, 2.0, 0.01, half_width=40)
        with pytest.raises(BracketError):
            find_threshold(MODEL_B_FAMILY, 0.2, 0.6, 0.01, half_width=40)

    def test_unknown_detector_rejected(self):
        with pytest.raises(ValueError):
            find_threshold(MODEL_B_FAMILY, 0.8, 1.3, 0.01, detector="magic")

    def test_boc_disappearance_bracket_sanity(self):
        point = find_boc_disappearance(0.3, 0.3, 0.6, 0.01, half_width=100)
        assert point.value == pytest.approx(0.4583, abs=0.02)
        assert point.kind == "boc_disappearance"


class TestSpectralInvariants:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_conjugate_pairing(self, seed):
        rng = np.random.default_rng(seed)
        model = random_pt_lattice(rng, half_width=30, core=6)
        values = np.array([p.eigenvalue for p in decompose_model(model)])
        for E in values[np.abs(values.imag) > 1e-8]:
            assert np.min(np.abs(values - np.conj(E))) < 1e-7

    def test_hermitian_limit_real_spectrum(self, rng):
        model = random_pt_lattice(rng, hermitian=True)
        values = np.array([p.eigenvalue for p in decompose_model(model)])
        assert np.max(np.abs(values.imag)) < 1e-10

    @pytest.mark.parametrize(
        "model",
        [
            build_model_a(0.3, 0.9, 80),
            build_model_b(1.2, 80),
        ],
        ids=["two-defect", "graded"],
    )
    def test_trace_identity(self, model):
        H = assemble_hamiltonian(model)
        values = np.array([p.eigenvalue for p in eigendecompose(H)])
        assert abs(np.sum(values) - H.trace()) < 1e-8
