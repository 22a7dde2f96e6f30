from doublex import assert_that
from hamcrest import close_to, contains_string, equal_to, greater_than, is_not, less_than, starts_with
import numpy as np
import unittest

from thzqs.analysis import CENTER, PARAMETERS, FitResult, _attributed, combine_estimates, envelope_jacobian, \
    envelope_model, fft_peak, fit_envelope, initialize_fit, sense_pipeline, stage_axis, thickness_from_shift, \
    thickness_row
from thzqs.constants import SPEED_OF_LIGHT, TERAHERTZ
from thzqs.exceptions import BranchMismatch, DomainError, EnvelopeAtEdge, NonUniformGrid, NotConverged, TooShort
from thzqs.instrument import NoiseModel, ScanConfig, acquire_scan, blocked_idler_scan
from thzqs.multimode import Interferogram, MultimodeModel, SignalSource
from thzqs.phasematch import ANTI_STOKES_FORWARD, STOKES_FORWARD, PhaseMatcher

FRINGE = 4.0 * np.pi * 1.26 * TERAHERTZ / SPEED_OF_LIGHT
TRUTH = np.array([10.0, 3.0, FRINGE, 0.7, 2.1e-3, 0.5e-3])


def synthetic(params=TRUTH, noise=0.0, seed=0, branch=STOKES_FORWARD, points=641):
    scan = ScanConfig(span_m=(points - 1) * 1e-5)
    x = scan.positions()
    rate = envelope_model(x, params)
    sigma = np.zeros_like(rate)
    if noise:
        rate = rate + np.random.default_rng(seed).normal(0.0, noise, rate.shape)
        sigma = np.full_like(rate, noise)
    return Interferogram(scan.delta_l(), rate, branch, sigma=sigma, position=x)


def fit_with_center(center, sigma_center, branch=STOKES_FORWARD, converged=True):
    params = TRUTH.copy()
    params[CENTER] = center
    covariance = np.zeros((len(PARAMETERS), len(PARAMETERS)))
    covariance[CENTER, CENTER] = sigma_center ** 2
    return FitResult(params, covariance, 0.0, 1.0, branch, converged)


class FlatSource:
    branch = STOKES_FORWARD

    def __init__(self, blocked=False):
        self.blocked = blocked

    def rate(self, delta_l):
        return np.ones(np.shape(delta_l))

    def blocked_copy(self):
        return FlatSource(True)

    def describe(self):
        return {"branch": self.branch.label, "blocked": self.blocked}


class TestEnvelopeModel(unittest.TestCase):
    def test_jacobian_matches_finite_differences(self):
        x = np.linspace(-3.0, 3.0, 601)
        params = np.array([10.0, 3.0, 52.8, 0.7, 0.1, 0.5])
        analytic = envelope_jacobian(x, params)
        for column in range(params.size):
            step = 1e-6 * max(abs(params[column]), 1.0)
            up, down = params.copy(), params.copy()
            up[column] += step
            down[column] -= step
            numeric = (envelope_model(x, up) - envelope_model(x, down)) / (2.0 * step)
            scale = float(np.max(np.abs(analytic[:, column])))
            assert_that(float(np.max(np.abs(numeric - analytic[:, column]))), less_than(1e-6 * scale))

    def test_stage_axis_falls_back_to_path(self):
        scan = Interferogram(np.array([2e-3, 0.0, -2e-3]), np.ones(3), STOKES_FORWARD)
        assert_that(list(stage_axis(scan)), equal_to([-1e-3, 0.0, 1e-3]))


class TestFFTPeak(unittest.TestCase):
    def test_synthetic_fringe_frequency(self):
        peak = fft_peak(synthetic())
        assert_that(peak.frequency_hz / TERAHERTZ, close_to(1.26, 0.01))
        assert_that(peak.significance, greater_than(10.0))

    def test_multimode_fringe_frequency(self):
        model = MultimodeModel(PhaseMatcher(), STOKES_FORWARD)
        peak = fft_peak(model.interferogram(ScanConfig().delta_l()))
        assert_that(peak.frequency_hz / TERAHERTZ, close_to(1.26, 0.02))

    def test_constant_trace(self):
        scan = Interferogram(ScanConfig().delta_l(), np.full(641, 4.0), STOKES_FORWARD)
        assert_that(fft_peak(scan).significance, equal_to(1.0))

    def test_grid_errors(self):
        with self.assertRaises(TooShort):
            fft_peak(synthetic(points=32))
        scan = synthetic()
        scan.delta_l[10] += 3e-6
        with self.assertRaises(NonUniformGrid):
            fft_peak(scan)
        with self.assertRaises(DomainError):
            fft_peak(synthetic(), band=(10.0 * TERAHERTZ, 11.0 * TERAHERTZ))


class TestInitialization(unittest.TestCase):
    def test_initial_guess_is_close(self):
        for centre, width, phase in ((2.1e-3, 0.5e-3, 0.7), (3.0e-3, 0.4e-3, 4.0), (2.5e-3, 0.6e-3, 2.2)):
            truth = np.array([10.0, 3.0, FRINGE, phase, centre, width])
            guess = initialize_fit(synthetic(truth)).params
            for index in (0, 1, 2, 4, 5):
                assert_that(abs(guess[index] - truth[index]), less_than(0.2 * abs(truth[index])))
            distance = abs(np.angle(np.exp(1j * (guess[3] - truth[3]))))
            assert_that(distance, less_than(np.pi / 4))

    def test_envelope_at_scan_edge(self):
        for centre in (-0.3e-3, 6.7e-3):
            truth = TRUTH.copy()
            truth[CENTER] = centre
            with self.assertRaises(EnvelopeAtEdge):
                initialize_fit(synthetic(truth))


class TestFitEnvelope(unittest.TestCase):
    def test_noiseless_fit_recovers_parameters(self):
        result = fit_envelope(synthetic())
        for name, value in zip(PARAMETERS, TRUTH):
            assert_that(float(getattr(result, name)), close_to(value, 1e-6 * abs(value)))
        assert_that(result.converged, equal_to(True))
        assert_that(result.visibility, close_to(0.3, 1e-6))
        assert_that(result.low_visibility, equal_to(False))

    def test_covariance_is_symmetric_and_positive(self):
        result = fit_envelope(synthetic(noise=0.3, seed=4))
        covariance = result.covariance
        assert_that(np.array_equal(covariance, covariance.T), equal_to(True))
        eigenvalues = np.linalg.eigvalsh(covariance)
        assert_that(float(eigenvalues.min()), greater_than(-1e-12 * float(eigenvalues.max())))
        assert_that(result.sigma("center"), greater_than(0.0))
        assert_that(abs(result.center - TRUTH[CENTER]), less_than(5.0 * result.sigma("center")))
        assert_that(result.reduced_chi2, close_to(1.0, 0.2))

    def test_fixed_parameters_keep_their_start(self):
        result = fit_envelope(synthetic(noise=0.3, seed=5), init={"width": 0.6e-3}, fixed=("width",))
        assert_that(result.width, close_to(0.6e-3, 1e-15))
        assert_that(result.sigma("width"), equal_to(0.0))
        assert_that(result.to_dict()["fixed"], equal_to(["width"]))

    def test_unknown_fixed_parameter(self):
        with self.assertRaises(DomainError):
            fit_envelope(synthetic(), fixed=("height",))

    def test_amplitude_and_phase_are_canonical(self):
        start = TRUTH.copy()
        start[1], start[3] = -3.0, 0.7 - np.pi
        result = fit_envelope(synthetic(), init=start)
        assert_that(result.amplitude, close_to(3.0, 1e-6))
        assert_that(result.phase, close_to(0.7, 1e-6))


class TestNullScan(unittest.TestCase):
    def test_blocked_idler_shows_no_fringe(self):
        significances, ratios = [], []
        start = np.array([9.9, 0.1, FRINGE, 0.0, 2.1e-3, 0.5e-3])
        for seed in range(9):
            scan = blocked_idler_scan(FlatSource(), ScanConfig(), NoiseModel(), seed=seed)
            significances.append(fft_peak(scan, band=(1.2 * TERAHERTZ, 1.32 * TERAHERTZ)).significance)
            result = fit_envelope(scan, init=start, fixed=("frequency", "center", "width"))
            ratios.append(result.amplitude / result.sigma("amplitude"))
        assert_that(float(np.median(significances)), less_than(3.0))
        assert_that(float(np.median(ratios)), less_than(2.0))


class TestThickness(unittest.TestCase):
    def test_thickness_from_shift(self):
        estimate = thickness_from_shift(fit_with_center(2.1e-3, 0.0), fit_with_center(4.2e-3, 0.0), 1.42, 0.01)
        assert_that(estimate.thickness_m, close_to(5e-3, 1e-12))
        assert_that(estimate.sigma_m, close_to(5e-3 * 0.01 / 0.42, 1e-9))
        assert_that(estimate.negative, equal_to(False))

    def test_shift_uncertainty(self):
        estimate = thickness_from_shift(fit_with_center(2.1e-3, 3e-6), fit_with_center(4.2e-3, 4e-6), 1.42)
        assert_that(estimate.shift_sigma_m, close_to(5e-6, 1e-15))
        assert_that(estimate.sigma_m, close_to(5e-6 / 0.42, 1e-12))

    def test_negative_estimate_is_flagged(self):
        estimate = thickness_from_shift(fit_with_center(4.2e-3, 1e-6), fit_with_center(2.1e-3, 1e-6), 1.42)
        assert_that(estimate.thickness_m, close_to(-5e-3, 1e-12))
        assert_that(estimate.negative, equal_to(True))

    def test_errors(self):
        with self.assertRaises(BranchMismatch):
            thickness_from_shift(fit_with_center(0.0, 0.0), fit_with_center(0.0, 0.0, ANTI_STOKES_FORWARD), 1.42)
        with self.assertRaises(NotConverged):
            thickness_from_shift(fit_with_center(0.0, 0.0), fit_with_center(0.0, 0.0, converged=False), 1.42)
        with self.assertRaises(DomainError):
            thickness_from_shift(fit_with_center(0.0, 0.0), fit_with_center(1e-3, 0.0), 1.0)

    def test_combine_estimates(self):
        first = thickness_from_shift(fit_with_center(0.0, 0.0), fit_with_center(0.42e-3, 0.42e-3), 1.42)
        second = thickness_from_shift(fit_with_center(0.0, 0.0), fit_with_center(1.26e-3, 0.42e-3), 1.42)
        value, sigma = combine_estimates([first, second])
        assert_that(value, close_to(2e-3, 1e-12))
        assert_that(sigma, close_to(1e-3 / np.sqrt(2.0), 1e-12))
        with self.assertRaises(DomainError):
            combine_estimates([])


class TestSensePipeline(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        matcher = PhaseMatcher()
        stokes = MultimodeModel(matcher, STOKES_FORWARD)
        scale = stokes.pedestal()
        cls.sources = {"stokes-forward": SignalSource(stokes, scale),
                       "antistokes-forward": SignalSource(MultimodeModel(matcher, ANTI_STOKES_FORWARD), scale)}

    def _scans(self, thickness, noise, seed=0, repeats=1):
        scan = ScanConfig(repeats=repeats)
        references, samples = {}, {}
        for number, (label, source) in enumerate(sorted(self.sources.items())):
            references[label] = acquire_scan(source, scan, noise, seed, 3 * number)
            samples[label] = acquire_scan(source.with_object(1.42, thickness), scan, noise, seed, 3 * number + 1,
                                          "sample")
        return references, samples

    def test_noiseless_round_trip(self):
        for thickness in (1e-3, 2e-3, 3e-3, 4e-3, 5e-3):
            references, samples = self._scans(thickness, NoiseModel.noiseless())
            report = sense_pipeline(references, samples, 1.42, 0.01)
            for label, analysis in report.branches.items():
                assert_that(analysis.thickness.shift_m, close_to(0.42 * thickness, 1e-4 * 0.42 * thickness))
                assert_that(analysis.thickness.thickness_m, close_to(thickness, 1e-4 * thickness))
            assert_that(report.thickness_m, close_to(thickness, 1e-4 * thickness))

    def test_noisy_round_trip(self):
        for seed in range(20):
            references, samples = self._scans(5e-3, NoiseModel(), seed, repeats=30)
            report = sense_pipeline(references, samples, 1.42, 0.01)
            for analysis in report.branches.values():
                assert_that(abs(analysis.thickness.thickness_m - 5e-3), less_than(0.03 * 5e-3))
                assert_that(analysis.thickness.sigma_m, close_to(0.119e-3, 0.02e-3))

    def test_reference_against_itself(self):
        references, _ = self._scans(0.0, NoiseModel(), seed=1, repeats=30)
        report = sense_pipeline(references, dict(references), 1.42)
        for analysis in report.branches.values():
            assert_that(analysis.thickness.thickness_m, equal_to(0.0))
        row = thickness_row(0.0, report)
        assert_that(row[1], equal_to(0.0))
        assert_that(row[3], equal_to(0.0))

    def test_unpaired_branch(self):
        references, samples = self._scans(5e-3, NoiseModel.noiseless())
        del samples["antistokes-forward"]
        with self.assertRaises(BranchMismatch):
            sense_pipeline(references, samples, 1.42)

    def test_thickness_row_leaves_missing_conversion_empty(self):
        references, samples = self._scans(5e-3, NoiseModel.noiseless())
        report = sense_pipeline({"stokes-forward": references["stokes-forward"]},
                                {"stokes-forward": samples["stokes-forward"]}, 1.42)
        row = thickness_row(5e-3, report)
        assert_that(row[1], close_to(5e-3, 5e-6))
        assert_that(bool(np.isnan(row[3])), equal_to(True))

    def test_errors_name_branch_and_stage(self):
        short = synthetic(points=32)
        with self.assertRaises(TooShort) as context:
            sense_pipeline({"stokes-forward": short}, {"stokes-forward": short}, 1.42)
        assert_that(str(context.exception), starts_with("stokes-forward: fft_peak:"))
        assert_that(str(context.exception), contains_string("64"))

    def test_attributed_error_keeps_type_and_cause(self):
        short = synthetic(points=32)
        with self.assertRaises(TooShort) as context:
            sense_pipeline({"stokes-forward": short}, {"stokes-forward": short}, 1.42)
        cause = context.exception.__cause__
        assert_that(type(cause), equal_to(TooShort))
        assert_that(cause, is_not(context.exception))
        assert_that(str(cause), is_not(starts_with("stokes-forward")))

    def test_attributed_error_keeps_attributes(self):
        unconverged = fit_with_center(0.0, 0.0, converged=False)
        with self.assertRaises(NotConverged) as context:
            _attributed("stokes-forward", "thickness_from_shift", thickness_from_shift, fit_with_center(0.0, 0.0),
                        unconverged, 1.42)
        assert_that(str(context.exception), starts_with("stokes-forward: thickness_from_shift:"))
        assert_that(context.exception.trace, equal_to(context.exception.__cause__.trace))


if __name__ == "__main__":
    unittest.main()
