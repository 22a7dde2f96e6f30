from doublex import assert_that
from hamcrest import close_to, equal_to, greater_than, less_than
import numpy as np
import unittest

from thzqs.exceptions import DomainError
from thzqs.instrument import GainCurve, NoiseModel, ScanConfig, acquire_scan, blocked_idler_scan, \
    gain_linearity_sweep, linear_fit, stage_to_path
from thzqs.phasematch import STOKES_FORWARD


class FlatSource:
    branch = STOKES_FORWARD

    def __init__(self, level=1.0, blocked=False):
        self.level = level
        self.blocked = blocked

    def rate(self, delta_l):
        return np.full(np.shape(delta_l), self.level)

    def blocked_copy(self):
        return FlatSource(self.level, True)

    def describe(self):
        return {"branch": self.branch.label, "blocked": self.blocked}


class TestScanConfig(unittest.TestCase):
    def test_default_grid(self):
        scan = ScanConfig()
        assert_that(scan.points, equal_to(641))
        assert_that(scan.roi_pixels, equal_to(250))
        assert_that(float(scan.positions()[-1]), close_to(6.4e-3, 1e-15))
        assert_that(float(scan.delta_l()[0]), close_to(4.2e-3, 1e-15))
        assert_that(float(scan.delta_l()[210]), close_to(0.0, 1e-15))
        assert_that(stage_to_path(1e-3), close_to(2e-3, 1e-18))

    def test_invalid_grid(self):
        with self.assertRaises(DomainError):
            ScanConfig(span_m=6.405e-3)
        with self.assertRaises(DomainError):
            ScanConfig(repeats=0)
        with self.assertRaises(DomainError):
            ScanConfig(roi_px=(25,))
        with self.assertRaises(DomainError):
            ScanConfig(step_m=0.0)

    def test_to_dict(self):
        assert_that(ScanConfig().replace(repeats=4).to_dict()["roi_px"], equal_to([25, 10]))


class TestNoiseModel(unittest.TestCase):
    def test_noiseless(self):
        noise = NoiseModel.noiseless()
        assert_that(noise.is_noiseless, equal_to(True))
        assert_that(noise.quantum_efficiency, equal_to(0.55))
        assert_that(NoiseModel().is_noiseless, equal_to(False))
        assert_that(NoiseModel().stray_per_s, equal_to(140.0))

    def test_invalid_noise(self):
        with self.assertRaises(DomainError):
            NoiseModel(dark_per_s=200.0)
        with self.assertRaises(DomainError):
            NoiseModel(quantum_efficiency=0.0)
        with self.assertRaises(DomainError):
            NoiseModel(readout_e=-1.0)

    def test_gain_curve(self):
        assert_that(float(GainCurve().v0(0.45)), close_to(0.009, 1e-15))
        with self.assertRaises(DomainError):
            GainCurve(powers_w=())
        with self.assertRaises(DomainError):
            GainCurve(powers_w=(0.1, 1.0))


class TestAcquireScan(unittest.TestCase):
    def setUp(self):
        self.source = FlatSource()
        self.scan = ScanConfig(span_m=1.0e-3, repeats=8)

    def test_noiseless_scan_is_the_model(self):
        scan = acquire_scan(self.source, self.scan.replace(repeats=1), NoiseModel.noiseless())
        assert_that(float(np.max(np.abs(scan.rate - 18.0 * 0.55))), less_than(1e-12))
        assert_that(len(scan), equal_to(101))
        assert_that(scan.metadata["kind"], equal_to("reference"))

    def test_same_seed_same_scan(self):
        first = acquire_scan(self.source, self.scan, NoiseModel(), seed=5, stream=1)
        second = acquire_scan(self.source, self.scan, NoiseModel(), seed=5, stream=1)
        other = acquire_scan(self.source, self.scan, NoiseModel(), seed=6, stream=1)
        assert_that(np.array_equal(first.rate, second.rate), equal_to(True))
        assert_that(np.array_equal(first.sigma, second.sigma), equal_to(True))
        assert_that(np.array_equal(first.rate, other.rate), equal_to(False))

    def test_subtraction_is_unbiased(self):
        scan = acquire_scan(self.source, ScanConfig(repeats=30), NoiseModel(), seed=3)
        assert_that(float(np.mean(scan.rate)), close_to(9.9, 0.1))

    def test_subtraction_is_unbiased_across_seeds(self):
        scan = ScanConfig(span_m=1e-4, repeats=1)
        means = np.array([np.mean(acquire_scan(self.source, scan, NoiseModel(), seed=seed).rate)
                          for seed in range(200)])
        spread = float(np.std(means, ddof=1)) / np.sqrt(means.size)
        assert_that(spread, greater_than(0.0))
        assert_that(abs(float(np.mean(means)) - 9.9), less_than(4.0 * spread))

    def test_sigma_scales_with_repeats(self):
        base = ScanConfig()
        variances = {}
        for repeats in (1, 4, 16):
            scan = acquire_scan(self.source, base.replace(repeats=repeats), NoiseModel(), seed=9)
            variances[repeats] = float(np.mean(scan.sigma ** 2)) * repeats
        assert_that(variances[4] / variances[16], close_to(1.0, 0.15))
        assert_that(variances[16] / variances[1], close_to(1.0, 0.15))

    def test_raw_counts_are_integers(self):
        scan = acquire_scan(self.source, self.scan, NoiseModel(), keep_raw=True)
        assert_that(scan.raw_counts.shape, equal_to((8, 101, 2)))
        assert_that(np.array_equal(scan.raw_counts, np.rint(scan.raw_counts)), equal_to(True))
        assert_that(float(scan.raw_counts.min()), greater_than(0.0))

    def test_blocked_scan(self):
        scan = blocked_idler_scan(self.source, self.scan, NoiseModel.noiseless(), stream=2)
        assert_that(scan.kind, equal_to("blocked"))
        assert_that(scan.metadata["blocked"], equal_to(True))
        assert_that(scan.metadata["stream"], equal_to(2))


class TestGainSweep(unittest.TestCase):
    def test_noiseless_sweep_is_linear(self):
        curve = GainCurve()
        sweep = gain_linearity_sweep(FlatSource(), curve, ScanConfig(), NoiseModel.noiseless(), measurements=2)
        assert_that(sweep.r_squared, greater_than(0.999))
        assert_that(sweep.blocked_r_squared, greater_than(0.999))
        for v0, ratio in zip(sweep.v0, sweep.ratio):
            assert_that(float(ratio), close_to((1.0 + v0) / (1.0 + 0.5 * v0), 1e-12))
        assert_that(float(sweep.unblocked[-1]), close_to(9.9, 1e-9))

    def test_noisy_ratios_are_one_within_errors(self):
        sweep = gain_linearity_sweep(FlatSource(), GainCurve(), ScanConfig(), NoiseModel(), seed=17)
        for ratio, sigma in zip(sweep.ratio, sweep.ratio_sigma):
            assert_that(abs(float(ratio) - 1.0), less_than(4.0 * float(sigma)))
        columns, table = sweep.rows()
        assert_that(table.shape, equal_to((5, len(columns))))
        assert_that(sweep.to_dict()["columns"][0], equal_to("power_w"))

    def test_sweep_needs_measurements(self):
        with self.assertRaises(DomainError):
            gain_linearity_sweep(FlatSource(), GainCurve(), ScanConfig(), NoiseModel(), measurements=1)

    def test_linear_fit(self):
        slope, intercept, r_squared = linear_fit(np.array([0.0, 1.0, 2.0]), np.array([1.0, 3.0, 5.0]))
        assert_that(slope, close_to(2.0, 1e-12))
        assert_that(intercept, close_to(1.0, 1e-12))
        assert_that(r_squared, close_to(1.0, 1e-12))


if __name__ == "__main__":
    unittest.main()
