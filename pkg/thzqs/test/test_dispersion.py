import os
import shutil
import tempfile

from doublex import assert_that
from hamcrest import close_to, equal_to, greater_than, less_than
import numpy as np
import unittest

from thzqs.constants import BOLTZMANN, PLANCK, SPEED_OF_LIGHT, TERAHERTZ
from thzqs.dispersion import Band, DispersionModel, ThermalField, thermal_occupation
from thzqs.exceptions import DomainError, FormatException, OutOfRange

PUMP = SPEED_OF_LIGHT / 659.58e-9

HEADER = """# {
#   "source": "test table",
#   "reference_temperature_K": 293.0,
#   "thermo_optic_per_K": %s,
#   "valid_THz": [0.5, 2.0],
#   "visible": {
#     "coefficients_a": [5.756, 0.0983, 0.2020, 189.32, 12.52, 0.0132],
#     "coefficients_b": [2.860e-6, 4.700e-8, 6.113e-8, 1.516e-4],
#     "temperature_offsets_C": [24.5, 570.82],
#     "valid_um": [0.5, 4.0]
#   }
# }
"""


class TestDispersion(unittest.TestCase):
    def setUp(self):
        self.model = DispersionModel.default()
        self.workdir = tempfile.mkdtemp(prefix="thzqs-test-")

    def tearDown(self):
        shutil.rmtree(self.workdir, ignore_errors=True)

    def _write(self, body, thermo_optic="0.0"):
        path = os.path.join(self.workdir, "table.txt")
        with open(path, "w", encoding="utf-8") as file_desc:
            file_desc.write(HEADER % thermo_optic + body)
        return path

    def test_visible_index_at_pump(self):
        assert_that(self.model.n_e(Band.VISIBLE, PUMP, 293.0), close_to(2.18698, 2e-4))

    def test_visible_group_index_at_pump(self):
        assert_that(self.model.group_index(Band.VISIBLE, PUMP, 293.0), close_to(2.3167, 2e-3))

    def test_visible_index_rises_with_temperature(self):
        cold = self.model.n_e(Band.VISIBLE, PUMP, 293.0)
        hot = self.model.n_e(Band.VISIBLE, PUMP, 353.0)
        assert_that(hot, greater_than(cold))

    def test_terahertz_index_at_collinear_frequency(self):
        assert_that(self.model.n_e(Band.TERAHERTZ, 1.26 * TERAHERTZ, 293.0), close_to(4.9612, 1e-3))

    def test_terahertz_index_accepts_arrays(self):
        nu = np.array([0.5, 1.0, 1.5]) * TERAHERTZ
        indices = self.model.n_e("terahertz", nu, 293.0)
        assert_that(indices.shape, equal_to((3,)))
        assert_that(bool(np.all(np.diff(indices) > 0)), equal_to(True))

    def test_out_of_band_frequency_is_rejected(self):
        with self.assertRaises(OutOfRange):
            self.model.n_e(Band.TERAHERTZ, 5.0 * TERAHERTZ, 293.0)
        with self.assertRaises(OutOfRange):
            self.model.n_e(Band.VISIBLE, SPEED_OF_LIGHT / 300e-9, 293.0)
        with self.assertRaises(ValueError):
            self.model.n_e(Band.TERAHERTZ, np.array([1.0, 9.0]) * TERAHERTZ, 293.0)

    def test_band_edges_are_valid(self):
        lo, hi = self.model.valid_range(Band.TERAHERTZ)
        assert_that(lo, close_to(0.1 * TERAHERTZ, 1.0))
        assert_that(hi, close_to(3.5 * TERAHERTZ, 1.0))
        self.model.n_e(Band.TERAHERTZ, hi, 293.0)

    def test_wavenumber(self):
        k = self.model.wavenumber(Band.TERAHERTZ, 1.0 * TERAHERTZ, 293.0)
        expected = 2 * np.pi * TERAHERTZ * self.model.n_e(Band.TERAHERTZ, TERAHERTZ, 293.0) / SPEED_OF_LIGHT
        assert_that(k, close_to(expected, 1e-9 * expected))

    def test_critical_angle(self):
        angle = self.model.critical_angle(1.0 * TERAHERTZ, 293.0)
        assert_that(np.degrees(angle), close_to(11.67, 0.05))

    def test_thermal_occupation(self):
        assert_that(thermal_occupation(1.26 * TERAHERTZ, 293.0), close_to(4.363, 5e-3))
        assert_that(thermal_occupation(0.47 * TERAHERTZ, 293.0), close_to(12.50, 1e-2))
        assert_that(thermal_occupation(1.26 * TERAHERTZ, 0.0), equal_to(0.0))
        assert_that(ThermalField(1.26 * TERAHERTZ, 293.0).occupation, close_to(4.363, 5e-3))

    def test_thermal_occupation_far_tail_is_zero_not_nan(self):
        assert_that(thermal_occupation(3.0 * TERAHERTZ, 0.01), equal_to(0.0))
        assert_that(thermal_occupation(3.5 * TERAHERTZ, 0.5), less_than(1e-145))
        assert_that(thermal_occupation(np.array([1.0, 3.5]) * TERAHERTZ, 0.0).tolist(), equal_to([0.0, 0.0]))

    def test_thermal_occupation_detailed_balance(self):
        rng = np.random.default_rng(3)
        nu = rng.uniform(0.1, 3.5, 100000) * TERAHERTZ
        temperature = rng.uniform(1.0, 1000.0, 100000)
        occupation = thermal_occupation(nu, temperature)
        boltzmann = np.exp(-PLANCK * nu / (BOLTZMANN * temperature))
        assert_that(bool(np.allclose(occupation / (occupation + 1.0), boltzmann, rtol=1e-12, atol=0.0)), equal_to(True))

    def test_visible_group_index_is_step_independent(self):
        for wavelength in (520e-9, 560e-9, 600e-9, 659.58e-9, 700e-9):
            nu = SPEED_OF_LIGHT / wavelength
            index = self.model.n_e(Band.VISIBLE, nu, 293.0)
            coarse = self.model.group_index(Band.VISIBLE, nu, 293.0, relative_step=1e9 / nu) - index
            fine = self.model.group_index(Band.VISIBLE, nu, 293.0, relative_step=5e8 / nu) - index
            assert_that(fine, greater_than(0.0))
            assert_that(abs(coarse - fine), less_than(1e-4 * fine))

    def test_thermal_occupation_domain(self):
        with self.assertRaises(DomainError):
            thermal_occupation(0.0, 293.0)
        with self.assertRaises(DomainError):
            thermal_occupation(1.0 * TERAHERTZ, -1.0)

    def test_from_file_with_thermo_optic_shift(self):
        body = "frequency_THz,n_e\n0.5,5.0\n1.0,5.0\n1.5,5.0\n2.0,5.0\n"
        model = DispersionModel.from_file(self._write(body, "1e-4"))
        assert_that(model.source, equal_to("test table"))
        assert_that(model.n_e(Band.TERAHERTZ, TERAHERTZ, 293.0), close_to(5.0, 1e-12))
        assert_that(model.n_e(Band.TERAHERTZ, TERAHERTZ, 303.0), close_to(5.001, 1e-12))

    def test_from_file_reports_bad_cell(self):
        body = "frequency_THz,n_e\n0.5,5.0\n1.0,five\n1.5,5.0\n2.0,5.0\n"
        with self.assertRaises(FormatException) as context:
            DispersionModel.from_file(self._write(body))
        assert_that(context.exception.line, equal_to(15))
        assert_that(context.exception.column, equal_to("n_e"))

    def test_from_file_reports_bad_header(self):
        with self.assertRaises(FormatException) as context:
            DispersionModel.from_file(self._write("nu,n\n0.5,5.0\n"))
        assert_that(context.exception.column, equal_to("header"))

    def test_from_file_needs_enough_rows(self):
        with self.assertRaises(DomainError):
            DispersionModel.from_file(self._write("frequency_THz,n_e\n0.5,5.0\n1.0,5.0\n"))

    def test_from_file_rejects_non_utf8(self):
        path = self._write("frequency_THz,n_e\n0.5,5.0\n1.0,5.0\n1.5,5.0\n2.0,5.0\n")
        with open(path, "ab") as file_desc:
            file_desc.write(b"2.5,\xe9\n")
        with self.assertRaises(FormatException) as context:
            DispersionModel.from_file(path)
        assert_that(context.exception.line, equal_to(18))
        assert_that(context.exception.column, equal_to("file"))


if __name__ == "__main__":
    unittest.main()
