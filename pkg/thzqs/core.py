# -*- coding: utf-8 -*-

import os

import numpy as np

from thzqs.analysis import THICKNESS_COLUMNS, sense_pipeline, thickness_row
from thzqs.constants import TERAHERTZ
from thzqs.datafile import read_interferogram, write_interferogram, write_spectrum, write_table
from thzqs.dispersion import Band
from thzqs.exceptions import ActionException
from thzqs.instrument import acquire_scan, blocked_idler_scan, gain_linearity_sweep
from thzqs.multimode import MultimodeModel, SignalSource
from thzqs.phasematch import STOKES_FORWARD, PhaseMatcher
from thzqs.plotting import plot_fit, plot_gain, plot_spectrum
from thzqs.settings import validate
from thzqs.tools import (WARNING, deep_merge, dump_json, ensure_dir, file_digest, load_json_file, print_console,
                         write_json_file)


class Thzqs:

    CONFIG_FILE = os.path.join(os.path.dirname(__file__), "config", "config.json")
    VERSION_FILE = os.path.join(os.path.dirname(__file__), "version.txt")

    def __init__(self, config_path=None, overrides=None, blocked=False, raw=False):
        self._document = self._load_config(config_path, overrides or {})
        self._config = validate(self._document)
        self._blocked = blocked
        self._raw = raw
        self._matcher = None

    @classmethod
    def _load_config(cls, config_path, overrides):
        config = load_json_file(cls.CONFIG_FILE)
        if config_path:
            config = deep_merge(config, load_json_file(config_path))
        environment_out = os.getenv("THZQS_OUT")
        if environment_out:
            config["output_dir"] = environment_out
        return cls._apply_overrides(config, overrides)

    @staticmethod
    def _apply_overrides(config, overrides):
        config = deep_merge(config, {})
        sections = {"out": ("output_dir",), "seed": ("seed",), "temperature": ("crystal", "temperature_K"),
                    "repeats": ("scan", "repeats"), "thickness": ("object", "thickness_m"),
                    "format": ("spectrum", "format"), "index": ("object", "index"),
                    "index_sigma": ("object", "index_sigma")}
        for name, path in sections.items():
            value = overrides.get(name)
            if value is None:
                continue
            target = config
            for key in path[:-1]:
                target = target.setdefault(key, {})
            target[path[-1]] = value
        branch = overrides.get("branch")
        if branch:
            branch = branch.lower()
            matching = [label for label in config.get("branches", []) if label.split("-")[0] == branch]
            config["branches"] = [branch] if "-" in branch else matching or [f"{branch}-forward"]
        if overrides.get("noiseless"):
            config["noise"] = deep_merge(config.get("noise", {}), {
                "background_per_s": 0.0, "dark_per_s": 0.0, "readout_e": 0.0, "laser_rms": 0.0, "shot_noise": False})
        if overrides.get("no_plots"):
            config["plots"] = False
        return config

    @property
    def config(self):
        return self._config

    @property
    def matcher(self):
        if self._matcher is None:
            self._matcher = PhaseMatcher(self._config.crystal, self._config.dispersion)
        return self._matcher

    def _model(self, branch):
        return MultimodeModel(self.matcher, branch, self._config.aperture, self._config.quadrature,
                              self._config.object["phase0_rad"])

    def _output_dir(self):
        return ensure_dir(self._config.output_dir)

    def show_config(self):
        print_console("[*] Current thzqs config:")
        print_console(dump_json(self._document).rstrip("\n"))

    def version(self):
        with open(self.VERSION_FILE, "r", encoding="utf-8") as version:
            print_console(version.read().strip())

    def spectrum(self):
        options = self._config.spectrum
        crystal = self._config.crystal
        frequencies = np.linspace(options["min_THz"], options["max_THz"], options["points"]) * TERAHERTZ
        signal_index = self.matcher.dispersion.n_e(Band.VISIBLE, crystal.pump_frequency, crystal.temperature_k)
        external = np.radians(np.linspace(0.0, options["theta_s_max_deg"], options["theta_points"]))
        internal = np.arcsin(np.sin(external) / signal_index)
        spectrum = self.matcher.spectrum_map(self._config.branches, frequencies, internal)
        out = self._output_dir()
        written = write_spectrum(out, spectrum, options["format"], {"seed": self._config.seed})
        if self._config.plots:
            written.append(plot_spectrum(os.path.join(out, "spectrum.svg"), spectrum))
        print_console(f"[*] Spectrum map of {', '.join(str(b) for b in self._config.branches)} written to {out}")
        return written

    def simulate(self):
        config = self._config
        out = self._output_dir()
        scale = self._model(STOKES_FORWARD).pedestal()
        obj = config.object
        written = []
        for number, branch in enumerate(config.branches):
            source = SignalSource(self._model(branch), scale, fresnel=obj["fresnel"])
            if self._blocked:
                scans = [blocked_idler_scan(source, config.scan, config.noise, config.seed, 3 * number + 2,
                                            keep_raw=self._raw)]
            else:
                scans = [acquire_scan(source, config.scan, config.noise, config.seed, 3 * number, "reference",
                                      keep_raw=self._raw)]
                if obj["thickness_m"] > 0:
                    sample = source.with_object(obj["index"], obj["thickness_m"], obj["fresnel"])
                    scans.append(acquire_scan(sample, config.scan, config.noise, config.seed, 3 * number + 1,
                                              "sample", keep_raw=self._raw))
            for scan in scans:
                path = os.path.join(out, f"{branch.label}_{scan.kind}.csv")
                written.extend(write_interferogram(path, scan, raw=self._raw))
                if config.plots:
                    written.append(plot_fit(os.path.splitext(path)[0] + ".svg", scan))
                print_console(f"[*] {branch.label} {scan.kind} scan: {len(scan)} points, "
                              f"{config.scan.repeats} repeats -> {path}")
            if source.model.achieved > 0.5 * config.quadrature.rtol:
                print_console(f"[-] {branch.label}: quadrature change {source.model.achieved:.2g} is close to "
                              f"rtol {config.quadrature.rtol:.2g}", WARNING, formatter=1)
        return written

    def analyze(self, paths):
        if not paths:
            raise ActionException("analyze needs reference and sample scan files")
        config = self._config
        references, plates, seen = {}, {}, set()
        for path in paths:
            scan = read_interferogram(path)
            label = str(scan.branch)
            if scan.kind == "sample" or path in seen:
                caliper = scan.metadata.get("object", {}).get("thickness_m")
                plates.setdefault(None if caliper is None else float(caliper), {})[label] = scan
            elif scan.kind == "reference":
                references[label] = scan
            else:
                print_console(f"[-] Skipping {scan.kind} scan {path}", WARNING)
            seen.add(path)
        if not references or not plates:
            raise ActionException("analyze needs at least one reference and one sample scan")
        out = self._output_dir()
        rows, documents, written = [], [], []
        for caliper in sorted(plates, key=lambda value: (value is None, value or 0.0)):
            samples = plates[caliper]
            report = sense_pipeline({label: references.get(label) for label in samples
                                     if label in references}, samples, config.object["index"],
                                    config.object["index_sigma"])
            for label, analysis in report.branches.items():
                estimate = analysis.thickness
                print_console(f"[*] {label}: d = {estimate.thickness_m * 1e3:.4f} mm "
                              f"+/- {estimate.sigma_m * 1e3:.4f} mm")
                if estimate.negative:
                    print_console(f"[-] {label}: negative thickness estimate", WARNING, formatter=1)
                for fit in (analysis.reference_fit, analysis.sample_fit):
                    if fit.low_visibility:
                        print_console(f"[-] {label}: low fringe visibility in the fit start", WARNING, formatter=1)
                if config.plots:
                    tag = "" if caliper is None else f"_{caliper * 1e3:g}mm"
                    for kind, scan, fit in (("reference", references[label], analysis.reference_fit),
                                            ("sample", samples[label], analysis.sample_fit)):
                        written.append(plot_fit(os.path.join(out, f"{label}_{kind}{tag}_fit.svg"), scan, fit))
            rows.append(thickness_row(np.nan if caliper is None else caliper, report))
            document = report.to_dict()
            document["caliper_d_m"] = caliper
            documents.append(document)
        provenance = {"inputs": {path: file_digest(path) for path in sorted(paths)}, "config": self._document}
        written.append(write_json_file(os.path.join(out, "report.json"),
                                       {"plates": documents, "provenance": provenance}))
        written.append(write_table(os.path.join(out, "thickness.csv"), THICKNESS_COLUMNS, rows))
        return written

    def check_gain(self):
        config = self._config
        source = SignalSource.normalised(self._model(STOKES_FORWARD))
        sweep = gain_linearity_sweep(source, config.gain, config.scan, config.noise, config.seed,
                                     delta_l_m=config.gain_delta_l_m, measurements=config.gain_measurements)
        out = self._output_dir()
        columns, table = sweep.rows()
        written = [write_table(os.path.join(out, "gain.csv"), columns, table),
                   write_json_file(os.path.join(out, "gain.json"), sweep.to_dict())]
        if config.plots:
            written.append(plot_gain(os.path.join(out, "gain.svg"), sweep))
        for power, ratio, sigma in zip(sweep.power_w, sweep.ratio, sweep.ratio_sigma):
            print_console(f"{power:.3f} W  open/blocked = {ratio:.4f} +/- {sigma:.4f}", formatter=1)
        print_console(f"[*] Linear fit: slope {sweep.slope:.6g} per W, R2 = {sweep.r_squared:.6f}")
        return written

