# -*- coding: utf-8 -*-
"""Vector-graphics views of the data files (spectrum, fits, gain sweep)."""

import matplotlib
from matplotlib.figure import Figure
import numpy as np

from thzqs.analysis import envelope_model, stage_axis

# deterministic element ids; the Date entry is dropped in _save
SVG_STYLE = {"svg.hashsalt": "thzqs", "svg.fonttype": "none"}


def _save(fig, path):
    with matplotlib.rc_context(SVG_STYLE):
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def plot_spectrum(path, spectrum):
    shifts, matrix = spectrum.signed_shift()
    theta = spectrum.external_theta_deg()
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot()
    extent = [shifts[0], shifts[-1], theta[0], theta[-1]]
    image = ax.imshow(matrix, origin="lower", aspect="auto", extent=extent, cmap="gray_r", interpolation="nearest")
    fig.colorbar(image, ax=ax, label="relative intensity")
    ax.set_xlabel("frequency shift (THz)")
    ax.set_ylabel("scattering angle (deg)")
    return _save(fig, path)


def plot_fit(path, interferogram, fit=None):
    x = stage_axis(interferogram)
    fig = Figure(figsize=(7.0, 3.5))
    ax = fig.add_subplot()
    ax.errorbar(x * 1e3, interferogram.rate, yerr=interferogram.sigma, fmt=".", markersize=2, elinewidth=0.5,
                label=f"{interferogram.branch} {interferogram.kind}")
    if fit is not None:
        dense = np.linspace(x.min(), x.max(), 8 * x.size)
        ax.plot(dense * 1e3, envelope_model(dense, fit.params), linewidth=0.8, label="envelope fit")
    ax.set_xlabel("stage position (mm)")
    ax.set_ylabel("signal rate")
    ax.legend(loc="upper right")
    return _save(fig, path)


def plot_gain(path, sweep):
    fig = Figure(figsize=(6.0, 5.0))
    top, bottom = fig.subplots(2, 1, sharex=True)
    top.errorbar(sweep.power_w, sweep.unblocked, yerr=sweep.unblocked_sigma, fmt="o", label="idler open")
    top.errorbar(sweep.power_w, sweep.blocked, yerr=sweep.blocked_sigma, fmt="s", label="idler blocked")
    grid = np.linspace(0.0, float(np.max(sweep.power_w)), 50)
    top.plot(grid, sweep.slope * grid + sweep.intercept, linewidth=0.8, label=f"linear fit R2={sweep.r_squared:.4f}")
    top.set_ylabel("signal rate")
    top.legend(loc="upper left")
    bottom.errorbar(sweep.power_w, sweep.ratio, yerr=sweep.ratio_sigma, fmt="o")
    bottom.axhline(1.0, linewidth=0.6, color="gray")
    bottom.set_xlabel("pump power (W)")
    bottom.set_ylabel("open / blocked")
    return _save(fig, path)
