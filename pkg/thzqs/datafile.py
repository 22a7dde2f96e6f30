# -*- coding: utf-8 -*-

import csv
import json
import os

import numpy as np

from thzqs.exceptions import DomainError, FormatException
from thzqs.multimode import Interferogram
from thzqs.phasematch import ProcessBranch
from thzqs.tools import decode_error_line, write_json_file

INTERFEROGRAM_COLUMNS = ["position_m", "delta_l_m", "rate", "rate_sigma"]
RAW_COLUMNS = ["repeat", "index", "signal_counts", "background_counts"]


def format_number(value):
    return repr(float(value))


def sidecar_path(path):
    return os.path.splitext(path)[0] + ".json"


def write_table(path, columns, rows):
    with open(path, "w", encoding="utf-8", newline="") as file_desc:
        writer = csv.writer(file_desc, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_number(value) for value in row])
    return path


def write_interferogram(path, interferogram, raw=False):
    """Write ``<name>.csv`` and its ``<name>.json`` sidecar, plus ``<name>.raw.csv`` on request."""
    position = interferogram.position
    if position is None:
        position = np.full(interferogram.rate.shape, np.nan)
    rows = np.column_stack([position, interferogram.delta_l, interferogram.rate, interferogram.sigma])
    written = [write_table(path, INTERFEROGRAM_COLUMNS, rows)]
    metadata = dict(interferogram.metadata)
    metadata["branch"] = str(interferogram.branch)
    metadata["kind"] = interferogram.kind
    written.append(write_json_file(sidecar_path(path), metadata))
    if raw and interferogram.raw_counts is not None:
        repeats, points, _ = interferogram.raw_counts.shape
        repeat, index = np.meshgrid(np.arange(repeats), np.arange(points), indexing="ij")
        table = np.column_stack([repeat.ravel(), index.ravel(), interferogram.raw_counts.reshape(-1, 2)])
        written.append(write_table(os.path.splitext(path)[0] + ".raw.csv", RAW_COLUMNS, table))
    return written


def _read_sidecar(path):
    meta_path = sidecar_path(path)
    try:
        with open(meta_path, encoding="utf-8") as file_desc:
            metadata = json.load(file_desc)
    except OSError as err:
        raise FormatException(meta_path, 0, "branch", f"missing sidecar ({err.strerror})") from err
    except json.JSONDecodeError as err:
        raise FormatException(meta_path, err.lineno, "json", err.msg) from err
    except UnicodeDecodeError as err:
        raise FormatException(meta_path, decode_error_line(err), "json", f"not valid UTF-8 ({err.reason})") from err
    if not isinstance(metadata, dict) or "branch" not in metadata:
        raise FormatException(meta_path, 1, "branch", "sidecar names no branch")
    try:
        branch = ProcessBranch.parse(metadata["branch"])
    except DomainError as err:
        raise FormatException(meta_path, 1, "branch", str(err)) from err
    return metadata, branch


def read_interferogram(path):
    try:
        with open(path, encoding="utf-8", newline="") as file_desc:
            text = file_desc.read()
    except OSError as err:
        raise FormatException(path, 0, "file", err.strerror) from err
    except UnicodeDecodeError as err:
        raise FormatException(path, decode_error_line(err), "file", f"not valid UTF-8 ({err.reason})") from err
    lines = list(csv.reader(text.splitlines()))
    if not lines or lines[0] != INTERFEROGRAM_COLUMNS:
        raise FormatException(path, 1, "header", f"expected '{','.join(INTERFEROGRAM_COLUMNS)}'")
    values = []
    for number, row in enumerate(lines[1:], start=2):
        if len(row) != len(INTERFEROGRAM_COLUMNS):
            expected = len(INTERFEROGRAM_COLUMNS)
            column = INTERFEROGRAM_COLUMNS[min(len(row), expected - 1)]
            raise FormatException(path, number, column, f"expected {expected} fields, got {len(row)}")
        parsed = []
        for column, text in zip(INTERFEROGRAM_COLUMNS, row):
            try:
                parsed.append(float(text))
            except ValueError as err:
                raise FormatException(path, number, column, f"not a number: {text!r}") from err
        values.append(parsed)
    if not values:
        raise FormatException(path, 2, INTERFEROGRAM_COLUMNS[0], "no data rows")
    table = np.array(values)
    metadata, branch = _read_sidecar(path)
    position = None if np.all(np.isnan(table[:, 0])) else table[:, 0]
    return Interferogram(table[:, 1], table[:, 2], branch, sigma=table[:, 3], position=position,
                         kind=metadata.get("kind", "reference"), metadata=metadata)


def write_spectrum(directory, spectrum, fmt="csv", metadata=None):
    shifts, matrix = spectrum.signed_shift()
    theta = spectrum.external_theta_deg()
    document = dict(metadata or {})
    document.update({"crystal": spectrum.crystal.to_dict(), "branches": [str(b) for b in spectrum.sheets],
                     "shift_THz": shifts.tolist(), "theta_s_deg": theta.tolist(),
                     "signal_index": spectrum.signal_index})
    json_path = os.path.join(directory, "spectrum.json")
    if fmt == "json":
        document["intensity"] = matrix.tolist()
        return [write_json_file(json_path, document)]
    csv_path = os.path.join(directory, "spectrum.csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as file_desc:
        writer = csv.writer(file_desc, lineterminator="\n")
        writer.writerow(["theta_s_deg\\shift_THz"] + [format_number(value) for value in shifts])
        for angle, row in zip(theta, matrix):
            writer.writerow([format_number(angle)] + [format_number(value) for value in row])
    return [csv_path, write_json_file(json_path, document)]
