"""Readers for the snlab run-artifact formats.

A run directory holds metadata.txt (INI sections: schema, config,
constants, provenance, columns), timeseries.csv (header row + numeric
rows) and summary.txt ("key: value" lines).
"""

from __future__ import annotations

import configparser
from pathlib import Path

import numpy as np

EXPECTED_SCHEMA = "1"


class ArtifactError(RuntimeError):
    """Missing or malformed run artifacts."""


def read_metadata(run_dir):
    path = Path(run_dir) / "metadata.txt"
    if not path.exists():
        raise ArtifactError(f"{run_dir}: no metadata.txt (not an snlab run directory?)")
    cp = configparser.ConfigParser()
    try:
        cp.read_string(path.read_text())
    except configparser.Error as exc:
        raise ArtifactError(f"{path}: malformed metadata: {exc}") from exc
    if not cp.has_section("schema"):
        raise ArtifactError(f"{path}: missing [schema] section")
    version = cp.get("schema", "version", fallback=None)
    if version != EXPECTED_SCHEMA:
        raise ArtifactError(
            f"{path}: schema version {version!r} not supported (expected {EXPECTED_SCHEMA})")
    return {section: dict(cp.items(section)) for section in cp.sections()}


def read_timeseries(run_dir):
    path = Path(run_dir) / "timeseries.csv"
    if not path.exists():
        raise ArtifactError(f"{run_dir}: no timeseries.csv")
    lines = path.read_text().strip().splitlines()
    if not lines or "," not in lines[0]:
        raise ArtifactError(f"{path}: no CSV header")
    header = lines[0].split(",")
    try:
        data = np.array([[float(tok) for tok in line.split(",")] for line in lines[1:]])
    except ValueError as exc:
        raise ArtifactError(f"{path}: non-numeric cell: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ArtifactError(f"{path}: ragged rows")
    return {name: data[:, i] for i, name in enumerate(header)}


def read_summary(run_dir):
    path = Path(run_dir) / "summary.txt"
    if not path.exists():
        raise ArtifactError(f"{run_dir}: no summary.txt")
    out = {}
    for line in path.read_text().splitlines():
        if ":" not in line:
            continue
        key, _, value = line.partition(":")
        value = value.strip()
        try:
            out[key.strip()] = float(value)
        except ValueError:
            out[key.strip()] = value
    return out


def float_meta(meta, section, key, default=None):
    raw = meta.get(section, {}).get(key)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        return default
