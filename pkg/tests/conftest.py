"""Shared fixtures and helpers for the tssid test suite."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
import yaml

from tssid import cli
from tssid.flightdata import Channel, FlightRecord, ManeuverSegment

REPO = Path(__file__).resolve().parent.parent
CONFIGS = REPO / "configs"


def run_cli(*args) -> int:
    """Invoke the CLI in-process; returns the exit code."""
    return cli.main([str(a) for a in args])


def make_run(tmp_dir: Path, preset: str, **overrides) -> Path:
    """Copy a preset config into tmp_dir with tmp-local data/out paths.

    ``overrides`` are merged into the top-level mapping (one level deep for
    dict values), so tests can tweak a preset without a second YAML file.
    """
    raw = yaml.safe_load((CONFIGS / f"{preset}.yaml").read_text(encoding="utf-8"))
    raw["paths"] = {"data_dir": str(tmp_dir / "data"),
                    "out_dir": str(tmp_dir / "out")}
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(raw.get(key), dict):
            raw[key] = {**raw[key], **value}
        else:
            raw[key] = value
    cfg_path = tmp_dir / f"{preset}.yaml"
    cfg_path.write_text(yaml.safe_dump(raw, sort_keys=False), encoding="utf-8")
    return cfg_path


def toy_record(flight_id: str = "fl01", n: int = 60, fs: float = 10.0,
               seed: int = 0, segments=None) -> FlightRecord:
    """Small two-channel flight for unit tests."""
    rng = np.random.default_rng(seed)
    trq = 100.0 + 5.0 * np.sin(np.linspace(0.0, 4.0, n)) + rng.normal(0, 0.2, n)
    wf = 300.0 + 20.0 * np.cos(np.linspace(0.0, 3.0, n)) + rng.normal(0, 0.5, n)
    channels = (Channel("TRQ", "Nm", trq), Channel("WF", "lb/h", wf))
    if segments is None:
        segments = (ManeuverSegment("hover", 0, n // 2),
                    ManeuverSegment("cruise", n // 2, n))
    return FlightRecord(flight_id, fs, channels, tuple(segments))


@pytest.fixture
def record():
    return toy_record()
