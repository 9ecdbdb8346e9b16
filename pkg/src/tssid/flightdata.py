"""Flight records: ingestion, maneuver annotation, scaling, splits, features.

A flight is a set of equally-sampled channels plus an ordered list of
maneuver segments.  CSV layout for a flight:

    time_s,TRQ,WF,...          header: time column first, then channels
    0.0,312.5,260.1,...        one row per sample

``time_s`` is implied by the sample rate and is regenerated on emit; it is
validated on ingest but not stored as a channel.  Maneuver annotations
live in a separate CSV with columns
``flight_id,label,start_index,end_index,excluded`` where ``end_index`` is
exclusive and ``excluded`` is 0 or 1.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateChannel,
    EmptyDataset,
    IncompleteSplit,
    IoError,
    LengthMismatch,
    MissingChannel,
    NonNumericCell,
    OverlappingIds,
    TargetExcluded,
    UnknownChannel,
    ZeroVariance,
)

TIME_COLUMN = "time_s"

# Channel catalogue: name -> physical unit.
CHANNEL_UNITS: dict[str, str] = {
    "TRQ": "Nm",
    "COL": "%",
    "T1": "°C",
    "T45": "°C",
    "TOil": "°C",
    "POil": "psi",
    "P0": "psi",
    "NR": "%",
    "TAT": "°C",
    "NP": "%",
    "NG": "%",
    "NGR": "%",
    "WF": "lb/h",
    "AIRSPEED": "kts",
}

CHANNEL_ORDER: tuple[str, ...] = tuple(CHANNEL_UNITS)

#: Input set used by the multi-input torque predictors.
DEFAULT_FEATURES: tuple[str, ...] = ("COL", "T1", "P0", "NR", "AIRSPEED")


def _as_locked_f64(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Channel:
    """One named, unit-tagged sample series.  Samples are immutable."""

    name: str
    unit: str
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", _as_locked_f64(self.samples))
        if not np.all(np.isfinite(self.samples)):
            bad = int(np.flatnonzero(~np.isfinite(self.samples))[0])
            raise NonNumericCell(bad + 1, self.name, "non-finite")

    def __len__(self) -> int:
        return int(self.samples.shape[0])


@dataclass(frozen=True)
class ManeuverSegment:
    """Half-open sample range [start_index, end_index) with a label."""

    label: str
    start_index: int
    end_index: int
    excluded: bool = False

    def __post_init__(self):
        if not (0 <= self.start_index < self.end_index):
            raise LengthMismatch(
                f"bad maneuver range [{self.start_index}, {self.end_index})"
            )

    @property
    def n_samples(self) -> int:
        return self.end_index - self.start_index


@dataclass(frozen=True)
class FlightRecord:
    """All channels of one flight at a fixed sample rate."""

    flight_id: str
    sample_rate_hz: float
    channels: tuple[Channel, ...]
    maneuvers: tuple[ManeuverSegment, ...] = ()

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise LengthMismatch(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        if not self.channels:
            raise MissingChannel(f"flight {self.flight_id!r} has no channels")
        n = len(self.channels[0])
        for ch in self.channels:
            if len(ch) != n:
                raise LengthMismatch(
                    f"flight {self.flight_id!r}: channel {ch.name!r} has "
                    f"{len(ch)} samples, expected {n}"
                )
        seen = set()
        for ch in self.channels:
            if ch.name in seen:
                raise UnknownChannel(f"duplicate channel {ch.name!r}")
            seen.add(ch.name)
        for seg in self.maneuvers:
            if seg.end_index > n:
                raise LengthMismatch(
                    f"flight {self.flight_id!r}: maneuver {seg.label!r} ends at "
                    f"{seg.end_index}, flight has {n} samples"
                )

    @property
    def n_samples(self) -> int:
        return len(self.channels[0])

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate_hz

    @property
    def channel_names(self) -> tuple[str, ...]:
        return tuple(ch.name for ch in self.channels)

    def channel(self, name: str) -> Channel:
        for ch in self.channels:
            if ch.name == name:
                return ch
        raise MissingChannel(f"flight {self.flight_id!r} has no channel {name!r}")

    def values(self, name: str) -> np.ndarray:
        return self.channel(name).samples

    def select(self, names: Sequence[str]) -> "FlightRecord":
        """Record restricted to ``names``, in the given order."""
        chans = tuple(self.channel(n) for n in names)
        return replace(self, channels=chans)

    def with_maneuvers(self, segments: Iterable[ManeuverSegment]) -> "FlightRecord":
        return replace(self, maneuvers=tuple(segments))

    def included_mask(self) -> np.ndarray:
        """Boolean mask of samples inside non-excluded maneuvers.

        A record with no annotations counts as one included segment.
        """
        if not self.maneuvers:
            return np.ones(self.n_samples, dtype=bool)
        mask = np.zeros(self.n_samples, dtype=bool)
        for seg in self.maneuvers:
            if not seg.excluded:
                mask[seg.start_index:seg.end_index] = True
        return mask

    def scoring_segments(self) -> tuple[ManeuverSegment, ...]:
        """Non-excluded segments, whole flight if unannotated."""
        if not self.maneuvers:
            return (ManeuverSegment("flight", 0, self.n_samples),)
        return tuple(s for s in self.maneuvers if not s.excluded)


# --- CSV ---------------------------------------------------------------------

def ingest_csv(path: str | Path, sample_rate_hz: float,
               flight_id: str | None = None) -> FlightRecord:
    """Read one flight CSV into a :class:`FlightRecord`.

    The header must start with ``time_s``; every other column becomes a
    channel.  Cells must parse as finite floats (:class:`NonNumericCell`
    reports the 1-based data row and the channel name otherwise), and all
    columns must have equal length (ragged rows raise
    :class:`LengthMismatch`).
    """
    path = Path(path)
    if flight_id is None:
        flight_id = path.stem
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise MissingChannel(f"{path}: empty file") from None
            rows = list(reader)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc

    header = [h.strip() for h in header]
    if not header or header[0] != TIME_COLUMN:
        raise MissingChannel(f"{path}: first column must be {TIME_COLUMN!r}")
    names = header[1:]
    if not names:
        raise MissingChannel(f"{path}: no data channels")
    if not rows:
        raise EmptyDataset(f"{path}: no data rows")

    width = len(header)
    for r, row in enumerate(rows, start=1):
        if len(row) != width:
            raise LengthMismatch(
                f"{path}: row {r} has {len(row)} cells, header has {width}"
            )
    try:
        data = np.asarray(rows, dtype=np.float64)
    except ValueError:
        data = _parse_cells_strict(rows, header, path)
    if not np.all(np.isfinite(data)):
        r, c = np.argwhere(~np.isfinite(data))[0]
        col = TIME_COLUMN if c == 0 else names[c - 1]
        raise NonNumericCell(int(r) + 1, col, rows[r][c])

    channels = tuple(
        Channel(name, CHANNEL_UNITS.get(name, ""), data[:, j + 1])
        for j, name in enumerate(names)
    )
    return FlightRecord(flight_id, sample_rate_hz, channels)


def _parse_cells_strict(rows, header, path) -> np.ndarray:
    """Slow path: locate the offending cell for an exact error message."""
    out = np.empty((len(rows), len(header)))
    for r, row in enumerate(rows):
        for c, cell in enumerate(row):
            try:
                out[r, c] = float(cell)
            except ValueError:
                raise NonNumericCell(r + 1, header[c], cell) from None
    return out


def emit_csv(record: FlightRecord, path: str | Path) -> None:
    """Write a flight CSV that ingests back bit-exact.

    Floats are rendered with ``repr``, the shortest string that round-trips
    the exact float64 value.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = record.channel_names
    cols = [record.values(n) for n in names]
    fs = record.sample_rate_hz
    lines = [",".join((TIME_COLUMN,) + names)]
    for i in range(record.n_samples):
        cells = [repr(i / fs)]
        for col in cols:
            cells.append(repr(float(col[i])))
        lines.append(",".join(cells))
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
    tmp.replace(path)


def save_maneuvers(records: Sequence[FlightRecord], path: str | Path) -> None:
    """Write the maneuver annotations of several flights to one CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["flight_id,label,start_index,end_index,excluded"]
    for rec in records:
        for seg in rec.maneuvers:
            lines.append(
                f"{rec.flight_id},{seg.label},{seg.start_index},"
                f"{seg.end_index},{int(seg.excluded)}"
            )
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
    tmp.replace(path)


def load_maneuvers(path: str | Path) -> dict[str, tuple[ManeuverSegment, ...]]:
    """Read a maneuver annotation CSV; returns flight_id -> segments."""
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            out: dict[str, list[ManeuverSegment]] = {}
            for r, row in enumerate(reader, start=1):
                try:
                    seg = ManeuverSegment(
                        label=row["label"],
                        start_index=int(row["start_index"]),
                        end_index=int(row["end_index"]),
                        excluded=bool(int(row["excluded"])),
                    )
                except (KeyError, TypeError, ValueError) as exc:
                    raise NonNumericCell(r, "maneuvers", str(exc)) from None
                out.setdefault(row["flight_id"], []).append(seg)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    return {k: tuple(v) for k, v in out.items()}


def filter_maneuvers(record: FlightRecord, exclude_labels: Iterable[str]) -> FlightRecord:
    """Mark segments whose label is in ``exclude_labels`` as excluded.

    Exclusion only ever grows: segments already excluded stay excluded, so
    an empty label set returns the record unchanged and the operation is
    idempotent.
    """
    labels = set(exclude_labels)
    segs = tuple(
        replace(s, excluded=s.excluded or (s.label in labels))
        for s in record.maneuvers
    )
    return record.with_maneuvers(segs)


# --- correlation -------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationMatrix:
    """Pearson correlations over pooled, non-excluded samples."""

    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.shape != (len(self.names), len(self.names)):
            raise LengthMismatch("correlation matrix shape does not match names")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def corr(self, a: str, b: str) -> float:
        ia, ib = self.names.index(a), self.names.index(b)
        return float(self.values[ia, ib])


def correlation_matrix(records: Sequence[FlightRecord],
                       names: Sequence[str] | None = None) -> CorrelationMatrix:
    """Pearson correlation matrix across flights.

    Samples inside excluded maneuvers are dropped before pooling.  Raises
    :class:`ZeroVariance` if any pooled channel is constant.
    """
    if not records:
        raise EmptyDataset("correlation_matrix needs at least one flight")
    if names is None:
        names = records[0].channel_names
    names = tuple(names)
    pooled = []
    for nm in names:
        parts = []
        for rec in records:
            mask = rec.included_mask()
            parts.append(rec.values(nm)[mask])
        pooled.append(np.concatenate(parts))
    n = pooled[0].shape[0]
    if n < 2:
        raise EmptyDataset("correlation_matrix needs at least two pooled samples")
    for nm, col in zip(names, pooled):
        if np.max(col) == np.min(col):
            raise ZeroVariance(f"channel {nm!r} is constant over pooled samples")
    stacked = np.vstack(pooled)
    c = np.corrcoef(stacked)
    c = 0.5 * (c + c.T)
    np.clip(c, -1.0, 1.0, out=c)
    np.fill_diagonal(c, 1.0)
    return CorrelationMatrix(names, c)


# --- min-max scaling ----------------------------------------------------------

@dataclass(frozen=True)
class ScalerParams:
    """Per-channel (min, max) fitted on training flights."""

    bounds: Mapping[str, tuple[float, float]]

    def __post_init__(self):
        object.__setattr__(
            self, "bounds",
            {k: (float(v[0]), float(v[1])) for k, v in dict(self.bounds).items()},
        )

    def channel_bounds(self, name: str) -> tuple[float, float]:
        try:
            return self.bounds[name]
        except KeyError:
            raise UnknownChannel(f"no scaler parameters for channel {name!r}") from None


def fit_minmax(records: Sequence[FlightRecord],
               names: Sequence[str] | None = None) -> ScalerParams:
    """Fit per-channel min-max bounds over all samples of ``records``."""
    if not records:
        raise EmptyDataset("fit_minmax needs at least one flight")
    if names is None:
        names = records[0].channel_names
    bounds = {}
    for nm in names:
        lo = np.inf
        hi = -np.inf
        for rec in records:
            col = rec.values(nm)
            lo = min(lo, float(np.min(col)))
            hi = max(hi, float(np.max(col)))
        if hi == lo:
            raise DegenerateChannel(f"channel {nm!r} is constant; cannot scale")
        bounds[nm] = (lo, hi)
    return ScalerParams(bounds)


def apply_minmax(params: ScalerParams, record: FlightRecord) -> FlightRecord:
    """Scale every channel of ``record`` to (x - min) / (max - min).

    The map is affine and unclamped, so out-of-range values land outside
    [0, 1] rather than being distorted.
    """
    chans = []
    for ch in record.channels:
        lo, hi = params.channel_bounds(ch.name)
        chans.append(Channel(ch.name, ch.unit, (ch.samples - lo) / (hi - lo)))
    return replace(record, channels=tuple(chans))


def invert_minmax(params: ScalerParams, record: FlightRecord) -> FlightRecord:
    """Inverse of :func:`apply_minmax`."""
    chans = []
    for ch in record.channels:
        lo, hi = params.channel_bounds(ch.name)
        chans.append(Channel(ch.name, ch.unit, ch.samples * (hi - lo) + lo))
    return replace(record, channels=tuple(chans))


def scale_series(params: ScalerParams, name: str, values: np.ndarray) -> np.ndarray:
    lo, hi = params.channel_bounds(name)
    return (np.asarray(values, dtype=np.float64) - lo) / (hi - lo)


def unscale_series(params: ScalerParams, name: str, values: np.ndarray) -> np.ndarray:
    lo, hi = params.channel_bounds(name)
    return np.asarray(values, dtype=np.float64) * (hi - lo) + lo


# --- splits -------------------------------------------------------------------

@dataclass(frozen=True)
class DatasetSplit:
    train_ids: tuple[str, ...]
    val_ids: tuple[str, ...]
    test_ids: tuple[str, ...]

    def __post_init__(self):
        groups = (set(self.train_ids), set(self.val_ids), set(self.test_ids))
        if (groups[0] & groups[1]) or (groups[0] & groups[2]) or (groups[1] & groups[2]):
            raise OverlappingIds("train/val/test memberships intersect")

    @property
    def all_ids(self) -> tuple[str, ...]:
        return self.train_ids + self.val_ids + self.test_ids


def split_dataset(flight_ids: Sequence[str],
                  fractions: Sequence[float] | None = None,
                  explicit: Mapping[str, Sequence[str]] | None = None,
                  seed: int = 0) -> DatasetSplit:
    """Partition flight ids into train/val/test.

    Either ``fractions`` (train, val, test summing to 1; shuffled with
    ``seed``) or ``explicit`` (mapping with keys train/val/test that must
    cover ``flight_ids`` exactly and pairwise-disjointly).
    """
    ids = list(flight_ids)
    if len(set(ids)) != len(ids):
        raise OverlappingIds("duplicate flight ids in corpus")
    if explicit is not None:
        tr = tuple(explicit.get("train", ()))
        va = tuple(explicit.get("val", ()))
        te = tuple(explicit.get("test", ()))
        split = DatasetSplit(tr, va, te)
        listed = set(split.all_ids)
        corpus = set(ids)
        if listed != corpus:
            missing = sorted(corpus - listed)
            extra = sorted(listed - corpus)
            raise IncompleteSplit(
                f"split does not cover corpus exactly; missing={missing}, unknown={extra}"
            )
        return split
    if fractions is None:
        raise IncompleteSplit("need either fractions or explicit split lists")
    if len(fractions) != 3:
        raise IncompleteSplit("fractions must be (train, val, test)")
    f = [float(x) for x in fractions]
    if any(x < 0 for x in f) or abs(sum(f) - 1.0) > 1e-9:
        raise IncompleteSplit(f"fractions must be non-negative and sum to 1, got {f}")
    rng = np.random.default_rng(seed)
    order = [ids[i] for i in rng.permutation(len(ids))]
    n = len(ids)
    n_train = int(round(f[0] * n))
    n_val = int(round(f[1] * n))
    n_train = min(n_train, n)
    n_val = min(n_val, n - n_train)
    return DatasetSplit(
        tuple(order[:n_train]),
        tuple(order[n_train:n_train + n_val]),
        tuple(order[n_train + n_val:]),
    )


# --- feature selection --------------------------------------------------------

@dataclass(frozen=True)
class FeatureRules:
    """Rules applied to a correlation matrix to pick model inputs."""

    include: tuple[str, ...] = ()
    exclude: tuple[str, ...] = ()
    min_abs_corr: float | None = None
    max_abs_corr: float | None = None


def select_features(corr: CorrelationMatrix, target: str,
                    rules: FeatureRules = FeatureRules()) -> tuple[str, ...]:
    """Choose input channels for predicting ``target``.

    Order follows the correlation matrix.  ``include`` restricts the
    candidate set; ``exclude`` then removes names; correlation bounds are
    applied against |corr(channel, target)|.  Dropping the target itself
    raises :class:`TargetExcluded`.
    """
    if target not in corr.names:
        raise MissingChannel(f"target {target!r} not in correlation matrix")
    if target in rules.exclude or (rules.include and target not in rules.include):
        raise TargetExcluded(f"rules would drop the prediction target {target!r}")
    chosen = []
    for nm in corr.names:
        if nm == target:
            continue
        if rules.include and nm not in rules.include:
            continue
        if nm in rules.exclude:
            continue
        r = abs(corr.corr(nm, target))
        if rules.min_abs_corr is not None and r < rules.min_abs_corr:
            continue
        if rules.max_abs_corr is not None and r > rules.max_abs_corr:
            continue
        chosen.append(nm)
    return tuple(chosen)
