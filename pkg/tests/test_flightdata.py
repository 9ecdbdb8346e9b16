"""Flight-record ingestion, scaling, correlation, splits, feature rules."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import toy_record
from tssid.errors import (
    DegenerateChannel,
    EmptyDataset,
    IncompleteSplit,
    LengthMismatch,
    MissingChannel,
    NonNumericCell,
    OverlappingIds,
    TargetExcluded,
    UnknownChannel,
    ZeroVariance,
)
from tssid.flightdata import (
    Channel,
    CorrelationMatrix,
    FeatureRules,
    FlightRecord,
    ManeuverSegment,
    apply_minmax,
    correlation_matrix,
    emit_csv,
    filter_maneuvers,
    fit_minmax,
    ingest_csv,
    invert_minmax,
    load_maneuvers,
    save_maneuvers,
    scale_series,
    select_features,
    split_dataset,
    unscale_series,
)

# --- record construction -------------------------------------------------------


def test_channel_samples_locked(record):
    with pytest.raises(ValueError):
        record.values("TRQ")[0] = 1.0


def test_channel_rejects_non_finite():
    with pytest.raises(NonNumericCell):
        Channel("TRQ", "Nm", [1.0, np.nan, 3.0])


def test_record_rejects_unequal_channel_lengths():
    with pytest.raises(LengthMismatch):
        FlightRecord("f", 10.0, (Channel("A", "", [1.0, 2.0]),
                                 Channel("B", "", [1.0, 2.0, 3.0])))


def test_record_rejects_duplicate_channel_names():
    with pytest.raises(UnknownChannel):
        FlightRecord("f", 10.0, (Channel("A", "", [1.0]),
                                 Channel("A", "", [2.0])))


def test_record_rejects_maneuver_past_end():
    with pytest.raises(LengthMismatch):
        toy_record(n=10, segments=(ManeuverSegment("x", 0, 11),))


def test_maneuver_rejects_empty_range():
    with pytest.raises(LengthMismatch):
        ManeuverSegment("x", 5, 5)


def test_record_properties(record):
    assert record.n_samples == 60
    assert record.dt == pytest.approx(0.1)
    assert record.duration_s == pytest.approx(6.0)
    assert record.channel_names == ("TRQ", "WF")
    with pytest.raises(MissingChannel):
        record.channel("NG")


def test_select_preserves_order_and_subsets(record):
    sub = record.select(["WF"])
    assert sub.channel_names == ("WF",)
    np.testing.assert_array_equal(sub.values("WF"), record.values("WF"))


# --- CSV round trip ------------------------------------------------------------


def test_emit_ingest_round_trip_bit_exact(tmp_path, record):
    path = tmp_path / "fl01.csv"
    emit_csv(record, path)
    back = ingest_csv(path, record.sample_rate_hz)
    assert back.flight_id == "fl01"
    assert back.channel_names == record.channel_names
    for name in record.channel_names:
        # repr() rendering must reproduce every float64 exactly
        np.testing.assert_array_equal(back.values(name), record.values(name))


def test_ingest_ragged_row_raises(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("time_s,TRQ\n0.0,1.0\n0.1,2.0,9.9\n", encoding="utf-8")
    with pytest.raises(LengthMismatch, match="row 2"):
        ingest_csv(p, 10.0)


def test_ingest_non_numeric_cell_reports_row_and_column(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("time_s,TRQ,WF\n0.0,1.0,2.0\n0.1,oops,3.0\n", encoding="utf-8")
    with pytest.raises(NonNumericCell) as exc:
        ingest_csv(p, 10.0)
    assert "row=2" in str(exc.value)
    assert "TRQ" in str(exc.value)


def test_ingest_rejects_wrong_first_column(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("t,TRQ\n0.0,1.0\n", encoding="utf-8")
    with pytest.raises(MissingChannel):
        ingest_csv(p, 10.0)


def test_ingest_rejects_no_channels(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("time_s\n0.0\n", encoding="utf-8")
    with pytest.raises(MissingChannel):
        ingest_csv(p, 10.0)


def test_ingest_rejects_no_rows(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("time_s,TRQ\n", encoding="utf-8")
    with pytest.raises(EmptyDataset):
        ingest_csv(p, 10.0)


def test_ingest_rejects_nan_cell(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("time_s,TRQ\n0.0,nan\n", encoding="utf-8")
    with pytest.raises(NonNumericCell):
        ingest_csv(p, 10.0)


# --- maneuver annotations ------------------------------------------------------


def test_maneuvers_save_load_round_trip(tmp_path):
    recs = [
        toy_record("a", segments=(ManeuverSegment("hover", 0, 30),
                                  ManeuverSegment("taxiing", 30, 60, excluded=True))),
        toy_record("b", segments=(ManeuverSegment("cruise", 0, 60),)),
    ]
    p = tmp_path / "maneuvers.csv"
    save_maneuvers(recs, p)
    loaded = load_maneuvers(p)
    assert set(loaded) == {"a", "b"}
    assert loaded["a"] == recs[0].maneuvers
    assert loaded["b"] == recs[1].maneuvers


def test_filter_maneuvers_marks_and_is_idempotent(record):
    once = filter_maneuvers(record, ["hover"])
    assert [s.excluded for s in once.maneuvers] == [True, False]
    twice = filter_maneuvers(once, ["hover"])
    assert twice.maneuvers == once.maneuvers
    # exclusion only grows: filtering on nothing keeps prior exclusions
    kept = filter_maneuvers(once, [])
    assert kept.maneuvers == once.maneuvers


def test_included_mask_and_scoring_segments(record):
    rec = filter_maneuvers(record, ["hover"])
    mask = rec.included_mask()
    assert not mask[:30].any()
    assert mask[30:].all()
    segs = rec.scoring_segments()
    assert [s.label for s in segs] == ["cruise"]


def test_unannotated_record_is_one_segment():
    rec = toy_record(segments=())
    assert rec.included_mask().all()
    (seg,) = rec.scoring_segments()
    assert (seg.start_index, seg.end_index) == (0, rec.n_samples)


# --- correlation ----------------------------------------------------------------


def _pearson_two_pass(x: np.ndarray, y: np.ndarray) -> float:
    """Textbook two-pass Pearson correlation, kept independent on purpose."""
    mx, my = x.mean(), y.mean()
    num = float(np.sum((x - mx) * (y - my)))
    den = float(np.sqrt(np.sum((x - mx) ** 2) * np.sum((y - my) ** 2)))
    return num / den


def test_correlation_matches_two_pass_oracle():
    recs = [toy_record("a", seed=1), toy_record("b", seed=2)]
    corr = correlation_matrix(recs)
    pooled = {
        nm: np.concatenate([r.values(nm)[r.included_mask()] for r in recs])
        for nm in ("TRQ", "WF")
    }
    expected = _pearson_two_pass(pooled["TRQ"], pooled["WF"])
    assert abs(corr.corr("TRQ", "WF") - expected) <= 1e-12


def test_correlation_excludes_masked_samples():
    # poison the excluded half with a constant; correlation must ignore it
    n = 60
    rng = np.random.default_rng(3)
    base = rng.normal(size=n)
    trq = np.where(np.arange(n) < 30, 0.0, base)
    wf = np.where(np.arange(n) < 30, 0.0, 2.0 * base + rng.normal(size=n) * 0.1)
    rec = FlightRecord(
        "f", 10.0,
        (Channel("TRQ", "Nm", trq), Channel("WF", "lb/h", wf)),
        (ManeuverSegment("taxiing", 0, 30, excluded=True),
         ManeuverSegment("cruise", 30, 60)),
    )
    corr = correlation_matrix([rec])
    expected = _pearson_two_pass(trq[30:], wf[30:])
    assert abs(corr.corr("TRQ", "WF") - expected) <= 1e-12


def test_correlation_symmetric_unit_diagonal():
    recs = [toy_record("a", seed=4)]
    corr = correlation_matrix(recs)
    np.testing.assert_array_equal(corr.values, corr.values.T)
    np.testing.assert_array_equal(np.diag(corr.values), np.ones(2))
    assert np.all(np.abs(corr.values) <= 1.0)


def test_correlation_zero_variance():
    rec = FlightRecord("f", 10.0, (Channel("TRQ", "Nm", np.ones(10)),
                                   Channel("WF", "lb/h", np.arange(10.0))))
    with pytest.raises(ZeroVariance, match="TRQ"):
        correlation_matrix([rec])


def test_correlation_empty_corpus():
    with pytest.raises(EmptyDataset):
        correlation_matrix([])


def test_correlation_matrix_shape_validation():
    with pytest.raises(LengthMismatch):
        CorrelationMatrix(("A", "B"), np.ones((3, 3)))


# --- min-max scaling ------------------------------------------------------------


def test_minmax_round_trip(record):
    params = fit_minmax([record])
    fwd = apply_minmax(params, record)
    back = invert_minmax(params, fwd)
    for name in record.channel_names:
        lo, hi = params.channel_bounds(name)
        scaled = fwd.values(name)
        assert scaled.min() >= -1e-12 and scaled.max() <= 1.0 + 1e-12
        assert np.max(np.abs(back.values(name) - record.values(name))) <= 1e-12
        assert lo == record.values(name).min()
        assert hi == record.values(name).max()


def test_minmax_series_helpers(record):
    params = fit_minmax([record])
    x = record.values("WF")
    s = scale_series(params, "WF", x)
    np.testing.assert_allclose(unscale_series(params, "WF", s), x, atol=1e-12)


def test_minmax_unclamped_out_of_range(record):
    params = fit_minmax([record])
    lo, hi = params.channel_bounds("TRQ")
    s = scale_series(params, "TRQ", np.array([lo - (hi - lo)]))
    assert s[0] == pytest.approx(-1.0)


def test_minmax_pools_across_flights():
    a = toy_record("a", seed=5)
    b = toy_record("b", seed=6)
    params = fit_minmax([a, b])
    lo, hi = params.channel_bounds("TRQ")
    both = np.concatenate([a.values("TRQ"), b.values("TRQ")])
    assert lo == both.min() and hi == both.max()


def test_minmax_degenerate_channel():
    rec = FlightRecord("f", 10.0, (Channel("TRQ", "Nm", np.full(5, 3.0)),))
    with pytest.raises(DegenerateChannel, match="TRQ"):
        fit_minmax([rec])


def test_minmax_unknown_channel(record):
    params = fit_minmax([record], names=["TRQ"])
    with pytest.raises(UnknownChannel):
        params.channel_bounds("WF")


@settings(deadline=None, max_examples=50)
@given(
    values=st.lists(
        st.floats(min_value=-1e6, max_value=1e6,
                  allow_nan=False, allow_infinity=False),
        min_size=2, max_size=40,
    )
)
def test_minmax_round_trip_property(values):
    arr = np.asarray(values)
    if arr.max() == arr.min():
        arr = arr + np.linspace(0.0, 1.0, arr.size)  # avoid degenerate channel
    rec = FlightRecord("f", 10.0, (Channel("TRQ", "Nm", arr),))
    params = fit_minmax([rec])
    back = invert_minmax(params, apply_minmax(params, rec))
    span = params.channel_bounds("TRQ")[1] - params.channel_bounds("TRQ")[0]
    tol = 1e-12 * max(1.0, span)
    assert np.max(np.abs(back.values("TRQ") - arr)) <= tol


# --- splits ---------------------------------------------------------------------


def test_split_fractions_cover_and_are_deterministic():
    ids = [f"f{i:02d}" for i in range(10)]
    s1 = split_dataset(ids, fractions=(0.6, 0.2, 0.2), seed=42)
    s2 = split_dataset(ids, fractions=(0.6, 0.2, 0.2), seed=42)
    assert s1 == s2
    assert sorted(s1.all_ids) == sorted(ids)
    assert (len(s1.train_ids), len(s1.val_ids), len(s1.test_ids)) == (6, 2, 2)
    s3 = split_dataset(ids, fractions=(0.6, 0.2, 0.2), seed=43)
    assert s3 != s1  # a different seed shuffles differently


def test_split_explicit():
    ids = ["a", "b", "c"]
    s = split_dataset(ids, explicit={"train": ["a"], "val": ["b"], "test": ["c"]})
    assert s.train_ids == ("a",) and s.val_ids == ("b",) and s.test_ids == ("c",)


def test_split_explicit_must_cover_exactly():
    with pytest.raises(IncompleteSplit, match="missing"):
        split_dataset(["a", "b"], explicit={"train": ["a"], "val": [], "test": []})
    with pytest.raises(IncompleteSplit, match="unknown"):
        split_dataset(["a"], explicit={"train": ["a"], "val": ["zz"], "test": []})


def test_split_rejects_overlap_and_duplicates():
    with pytest.raises(OverlappingIds):
        split_dataset(["a", "b"], explicit={"train": ["a", "b"], "val": ["a"], "test": []})
    with pytest.raises(OverlappingIds):
        split_dataset(["a", "a"], fractions=(1.0, 0.0, 0.0))


def test_split_rejects_bad_fractions():
    with pytest.raises(IncompleteSplit):
        split_dataset(["a", "b"], fractions=(0.5, 0.2, 0.2))
    with pytest.raises(IncompleteSplit):
        split_dataset(["a", "b"], fractions=(0.5, 0.5))
    with pytest.raises(IncompleteSplit):
        split_dataset(["a", "b"])


# --- feature selection ----------------------------------------------------------


def _toy_corr() -> CorrelationMatrix:
    names = ("TRQ", "COL", "NR", "WF")
    v = np.array([
        [1.00, 0.90, 0.05, 0.70],
        [0.90, 1.00, 0.10, 0.60],
        [0.05, 0.10, 1.00, 0.02],
        [0.70, 0.60, 0.02, 1.00],
    ])
    return CorrelationMatrix(names, v)


def test_select_features_threshold_and_exclude():
    corr = _toy_corr()
    assert select_features(corr, "TRQ") == ("COL", "NR", "WF")
    rules = FeatureRules(min_abs_corr=0.5)
    assert select_features(corr, "TRQ", rules) == ("COL", "WF")
    rules = FeatureRules(min_abs_corr=0.5, exclude=("WF",))
    assert select_features(corr, "TRQ", rules) == ("COL",)
    rules = FeatureRules(include=("TRQ", "WF", "NR"))  # include must keep target
    assert select_features(corr, "TRQ", rules) == ("NR", "WF")  # matrix order
    rules = FeatureRules(max_abs_corr=0.5)
    assert select_features(corr, "TRQ", rules) == ("NR",)


def test_select_features_target_guarded():
    corr = _toy_corr()
    with pytest.raises(TargetExcluded):
        select_features(corr, "TRQ", FeatureRules(exclude=("TRQ",)))
    with pytest.raises(TargetExcluded):
        select_features(corr, "TRQ", FeatureRules(include=("COL",)))
    with pytest.raises(MissingChannel):
        select_features(corr, "NG")
