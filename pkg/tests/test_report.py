import io

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spraylab.report import Aggregate, Report, emit, emits, make_record, parse

verdicts = st.sampled_from(["pass", "fail", "info"])
finite = st.floats(allow_nan=False, allow_infinity=False)
records = st.builds(
    make_record,
    st.sampled_from(["is_funk", "classify", "lambda"]),
    st.one_of(st.none(), st.lists(finite, min_size=4, max_size=4)),
    st.text(min_size=1, max_size=12),
    finite,
    st.floats(1e-12, 1.0),
    verdicts,
)


def report_from(recs, aborted=False):
    r = Report({"dimension": 2, "checks": [{"name": "is_funk"}]}, list(recs), Aggregate(aborted=aborted))
    r.tally()
    return r


@given(st.lists(records, max_size=20), st.booleans())
def test_round_trip(recs, aborted):
    r = report_from(recs, aborted)
    assert parse(emits(r)) == r


@given(st.lists(records, max_size=20), st.booleans())
def test_exit_code(recs, aborted):
    r = report_from(recs, aborted)
    if aborted:
        assert r.exit_code == 3
    else:
        assert (r.exit_code == 0) == (r.aggregate.fail_count == 0)
        assert r.exit_code in (0, 1)


def test_line_layout():
    r = report_from([make_record("is_funk", (0.1, 0.2, 1.0, 0.0), "residual", 1e-12, 1e-8, "pass")])
    buf = io.StringIO()
    emit(r, buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == 3
    assert '"record": "header"' in lines[0] and '"format_version": 1' in lines[0]
    for key in ("check", "point_x", "point_y", "residual_name", "residual_value", "tol", "verdict"):
        assert f'"{key}"' in lines[1]
    assert '"record": "aggregate"' in lines[2]


def test_failed_checks_and_tally():
    r = report_from([make_record("a", None, "r", 1.0, 1e-8, "fail"), make_record("b", None, "r", 0.0, 1e-8, "pass"),
                     make_record("a", None, "s", 1.0, 1e-8, "info")])
    assert r.aggregate.pass_count == 1 and r.aggregate.fail_count == 1
    assert r.failed_checks() == ["a"]


def test_parse_rejects_bad_input():
    with pytest.raises(ValueError):
        parse('{"record": "check"}\n')
    with pytest.raises(ValueError):
        parse('{"record": "header", "format_version": 99, "version": "x", "config": {}}\n'
              '{"record": "aggregate"}\n')
