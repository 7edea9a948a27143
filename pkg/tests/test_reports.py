import json
from fractions import Fraction

import numpy as np
import pytest

from dfretract import __version__
from dfretract.exceptions import ModelFileError, SchemaMismatch
from dfretract.reports import (
    SCHEMA_VERSION,
    deterministic_payload,
    make_manifest,
    read_report,
    render_report,
    to_jsonable,
    write_report,
)


def test_to_jsonable_handles_numeric_types():
    out = to_jsonable(
        {
            "a": np.float64(1.5),
            "b": np.int32(3),
            "c": np.array([[1 + 2j, 0], [0, 1]]),
            "d": Fraction(1, 137),
            "e": float("nan"),
            "f": (1, 2),
            "g": -np.inf,
        }
    )
    assert out["a"] == 1.5 and out["b"] == 3 and out["d"] == "1/137"
    assert out["c"]["real"] == [[1.0, 0.0], [0.0, 1.0]] and out["c"]["imag"][0][0] == 2.0
    assert out["e"] == "nan" and out["g"] == "-inf" and out["f"] == [1, 2]
    with pytest.raises(TypeError):
        to_jsonable(object())


def test_manifest_and_roundtrip(tmp_path):
    man = make_manifest("solve", {"Z": 1.0}, model_checksum="abc", seed=4)
    assert man.library_version == __version__ and man.timestamp
    p = write_report(tmp_path / "r.json", man, {"x": np.arange(3)})
    doc = read_report(p)
    assert doc["schema_version"] == SCHEMA_VERSION
    assert doc["manifest"]["seed"] == 4 and doc["payload"]["x"] == [0, 1, 2]


def test_render_is_deterministic_up_to_timestamp():
    a = render_report(make_manifest("x", {"k": 1}), {"v": 0.1})
    b = render_report(make_manifest("x", {"k": 1}), {"v": 0.1})
    assert deterministic_payload(a) == deterministic_payload(b)
    json.loads(a)


def test_read_report_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"schema": "other", "schema_version": 1}')
    with pytest.raises(SchemaMismatch):
        read_report(p)
    p.write_text("not json")
    with pytest.raises(ModelFileError):
        read_report(p)
