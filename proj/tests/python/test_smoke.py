import math
import os
from pathlib import Path

import pytest

import uhatgen

SPECS = Path(os.environ.get("UHAT_SPECS", Path(__file__).resolve().parents[2] / "specs"))


def spec(name):
    return (SPECS / f"{name}.uhat").read_text()


def test_version():
    assert uhatgen.__version__ == "0.1.0"


def test_handlers_listed():
    names = uhatgen.handlers()
    assert "stack_ok" in names and "kv_ra_buggy" in names


def test_normalize_roundtrip():
    once = uhatgen.normalize_spec(spec("stack"))
    assert uhatgen.normalize_spec(once) == once


def test_synthesize_stack():
    r = uhatgen.synthesize(spec("stack"), "pop_any")
    assert r["candidates"] >= 1
    assert "pop()" in r["combined"]
    out = uhatgen.run(r["programs"][0], "stack_ok", seed=3, spec=spec("stack"))
    assert out["outcome"] == "Completed"
    assert not out["violation"]


def test_check_trace():
    trace = "op=push args=[1] ret=() ghost=0\nop=pop args=[] ret=1 ghost=0\n"
    assert uhatgen.check(trace, spec("stack"), "pop_any")
    assert not uhatgen.check("op=push args=[1] ret=() ghost=0\n", spec("stack"), "pop_any")


def test_bench_finds_bug():
    rows = uhatgen.bench(spec("stack"), "three_push_pop", "stack_buggy", runs=200)
    synth = rows[0]
    assert synth["strategy"] == "synth" and synth["violations"] > 0
    ok = uhatgen.bench(spec("stack"), "three_push_pop", "stack_ok", runs=50, baseline="none")
    assert math.isinf(ok[0]["median"])


def test_errors_surface():
    with pytest.raises(uhatgen.UhatError):
        uhatgen.synthesize(spec("stack"), "no_such_property")
