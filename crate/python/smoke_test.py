"""Smoke test for the Python module and the CLI's JSON output.

Build the extension first (see README), then run:

    python3 python/smoke_test.py [path/to/summatau binary]
"""

import json
import pathlib
import subprocess
import sys

import jsonschema

ROOT = pathlib.Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "build"))

import summatau  # noqa: E402

SCHEMAS = {
    p.stem: json.loads(p.read_text())
    for p in (ROOT / "crates" / "core" / "schemas").glob("*.json")
}


def check_module():
    alt = summatau.Sequence("alternating(c=1)")
    assert alt.term(3) == -1.0
    assert alt.prefix(4) == [1.0, -1.0, 1.0, -1.0]
    assert alt.growth == {"kind": "bounded", "m": 1.0}

    v = summatau.abel_limit(alt)
    assert v["status"] == "converged" and abs(v["limit"]) < 1e-4, v

    ramp = summatau.Sequence("ramp")
    assert summatau.abel_limit(ramp) == {
        "status": "diverged",
        "sign": 1,
        "diagnostics": summatau.abel_limit(ramp)["diagnostics"],
    }

    curve = summatau.mean_curve(summatau.Sequence("constant(c=2)"))
    assert len(curve) == 20 and all(abs(p["mean"] - 2) < 1e-7 for p in curve)

    assert summatau.cesaro_limit(summatau.Sequence("constant(c=7)"))["status"] == "converged"
    sq = summatau.Sequence("square_indicator")
    assert summatau.st_limit(sq)["limit"] == 0.0
    assert summatau.st_lacunary_limit(sq)["limit"] == 0.0

    so = summatau.is_slowly_oscillating(alt)
    assert so["status"] == "not_so" and so["witness"]["gap"] == 2.0

    seq = summatau.pm1_with_abel_limit(0.5)
    assert set(seq.prefix(2000)) == {-1.0, 1.0}
    assert abs(summatau.abel_limit(seq)["limit"] - 0.5) < 2e-3

    small = summatau.ToleranceProfile(n_max=200_000, eps_conv=1e-3)
    report = summatau.probe("t^2", ["alternating(c=1)", "constant(c=1)"], small)
    assert report["conclusion"]["kind"] == "counterexample"
    assert report["conclusion"]["witness"]["spec"] == "alternating(c=1)"

    b = summatau.boundedness_probe(summatau.Sequence("geometric_spike"))
    assert b["status"] == "not_abel_sequentially_compact_witness" and b["embedding_verdict"]["status"] != "converged"

    assert summatau.parse_function("1/(1+t^2)") == "1/(1+t^2)"
    assert alt.map("t^2").term(1) == 1.0

    for bad in ("alternating(c=", "nope"):
        try:
            summatau.Sequence(bad)
        except ValueError:
            pass
        else:
            raise AssertionError(bad)


def run_cli(binary, *args):
    out = subprocess.run([binary, *args], capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def check_cli(binary):
    docs = [
        run_cli(binary, "limit", "alternating(c=1)"),
        run_cli(binary, "limit", "ramp", "--method", "cesaro"),
        run_cli(binary, "limit", "square_indicator", "--method", "st"),
        run_cli(binary, "limit", "square_indicator", "--method", "st-lacunary"),
        run_cli(binary, "probe", "t^2", "--n-max", "200000", "--eps-conv", "1e-3", "--point", "0.5"),
        run_cli(binary, "oscillation", "alternating(c=1)", "--n-max", "200000"),
    ]
    for doc in docs:
        jsonschema.validate(doc, SCHEMAS[doc["schema_version"].removeprefix("summatau.")])
    bad = subprocess.run([binary, "limit", "alternating(c="], capture_output=True)
    assert bad.returncode == 2


def main():
    check_module()
    binary = sys.argv[1] if len(sys.argv) > 1 else str(ROOT / "target" / "debug" / "summatau")
    check_cli(binary)
    print("smoke test ok")


if __name__ == "__main__":
    main()
