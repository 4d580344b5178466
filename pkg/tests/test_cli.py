import io
import json

import pytest

from crsconf.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_check_confluent_text():
    code, text = run("check", "corpus:member")
    assert code == 0
    assert text.startswith("verdict: confluent (complementary)")


def test_check_json_schema():
    code, text = run("check", "corpus:not-left-linear", "--format", "json")
    assert code == 1
    doc = json.loads(text)
    assert set(doc) == {"verdict", "criterion", "hypotheses", "peaks", "witness", "advisory",
                        "diagnostics", "assumptions"}
    w = doc["witness"]
    assert {w["left"], w["right"]} == {"c", "d"}
    for step in w["left_derivation"] + w["right_derivation"]:
        assert set(step) == {"from", "position", "rule", "to", "depth"}


def test_check_unknown_has_advisory():
    code, text = run("check", "corpus:integer", "--format", "json")
    assert code == 2
    doc = json.loads(text)
    assert doc["witness"] is None
    assert doc["advisory"]["label"] == "SUPPORTED (bounded, k=3)"
    assert doc["assumptions"]["terminating"] is True


def test_check_with_file_and_seed(tmp_path):
    f = tmp_path / "sys.crs"
    f.write_text("sorts n; cons 0 : n; cons s : n -> n; cons c : n; cons d : n;"
                 "func plus : n n -> n; gvar X : n; instantiate none;"
                 "rule 0 = s(0); rule plus(X,X) = c; rule plus(X,s(X)) = d;")
    code, text = run("check", str(f), "--seed", "plus(0,0)", "--max-steps", "50")
    assert code == 1
    assert "witness: plus(0,0) rewrites to both" in text


def test_peaks_listing():
    code, text = run("peaks", "corpus:member", "--format", "json")
    assert code == 0
    peaks = json.loads(text)["peaks"]
    assert len(peaks) == 2 and all(p["complementary"] == "yes" for p in peaks)


@pytest.mark.parametrize("n", range(5))
def test_reduce_integer(n):
    pos = "s(" * n + "0" + ")" * n
    neg = "p(" * (n + 1) + "0" + ")" * (n + 1)
    for term, want in ((pos, "true"), (neg, "false")):
        code, text = run("reduce", "corpus:integer", f"nonneg({term})", "--format", "json")
        assert code == 0
        assert json.loads(text)["normal_forms"] == [want]


def test_reduce_depth_and_fuel():
    code, text = run("reduce", "corpus:member", "minus(s(0),s(0))", "--depth", "w")
    assert code == 0 and "1 terms, complete" in text
    code, text = run("reduce", "corpus:while", "while(true,0)", "--fuel", "10")
    assert "incomplete" in text


def test_join():
    code, text = run("join", "corpus:not-left-linear", "c", "d")
    assert code == 0 and "joinable at index w+w: no" in text


def test_corpus_command():
    code, text = run("corpus")
    assert "member" in text.split()
    code, text = run("corpus", "member")
    assert text.startswith("#") and "rule" in text


@pytest.mark.parametrize("argv", [
    ("check", "/nonexistent.crs"),
    ("check", "corpus:nope"),
    ("check", "corpus:var-lhs"),
    ("reduce", "corpus:member", "minus(0"),
    ("reduce", "corpus:member", "0", "--depth", "w+w+1"),
    ("corpus", "nope"),
])
def test_input_errors(argv):
    assert run(*argv)[0] == 3


def test_env_overrides(monkeypatch):
    monkeypatch.setenv("CRSCONF_MAX_STEPS", "10")
    code, text = run("reduce", "corpus:while", "while(true,0)")
    assert "incomplete" in text
