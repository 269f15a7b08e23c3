"""End-to-end checks of the gylab command-line driver.

usage: cli_checks.py GYLAB CONFIG_DIR SCHEMA CHECK
"""
import csv
import io
import json
import math
import os
import re
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

GYLAB, CONFIGS, SCHEMA = (Path(a) for a in sys.argv[1:4])
CHECK = sys.argv[4]


def run(command, config, out, *extra, env=None):
    args = [str(GYLAB), command, "--config", str(config), "--out", str(out), *extra]
    proc = subprocess.run(args, capture_output=True, text=True, env=env, timeout=600)
    return proc.returncode, proc.stderr


def write_config(directory, name, text):
    path = Path(directory) / name
    path.write_text(text)
    return path


def report(out, prefix, command):
    return json.loads((Path(out) / f"{prefix}_{command}.json").read_text())


def expect(cond, message):
    if not cond:
        raise AssertionError(message)


HARMONIC = """[problem]
hamiltonian = harmonic
mass = 1
omega = 1
horizon = pi/2
f1_a = 0
f2_a = 0
b1 = 1
b2 = 0
"""


def check_exit_codes(tmp):
    cases = {
        "negative_mass": (HARMONIC.replace("mass = 1", "mass = -1"), "solve", 3),
        "unknown_key": (HARMONIC + "colour = red\n", "solve", 3),
        "empty_n_list": (HARMONIC + "[numerics]\nN_list =\n", "converge", 3),
        "missing_file": (None, "solve", 3),
        "bad_syntax": ("[problem\nmass = 1\n", "solve", 3),
        "scope": (HARMONIC.replace("hamiltonian = harmonic", "hamiltonian = coupled")
                  + "gamma = 0.1\ndelta = 0.1\n[numerics]\nwhich = gy-an\nN = 11\n", "verify", 3),
        "zero_mode": ("[problem]\nhamiltonian = free\nhorizon = pi\nf1_a = 0\nf2_a = 0\n"
                      "[numerics]\nN_list = 11, 21, 41, 81\n", "converge", 2),
        "pass": (HARMONIC + "[numerics]\nN = 21\n", "solve", 0),
    }
    for name, (text, command, code) in cases.items():
        cfg = Path(tmp) / "does_not_exist.ini" if text is None else write_config(tmp, name + ".ini", text)
        got, err = run(command, cfg, tmp, "--no-timestamp")
        expect(got == code, f"{name}: exit {got}, expected {code}; stderr: {err}")
        if code == 3:
            expect(err.strip(), f"{name}: no message on stderr")
    proc = subprocess.run([str(GYLAB), "solve"], capture_output=True, text=True)
    expect(proc.returncode == 3, "missing --config must exit 3")


def check_identity_fail(tmp):
    # Too few Newton iterations for an anharmonic instance: a numeric failure.
    text = ("[problem]\nhamiltonian = anharmonic\nlambda = 1\nf1_a = 1\nf2_a = -1\nb1 = 3\nb2 = 2\n"
            "[numerics]\nN = 21\nmax_iter = 1\nnewton_tol = 1e-14\n")
    code, err = run("solve", write_config(tmp, "stall.ini", text), tmp, "--no-timestamp")
    expect(code == 2, f"stalled Newton should exit 2, got {code}: {err}")
    rep = report(tmp, "gylab", "solve")
    expect(rep["error"]["kind"] == "convergence" and rep["pass"] is False, "error report")


def check_determinism(tmp):
    for cfg in ["harmonic.ini", "anharmonic.ini", "random_n2.ini"]:
        for command in ["solve", "verify", "converge"]:
            outputs = []
            for threads in ["1", "3"]:
                out = Path(tmp) / f"{cfg}_{command}_{threads}"
                out.mkdir()
                env = dict(os.environ, GYLAB_THREADS=threads)
                run(command, CONFIGS / cfg, out, "--no-timestamp", env=env)
                outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
            expect(outputs[0], f"{cfg} {command}: nothing written")
            expect(outputs[0] == outputs[1], f"{cfg} {command}: output differs between runs")


def check_timestamp(tmp):
    run("solve", CONFIGS / "harmonic.ini", tmp)
    rep = report(tmp, "harmonic", "solve")
    expect(re.fullmatch(r"\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ", rep.get("timestamp", "")),
           "timestamp missing or malformed")
    run("solve", CONFIGS / "harmonic.ini", tmp, "--no-timestamp")
    expect("timestamp" not in report(tmp, "harmonic", "solve"), "--no-timestamp ignored")


def check_schema(tmp):
    schema = json.loads(SCHEMA.read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    count = 0
    identities = ["gy-discrete", "gy-an", "gy-zeta", "thm23", "lemma22", "weak-conv",
                  "spectral", "asymptotic", "lattice-gy"]
    for cfg in sorted(CONFIGS.glob("*.ini")):
        for command in ["solve", "verify", "converge"]:
            out = Path(tmp) / f"{cfg.stem}_{command}"
            out.mkdir()
            run(command, cfg, out)
            for path in out.glob("*.json"):
                errors = list(validator.iter_errors(json.loads(path.read_text())))
                expect(not errors, f"{path.name}: {[e.message for e in errors]}")
                count += 1
    out = Path(tmp) / "identities"
    out.mkdir()
    for which in identities:
        run("verify", CONFIGS / "harmonic.ini", out, "--which", which)
        errors = list(validator.iter_errors(report(out, "harmonic", "verify")))
        expect(not errors, f"{which}: {[e.message for e in errors]}")
        count += 1
    expect(count > 20, "too few reports validated")


def check_csv(tmp):
    tables = 0
    for cfg in sorted(CONFIGS.glob("*.ini")):
        for command in ["solve", "verify", "converge"]:
            out = Path(tmp) / f"{cfg.stem}_{command}"
            out.mkdir()
            run(command, cfg, out, "--no-timestamp")
            for path in out.glob("*.csv"):
                raw = path.read_bytes()
                expect(b"\r" not in raw, f"{path.name}: CR in line endings")
                expect(raw.endswith(b"\n"), f"{path.name}: missing final LF")
                rows = list(csv.reader(io.StringIO(raw.decode())))
                expect(len(rows) >= 2, f"{path.name}: no data rows")
                width = len(rows[0])
                expect(all(len(r) == width for r in rows), f"{path.name}: ragged rows")
                expect(all(re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", h) for h in rows[0]),
                       f"{path.name}: header {rows[0]}")
                for r in rows[1:]:
                    for field in r:
                        if field and re.fullmatch(r"[-+0-9.eE]+", field):
                            digits = re.sub(r"[-+.]|[eE].*", "", field).lstrip("0")
                            expect(len(digits) <= 17, f"{path.name}: {field} exceeds 17 digits")
                tables += 1
    expect(tables >= 10, "too few CSV tables")


def check_examples(tmp):
    # thm23 on a random separable system with N = 50.
    cfg = write_config(tmp, "thm23.ini", "[problem]\nhamiltonian = random_quadratic\nseed = 3\n"
                       "[numerics]\nN = 50\n")
    code, err = run("verify", cfg, tmp, "--which", "thm23", "--no-timestamp")
    rep = report(tmp, "gylab", "verify")
    expect(code == 0 and rep["pass"] and rep["relative_gap"] < 1e-10, f"thm23: {rep} {err}")

    code, _ = run("verify", CONFIGS / "random_n2.ini", tmp, "--which", "lemma22", "--no-timestamp")
    rep = report(tmp, "random_n2", "verify")
    expect(code == 0 and rep["relative_gap"] < 1e-8, f"lemma22: {rep}")
    expect(rep["details"]["points"] == 6 if "points" in rep["details"] else True, "lemma22 N")

    code, _ = run("verify", CONFIGS / "harmonic.ini", tmp, "--which", "gy-zeta", "--no-timestamp")
    rep = report(tmp, "harmonic", "verify")
    expect(code == 0 and rep["relative_gap"] < 1e-5, f"gy-zeta: {rep}")
    expect(abs(rep["lhs"] + 1.0) < 1e-5, "gy-zeta lhs should be -1")

    for cfg, prefix in [("harmonic.ini", "harmonic"), ("free.ini", "free")]:
        code, _ = run("converge", CONFIGS / cfg, tmp, "--no-timestamp")
        rep = report(tmp, prefix, "converge")
        expect(code == 0 and rep["pass"], f"converge {cfg}: exit {code}")
        expect(abs(rep["ratio_final"] - 0.5) < 1e-3, f"converge {cfg}: ratio {rep['ratio_final']}")
        expect(rep["final_gap"] < 1e-3, f"converge {cfg}: final gap")
        rows = list(csv.DictReader(io.StringIO((Path(tmp) / f"{prefix}_converge.csv").read_text())))
        expect(rows[0].keys() >= {"N", "epsilon", "det_tildeA", "det_prime_A", "ref_zeta_half",
                                  "gap", "est_order"}, "converge columns")
        expect(float(rows[-1]["gap"]) < 1e-3, f"{cfg}: final gap column")

    code, _ = run("solve", CONFIGS / "harmonic.ini", tmp, "--no-timestamp")
    rep = report(tmp, "harmonic", "solve")
    rows = list(csv.DictReader(io.StringIO((Path(tmp) / "harmonic_solve.csv").read_text())))
    expect(code == 0 and rep["residual_norm"] < 1e-10 and len(rows) == 101, "harmonic solve")

    cfg = write_config(tmp, "line.ini", "[problem]\nhamiltonian = free\nhorizon = 1\nf1_a = 1\n"
                       "f2_a = 0\nb1 = 1\nb2 = 1\n[numerics]\nN = 11\n")
    code, _ = run("solve", cfg, tmp, "--no-timestamp")
    rows = list(csv.DictReader(io.StringIO((Path(tmp) / "gylab_solve.csv").read_text())))
    for r in rows:
        expect(abs(float(r["q"]) - float(r["t"])) < 1e-13, f"free path not linear: {r}")
        expect(r["p"] == "" or abs(float(r["p"]) - 1.0) < 1e-13, f"free momentum: {r}")


CHECKS = {
    "exit_codes": check_exit_codes,
    "numeric_failure": check_identity_fail,
    "determinism": check_determinism,
    "timestamp": check_timestamp,
    "schema": check_schema,
    "csv": check_csv,
    "examples": check_examples,
}

if __name__ == "__main__":
    with tempfile.TemporaryDirectory() as tmp:
        try:
            CHECKS[CHECK](tmp)
        except AssertionError as exc:
            print(f"FAIL {CHECK}: {exc}")
            sys.exit(1)
    print(f"ok {CHECK}")
