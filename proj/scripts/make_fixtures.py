#!/usr/bin/env python3
"""Regenerate data/fixtures from the built gridsec binary.

Usage: scripts/make_fixtures.py [path/to/gridsec]
"""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "data" / "fixtures"
GRIDSEC = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "build" / "tools" / "gridsec"

# Baseline voltage magnitudes used for the stealth sweep.
SWEEP_V = {
    1: 1.061987, 2: 1.044446943, 3: 1.012590754, 4: 1.023762973, 5: 1.018577246,
    6: 1.069063452, 7: 1.067836384, 8: 1.093069739, 9: 1.054053823, 10: 1.053154865,
    11: 1.055052848, 12: 1.053325644, 13: 1.051349563, 14: 1.027876825,
}

# Net injections (MW) of the stored post-SE snapshot.
POSTSE_P = {1: 233.84, 2: 18.3, 3: -94.2, 4: -47.8, 5: -7.6, 6: -11.2, 7: 0.0, 8: 0.0,
            9: -29.5, 10: -9.0, 11: -3.5, 12: -6.1, 13: -13.5, 14: -14.9}
POSTSE_BUS = {  # bus: (V, theta_deg, Q injection)
    4: (0.9906, -10.93, 3.9),
    7: (1.0116, -14.22, None),
    9: (1.0071, -15.96, 2.7),
    13: (0.9996, -16.18, -5.8),
}
POSTSE_Q = {2: 27.4, 3: 46.9}
POSTSE_LOSSES = 14.84

DELTA_2A = {"buses": [
    {"bus": 4, "dv": 0.0073, "dtheta_deg": 1.89, "dp_mw": 95.6, "dq_mvar": -7.8},
    {"bus": 7, "dv": 0.0102, "dtheta_deg": 1.88},
    {"bus": 9, "dv": 0.0107, "dtheta_deg": -1.70, "dp_mw": 59.0, "dq_mvar": 13.9},
    {"bus": 13, "dv": 0.0157, "dtheta_deg": 2.19, "dp_mw": 27.0, "dq_mvar": 11.6},
]}


def run(*args):
    subprocess.run([str(GRIDSEC), *map(str, args)], check=True, stdout=subprocess.DEVNULL)


def read_record(path):
    rec = {"meta": [], "buses": {}, "branches": []}
    section = None
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            rec["meta"].append((key.strip(), val.strip()))
        elif line in ("[buses]", "[branches]"):
            section = line
        elif line.startswith("bus,") or line.startswith("from,"):
            continue
        elif section == "[buses]":
            b, v, t, p, q = line.split(",")
            rec["buses"][int(b)] = [float(v), float(t), float(p), float(q)]
        else:
            f, t, sf, st, p, q, loss = line.split(",")
            rec["branches"].append([int(f), int(t), sf, st, float(p), float(q), float(loss)])
    return rec


def fmt(x):
    return "0" if x == 0 else f"{x:.10g}"


def write_record(path, rec, source, origin, bdd_chi2=None, branches=True):
    lines = [f"# source: {source}", f"# origin: {origin}"]
    if bdd_chi2 is not None:
        lines.append(f"# bdd_chi2: {fmt(bdd_chi2)}")
    lines += ["[buses]", "bus,v_pu,theta_deg,p_mw,q_mvar"]
    for b in sorted(rec["buses"]):
        lines.append(",".join([str(b)] + [fmt(x) for x in rec["buses"][b]]))
    if branches and rec["branches"]:
        lines += ["[branches]", "from,to,status_from,status_to,p_mw,q_mvar,loss_mw"]
        for f, t, sf, st, p, q, loss in rec["branches"]:
            lines.append(",".join([str(f), str(t), sf, st, fmt(p), fmt(q), fmt(loss)]))
    Path(path).write_text("\n".join(lines) + "\n")


def scale_losses(rec, total, fixed):
    """Scale losses of branches not in `fixed` so the record sums to `total`."""
    pinned = sum(r[6] for r in rec["branches"] if (r[0], r[1]) in fixed)
    free = sum(r[6] for r in rec["branches"] if (r[0], r[1]) not in fixed)
    k = (total - pinned) / free
    for r in rec["branches"]:
        if (r[0], r[1]) not in fixed:
            r[6] *= k


def scenario1_baseline(base, overlays):
    rec = {"buses": {b: list(row) for b, row in base["buses"].items()}, "branches": []}
    for (bus, col), value in overlays.items():
        rec["buses"][bus][col] = value
    return rec


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        run("solve", "-o", tmp / "canonical.csv")
        base = read_record(tmp / "canonical.csv")

        # Sweep baseline: fixture voltages, injections re-evaluated at that state.
        sweep = read_record(tmp / "canonical.csv")
        for b, v in SWEEP_V.items():
            sweep["buses"][b][0] = v
        write_record(tmp / "sweep_state.csv", sweep, "sweep", "post_se")
        run("solve", "--state", tmp / "sweep_state.csv", "-o", tmp / "sweep.csv")
        write_record(OUT / "sweep_baseline.csv", read_record(tmp / "sweep.csv"),
                     "sweep", "measurements", branches=False)

        # Scenario 1: bus channels only, recorded chi-square values.
        V, P = 0, 2
        s1a = scenario1_baseline(base, {(2, V): 1.045, (3, V): 1.0100, (3, P): -93.99,
                                        (6, V): 1.0711, (9, P): -29.37, (11, V): 1.0552})
        write_record(OUT / "s1a_baseline.csv", s1a, "scenario-1a-baseline", "measurements", 42.8)
        run("attack", "1a", "--record", OUT / "s1a_baseline.csv",
            "--apply", tmp / "s1a.csv", "-o", tmp / "s1a.json")
        write_record(OUT / "s1a_attacked.csv", read_record(tmp / "s1a.csv"),
                     "scenario-1a", "measurements", 42.8)

        s1b = scenario1_baseline(base, {(2, V): 1.0466, (2, P): 21.63, (4, V): 1.0176,
                                        (4, P): -48.09, (6, V): 1.0719, (9, P): -29.60,
                                        (11, V): 1.0594, (13, P): -13.16})
        write_record(OUT / "s1b_baseline.csv", s1b, "scenario-1b-baseline", "measurements", 67.3)
        run("--seed", 42, "attack", "1b", "--noise", "--record", OUT / "s1b_baseline.csv",
            "--apply", tmp / "s1b.csv", "-o", tmp / "s1b.json")
        write_record(OUT / "s1b_attacked.csv", read_record(tmp / "s1b.csv"),
                     "scenario-1b", "measurements", 67.3)

        # Stored post-SE snapshot shared by scenarios 2A-2D.
        post = read_record(tmp / "canonical.csv")
        for b, p in POSTSE_P.items():
            post["buses"][b][2] = p
        for b, q in POSTSE_Q.items():
            post["buses"][b][3] = q
        for b, (v, t, q) in POSTSE_BUS.items():
            post["buses"][b][0] = v
            post["buses"][b][1] = t
            if q is not None:
                post["buses"][b][3] = q
        for r in post["branches"]:
            if (r[0], r[1]) == (2, 4):
                r[4], r[5], r[6] = 56.1, -15.8, 1.68
        scale_losses(post, POSTSE_LOSSES, {(2, 4)})
        write_record(OUT / "postse_baseline.csv", post, "post-se-baseline", "post_se")

        (OUT / "scenario_2a_delta.json").write_text(json.dumps(DELTA_2A, indent=2) + "\n")
        run("attack", "post-se", "--record", OUT / "postse_baseline.csv",
            "--delta", OUT / "scenario_2a_delta.json", "-o", OUT / "scenario_2a.csv")

        s2b = read_record(OUT / "postse_baseline.csv")
        for r in s2b["branches"]:
            if (r[0], r[1]) == (2, 3):
                r[2:] = ["Opened", "Opened", 0.0, 0.0, 0.0]
        scale_losses(s2b, 28.78, {(2, 3)})
        s2b["buses"][1][2] = 247.78
        s2b["buses"][4][0] = 0.9765
        s2b["buses"][5][0] = 0.9792
        s2b["buses"][3][1] = -27.20
        s2b["buses"][14][1] = -21.90
        s2b["buses"][2][3] = 38.7
        s2b["buses"][3][3] = 75.5
        write_record(OUT / "scenario_2b.csv", s2b, "scenario-2b", "post_se")

        s2c = read_record(OUT / "postse_baseline.csv")
        for r in s2c["branches"]:
            r[2:] = ["Opened", "Opened", 0.0, 0.0, 0.0]
        for row in s2c["buses"].values():
            row[2] = row[3] = 0.0
        write_record(OUT / "scenario_2c.csv", s2c, "scenario-2c", "post_se")

        run("attack", "topology", "--record", OUT / "postse_baseline.csv",
            "--flip", "2-4", "-o", OUT / "scenario_2d.csv")


if __name__ == "__main__":
    main()
