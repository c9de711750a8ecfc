#!/usr/bin/env python3
# Copyright 2026 The tdco Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Convert MATPOWER .m cases into tdco JSON case files.

Usage: convert_matpower.py MATPOWER_DATA_DIR OUT_DIR

Reads the bus/gen/branch matrices with a small regex parser and applies the
unit conversions the .m files perform at load time (ohms to per-unit, kW to
MW, apparent power with a fixed power factor). Feeders get one DER per node;
the 39-bus system gets the dispatch cost coefficients used in the default
scenarios.
"""

import json
import math
import re
import sys
from collections import deque
from pathlib import Path

FEEDERS = ["case18", "case22", "case33bw", "case38si", "case69", "case85", "case141"]

# Quadratic cost coefficients of the nine controllable 39-bus units, in
# generator order (buses 30 to 38).
GEN_COSTS = [1.0, 1.5, 1.3, 1.7, 1.8, 1.0, 2.0, 0.8, 1.2]
SLACK_BUS = 39

# DER sizing relative to the node load, in MW / MVAr.
DER_P_FACTOR = 2.0
DER_P_FLOOR = 0.05
DER_Q_FACTOR = 1.0
DER_Q_FLOOR = 0.05
# Every DER costs p^2 + 0.1 q^2 in system per unit.
DER_A_P = 1.0
DER_A_Q = 0.1


def matrix(text, name):
    m = re.search(r"mpc\." + name + r"\s*=\s*\[(.*?)\];", text, re.S)
    if not m:
        raise ValueError(f"no mpc.{name} matrix")
    rows = []
    for line in m.group(1).splitlines():
        line = line.split("%")[0].strip().rstrip(";").strip()
        if line:
            rows.append([float(v) for v in line.split()])
    return rows


def scalar(text, name):
    return float(re.search(r"mpc\." + name + r"\s*=\s*([0-9.eE+-]+)\s*;", text).group(1))


def load(path):
    text = path.read_text()
    base = scalar(text, "baseMVA")
    bus = matrix(text, "bus")
    gen = matrix(text, "gen")
    branch = [b for b in matrix(text, "branch") if b[10] != 0]
    if "Vbase^2 / Sbase" in text:
        vbase = bus[0][9] * 1e3
        zbase = vbase**2 / (base * 1e6)
        for b in branch:
            b[2] /= zbase
            b[3] /= zbase
    if re.search(r"mpc\.bus\(:, \[PD, QD\]\) = mpc\.bus\(:, \[PD, QD\]\) / 1e3", text):
        for b in bus:
            b[2] /= 1e3
            b[3] /= 1e3
    pf = re.search(r"\npf = ([0-9.]+);", text)
    if pf:
        pf = float(pf.group(1))
        for b in bus:
            s = b[2]
            b[3] = s * math.sin(math.acos(pf))
            b[2] = s * pf
    return base, bus, gen, branch


def feeder(name, path):
    base, bus, gen, branch = load(path)
    ref = [int(b[0]) for b in bus if int(b[1]) == 3]
    if len(ref) != 1:
        raise ValueError(f"{name}: expected one reference bus")
    sub = ref[0]
    v0 = next((g[5] for g in gen if int(g[0]) == sub), 1.0)
    adj = {}
    for b in branch:
        f, t = int(b[0]), int(b[1])
        adj.setdefault(f, []).append((t, b))
        adj.setdefault(t, []).append((f, b))
    if len(branch) != len(bus) - 1:
        raise ValueError(f"{name}: not radial ({len(branch)} branches, {len(bus)} buses)")
    lines, seen, queue = [], {sub}, deque([sub])
    while queue:
        u = queue.popleft()
        for v, b in adj.get(u, []):
            if v in seen:
                continue
            seen.add(v)
            queue.append(v)
            lines.append({"from": u, "to": v, "r": b[2], "x": b[3]})
    nodes, ders = [], []
    for b in (x for x in bus if int(x[0]) != sub):
        nid = int(b[0])
        # Shunt conductance and susceptance at nominal voltage fold into the load.
        p_mw = b[2] + b[4]
        q_mvar = b[3] - b[5]
        nodes.append({"id": nid, "p_load": p_mw / base, "q_load": q_mvar / base})
        p_max = max(DER_P_FACTOR * max(p_mw, 0.0), DER_P_FLOOR) / base
        q_max = max(DER_Q_FACTOR * max(p_mw, 0.0), DER_Q_FLOOR) / base
        ders.append({"node": nid, "a_p": DER_A_P, "a_q": DER_A_Q,
                     "p_min": 0.0, "p_max": p_max, "q_min": -q_max, "q_max": q_max})
    return {"kind": "feeder", "name": name, "id": name, "base_mva": base,
            "substation": {"id": sub, "v0": v0}, "nodes": nodes, "lines": lines, "ders": ders}


def transmission(path):
    base, bus, gen, branch = load(path)
    buses = [{"id": int(b[0]), "p0": -(b[2]) / base} for b in bus]
    lines = [{"from": int(b[0]), "to": int(b[1])} for b in branch]
    units = [g for g in gen if int(g[0]) != SLACK_BUS]
    gens = []
    for k, (g, c) in enumerate(zip(units, GEN_COSTS), start=1):
        gens.append({"id": k, "bus": int(g[0]), "cost": c, "p_min": 0.0,
                     "p_max": g[8] / base, "p_init": g[1] / base})
    return {"kind": "transmission", "name": "case39", "base_mva": base,
            "slack_bus": SLACK_BUS, "buses": buses, "lines": lines, "generators": gens}


def main():
    src, out = Path(sys.argv[1]), Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    (out / "case39.json").write_text(json.dumps(transmission(src / "case39.m"), indent=1) + "\n")
    for name in FEEDERS:
        (out / f"{name}.json").write_text(json.dumps(feeder(name, src / f"{name}.m"), indent=1) + "\n")


if __name__ == "__main__":
    main()
