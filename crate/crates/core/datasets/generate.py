#!/usr/bin/env python3
"""Regenerates the partially synthetic problem files in this directory.

Structure (ids, hierarchy, interactions, bounds, objectives) follows the
published case descriptions. Raw stakeholder estimates and efforts for these
cases were never published, so they are drawn from a seeded RNG and marked as
synthetic in each file's metadata. concise.json is hand-written and not
touched here.

Usage: python3 generate.py [output-dir]
"""

import json
import random
import sys
from pathlib import Path

SEED = 20240611


def synthetic(description, seed, **extra):
    meta = {
        "description": description,
        "completeness": "structure-only",
        "synthetic_values": True,
        "generator": {"script": "generate.py", "seed": seed},
    }
    meta.update(extra)
    return meta


def sources(rng, stakeholders, lo, hi, density=1.0):
    out = {}
    for s in stakeholders:
        if rng.random() < density:
            out[s] = rng.randint(lo, hi)
    return out or {stakeholders[0]: rng.randint(max(lo, 0), hi)}


def motorola():
    rng = random.Random(SEED + 1)
    stk = [f"expert{i}" for i in range(1, 5)]
    reqs = []
    for j in range(1, 41):
        reqs.append({
            "id": f"r{j}",
            "mandatory": j in (3, 11, 19, 27, 35),
            "attributes": {
                "value": sources(rng, stk, 0, 3, density=0.6),
                "effort": rng.randint(20, 370),
            },
        })
    # The 21% bound on the 35 decision requirements should come out near 1415.
    free = [r for r in reqs if not r["mandatory"]]
    total = sum(r["attributes"]["effort"] for r in free)
    for r in free:
        r["attributes"]["effort"] = max(1, round(r["attributes"]["effort"] * 6738 / total))
        r.pop("mandatory")
    return {
        "name": "motorola",
        "metadata": synthetic(
            "40 handset features, four experts, five regulatory requirements.",
            SEED + 1,
            reference={"greedy_front_size": 86, "bound_after_mandatory": 1415},
        ),
        "stakeholders": [{"id": s, "weight": 1} for s in stk],
        "requirements": reqs,
        "objectives": {"maximize": ["value"], "minimize": ["effort"]},
        "bounds": {"effort": {"kind": "upper", "fraction": 0.21}},
        "level": "leaf",
    }


def classic():
    rng = random.Random(SEED + 2)
    stk = [f"c{i}" for i in range(1, 6)]
    weights = [1, 4, 2, 3, 4]
    efforts = [rng.randint(1, 10) for _ in range(20)]
    # Keep the 25-unit bound near 30% of the total.
    scale = 83 / sum(efforts)
    efforts = [max(1, round(e * scale)) for e in efforts]
    reqs = [
        {"id": f"r{j}", "attributes": {"value": sources(rng, stk, 1, 5), "effort": efforts[j - 1]}}
        for j in range(1, 21)
    ]
    return {
        "name": "classic",
        "metadata": synthetic("20 requirements, five weighted customers, implications and combinations.", SEED + 2),
        "stakeholders": [{"id": s, "weight": w} for s, w in zip(stk, weights)],
        "requirements": reqs,
        "interactions": {
            "implies": [
                ["r4", "r8"], ["r4", "r17"], ["r8", "r17"], ["r9", "r3"], ["r9", "r6"],
                ["r9", "r12"], ["r9", "r19"], ["r11", "r19"],
            ],
            "combines": [["r3", "r12"], ["r11", "r13"]],
        },
        "objectives": {"maximize": ["value"], "minimize": ["effort"]},
        "bounds": {"effort": {"kind": "upper", "value": 25}},
        "level": "leaf",
    }


def mslite():
    rng = random.Random(SEED + 3)
    reqs = [
        {
            "id": f"r{j}",
            "attributes": {
                "value": rng.randint(1, 9),
                "penalty": rng.randint(2, 11),
                "effort": rng.randint(1, 5),
            },
        }
        for j in range(1, 17)
    ]
    implies = [
        ["r1", "r2"], ["r1", "r12"], ["r1", "r14"], ["r1", "r15"], ["r1", "r16"], ["r2", "r6"],
        ["r2", "r15"], ["r3", "r4"], ["r3", "r5"], ["r3", "r7"], ["r4", "r13"], ["r4", "r14"],
        ["r6", "r7"], ["r8", "r1"], ["r8", "r2"], ["r8", "r3"], ["r8", "r4"], ["r8", "r5"],
        ["r8", "r6"], ["r8", "r7"], ["r8", "r15"],
    ]
    return {
        "name": "mslite",
        "metadata": synthetic("16 building-automation user stories with directly estimated attributes.", SEED + 3),
        "requirements": reqs,
        "interactions": {"implies": implies},
        "objectives": {"maximize": ["value"], "minimize": ["penalty", "effort"]},
        "bounds": {"effort": {"kind": "upper", "value": 21}},
        "level": "leaf",
    }


def ralic():
    rng = random.Random(SEED + 4)
    stk = [f"s{i}" for i in range(1, 77)]
    roots = list("abcdefghij")
    # Three levels with 10, 45 and 85 requirements.
    mids = [f"{roots[k % 10]}.{k // 10 + 1}" for k in range(45)]
    leaves = [f"{mids[k % 45]}.{k // 45 + 1}" for k in range(85)]
    reqs = []

    def rated():
        raters = rng.sample(stk, rng.randint(3, 12))
        return {s: rng.randint(-1, 5) for s in raters}

    for r in roots:
        reqs.append({"id": r, "attributes": {"value": rated(), "effort": rng.randint(1200, 3000)}})
    for m in mids:
        reqs.append({"id": m, "parent": m.split(".")[0], "attributes": {"value": rated(), "effort": rng.randint(150, 700)}})
    for leaf in leaves:
        parent = leaf.rsplit(".", 1)[0]
        reqs.append({"id": leaf, "parent": parent, "attributes": {"value": rated(), "effort": rng.randint(40, 300)}})
    influence = []
    for rater in stk:
        for ratee in rng.sample([s for s in stk if s != rater], 4):
            influence.append({"rater": rater, "ratee": ratee, "value": rng.randint(1, 8)})
    return {
        "name": "ralic",
        "metadata": synthetic(
            "Access-control replacement: 76 stakeholders, three refinement levels, weights from an influence network.",
            SEED + 4,
        ),
        "stakeholders": [{"id": s} for s in stk],
        "influence": influence,
        "default_weight": 1,
        "requirements": reqs,
        "objectives": {"maximize": ["value"], "minimize": ["effort"]},
        "bounds": {"effort": {"kind": "upper", "fraction": 0.5}},
        "level": "root",
    }


WORDPROC_GROUPS = {
    "file": [f"f{i}" for i in range(1, 13)],
    "edit": [f"e{i}" for i in range(1, 11)],
    "view": [f"v{i}" for i in range(1, 6)],
    "insert": [f"i{i}" for i in range(1, 6)],
    "format": [f"m{i}" for i in range(1, 6)],
    "tools": [f"t{i}" for i in range(1, 7)],
    "data": [f"d{i}" for i in range(1, 6)],
    "help": ["h1", "h2"],
}


def wordproc():
    rng = random.Random(SEED + 5)
    stk = [f"c{i}" for i in range(1, 5)]
    reqs = []
    for parent, children in WORDPROC_GROUPS.items():
        reqs.append({"id": parent, "attributes": {}})
        for c in children:
            reqs.append({
                "id": c,
                "parent": parent,
                "attributes": {
                    "value": sources(rng, stk, 0, 9),
                    "urgency": sources(rng, stk, 0, 9),
                    "effort": rng.randint(5, 52),
                },
            })
    leaves = [r for r in reqs if "parent" in r]
    # Scale efforts so a 709 bound is half of the total.
    total = sum(r["attributes"]["effort"] for r in leaves)
    for r in leaves:
        r["attributes"]["effort"] = max(1, round(r["attributes"]["effort"] * 1418 / total))
    drift = 1418 - sum(r["attributes"]["effort"] for r in leaves)
    leaves[0]["attributes"]["effort"] += drift
    f = lambda *xs: [list(x) for x in xs]
    implies = f(
        ("f1", "f4"), ("f1", "f5"), ("f1", "f6"), ("f1", "f8"), ("f1", "f9"), ("f1", "f10"), ("f1", "f11"),
        ("f1", "f12"), ("f1", "v2"), ("f1", "v3"), ("f1", "v4"), ("f1", "v5"), ("f1", "t1"), ("f1", "t2"),
        ("f2", "f3"), ("f2", "f6"), ("f2", "f7"), ("f2", "f9"), ("f2", "f10"), ("f2", "f11"), ("f2", "e1"),
        ("f2", "e2"), ("f2", "v2"), ("f2", "v3"), ("f2", "v4"), ("f2", "v5"), ("f2", "i1"), ("f2", "i2"),
        ("f2", "i3"), ("f3", "f12"), ("f4", "f12"), ("f5", "f12"), ("f6", "f12"), ("f7", "f10"), ("f7", "f12"),
        ("f8", "f9"), ("f8", "f12"), ("f9", "f12"), ("f10", "f12"), ("f11", "f12"), ("e7", "e5"), ("e8", "e9"),
        ("v2", "f9"), ("v5", "v2"), ("v5", "v3"), ("i1", "i4"), ("i1", "i5"), ("i2", "i4"), ("i2", "i5"),
        ("m1", "m2"), ("m1", "m3"), ("m1", "m4"), ("m1", "m5"), ("m2", "m5"), ("m3", "m5"), ("m4", "m5"),
        ("t1", "t2"), ("t2", "t3"), ("t6", "t1"), ("t6", "t2"), ("t6", "t3"), ("t6", "t4"), ("t6", "t5"),
    )
    combines = f(
        ("f2", "f4"), ("f4", "f5"), ("e3", "e4"), ("e3", "e5"), ("e4", "e5"), ("v5", "i1"),
        ("d1", "d2"), ("d1", "d3"), ("d2", "d3"), ("h1", "h2"),
    )
    value = [
        {"attribute": "effort", "requirements": m, "mode": "multiplicative", "amount": a}
        for m, a in [
            (["e3", "e4", "e5", "e6", "e7", "e10"], 1.4),
            (["e1", "e3", "e4", "e5", "e8", "e9"], 1.4),
            (["v1", "v2", "v3"], 1.3),
            (["i3", "i5"], 1.2),
            (["t1", "t2", "t3"], 1.3),
            (["t4", "t5"], 1.25),
            (["d1", "d4", "d5"], 1.3),
        ]
    ]
    return {
        "name": "wordproc",
        "metadata": synthetic(
            "Word-processor feature backlog, 50 leaf requirements under 8 menus, four weighted stakeholders.",
            SEED + 5,
            reference={"hillclimb_front_size": 133},
        ),
        "stakeholders": [{"id": s, "weight": w} for s, w in zip(stk, [9, 3, 5, 7])],
        "requirements": reqs,
        "interactions": {"implies": implies, "combines": combines, "value": value},
        "objectives": {"maximize": ["value", "urgency"], "minimize": ["effort"]},
        "bounds": {"effort": {"kind": "upper", "value": 709}},
        "level": "leaf",
    }


THEME_GROUPS = {
    "feat": [f"a{i}" for i in range(1, 6)],
    "planning": [f"b{i}" for i in range(1, 6)],
    "anal": [f"c{i}" for i in range(1, 5)],
    "imp-exp": [f"d{i}" for i in range(1, 6)],
    "ana-plan": [f"e{i}" for i in range(1, 7)],
}

EFFORT_COMPONENTS = ["backend", "frontend", "testing", "management", "qa", "analysis"]


def theme():
    rng = random.Random(SEED + 6)
    stk = [f"c{i}" for i in range(1, 10)]
    reqs = []
    for parent, children in THEME_GROUPS.items():
        reqs.append({"id": parent, "attributes": {}})
        for c in children:
            reqs.append({
                "id": c,
                "parent": parent,
                "attributes": {
                    "value": sources(rng, stk, 1, 9),
                    "penalty": sources(rng, stk, 1, 9),
                    "volatility": sources(rng, stk, 1, 9),
                    "frequency_of_use": sources(rng, stk, 0, 8),
                    "effort": {"categories": {k: rng.randint(30, 160) for k in EFFORT_COMPONENTS}},
                    "price": rng.randint(5, 40) * 10,
                },
            })
    return {
        "name": "theme",
        "metadata": synthetic(
            "Theme-based release planning tool, 25 low-level requirements under five themes, nine customers.",
            SEED + 6,
        ),
        "stakeholders": [{"id": s, "weight": rng.randint(1, 5)} for s in stk],
        "requirements": reqs,
        "interactions": {
            "implies": [
                ["c1", "c3"], ["d2", "d1"], ["d2", "d3"], ["d2", "d4"], ["d2", "d5"], ["e1", "d5"],
                ["e2", "d5"], ["e3", "d5"], ["e4", "d5"], ["e5", "d5"], ["e6", "d5"],
            ],
            "combines": [["a4", "a5"], ["a3", "a4"], ["a3", "a5"], ["b2", "e1"]],
        },
        "objectives": {
            "maximize": ["value", "frequency_of_use"],
            "minimize": ["penalty", "price", "volatility", "effort"],
        },
        "bounds": {
            "price": {"kind": "upper", "value": 4800},
            "effort": {"kind": "upper", "value": 8604},
        },
        "level": "leaf",
    }


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
    for build in (motorola, classic, mslite, ralic, wordproc, theme):
        doc = build()
        (out / f"{doc['name']}.json").write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
