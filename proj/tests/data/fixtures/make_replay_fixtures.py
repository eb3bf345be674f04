"""Writes the hand-authored replay logs used by the end-to-end tests.

Responses carry `# native:` directives so the native harness can run them.
"""
import json
from pathlib import Path

HERE = Path(__file__).parent

PD_BODY = {
    "cheapest_insertion": '''    order = sorted(instance["requests"], key=lambda pd: instance["nodes"][pd[0]]["tw_open"])
    routes = []
    for p, d in order:
        _insert(instance, routes, p, d)
    return {"routes": routes}''',
    "route_per_request": '''    return {"routes": [[p, d] for p, d in instance["requests"]]}''',
}
PD_SCORE = {
    "removal_gain": '''    routes = solution["routes"]
    return [_removal_gain(instance, routes, p, d) for p, d in instance["requests"]]''',
    "uniform": '''    return [1.0 for _ in instance["requests"]]''',
    "window_tightness": '''    nodes = instance["nodes"]
    return [1.0 / (1.0 + nodes[p]["tw_close"] - nodes[p]["tw_open"]) for p, _ in instance["requests"]]''',
}
TSP_BODY = {
    "nearest_neighbor": '''    coords = instance["coords"]
    tour = [0]
    left = set(range(1, len(coords)))
    while left:
        last = coords[tour[-1]]
        nxt = min(left, key=lambda c: math.dist(last, coords[c]))
        tour.append(nxt)
        left.remove(nxt)
    return {"tour": tour}''',
    "identity": '''    return {"tour": list(range(len(instance["coords"])))}''',
}
TSP_SCORE = {
    "removal_gain": '''    coords = instance["coords"]
    t = solution["tour"]
    n = len(t)
    scores = [0.0] * n
    for i, c in enumerate(t):
        a, b = coords[t[i - 1]], coords[t[(i + 1) % n]]
        scores[c] = math.dist(a, coords[c]) + math.dist(coords[c], b) - math.dist(a, b)
    return scores''',
    "uniform": '''    return [1.0] * len(instance["coords"])''',
}


def module(env, desc, construct, score, cons_fault=None, ref_fault=None):
    body = PD_BODY if env == "pdptw" else TSP_BODY
    scorer = PD_SCORE if env == "pdptw" else TSP_SCORE
    sol = "solution: dict" if env == "pdptw" else "solution: dict"
    head = f'"""{{{desc}}}"""\n' if desc else ""
    cons_tag = f"# native: construct={construct}" + (f" fault={cons_fault}" if cons_fault else "")
    ref_tag = f"# native: score={score}" + (f" fault={ref_fault}" if ref_fault else "")
    return (
        f"{head}import math\n\n\n"
        f"{cons_tag}\ndef _init_solution(instance: dict) -> dict:\n{body[construct]}\n\n\n"
        f"{ref_tag}\ndef heuristic(instance: dict, {sol}) -> list:\n{scorer[score]}\n"
    )


def reply(code, preface="Here is the revised heuristic."):
    return f"{preface}\n\n```python\n{code}```\n"


def features(names, fault=None):
    tag = f"# native: fault={fault}\n" if fault else ""
    defs = "".join(f"def {n}(instance: dict, solution: dict) -> float:\n    return 0.0\n\n\n" for n in names)
    return f"```python\n{tag}import numpy as np\n\n\n{defs}feature_func_list = [{', '.join(names)}]\n```\n"


def entry(tag, content, completion=120):
    return {
        "tag": tag,
        "request": {"messages": [{"role": "user", "content": "(recorded prompt elided)"}], "temperature": 1.0,
                    "model": "fixture", "tag": tag},
        "response": {"content": content, "usage": {"prompt": 900, "completion": completion}, "latency_s": 0.0},
    }


def write(path, entries):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(json.dumps(e, sort_keys=True) + "\n" for e in entries))


def pdptw_log():
    m = lambda *a, **k: reply(module("pdptw", *a, **k))
    junk = "I would rather describe the idea in prose: remove the worst requests and reinsert them."
    e = [
        entry("0/generator/i1/0", m("One route per request, score by removal gain.", "route_per_request", "removal_gain")),
        entry("0/generator/i1/1", junk),
        entry("0/generator/i1/1r1", m("One route per request, uniform scores.", "route_per_request", "uniform")),
        entry("0/generator/i1/2", m(None, "route_per_request", "window_tightness")),
        entry("0/generator/i1/3", m("Singleton routes with a scorer that fails.", "route_per_request", "removal_gain", ref_fault="raise")),
        entry("0/analyst/propose/0", features(["route_count", "total_distance", "violation_count"])),
        # iteration 1: analyst needs a retry, then one repair
        entry("1/generator/e1/0", m("Tight windows first over singleton routes.", "route_per_request", "window_tightness")),
        entry("1/generator/e2/0", m("Uniform destroy over singleton routes.", "route_per_request", "uniform")),
        entry("1/generator/m1/0", m("Removal gain over one route per request.", "route_per_request", "removal_gain")),
        entry("1/analyst/propose/0", "The features should capture route structure."),
        entry("1/analyst/propose/0r1", features(["route_count", "late_node_fraction"], fault="raise")),
        entry("1/analyst/repair/0", features(["route_count", "tw_tightness", "capacity_utilization"])),
        # iteration 2: an operator that never parses, a non-finite feature
        entry("2/generator/e1/0", m("Removal gain, cheapest insertion, fixed order.", "cheapest_insertion", "removal_gain")),
        entry("2/generator/e2/0", junk),
        entry("2/generator/e2/0r1", junk),
        entry("2/generator/e2/0r2", junk),
        entry("2/generator/m1/0", m("Uniform scores on singleton routes.", "route_per_request", "uniform", cons_fault="raise")),
        entry("2/analyst/propose/0", features(["total_distance", "depot_spread", "nan_value"])),
        # iteration 3: repairs fail, the analyst reverts to the previous set
        entry("3/generator/e1/0", m("Window tightness over singleton routes.", "route_per_request", "window_tightness")),
        entry("3/generator/e2/0", m("Removal gain with cheapest insertion and a wider neighborhood.", "cheapest_insertion", "removal_gain")),
        entry("3/generator/m1/0", m("Uniform scores, cheapest insertion.", "cheapest_insertion", "uniform")),
        entry("3/analyst/propose/0", features(["route_count"], fault="raise")),
        entry("3/analyst/repair/0", features(["route_count"], fault="raise")),
        entry("3/analyst/repair/1", features(["route_count"], fault="raise")),
    ]
    write(HERE / "pdptw_replay" / "llm_log.jsonl", e)
    cfg = {
        "env": "pdptw",
        "instance_dir": "../../pdptw_tiny",
        "registry": "../../pdptw_tiny/best_known.tsv",
        "iterations": 3,
        "schedule": {"init": 4, "e1": 1, "e2": 1, "m1": 1},
        "survival": {"population_size": 4, "elite_count": 1, "beta": 5.0, "epsilon": 1e-6},
        "budget": {"lns_iterations": 1, "time_limit_s": 5.0},
        "penalty": 100000.0,
        "analyst_enabled": True,
        "analyst": {"max_features": 4, "feature_timeout_s": 2.0, "max_repairs": 2},
        "backend": "replay",
        "replay_log": "llm_log.jsonl",
        "master_seed": 11,
        "split_ratio": 0.5,
        "split_seed": 3,
        "harness_command": ["lago_native_harness"],
        "workers": 2,
        "llm": {"model": "fixture", "max_retries": 2},
    }
    (HERE / "pdptw_replay" / "config.json").write_text(json.dumps(cfg, indent=2) + "\n")


def tsp_log():
    m = lambda *a, **k: reply(module("tsp", *a, **k))
    e = [
        entry("0/generator/i1/0", m("Nearest neighbor start, removal-gain scores.", "nearest_neighbor", "removal_gain")),
        entry("0/generator/i1/1", m("Identity tour with uniform scores.", "identity", "uniform")),
        entry("1/generator/m1/0", m("Identity start, removal-gain scores.", "identity", "removal_gain")),
    ]
    write(HERE / "tsp_replay" / "llm_log.jsonl", e)
    cfg = {
        "env": "tsp",
        "instance_dir": "../../tsp",
        "registry": "../../tsp/best_known.tsv",
        "iterations": 1,
        "schedule": {"init": 2, "e1": 0, "e2": 0, "m1": 1},
        "survival": {"population_size": 2, "elite_count": 1},
        "budget": {"lns_iterations": 300, "time_limit_s": 5.0},
        "analyst_enabled": False,
        "backend": "replay",
        "replay_log": "llm_log.jsonl",
        "master_seed": 5,
        "split_ratio": 0.5,
        "split_seed": 1,
        "harness_command": ["lago_native_harness"],
    }
    (HERE / "tsp_replay" / "config.json").write_text(json.dumps(cfg, indent=2) + "\n")


if __name__ == "__main__":
    pdptw_log()
    tsp_log()
