"""{Cheapest feasible insertion in order of pickup opening time, then score each request by the penalized cost its removal saves.}"""
import math

PENALTY = 100000.0


def _route_cost(instance, route):
    if not route:
        return 0.0
    nodes = instance["nodes"]
    cap = instance["capacity"]
    dist = 0.0
    bad = 0
    t = 0.0
    load = 0
    prev = 0
    seen = set()
    for nid in route:
        v = nodes[nid]
        leg = math.hypot(nodes[prev]["x"] - v["x"], nodes[prev]["y"] - v["y"])
        dist += leg
        if t + leg > v["tw_close"] + 1e-9:
            bad += 1
        t = max(t + leg, v["tw_open"]) + v["service"]
        load += v["demand"]
        if load > cap:
            bad += 1
        if v["pickup"] and v["pickup"] not in seen and v["pickup"] in route:
            bad += 1
        seen.add(nid)
        prev = nid
    back = math.hypot(nodes[prev]["x"] - nodes[0]["x"], nodes[prev]["y"] - nodes[0]["y"])
    dist += back
    if t + back > nodes[0]["tw_close"] + 1e-9:
        bad += 1
    return dist + PENALTY * bad


def _insert(instance, routes, p, d):
    used = sum(1 for r in routes if r)
    best = (_route_cost(instance, [p, d]) + (PENALTY if used >= instance["vehicle_count"] else 0.0), None, 0, 0)
    for k, r in enumerate(routes):
        if not r:
            continue
        base = _route_cost(instance, r)
        for i in range(len(r) + 1):
            for j in range(i, len(r) + 1):
                cand = r[:i] + [p] + r[i:j] + [d] + r[j:]
                delta = _route_cost(instance, cand) - base
                if delta < best[0]:
                    best = (delta, k, i, j)
    _, k, i, j = best
    if k is None:
        routes.append([p, d])
    else:
        r = routes[k]
        routes[k] = r[:i] + [p] + r[i:j] + [d] + r[j:]


# native: construct=cheapest_insertion
def _init_solution(instance: dict) -> dict:
    order = sorted(instance["requests"], key=lambda pd: instance["nodes"][pd[0]]["tw_open"])
    routes = []
    for p, d in order:
        _insert(instance, routes, p, d)
    return {"routes": routes}


# native: score=removal_gain
def heuristic(instance: dict, solution: dict) -> list:
    routes = solution["routes"]
    costs = [_route_cost(instance, r) for r in routes]
    scores = []
    for p, d in instance["requests"]:
        gain = 0.0
        present = False
        for k, r in enumerate(routes):
            if p in r or d in r:
                present = True
                gain += costs[k] - _route_cost(instance, [n for n in r if n != p and n != d])
        scores.append(gain if present else 2.0 * PENALTY)
    return scores
