"""{Nearest-neighbour tour from city 0, then score each city by the detour its removal saves.}"""
import math


def _d(c, a, b):
    return math.floor(math.hypot(c[a][0] - c[b][0], c[a][1] - c[b][1]) + 0.5)


# native: construct=nearest_neighbor
def _init_solution(instance: dict) -> dict:
    c = instance["coords"]
    n = len(c)
    tour = [0]
    left = set(range(1, n))
    while left:
        cur = tour[-1]
        nxt = min(sorted(left), key=lambda j: _d(c, cur, j))
        tour.append(nxt)
        left.remove(nxt)
    return {"tour": tour}


# native: score=removal_gain
def heuristic(instance: dict, solution: dict) -> list:
    c = instance["coords"]
    t = solution["tour"]
    m = len(t)
    scores = [0.0] * len(c)
    if m < 3:
        return scores
    for i, city in enumerate(t):
        a, b = t[i - 1], t[(i + 1) % m]
        scores[city] = float(_d(c, a, city) + _d(c, city, b) - _d(c, a, b))
    return scores
