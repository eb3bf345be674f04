import numpy as np


def _init_solution(instance: dict) -> dict:
    """Constructive heuristic.

    instance: {"name": str, "coords": [[x, y], ...]}
    Returns {"tour": [city_index, ...]}, a permutation of range(len(coords)).
    """
    return {"tour": list(range(len(instance["coords"])))}


def heuristic(instance: dict, solution: dict) -> list:
    """Scores every city (decision variable) in index order.

    Cities with higher scores are more likely to be removed and re-inserted.
    Returns a list of floats with len(instance["coords"]) entries.
    """
    return [1.0 for _ in instance["coords"]]
