import numpy as np


def _init_solution(instance: dict) -> dict:
    """Constructive heuristic.

    instance: {"name": str, "vehicle_count": int, "capacity": int,
               "nodes": [{"id", "x", "y", "demand", "tw_open", "tw_close", "service",
                          "pickup", "delivery"}, ...],   # node 0 is the depot
               "requests": [[pickup_id, delivery_id], ...]}
    Returns {"routes": [[node_id, ...], ...]} without the depot at either end.
    """
    return {"routes": [[p, d] for p, d in instance["requests"]]}


def heuristic(instance: dict, solution: dict) -> list:
    """Scores every request (decision variable), in the order of instance["requests"].

    Requests with higher scores are more likely to be removed and re-inserted.
    Returns a list of floats with len(instance["requests"]) entries.
    """
    return [1.0 for _ in instance["requests"]]
