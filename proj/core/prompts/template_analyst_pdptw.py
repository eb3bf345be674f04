import numpy as np


def route_count(instance: dict, solution: dict) -> float:
    return float(sum(1 for r in solution["routes"] if r))


feature_func_list = [route_count]
