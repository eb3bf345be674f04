import numpy as np


def mean_edge_length(instance: dict, solution: dict) -> float:
    xy = np.asarray(instance["coords"], dtype=float)[solution["tour"]]
    return float(np.mean(np.rint(np.linalg.norm(xy - np.roll(xy, -1, axis=0), axis=1))))


feature_func_list = [mean_edge_length]
