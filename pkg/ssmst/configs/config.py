import os
import json
from fractions import Fraction

config_path = os.path.join(os.path.dirname(os.path.realpath(__file__)), "defaults.json")


def singleton(cls):
    instances = {}

    def get_instance(*args, **kwargs):
        if cls not in instances:
            instances[cls] = cls(*args, **kwargs)
        return instances[cls]

    return get_instance


@singleton
class Config:
    def __init__(self):
        self.json_config = self.load_config_json()
        self.alpha = Fraction(str(self.json_config["alpha"]))
        self.round_budget = int(self.json_config["round_budget"])
        self.budget_constant_c = int(self.json_config["budget_constant_c"])
        self.polynomial_weights = bool(self.json_config["polynomial_weights"])
        self.fleet_jobs = int(self.json_config["fleet_jobs"])
        self.trace_dump = bool(self.json_config["trace_dump"])

    def load_config_json(self) -> dict:
        with open(config_path, "r") as f:
            return json.load(f)

    def round_budget_for(self, n: int) -> int:
        """
        Round budget used by acceptance runs: C * n^3, never above the global budget.
        """
        return min(self.round_budget, self.budget_constant_c * max(n, 2) ** 3)

    def set_alpha(self, alpha):
        alpha = Fraction(str(alpha))
        if alpha <= 0:
            raise ValueError("Invalid alpha. Must be a positive rational.")
        self.alpha = alpha
        return f"Memory cap constant set to {alpha}."
