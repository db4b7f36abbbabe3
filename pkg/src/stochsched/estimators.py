"""Estimator-style wrapper around the pipelines.

``fit`` forms the bags for a job set and scenario distribution, and
``predict`` maps jobs to machines once the machine count is known::

    >>> from stochsched import TwoStageScheduler
    >>> est = TwoStageScheduler(objective="makespan").fit([3, 2, 2, 1], q=["1/2", "1/2"])
    >>> est.predict([1, 2]).tolist()
    [[0, 0, 0, 0], [0, 1, 1, 0]]
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_distribution, check_jobs, check_scenarios
from .baselines import identical_machines_best
from .model import Instance, TwoStageSolution, expected_cost
from .rounding import check_epsilon
from .schemes import Budgets, solve
from .serialize import objective_from_name


class TwoStageScheduler(BaseEstimator):
    """Bags now, machines later.

    Parameters
    ----------
    objective : {"makespan", "santa", "lp"}
        Per-scenario objective; ``lp`` uses exponent ``p``.
    p : int, str or Fraction
        Norm exponent, only read for ``objective="lp"``.
    epsilon : str or Fraction
        Accuracy ``1/E`` with ``E >= 5``.
    ip_nodes, exact_nodes : int
        Search budgets of the feasibility program and of exact bag
        scheduling.
    max_profiles : int
        Bound histograms handed to the integer program per guess.
    allow_float : bool
        Accept float inputs at their exact binary value.

    Attributes
    ----------
    bag_of_ : ndarray of shape (n_jobs,)
        Bag of every job.
    bag_sizes_ : list of Fraction
        Total size of every bag.
    report_ : RunReport
        Full pipeline report.
    cost_ : Fraction or float
        Expected cost of the fitted solution under the training ``q``.
    """

    def __init__(
        self,
        objective: str = "makespan",
        p=2,
        epsilon="1/5",
        ip_nodes: int = 10**6,
        exact_nodes: int = 10**6,
        max_profiles: int = 1,
        allow_float: bool = False,
    ):
        self.objective = objective
        self.p = p
        self.epsilon = epsilon
        self.ip_nodes = ip_nodes
        self.exact_nodes = exact_nodes
        self.max_profiles = max_profiles
        self.allow_float = allow_float

    def _objective(self):
        return objective_from_name(self.objective, self.p if self.objective == "lp" else None)

    def fit(self, X, y=None, *, q):
        """Form bags for the jobs ``X`` under scenario distribution ``q``.

        ``q[k-1]`` is the probability of ``k`` machines; its length is the
        number of bags. ``y`` is ignored.
        """
        jobs = check_jobs(X, allow_float=self.allow_float)
        probs = check_distribution(q, allow_float=self.allow_float)
        eps = check_epsilon(Fraction(self.epsilon), 5)
        objective = self._objective()
        instance = Instance(jobs, len(probs), probs)
        budgets = Budgets(ip_nodes=self.ip_nodes, exact_nodes=self.exact_nodes, max_profiles=self.max_profiles)
        report = solve(instance, objective, eps, budgets)
        self.instance_ = instance
        self.objective_ = objective
        self.report_ = report
        self.solution_ = report.solution
        self.bag_of_ = np.asarray(report.solution.bags.bag_of, dtype=np.int64)
        self.bag_sizes_ = report.solution.bags.bag_sizes(jobs)
        self.cost_ = report.cost
        self.n_jobs_ = len(jobs)
        self.n_bags_ = instance.m
        return self

    def _scenario(self, k: int):
        got = self.solution_.per_scenario.get(k)
        if got is None:
            got = identical_machines_best(self.bag_sizes_, k, self.objective_, self.exact_nodes).assignment
        return got

    def predict(self, ks):
        """Job-to-machine maps, one row per machine count in ``ks``."""
        check_is_fitted(self, "bag_of_")
        ks = check_scenarios(ks, self.n_bags_)
        rows = []
        for k in ks:
            machine_of = np.asarray(self._scenario(k).machine_of, dtype=np.int64)
            rows.append(machine_of[self.bag_of_])
        return np.vstack(rows)

    def predict_bags(self, ks):
        """Bag-to-machine maps, one row per machine count in ``ks``."""
        check_is_fitted(self, "bag_of_")
        ks = check_scenarios(ks, self.n_bags_)
        return np.vstack([np.asarray(self._scenario(k).machine_of, dtype=np.int64) for k in ks])

    def score(self, X=None, y=None, *, q=None):
        """Signed expected cost of the fitted bags, larger is better.

        The negated cost for makespan and norms, the value itself for Santa
        Claus. ``q`` re-weights the scenarios (default: the training
        distribution); ``X``, when given, must be the training jobs.
        """
        check_is_fitted(self, "bag_of_")
        if X is not None and check_jobs(X, allow_float=self.allow_float) != self.instance_.jobs:
            raise ValueError("score needs the jobs the bags were formed for")
        instance = self.instance_ if q is None else self.instance_.with_q(
            check_distribution(q, self.n_bags_, allow_float=self.allow_float)
        )
        per = {k: self._scenario(k) for k in instance.support}
        cost = expected_cost(instance, TwoStageSolution(self.solution_.bags, per), self.objective_)
        value = float(cost)
        return value if not self.objective_.minimize else -value
