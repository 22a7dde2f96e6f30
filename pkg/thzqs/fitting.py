# -*- coding: utf-8 -*-
"""Levenberg-Marquardt least squares with an explicit iterate trace.

A trial step is accepted only when it lowers the cost, so the recorded
trace of accepted costs never increases.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from thzqs.exceptions import NotConverged


@dataclass
class FitOutcome:
    params: np.ndarray
    cost: float
    residuals: np.ndarray
    jacobian: np.ndarray
    iterations: int
    trace: list = field(default_factory=list)
    converged: bool = True


class LevenbergMarquardt:
    """Minimise ``sum(residuals(p)**2)`` given residuals and their Jacobian.

    ``residuals(p)`` returns a vector of length M and ``jacobian(p)`` an
    (M, N) matrix.  The damping factor is multiplied by ``scale`` after a
    rejected step and divided by it after an accepted one.
    """

    def __init__(self, residuals, jacobian, ftol=1e-10, xtol=1e-12, max_iterations=200, damping=1e-3, scale=10.0,
                 max_damping=1e16):
        self.residuals = residuals
        self.jacobian = jacobian
        self.ftol = ftol
        self.xtol = xtol
        self.max_iterations = max_iterations
        self.damping = damping
        self.scale = scale
        self.max_damping = max_damping

    def _trial(self, params, gradient, normal, damping):
        diagonal = np.maximum(np.diag(normal), np.finfo(float).tiny)
        try:
            step = linalg.solve(normal + damping * np.diag(diagonal), -gradient, assume_a="sym")
        except (linalg.LinAlgError, ValueError):
            return None, None, np.inf
        candidate = params + step
        residuals = self.residuals(candidate)
        cost = float(residuals @ residuals)
        return step, candidate, cost if np.isfinite(cost) else np.inf

    def solve(self, start):
        params = np.asarray(start, dtype=float).copy()
        residuals = self.residuals(params)
        cost = float(residuals @ residuals)
        if not np.isfinite(cost):
            raise NotConverged("cost is not finite at the starting point", [cost])
        trace = [cost]
        damping = self.damping
        for iteration in range(1, self.max_iterations + 1):
            jacobian = self.jacobian(params)
            if cost == 0.0:
                return FitOutcome(params, cost, residuals, jacobian, iteration - 1, trace)
            gradient = jacobian.T @ residuals
            normal = jacobian.T @ jacobian
            while True:
                step, candidate, new_cost = self._trial(params, gradient, normal, damping)
                if new_cost < cost:
                    break
                damping *= self.scale
                if damping > self.max_damping:
                    # no downhill step left at any damping: the current point is the minimum
                    return FitOutcome(params, cost, residuals, jacobian, iteration - 1, trace)
            reduction = cost - new_cost
            step_norm = float(np.linalg.norm(step))
            params, cost = candidate, new_cost
            residuals = self.residuals(params)
            trace.append(cost)
            damping = max(damping / self.scale, 1e-300)
            if reduction <= self.ftol * trace[-2] or step_norm <= self.xtol * (float(np.linalg.norm(params)) + self.xtol):
                return FitOutcome(params, cost, residuals, self.jacobian(params), iteration, trace)
        raise NotConverged(f"no convergence after {self.max_iterations} iterations (cost {cost:.6g})", trace)
