"""
Benchmark Scheduler
Log-transformed upper-bound power/SINR allocation problem, solved locally with an
augmented Lagrangian (LANCELOT update rules, bound-constrained L-BFGS-B inner solves)
and multi-start. Solutions convert to envelope (g) and discrete MCS (f) rates.
"""
import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp, softmax

from ..errors import ContractViolation, SolverInfeasibleError
from ..link.adaptation import LOG10_E, McsTable, build_tables, device_levels, device_rates
from ..link.technology import EPSILON_P_W, P_MAX_W, Technology
from ..network.channel import Realization

logger = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITER = "max_iter"
INFEASIBLE = "infeasible"


@dataclass
class SolverParams:
    """Settings of the local benchmark solve."""

    starts: int = 8
    max_iter: int = 5000
    tol: float = 1e-6
    seed: int = 0
    penalty0: float = 10.0
    tau: float = 10.0
    max_outer: int = 30


@dataclass
class TransformedProblem:
    """
    Log-domain benchmark problem for one (realization, timeslot).

    Variables are x = [P' (N*S), gamma' (N*S)] in device-major order. Every constraint is
    written as c(x) <= 0: per-device power budget (LSE), per-device and per-sub-carrier
    exclusivity sums, and per-(device, sub-carrier) SINR coupling. The per-sub-carrier sum
    runs over the devices of every cell against (|I_b| - 1) log eps_p, |I_b| being the
    largest cell; one device per (cell, sub-carrier) is restored when the support is cleaned.
    """

    gains: np.ndarray
    cell_ids: np.ndarray
    techs: List[Technology]
    sc_count: int
    noise_w: float
    log_gamma_max: np.ndarray
    log_gamma_floor: float
    p_max: float = P_MAX_W
    eps_p: float = EPSILON_P_W

    def __post_init__(self):
        n = self.num_devices
        idx = np.arange(n)
        self.serving = self.gains[idx, self.cell_ids]
        # cross[i, j] = gain of device j at the site serving device i, zero on the diagonal
        self.cross = self.gains[:, self.cell_ids].T.copy()
        self.cross[idx, idx] = 0.0
        self.cells = np.unique(self.cell_ids)
        self.cell_sizes = np.array([np.count_nonzero(self.cell_ids == b) for b in self.cells])

    @property
    def num_devices(self) -> int:
        return self.gains.shape[0]

    @property
    def num_vars(self) -> int:
        return 2 * self.num_devices * self.sc_count

    @property
    def log_eps_p(self) -> float:
        return math.log(self.eps_p)

    def split(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        shape = (self.num_devices, self.sc_count)
        half = self.num_devices * self.sc_count
        return x[:half].reshape(shape), x[half:].reshape(shape)

    def join(self, log_p: np.ndarray, log_gamma: np.ndarray) -> np.ndarray:
        return np.concatenate([np.ravel(log_p), np.ravel(log_gamma)])

    def bounds(self) -> List[Tuple[float, float]]:
        half = self.num_devices * self.sc_count
        p_bounds = [(self.log_eps_p, math.log(self.p_max))] * half
        g_upper = np.repeat(self.log_gamma_max, self.sc_count)
        g_bounds = [(self.log_gamma_floor, float(u)) for u in g_upper]
        return p_bounds + g_bounds

    def constraint_counts(self) -> Dict[str, int]:
        n, s = self.num_devices, self.sc_count
        return {"budget": n, "device_exclusive": n, "sc_exclusive": s, "coupling": n * s}

    def interference(self, log_p: np.ndarray) -> np.ndarray:
        """(N, S) interference at each device's serving site from every other device."""
        return self.cross @ np.exp(log_p)

    def objective(self, x: np.ndarray) -> float:
        """Sum over devices of LSE over sub-carriers of log10(e) * gamma' (to maximize)."""
        _, log_gamma = self.split(x)
        return float(logsumexp(LOG10_E * log_gamma, axis=1).sum())

    def objective_grad(self, x: np.ndarray) -> np.ndarray:
        _, log_gamma = self.split(x)
        return self.join(np.zeros_like(log_gamma), LOG10_E * softmax(LOG10_E * log_gamma, axis=1))

    def constraints(self, x: np.ndarray) -> np.ndarray:
        log_p, log_gamma = self.split(x)
        budget = logsumexp(log_p, axis=1) - math.log(self.p_max)
        device_excl = log_p.sum(axis=1) - (self.sc_count - 1) * self.log_eps_p
        sc_excl = log_p.sum(axis=0) - (self.cell_sizes.max() - 1) * self.log_eps_p
        coupling = (
            log_gamma
            - log_p
            - np.log(self.serving)[:, None]
            + np.log(self.noise_w + self.interference(log_p))
        )
        return np.concatenate([budget, device_excl, sc_excl, coupling.ravel()])

    def constraints_vjp(self, x: np.ndarray, weights: np.ndarray) -> np.ndarray:
        """Gradient of weights . c(x) with respect to x."""
        log_p, _ = self.split(x)
        n, s = log_p.shape
        w_budget = weights[:n]
        w_device = weights[n:2 * n]
        w_sc = weights[2 * n:2 * n + s]
        w_coupling = weights[2 * n + s:].reshape(n, s)

        power = np.exp(log_p)
        grad_p = w_budget[:, None] * softmax(log_p, axis=1)
        grad_p += w_device[:, None]
        grad_p += w_sc[None, :]
        grad_p -= w_coupling
        denom = self.noise_w + self.cross @ power
        grad_p += power * (self.cross.T @ (w_coupling / denom))
        return self.join(grad_p, w_coupling)

    def max_residual(self, x: np.ndarray) -> float:
        """Largest violation of the box bounds and every inequality constraint."""
        lower, upper = np.array(self.bounds()).T
        box = max(float(np.max(lower - x)), float(np.max(x - upper)), 0.0)
        return max(box, float(np.max(self.constraints(x))), 0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gains": self.gains.tolist(),
            "cell_ids": self.cell_ids.tolist(),
            "techs": [t.value for t in self.techs],
            "sc_count": self.sc_count,
            "noise_w": self.noise_w,
            "log_gamma_max": self.log_gamma_max.tolist(),
            "log_gamma_floor": self.log_gamma_floor,
            "p_max": self.p_max,
            "eps_p": self.eps_p,
        }


@dataclass
class BenchmarkSolution:
    """Upper-bound allocation of one (realization, timeslot)."""

    powers: np.ndarray
    sinrs: np.ndarray
    active_sc: np.ndarray
    ub_rates: np.ndarray
    techs: List[Technology]
    objective_value: float
    solver_status: str
    residual: float = 0.0
    start_objectives: List[float] = field(default_factory=list)

    @property
    def spread(self) -> float:
        """Best minus worst objective over the feasible starts."""
        finite = [o for o in self.start_objectives if np.isfinite(o)]
        return float(max(finite) - min(finite)) if finite else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "powers": self.powers.tolist(),
            "sinrs": self.sinrs.tolist(),
            "active_sc": self.active_sc.tolist(),
            "ub_rates": self.ub_rates.tolist(),
            "techs": [t.value for t in self.techs],
            "objective_value": self.objective_value,
            "solver_status": self.solver_status,
            "residual": self.residual,
            "start_objectives": self.start_objectives,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def build_transformed(
    realization: Realization,
    t: int,
    tables: Optional[Mapping[Technology, McsTable]] = None,
    p_max: float = P_MAX_W,
    eps_p: float = EPSILON_P_W,
) -> TransformedProblem:
    """
    Assemble the log-domain problem with the gains of timeslot t.

    The SINR lower bound is half the worst idle-link SINR (power eps_p against every other
    device at p_max), so a sub-carrier held at eps_p is always feasible.
    """
    tables = tables or build_tables()
    gains = realization.gains[t]
    cell_ids = realization.cell_ids
    idx = np.arange(realization.num_devices)
    serving = gains[idx, cell_ids]
    cross = gains[:, cell_ids].T.copy()
    cross[idx, idx] = 0.0
    worst = eps_p * serving / (realization.noise_w + p_max * cross.sum(axis=1))
    floor = min(0.5 * float(worst.min()), min(tables[tech].gamma_min for tech in realization.techs))
    log_gamma_max = np.array([math.log(tables[tech].gamma_max) for tech in realization.techs])
    return TransformedProblem(
        gains=gains.copy(),
        cell_ids=cell_ids.copy(),
        techs=list(realization.techs),
        sc_count=realization.sc_count,
        noise_w=realization.noise_w,
        log_gamma_max=log_gamma_max,
        log_gamma_floor=math.log(floor),
        p_max=p_max,
        eps_p=eps_p,
    )


def _round_robin_start(problem: TransformedProblem) -> np.ndarray:
    """Every device at p_max on its round-robin sub-carrier, eps_p elsewhere, SINR at the floor."""
    n, s = problem.num_devices, problem.sc_count
    log_p = np.full((n, s), problem.log_eps_p)
    rank = np.zeros(n, dtype=int)
    for b in problem.cells:
        members = np.flatnonzero(problem.cell_ids == b)
        rank[members] = np.arange(members.size) % s
    # leave room for the eps_p entries in the budget
    log_p[np.arange(n), rank] = math.log(problem.p_max - (s - 1) * problem.eps_p)
    return problem.join(log_p, np.full((n, s), problem.log_gamma_floor))


def _random_start(problem: TransformedProblem, rng: np.random.Generator) -> np.ndarray:
    lower, upper = np.array(problem.bounds()).T
    return rng.uniform(lower, upper)


def _augmented_lagrangian(
    problem: TransformedProblem, x0: np.ndarray, params: SolverParams
) -> Tuple[np.ndarray, str]:
    """
    Minimize -objective subject to c(x) <= 0 within the box.

    Multipliers are updated when the violation drops below the current tolerance,
    otherwise the penalty grows by tau (LANCELOT schedule).
    """
    bounds = problem.bounds()
    multipliers = np.zeros(problem.constraints(x0).size)
    penalty = params.penalty0
    alpha, beta = 0.1, 0.9
    update_tol0 = 0.1
    update_tol = update_tol0 / penalty ** alpha
    budget = params.max_iter
    x = x0.copy()
    previous = None

    def merit(z, mu, rho):
        c = problem.constraints(z)
        shifted = np.maximum(0.0, mu + rho * c)
        value = -problem.objective(z) + float(np.sum(shifted ** 2 - mu ** 2)) / (2.0 * rho)
        grad = -problem.objective_grad(z) + problem.constraints_vjp(z, shifted)
        return value, grad

    for _ in range(params.max_outer):
        if budget <= 0:
            return x, MAX_ITER
        result = minimize(
            merit,
            x,
            args=(multipliers, penalty),
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": min(budget, 500)},
        )
        budget -= int(result.nit)
        x = result.x
        c = problem.constraints(x)
        violation = float(np.max(np.maximum(c, 0.0)))
        value = problem.objective(x)

        if violation <= update_tol:
            multipliers = np.maximum(0.0, multipliers + penalty * c)
            update_tol = max(update_tol / penalty ** beta, params.tol)
        else:
            penalty = min(penalty * params.tau, 1e8)
            update_tol = max(update_tol0 / penalty ** alpha, params.tol)

        if violation <= params.tol and previous is not None and abs(value - previous) <= math.sqrt(params.tol) * (
            1.0 + abs(value)
        ):
            return x, CONVERGED
        previous = value
    return x, MAX_ITER


def _clean_support(problem: TransformedProblem, log_p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Keep one sub-carrier per device and one device per (cell, sub-carrier).

    Entries are claimed greedily by decreasing power. Everything else drops to eps_p.

    Raises:
        ContractViolation: a cell has more devices than sub-carriers
    """
    n, s = log_p.shape
    active = np.full(n, -1)
    taken = set()
    for flat in np.argsort(-log_p, axis=None, kind="stable"):
        i, sc = divmod(int(flat), s)
        key = (int(problem.cell_ids[i]), sc)
        if active[i] < 0 and key not in taken:
            active[i] = sc
            taken.add(key)
    stranded = np.flatnonzero(active < 0)
    if stranded.size:
        raise ContractViolation(
            f"Devices {stranded.tolist()} have no free sub-carrier in their cell ({s} sub-carriers per cell)"
        )
    cleaned = np.full((n, s), problem.log_eps_p)
    top = math.log(problem.p_max - (s - 1) * problem.eps_p)
    keep = math.log(100.0 * problem.eps_p)
    for i in range(n):
        cleaned[i, active[i]] = min(max(log_p[i, active[i]], keep), top)
    return cleaned, active


def _polish(problem: TransformedProblem, log_p: np.ndarray) -> np.ndarray:
    """Set gamma' to the achieved log-SINR clipped to its box, which makes coupling hold."""
    achieved = log_p + np.log(problem.serving)[:, None] - np.log(problem.noise_w + problem.interference(log_p))
    return np.clip(achieved, problem.log_gamma_floor, problem.log_gamma_max[:, None])


def _finish(problem: TransformedProblem, x: np.ndarray, status: str, tol: float) -> BenchmarkSolution:
    log_p, _ = problem.split(x)
    log_p, active = _clean_support(problem, log_p)
    log_gamma = _polish(problem, log_p)
    final = problem.join(log_p, log_gamma)
    residual = problem.max_residual(final)
    sinrs = np.exp(log_gamma)
    ub_rates = sinrs[np.arange(problem.num_devices), active] ** LOG10_E
    return BenchmarkSolution(
        powers=np.exp(log_p),
        sinrs=sinrs,
        active_sc=active,
        ub_rates=ub_rates,
        techs=list(problem.techs),
        objective_value=float(np.log(ub_rates).sum()),
        solver_status=status if residual <= tol else INFEASIBLE,
        residual=residual,
    )


def solve_local(problem: TransformedProblem, params: Optional[SolverParams] = None, **overrides) -> BenchmarkSolution:
    """
    Multi-start local solve; returns the feasible point with the best objective.

    Start 0 is the round-robin allocation at p_max; start k > 0 is a random point in the
    box drawn from a generator seeded by (seed, k), so adding starts never lowers the
    best objective.
    """
    params = replace(params or SolverParams(), **overrides)
    if params.starts < 1:
        raise ContractViolation(f"solve_local needs at least one start, got {params.starts}")

    best = None
    objectives = []
    for k in range(params.starts):
        x0 = _round_robin_start(problem) if k == 0 else _random_start(problem, np.random.default_rng([params.seed, k]))
        x, status = _augmented_lagrangian(problem, x0, params)
        candidate = _finish(problem, x, status, params.tol)
        logger.debug("Start %d: status=%s objective=%.6f", k, candidate.solver_status, candidate.objective_value)
        if candidate.solver_status == INFEASIBLE:
            objectives.append(float("-inf"))
            continue
        objectives.append(candidate.objective_value)
        if best is None or candidate.objective_value > best.objective_value:
            best = candidate

    if best is None:
        logger.warning("No feasible benchmark point across %d starts", params.starts)
        return BenchmarkSolution(
            powers=np.zeros((problem.num_devices, problem.sc_count)),
            sinrs=np.zeros((problem.num_devices, problem.sc_count)),
            active_sc=np.full(problem.num_devices, -1),
            ub_rates=np.zeros(problem.num_devices),
            techs=list(problem.techs),
            objective_value=float("-inf"),
            solver_status=INFEASIBLE,
            start_objectives=objectives,
        )
    best.start_objectives = objectives
    return best


def discretize_solution(
    solution: BenchmarkSolution, tables: Optional[Mapping[Technology, McsTable]] = None
) -> np.ndarray:
    """
    Discrete MCS rate of every device from the SINR on its active sub-carrier.

    Raises:
        SolverInfeasibleError: the solution has no feasible point
    """
    if solution.solver_status == INFEASIBLE:
        raise SolverInfeasibleError("Cannot discretize an infeasible benchmark solution")
    tables = tables or build_tables()
    active_sinr = solution.sinrs[np.arange(solution.active_sc.size), solution.active_sc]
    return device_rates(device_levels(active_sinr, solution.techs, tables), solution.techs, tables)
