"""Equilibrium computation for the at-bat game.

Per count the game reduces to a 2 x k matrix game (batter rows Swing/Take
maximizing, pitcher columns minimizing).  Two matrix solvers are provided:
a general LP (scipy HiGHS; supports a per-action probability cap on the
pitcher and recovers the batter mix from the row duals) and an exact
two-row analytic solver using the lower envelope over column pairs, valid
because optimal pitcher support never exceeds the two batter rows.

The full game is solved two independent ways: undiscounted value iteration
(Jacobi sweeps until the residual meets tolerance) and a reverse-topological
pass over the count DAG where each two-strike state's foul self-loop is
resolved by bisection on its scalar fixed point.  Exploitability against a
candidate solution certifies equilibria.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .game import (COUNTS, N_STATES, ON_BASE_IDX, Count, PitcherAction,
                   TransitionKernel, state_index)

class ShapeError(ValueError):
    """Matrix does not have exactly two rows."""


class InfeasibleCap(ValueError):
    """gamma_cap * n_columns < 1: no capped mixture exists."""


class SolverStalled(RuntimeError):
    """LP backend failed to converge."""


class NoConvergence(RuntimeError):
    """Value iteration exceeded the iteration budget."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class NumericalError(RuntimeError):
    """Defensive guard: bisection lost its bracket."""


@dataclass(frozen=True)
class MatrixGame:
    """2 x k payoff matrix for the batter (row player, maximizing)."""

    M: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        m = np.asarray(self.M, dtype=float)
        if m.ndim != 2 or m.shape[0] != 2:
            raise ShapeError(f"expected 2 rows, got shape {m.shape}")
        if not np.isfinite(m).all():
            raise ValueError("payoff entries must be finite")
        object.__setattr__(self, "M", m)


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-9
    max_iterations: int = 10_000
    gamma_cap: float | None = None
    solver: str = "two_row"  # two_row | lp | cross_check

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.gamma_cap is not None and not 0 < self.gamma_cap <= 1:
            raise ValueError("gamma_cap must be in (0, 1]")
        if self.solver not in ("two_row", "lp", "cross_check"):
            raise ValueError(f"unknown solver {self.solver!r}")


def _clean_simplex(x: np.ndarray) -> np.ndarray:
    x = np.clip(np.asarray(x, dtype=float), 0.0, None)
    return x / x.sum()


def solve_matrix_game_lp(game: MatrixGame, gamma_cap: float | None = None):
    """Minimize over (possibly capped) column mixtures the best row response.

    LP: variables (x, t), minimize t subject to M x <= t per row, sum x = 1,
    0 <= x <= cap.  The batter mix is the negated row-constraint duals; if
    those are degenerate the transposed game is solved directly.
    """
    M = game.M
    k = M.shape[1]
    if gamma_cap is not None and gamma_cap * k < 1.0 - 1e-12:
        raise InfeasibleCap(f"cap {gamma_cap} over {k} columns cannot reach 1")
    c = np.zeros(k + 1)
    c[-1] = 1.0
    res = linprog(c,
                  A_ub=np.hstack([M, -np.ones((2, 1))]), b_ub=np.zeros(2),
                  A_eq=np.hstack([np.ones((1, k)), np.zeros((1, 1))]), b_eq=[1.0],
                  bounds=[(0.0, gamma_cap)] * k + [(None, None)],
                  method="highs")
    if res.status == 2:
        raise InfeasibleCap("LP reports infeasible") if gamma_cap is not None \
            else NumericalError("uncapped matrix LP infeasible")
    if res.status != 0:
        raise SolverStalled(f"LP status {res.status}: {res.message}")
    col_mix = _clean_simplex(res.x[:k])
    value = float(res.x[-1])
    duals = -np.asarray(res.ineqlin.marginals)
    if duals.min() > -1e-9 and abs(duals.sum() - 1.0) < 1e-6:
        row_mix = _clean_simplex(duals)
    elif gamma_cap is None:
        row_mix = _solve_row_lp(M)
    else:
        row_mix = _clean_simplex(np.clip(duals, 0.0, None) + 1e-300)
    return value, col_mix, row_mix


def _solve_row_lp(M: np.ndarray) -> np.ndarray:
    """Transposed game: maximize the batter's guaranteed value."""
    k = M.shape[1]
    c = np.array([0.0, 0.0, -1.0])
    res = linprog(c,
                  A_ub=np.hstack([-M.T, np.ones((k, 1))]), b_ub=np.zeros(k),
                  A_eq=np.array([[1.0, 1.0, 0.0]]), b_eq=[1.0],
                  bounds=[(0.0, None), (0.0, None), (None, None)],
                  method="highs")
    if res.status != 0:
        raise SolverStalled(f"row LP status {res.status}: {res.message}")
    return _clean_simplex(res.x[:2])


def _crossing_candidates(M: np.ndarray):
    """Column pairs whose rows cross strictly inside the edge, with the
    crossing weight on the first (positive-gap) column and the common value."""
    d = M[0] - M[1]
    pos = np.flatnonzero(d > 0)
    neg = np.flatnonzero(d < 0)
    if not (pos.size and neg.size):
        return pos, neg, None, None
    di = d[pos][:, None]
    dj = d[neg][None, :]
    alpha = dj / (dj - di)
    V = alpha * M[0][pos][:, None] + (1.0 - alpha) * M[0][neg][None, :]
    return pos, neg, alpha, V


def matrix_value_two_row(game: MatrixGame) -> float:
    """Game value only (the hot path inside value iteration)."""
    M = game.M
    value = float(np.maximum(M[0], M[1]).min())
    _, _, _, V = _crossing_candidates(M)
    if V is not None:
        value = min(value, float(V.min()))
    return value


def solve_matrix_game_two_row(game: MatrixGame):
    """Exact minimax for 2 x k games by the lower-envelope method.

    Candidate pitcher mixtures are every pure column and every column pair
    whose rows cross; the optimum has support at most 2, so the candidate
    minimum is the game value.  Ties break toward the lexicographically
    smallest support.  The batter mix maximizes the concave one-dimensional
    guarantee over its swing weight.
    """
    M = game.M
    k = M.shape[1]
    d = M[0] - M[1]

    pure = np.maximum(M[0], M[1])
    value = float(pure.min())
    pos, neg, alpha, V = _crossing_candidates(M)
    if V is not None:
        value = min(value, float(V.min()))

    tied = [((int(j),), None) for j in np.flatnonzero(pure <= value + 1e-12)]
    if V is not None:
        for ii, jj in np.argwhere(V <= value + 1e-12):
            i, j = int(pos[ii]), int(neg[jj])
            a = float(alpha[ii, jj])
            tied.append(((i, j) if i < j else (j, i), a if i < j else 1.0 - a))
    tied.sort(key=lambda c: c[0])
    support, weight = tied[0]
    col_mix = np.zeros(k)
    if len(support) == 1:
        col_mix[support[0]] = 1.0
    else:
        col_mix[support[0]] = weight
        col_mix[support[1]] = 1.0 - weight

    # batter mix: maximize g(beta) = min_c (beta * M0c + (1 - beta) * M1c)
    betas = [0.0, 1.0]
    diff = d[:, None] - d[None, :]
    num = M[1][None, :] - M[1][:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = num / diff
    valid = np.isfinite(cross) & (cross > 0.0) & (cross < 1.0)
    betas.extend(np.unique(cross[valid]).tolist())
    betas = np.asarray(sorted(betas))
    guarantees = (M[1][None, :] + betas[:, None] * d[None, :]).min(axis=1)
    beta = float(betas[int(np.argmax(guarantees))])
    row_mix = np.array([beta, 1.0 - beta])
    return float(value), col_mix, row_mix


def _solve_game(game: MatrixGame, config: SolverConfig):
    if config.gamma_cap is not None:
        return solve_matrix_game_lp(game, config.gamma_cap)
    if config.solver == "lp":
        return solve_matrix_game_lp(game)
    if config.solver == "cross_check":
        v_lp, _, _ = solve_matrix_game_lp(game)
        v_tr, col, row = solve_matrix_game_two_row(game)
        if abs(v_lp - v_tr) > 1e-8:
            raise NumericalError(
                f"LP/two-row disagreement: {v_lp!r} vs {v_tr!r}")
        return v_tr, col, row
    return solve_matrix_game_two_row(game)


def _game_value(game: MatrixGame, config: SolverConfig) -> float:
    """Value without strategy extraction; exact analytic path when possible."""
    if config.gamma_cap is not None:
        return solve_matrix_game_lp(game, config.gamma_cap)[0]
    if config.solver == "lp":
        return solve_matrix_game_lp(game)[0]
    if config.solver == "cross_check":
        v_lp = solve_matrix_game_lp(game)[0]
        v_tr = matrix_value_two_row(game)
        if abs(v_lp - v_tr) > 1e-8:
            raise NumericalError(
                f"LP/two-row disagreement: {v_lp!r} vs {v_tr!r}")
        return v_tr
    return matrix_value_two_row(game)


def state_matrix(count: Count, kernel: TransitionKernel, values: dict) -> MatrixGame:
    """Expected continuation value per joint action, rows Swing/Take."""
    v_full = np.zeros(N_STATES)
    v_full[ON_BASE_IDX] = 1.0
    for c in COUNTS:
        v_full[state_index(c)] = values.get(c, 0.0)
    ci = state_index(count)
    block = kernel.array[ci]  # (P, 17, 2, 14)
    m = np.einsum("pazs,s->zpa", block, v_full, optimize=True)
    k = kernel.n_actions
    return MatrixGame(m.reshape(2, k), labels=kernel.actions())


@dataclass
class EquilibriumSolution:
    """Per-count value (OBP) and both mixed strategies; terminals are fixed
    at value 1 (on base) and 0 (out)."""

    values: dict
    pitcher_policy: dict   # Count -> (k,) over kernel.actions()
    batter_policy: dict    # Count -> (2,) over (swing, take)
    pitch_types: tuple
    iterations: int = 0
    residual: float = 0.0

    def value(self, state) -> float:
        if state in self.values:
            return self.values[state]
        from .game import ON_BASE, OUT
        if state == ON_BASE:
            return 1.0
        if state == OUT:
            return 0.0
        raise KeyError(state)

    def actions(self) -> tuple[PitcherAction, ...]:
        from .game import pitcher_actions
        return pitcher_actions(self.pitch_types)

    def to_json(self, min_prob: float = 1e-9) -> dict:
        acts = self.actions()
        counts = {}
        for c in COUNTS:
            policy = [{"pitch": a.pitch, "zone": a.aim, "prob": float(p)}
                      for a, p in zip(acts, self.pitcher_policy[c])
                      if p > min_prob]
            counts[str(c)] = {
                "value": float(self.values[c]),
                "pitcher_policy": policy,
                "batter_policy": {"swing": float(self.batter_policy[c][0]),
                                  "take": float(self.batter_policy[c][1])},
            }
        return {"counts": counts}

    @classmethod
    def from_json(cls, doc: dict, pitch_types: tuple = None) -> "EquilibriumSolution":
        from .game import parse_count, pitcher_actions
        from .zones import PITCH_TYPES
        pitch_types = tuple(pitch_types or PITCH_TYPES)
        acts = {a: i for i, a in enumerate(pitcher_actions(pitch_types))}
        values, ppol, bpol = {}, {}, {}
        for key, entry in doc["counts"].items():
            c = parse_count(key)
            values[c] = float(entry["value"])
            vec = np.zeros(len(acts))
            for item in entry["pitcher_policy"]:
                vec[acts[PitcherAction(item["pitch"], int(item["zone"]))]] = item["prob"]
            ppol[c] = vec
            bpol[c] = np.array([entry["batter_policy"]["swing"],
                                entry["batter_policy"]["take"]])
        return cls(values, ppol, bpol, pitch_types)


def _final_pass(kernel: TransitionKernel, values: dict, config: SolverConfig):
    """Solve every state matrix at the converged values, emitting consistent
    values and strategies."""
    out_values, ppol, bpol = {}, {}, {}
    for c in COUNTS:
        v, col, row = _solve_game(state_matrix(c, kernel, values), config)
        out_values[c] = v
        ppol[c] = col
        bpol[c] = row
    return out_values, ppol, bpol


def value_iterate(kernel: TransitionKernel,
                  config: SolverConfig = SolverConfig()) -> EquilibriumSolution:
    """Jacobi value iteration from zero, stopping when the sweep residual is
    within tolerance; raises NoConvergence past the iteration budget."""
    values = {c: 0.0 for c in COUNTS}
    residual = np.inf
    for iteration in range(1, config.max_iterations + 1):
        new_values = {c: _game_value(state_matrix(c, kernel, values), config)
                      for c in COUNTS}
        residual = max(abs(new_values[c] - values[c]) for c in COUNTS)
        values = new_values
        if residual <= config.tolerance:
            out_values, ppol, bpol = _final_pass(kernel, values, config)
            return EquilibriumSolution(out_values, ppol, bpol,
                                       kernel.pitch_types, iteration, residual)
    raise NoConvergence(
        f"no convergence in {config.max_iterations} sweeps "
        f"(residual {residual:.3e})", residual)


def solve_acyclic(kernel: TransitionKernel,
                  config: SolverConfig = SolverConfig()) -> EquilibriumSolution:
    """Reverse-topological solve over the count DAG.

    States are processed by descending balls + strikes, so both incremented
    counts are solved first.  At two strikes the foul self-loop makes the
    state's own value appear linearly in its matrix; its value is the root of
    v = value(M(v)), found by bisection on [0, 1] (the map is a contraction
    because escaping mass is bounded away from zero).
    """
    values: dict = {}
    ppol, bpol = {}, {}
    for c in sorted(COUNTS, key=lambda c: -(c.balls + c.strikes)):
        ci = state_index(c)
        self_mass = kernel.array[ci, :, :, :, ci]
        if c.strikes < 2 or self_mass.max() <= 1e-15:
            v, col, row = _solve_game(state_matrix(c, kernel, values), config)
        else:
            lo, hi = 0.0, 1.0
            probe = dict(values)

            def game_value(w: float) -> float:
                probe[c] = w
                return _game_value(state_matrix(c, kernel, probe), config)

            f_lo = game_value(lo) - lo
            f_hi = game_value(hi) - hi
            if f_lo < -1e-9 or f_hi > 1e-9:
                raise NumericalError(
                    f"bisection bracket lost at {c}: f(0)={f_lo}, f(1)={f_hi}")
            while hi - lo > config.tolerance:
                mid = 0.5 * (lo + hi)
                if game_value(mid) - mid >= 0.0:
                    lo = mid
                else:
                    hi = mid
            w = 0.5 * (lo + hi)
            probe[c] = w
            v, col, row = _solve_game(state_matrix(c, kernel, probe), config)
            v = w
        values[c] = v
        ppol[c] = col
        bpol[c] = row
    return EquilibriumSolution(values, ppol, bpol, kernel.pitch_types)


def _response_values(kernel: TransitionKernel, mix_fn, optimum) -> dict:
    """Best-response DP over the count DAG for one player, the other fixed.

    ``mix_fn(count)`` returns (n_options, 14) expected transition rows after
    averaging out the fixed player's mix; ``optimum`` is max for the batter,
    min for the pitcher.  Self-loops resolve to alpha / (1 - beta) per
    option, the fixed point of that option's linear recursion (an eternal
    loop is worth 0: the batter never reaches base).
    """
    v_full = np.zeros(N_STATES)
    v_full[ON_BASE_IDX] = 1.0
    for c in sorted(COUNTS, key=lambda c: -(c.balls + c.strikes)):
        ci = state_index(c)
        rows = mix_fn(c)
        beta = rows[:, ci].copy()
        cont = v_full.copy()
        cont[ci] = 0.0
        alpha = rows @ cont
        with np.errstate(divide="ignore", invalid="ignore"):
            fixed = np.where(1.0 - beta > 1e-12, alpha / (1.0 - beta), 0.0)
        v_full[ci] = float(optimum(fixed))
    return {c: float(v_full[state_index(c)]) for c in COUNTS}


def best_response_values(kernel: TransitionKernel, solution: EquilibriumSolution,
                         responder: str) -> dict:
    """Value of the responder's best response against the solution's fixed
    mixed policy for the other player, at every count."""
    k = kernel.n_actions

    if responder == "batter":
        def mix_fn(c):
            ci = state_index(c)
            block = kernel.array[ci].reshape(k, 2, N_STATES)
            return np.einsum("kbs,k->bs", block, solution.pitcher_policy[c])
        return _response_values(kernel, mix_fn, np.max)

    if responder == "pitcher":
        def mix_fn(c):
            ci = state_index(c)
            block = kernel.array[ci].reshape(k, 2, N_STATES)
            return np.einsum("kbs,b->ks", block, solution.batter_policy[c])
        return _response_values(kernel, mix_fn, np.min)

    raise ValueError(f"unknown responder {responder!r}")


def exploitability(kernel: TransitionKernel, solution: EquilibriumSolution
                   ) -> tuple[float, float]:
    """(batter_gain, pitcher_gain) at the starting count: how much each
    player improves by best-responding to the other's fixed policy.  Both
    are ~0 at equilibrium and nonnegative up to solver tolerance."""
    start = Count(0, 0)
    batter_br = best_response_values(kernel, solution, "batter")
    pitcher_br = best_response_values(kernel, solution, "pitcher")
    return (batter_br[start] - solution.values[start],
            solution.values[start] - pitcher_br[start])
