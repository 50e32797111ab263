"""Proposal kernels on the unit ball and Metropolis/Hastings chains over
vertex configurations.

All acceptance decisions are made in log space: accept iff ``log U < log H``.
"""
from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from nervegraph.complexes import NerveClass, build_filtration, maximal_simplices, nerve
from nervegraph.geometry import GeometryError
from nervegraph.graphs import cliques, decomposable_from_filtration, factorization_string, from_skeleton
from nervegraph.priors import DensityUnavailable, MaternPrior, Window

logger = logging.getLogger(__name__)

VIEWS = ("graph", "decomposable", "simplices")


def reflect_unit(x):
    """Reflect ``x`` into [0, 1]: ``|x - 2 floor((x + 1) / 2)|``."""
    x = np.asarray(x, dtype=float)
    out = np.abs(x - 2.0 * np.floor((x + 1.0) / 2.0))
    return float(out) if out.ndim == 0 else out


def _random_directions(n: int, d: int, rng) -> np.ndarray:
    z = rng.standard_normal((n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _rotate(u: np.ndarray, angle: np.ndarray, rng) -> np.ndarray:
    """Move unit vectors ``u`` by ``angle`` along uniformly random great circles."""
    n, d = u.shape
    if d == 2:
        c, s = np.cos(angle), np.sin(angle)
        return np.stack([c * u[:, 0] - s * u[:, 1], s * u[:, 0] + c * u[:, 1]], axis=1)
    t = rng.standard_normal((n, d))
    t -= np.sum(t * u, axis=1, keepdims=True) * u
    t /= np.linalg.norm(t, axis=1, keepdims=True)
    return np.cos(angle)[:, None] * u + np.sin(angle)[:, None] * t


def local_step_batch(P, eta: float, rng) -> np.ndarray:
    """Spherical random-walk step applied independently to every row of ``P``.

    Radial part: the volume coordinate ``w = rho**d`` moves to
    ``reflect_unit(w + zeta * eta)``. Angular part: the direction turns by
    ``zeta * eta / rho``. The two parts run in a random order per point, the
    angular part using whichever radius is current at that moment; the
    resulting kernel is symmetric with respect to the uniform measure.
    """
    P = np.asarray(P, dtype=float)
    n, d = P.shape
    rho = np.linalg.norm(P, axis=1)
    at_origin = rho == 0.0
    u = np.where(at_origin[:, None], 1.0, P) / np.where(at_origin, 1.0, rho)[:, None]
    if at_origin.any():
        u[at_origin] = _random_directions(int(at_origin.sum()), d, rng)
    zeta_r = rng.standard_normal(n)
    zeta_a = rng.standard_normal(n)
    radial_first = rng.random(n) < 0.5
    rho_new = reflect_unit(rho ** d + zeta_r * eta) ** (1.0 / d)
    rho_ang = np.where(radial_first, rho_new, rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        angle = np.where(rho_ang > 0, zeta_a * eta / rho_ang, 0.0)
    u_new = _rotate(u, angle, rng)
    return u_new * rho_new[:, None]


def local_step(v, eta: float, rng) -> np.ndarray:
    return local_step_batch(np.asarray(v, dtype=float)[None, :], eta, rng)[0]


def theta_step(theta: float, beta: float, rng) -> float:
    """Reflecting uniform walk ``|theta + eps|`` with ``eps ~ U(-beta, beta)``."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return abs(theta + rng.uniform(-beta, beta))


@dataclass(frozen=True)
class ProposalConfig:
    """Mixture of local diffusion, subset redraws and a full redraw.

    ``redraw`` maps a subset size ``k`` to the probability of redrawing a
    uniformly chosen ``k``-subset of vertices from the window.
    """

    eta: float = 0.02
    local: float = 0.85
    redraw: dict = field(default_factory=lambda: {1: 0.05})
    global_weight: float = 0.10
    beta: float = 0.5

    def __post_init__(self):
        if self.eta <= 0 or self.beta <= 0:
            raise ValueError("eta and beta must be positive")
        weights = [self.local, self.global_weight, *self.redraw.values()]
        if any(w < 0 for w in weights):
            raise ValueError("mixture weights must be nonnegative")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise ValueError(f"mixture weights sum to {sum(weights)}, not 1")
        if any(int(k) < 1 for k in self.redraw):
            raise ValueError("redraw subset sizes must be positive")
        object.__setattr__(self, "redraw", {int(k): float(v) for k, v in self.redraw.items()})

    def require_global(self):
        if not self.global_weight > 0:
            raise ValueError("inference chains need a positive global-redraw weight")

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "local": self.local,
            "redraw": {str(k): v for k, v in sorted(self.redraw.items())},
            "global_weight": self.global_weight,
            "beta": self.beta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProposalConfig":
        allowed = {"eta", "local", "redraw", "global_weight", "beta"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown proposal keys {sorted(unknown)}")
        kw = dict(d)
        if "redraw" in kw:
            kw["redraw"] = {int(k): float(v) for k, v in kw["redraw"].items()}
        return cls(**kw)


def hybrid_propose(P, cfg: ProposalConfig, rng, window: Window | None = None):
    """Return ``(P_new, kernel_log_ratio, move)``; every component is symmetric."""
    P = np.asarray(P, dtype=float)
    n, d = P.shape
    if window is None:
        window = Window("ball", d)
    labels = ["local", "global"] + [f"redraw{k}" for k in sorted(cfg.redraw)]
    probs = [cfg.local, cfg.global_weight] + [cfg.redraw[k] for k in sorted(cfg.redraw)]
    move = labels[rng.choice(len(labels), p=np.asarray(probs) / np.sum(probs))]
    if move == "local":
        return local_step_batch(P, cfg.eta, rng), 0.0, move
    if move == "global":
        return window.sample(n, rng), 0.0, move
    k = min(int(move[6:]), n)
    idx = rng.choice(n, size=k, replace=False)
    out = P.copy()
    out[idx] = window.sample(k, rng)
    return out, 0.0, move


# ------------------------------------------------------------- structures


@dataclass(frozen=True)
class StructureMap:
    """Vertex configuration -> canonical structure (sorted 0-based blocks).

    ``view`` is ``"graph"`` (cliques of the nerve's 1-skeleton),
    ``"decomposable"`` (cliques of the filtration-built decomposable graph)
    or ``"simplices"`` (maximal simplices of the full nerve).
    """

    nerve: NerveClass
    r: float
    view: str = "decomposable"

    def __post_init__(self):
        if self.view not in VIEWS:
            raise ValueError(f"unknown view {self.view!r}")
        if self.r <= 0:
            raise ValueError("r must be positive")

    def __call__(self, P) -> tuple:
        if self.view == "decomposable":
            G = decomposable_from_filtration(build_filtration(P, self.nerve, 2, self.r))
            return tuple(cliques(G))
        if self.view == "graph":
            return tuple(cliques(from_skeleton(nerve(P, self.nerve, self.r, max_card=2))))
        return tuple(maximal_simplices(nerve(P, self.nerve, self.r)))


# ------------------------------------------------------------------ trace


@dataclass
class ChainTrace:
    records: list = field(default_factory=list)
    proposed: Counter = field(default_factory=Counter)
    accepted: Counter = field(default_factory=Counter)
    structure_switches: int = 0
    steps: int = 0
    burn_in: int = 0
    thin: int = 1
    final_state: np.ndarray | None = None

    @property
    def acceptance_rate(self) -> float:
        """Acceptance rate of vertex moves over the whole run."""
        total = sum(v for k, v in self.proposed.items() if k != "theta")
        return sum(v for k, v in self.accepted.items() if k != "theta") / total if total else float("nan")

    @property
    def theta_acceptance_rate(self) -> float:
        p = self.proposed.get("theta", 0)
        return self.accepted.get("theta", 0) / p if p else float("nan")

    def structures(self) -> list:
        return [r["structure"] for r in self.records]

    def thetas(self) -> np.ndarray:
        return np.array([np.nan if r["theta"] is None else r["theta"] for r in self.records])

    def diagnostics(self) -> dict:
        return {
            "steps": self.steps,
            "burn_in": self.burn_in,
            "thin": self.thin,
            "retained": len(self.records),
            "acceptance_rate": self.acceptance_rate,
            "theta_acceptance_rate": self.theta_acceptance_rate,
            "structure_switches": self.structure_switches,
            "proposed": dict(self.proposed),
            "accepted": dict(self.accepted),
        }

    def to_jsonl(self) -> str:
        lines = []
        for r in self.records:
            rec = dict(r)
            rec["structure"] = factorization_string(r["structure"])
            lines.append(json.dumps(rec))
        return "\n".join(lines) + ("\n" if lines else "")


def topology_tally(trace) -> list:
    """``(structure, frequency)`` pairs by decreasing frequency, ties by structure."""
    structs = trace.structures() if isinstance(trace, ChainTrace) else list(trace)
    if not structs:
        raise ValueError("empty trace")
    counts = Counter(structs)
    total = len(structs)
    return sorted(((s, c / total) for s, c in counts.items()), key=lambda e: (-e[1], e[0]))


def _check_lengths(steps, burn_in, thin):
    if steps < 0 or burn_in < 0 or thin < 1 or burn_in > steps:
        raise ValueError("need 0 <= burn_in <= steps and thin >= 1")


def _prior_density(prior, P) -> float:
    if isinstance(prior, MaternPrior):
        raise DensityUnavailable("Matérn III prior has no density; use it for prior simulation only")
    return prior.log_density(P)


def _retain(t, burn_in, thin) -> bool:
    return t > burn_in and (t - burn_in) % thin == 0


def run_prior_chain(prior, cfg: ProposalConfig, steps: int, burn_in: int, thin: int,
                    smap: StructureMap, n: int, rng, init=None) -> ChainTrace:
    """Metropolis/Hastings over vertex configurations targeting ``prior``."""
    _check_lengths(steps, burn_in, thin)
    cfg.require_global()
    window = prior.window
    P = prior.sample(n, rng) if init is None else window.check(init).copy()
    lp = _prior_density(prior, P)
    blocks = smap(P)
    trace = ChainTrace(steps=steps, burn_in=burn_in, thin=thin)
    for t in range(1, steps + 1):
        Q, log_q, move = hybrid_propose(P, cfg, rng, window)
        trace.proposed[move] += 1
        lq = prior.log_density(Q)
        accepted = bool(np.log(rng.random()) < lq - lp + log_q)
        if accepted:
            P, lp = Q, lq
            trace.accepted[move] += 1
            new_blocks = smap(P)
            if new_blocks != blocks:
                trace.structure_switches += 1
                blocks = new_blocks
        if _retain(t, burn_in, thin):
            trace.records.append({"iteration": t, "structure": blocks, "theta": None,
                                  "loglik": 0.0, "move": move, "accepted": accepted})
    trace.final_state = P
    return trace


def run_posterior_chain(backend, prior, cfg: ProposalConfig, steps: int, burn_in: int, thin: int,
                        smap: StructureMap, rng, theta0: float = 1.0, init=None,
                        progress: int = 0) -> ChainTrace:
    """Joint chain over (vertices, theta): one vertex move then one theta move.

    The theta move uses an Ex(1) prior and is skipped for backends without
    theta. The likelihood is recomputed only when the structure or theta
    changes.
    """
    _check_lengths(steps, burn_in, thin)
    cfg.require_global()
    if backend.requires_decomposable and smap.view != "decomposable":
        raise ValueError(f"{backend.name} needs the decomposable view")
    if backend.structure == "simplices" and smap.view != "simplices":
        raise ValueError(f"{backend.name} scores maximal simplices; use the simplices view")
    if backend.structure == "graph" and smap.view == "simplices":
        raise ValueError(f"{backend.name} scores graphs, not simplices")
    n = backend.n_vertices
    window = prior.window
    P = prior.sample(n, rng) if init is None else window.check(init).copy()
    lp = _prior_density(prior, P)
    theta = float(theta0) if backend.uses_theta else None
    blocks = smap(P)
    ll = backend.log_likelihood(blocks, theta)
    trace = ChainTrace(steps=steps, burn_in=burn_in, thin=thin)
    for t in range(1, steps + 1):
        Q, log_q, move = hybrid_propose(P, cfg, rng, window)
        trace.proposed[move] += 1
        accepted = False
        try:
            q_blocks = smap(Q)
        except GeometryError:
            q_blocks = None
        if q_blocks is not None:
            lq = prior.log_density(Q)
            ll_q = ll if q_blocks == blocks else backend.log_likelihood(q_blocks, theta)
            if np.log(rng.random()) < ll_q - ll + lq - lp + log_q:
                if q_blocks != blocks:
                    trace.structure_switches += 1
                P, lp, blocks, ll = Q, lq, q_blocks, ll_q
                accepted = True
                trace.accepted[move] += 1
        if backend.uses_theta:
            theta_new = theta_step(theta, cfg.beta, rng)
            trace.proposed["theta"] += 1
            ll_t = backend.log_likelihood(blocks, theta_new)
            if np.log(rng.random()) < ll_t - ll - theta_new + theta:
                theta, ll = theta_new, ll_t
                trace.accepted["theta"] += 1
        if _retain(t, burn_in, thin):
            trace.records.append({"iteration": t, "structure": blocks, "theta": theta,
                                  "loglik": ll, "move": move, "accepted": accepted})
        if progress and t % progress == 0:
            logger.info("iteration %d/%d: %s theta=%s", t, steps, factorization_string(blocks), theta)
    trace.final_state = P
    return trace
