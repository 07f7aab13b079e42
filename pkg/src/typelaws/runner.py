"""Execute one :class:`ExperimentConfig` and return its records."""
from __future__ import annotations

from .config import ExperimentConfig
from .core import NType
from .errors import EmptyFeasibleSet
from .laws import (ExperimentRecord, cwlln_experiment, egcp_experiment, egcp_prefix_probability, icet_experiment,
                   mixture_prefix_limit, rational_concentration, rcwlln_experiment, sanov_rate, type_distribution)
from .projections import i_projections, mu_projection, tau_projection


def _require_some(records, law):
    if records and all(r.empty for r in records):
        raise EmptyFeasibleSet(f"{law}: Pi_n is empty at every n of the schedule")
    return records


def _projection_records(result, n=0):
    out = []
    proper = result.proper or [None] * result.k
    for j, (p, ok) in enumerate(zip(result.points, proper), 1):
        detail = {"kind": result.kind, "point": p, "proper": ok}
        out.append(ExperimentRecord("project", n, j, result.objective, None, detail=detail))
    return out


def run_enumerate(cfg: ExperimentConfig):
    q, c = cfg.source(), cfg.build_constraint()
    records = []
    for n in cfg.n:
        dist = type_distribution(n, c, cfg.membership, q, exact=cfg.exact_weights, budget=cfg.budget)
        if not dist.types:
            records.append(ExperimentRecord("enumerate", n, 0, None, None, None, cfg.tau, {"empty": True}))
            continue
        for j, (t, p) in enumerate(zip(dist.types, dist.conditional()), 1):
            records.append(ExperimentRecord("enumerate", n, j, p, None, None, cfg.tau,
                                            {"type": t, "feasible": len(dist.types)}))
    return _require_some(records, "enumerate")


def run_project(cfg: ExperimentConfig):
    q, c = cfg.source(), cfg.build_constraint()
    if cfg.projection == "i":
        return _projection_records(i_projections(q, c, starts=cfg.starts, seed=cfg.seed))
    if cfg.projection == "tau":
        return _projection_records(tau_projection(q, c, cfg.alpha_entropy, starts=cfg.starts, seed=cfg.seed))
    records = []
    for n in cfg.n:
        res = mu_projection(q, n, c, cfg.membership, budget=cfg.budget, exact=cfg.exact_weights)
        if res.empty:
            records.append(ExperimentRecord("project", n, 0, None, None, detail={"empty": True}))
        else:
            records.extend(_projection_records(res, n))
    return _require_some(records, "project")


def run_icet(cfg: ExperimentConfig):
    q, c = cfg.source(), cfg.build_constraint()
    if cfg.law == "cwlln":
        recs = cwlln_experiment(c, q, cfg.n, cfg.epsilon, cfg.membership, cfg.norm, cfg.exact_weights, cfg.budget)
    else:
        recs = icet_experiment(c, q, cfg.n, cfg.epsilon, cfg.membership, None, cfg.norm, cfg.exact_weights,
                               cfg.budget)
    return _require_some(recs, cfg.law)


def run_egcp(cfg: ExperimentConfig):
    q, c = cfg.source(), cfg.build_constraint()
    if cfg.prefix is None:
        recs = egcp_experiment(c, q, cfg.n, cfg.t, cfg.membership, cfg.exact_weights, budget=cfg.budget)
        return _require_some(recs, "egcp")
    proj = i_projections(q, c, starts=cfg.starts, seed=cfg.seed)
    limit = mixture_prefix_limit(proj, cfg.prefix)
    records = []
    for n in cfg.n:
        try:
            value = egcp_prefix_probability(n, c, cfg.membership, q, cfg.prefix, cfg.exact_weights, cfg.budget)
            detail = {"prefix": cfg.prefix}
        except EmptyFeasibleSet:
            value, detail = None, {"prefix": cfg.prefix, "empty": True}
        records.append(ExperimentRecord("egcp", n, 1, value, limit, None, cfg.tau, detail))
    return _require_some(records, "egcp")


def run_rates(cfg: ExperimentConfig):
    q, c = cfg.source(), cfg.build_constraint()
    recs = sanov_rate(cfg.n, c, cfg.membership, q, exact=cfg.exact_weights, budget=cfg.budget)
    return _require_some(recs, "rates")


def run_rcwlln(cfg: ExperimentConfig):
    pair = cfg.build_constraint()
    return rcwlln_experiment(cfg.source("q"), cfg.source("q2"), pair, cfg.n, cfg.epsilon, cfg.membership,
                             cfg.exact_weights, cfg.budget)


def run_rational(cfg: ExperimentConfig):
    res = rational_concentration(NType(cfg.nu), NType(cfg.nu_dot), cfg.source(), cfg.k)
    return list(res.records)


RUNNERS = {
    "enumerate": run_enumerate,
    "project": run_project,
    "icet": run_icet,
    "cwlln": run_icet,
    "egcp": run_egcp,
    "rates": run_rates,
    "rcwlln": run_rcwlln,
    "rational": run_rational,
}


def run(cfg: ExperimentConfig):
    cfg.validate()
    return RUNNERS[cfg.law](cfg)
