"""Closed-loop experiment runner and command-line interface.

Wires plants, controller variants (reference QP solver, firing-rate networks,
multilayer factorizations, pruned and slack-augmented networks) into
reproducible closed-loop experiments; emits per-variant CSV traces, a JSON
comparison report, and network graphs.  The sampled loop applies each variant's
control under a zero-order hold and propagates the plant between samples.

The environment variable NEURAL_MPC_LOG in {error, info, debug} controls
diagnostic verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analytics import NetworkGraph, degree_distributions, export_graph, extract_graph
from .condenser import (
    CondensedQp,
    InputConstraint,
    MpcProblem,
    NetworkData,
    StateConstraint,
    augment_slack,
    build_network,
    condense,
)
from .factorizer import (
    FactorizationProblem,
    identity_layer_init,
    palm_factorize,
    split_factors,
    stack_target,
)
from .network import (
    FiringRateNetwork,
    MultilayerNetwork,
    extract_control,
    extract_control_multilayer,
    settle,
    settle_multilayer,
)
from .perturber import control_deviation_bound, prune_edges
from .plant import (
    CartPoleParams,
    PlantModel,
    cart_pole_model,
    discretize_zoh,
    propagate_linear,
    propagate_nonlinear_cartpole,
    solve_dare,
)
from .qp_oracle import InfeasibleProblem, solve_active_set_enumeration

log = logging.getLogger("neural_mpc")

VARIANTS = (
    "oracle",
    "single_layer",
    "single_layer_eps",
    "multilayer_exact",
    "multilayer_approx",
    "perturbed",
    "slack",
)


@dataclass
class ExperimentConfig:
    """Resolved experiment description; defaults are the cart-pole benchmark."""

    plant_model: PlantModel
    ts: float = 0.02
    horizon: int = 2
    q: np.ndarray = None  # type: ignore[assignment]
    r: np.ndarray = None  # type: ignore[assignment]
    p_term: np.ndarray | str = "dare"
    state_con: StateConstraint = None  # type: ignore[assignment]
    input_con: InputConstraint = None  # type: ignore[assignment]
    x0: np.ndarray = None  # type: ignore[assignment]
    duration: float = 6.0
    variants: tuple[str, ...] = ("oracle", "single_layer", "multilayer_exact")
    eta: float = 1e-3
    eps0: float = 0.1
    rho: float = 1e4
    prune_threshold: float = 0.01
    prune_shift: float = 1e-4
    s_omega: int = 144
    s_psi: int = 144
    s_omega_approx: int = 40
    s_psi_approx: int = 40
    settle_tol: float = 1e-8
    warm_start: bool = True
    nonlinear_plant: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if not self.variants:
            raise ValueError("at least one controller variant is required")
        for v in self.variants:
            if v not in VARIANTS:
                raise ValueError(f"unknown variant {v!r}; valid: {VARIANTS}")
        if self.q is None:
            self.q = np.diag([10.0, 1.0, 500.0, 1.0])
        if self.r is None:
            self.r = np.array([[0.1]])
        if self.state_con is None:
            self.state_con = StateConstraint(
                c_rows=np.array([[1.0, 0, 0, 0], [0, 0, 1.0, 0]]),
                lower=np.array([-0.62, -0.1]),
                upper=np.array([0.62, 1.0]),
            )
        if self.input_con is None:
            self.input_con = InputConstraint(lower=np.array([-10.0]), upper=np.array([12.0]))
        if self.x0 is None:
            self.x0 = np.array([0.3, 0.0, 0.15, 0.0])
        self.x0 = np.asarray(self.x0, dtype=float)

    @classmethod
    def cart_pole_default(cls, **overrides) -> "ExperimentConfig":
        return cls(plant_model=cart_pole_model(), **overrides)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        plant_doc = doc.pop("plant", {"type": "cart_pole"})
        kind = plant_doc.get("type", "cart_pole")
        if kind in ("cart_pole", "cartpole"):
            params = CartPoleParams(
                cart_mass=plant_doc.get("cart_mass", 0.5),
                pend_mass=plant_doc.get("pend_mass", 0.4),
                length=plant_doc.get("length", 1.0),
                gravity=plant_doc.get("gravity", 9.81),
            )
            model = cart_pole_model(params)
        elif kind == "linear":
            model = PlantModel(np.array(plant_doc["a_c"]), np.array(plant_doc["b_c"]))
        else:
            raise ValueError(f"unknown plant type {kind!r}")

        kwargs: dict = {"plant_model": model}
        if "q" in doc:
            kwargs["q"] = _as_weight(doc.pop("q"))
        if "r" in doc:
            kwargs["r"] = _as_weight(doc.pop("r"))
        if "p_term" in doc:
            p = doc.pop("p_term")
            kwargs["p_term"] = p if isinstance(p, str) else np.array(p, dtype=float)
        if "state_constraints" in doc:
            sc = doc.pop("state_constraints")
            kwargs["state_con"] = StateConstraint(
                c_rows=np.array(sc["c_rows"], dtype=float),
                lower=np.array(sc["lower"], dtype=float),
                upper=np.array(sc["upper"], dtype=float),
            )
        if "input_constraints" in doc:
            ic = doc.pop("input_constraints")
            kwargs["input_con"] = InputConstraint(
                lower=np.array(ic["lower"], dtype=float),
                upper=np.array(ic["upper"], dtype=float),
            )
        if "x0" in doc:
            kwargs["x0"] = np.array(doc.pop("x0"), dtype=float)
        if "variants" in doc:
            kwargs["variants"] = tuple(doc.pop("variants"))
        for key in (
            "ts", "horizon", "duration", "eta", "eps0", "rho",
            "prune_threshold", "prune_shift", "s_omega", "s_psi",
            "s_omega_approx", "s_psi_approx", "settle_tol",
            "warm_start", "nonlinear_plant", "seed",
        ):
            if key in doc:
                kwargs[key] = doc.pop(key)
        if doc:
            raise ValueError(f"unknown config keys: {sorted(doc)}")
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "plant": {
                "type": "linear",
                "a_c": self.plant_model.a_c.tolist(),
                "b_c": self.plant_model.b_c.tolist(),
            }
            if self.plant_model.cart_pole_params is None
            else {
                "type": "cart_pole",
                "cart_mass": self.plant_model.cart_pole_params.cart_mass,
                "pend_mass": self.plant_model.cart_pole_params.pend_mass,
                "length": self.plant_model.cart_pole_params.length,
                "gravity": self.plant_model.cart_pole_params.gravity,
            },
            "ts": self.ts,
            "horizon": self.horizon,
            "q": self.q.tolist(),
            "r": self.r.tolist(),
            "p_term": self.p_term if isinstance(self.p_term, str) else self.p_term.tolist(),
            "state_constraints": {
                "c_rows": self.state_con.c_rows.tolist(),
                "lower": self.state_con.lower.tolist(),
                "upper": self.state_con.upper.tolist(),
            },
            "input_constraints": {
                "lower": self.input_con.lower.tolist(),
                "upper": self.input_con.upper.tolist(),
            },
            "x0": self.x0.tolist(),
            "duration": self.duration,
            "variants": list(self.variants),
            "eta": self.eta,
            "eps0": self.eps0,
            "rho": self.rho,
            "prune_threshold": self.prune_threshold,
            "prune_shift": self.prune_shift,
            "s_omega": self.s_omega,
            "s_psi": self.s_psi,
            "s_omega_approx": self.s_omega_approx,
            "s_psi_approx": self.s_psi_approx,
            "settle_tol": self.settle_tol,
            "warm_start": self.warm_start,
            "nonlinear_plant": self.nonlinear_plant,
            "seed": self.seed,
        }


def _as_weight(value) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.ndim == 0:
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        return np.diag(arr)
    return arr


@dataclass
class ClosedLoopTrace:
    """Per-sample closed-loop records for one controller variant."""

    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    settled: np.ndarray
    lam_norm: np.ndarray
    violation: np.ndarray


@dataclass
class ExperimentResult:
    traces: dict[str, ClosedLoopTrace]
    report: dict
    graphs: dict[str, NetworkGraph]


def build_problem(config: ExperimentConfig) -> tuple[MpcProblem, CondensedQp, NetworkData]:
    """Discretize the plant, resolve the terminal weight, condense, build weights."""
    dplant = discretize_zoh(config.plant_model, config.ts)
    if isinstance(config.p_term, str):
        if config.p_term != "dare":
            raise ValueError(f"unknown p_term value {config.p_term!r}")
        p_term = solve_dare(dplant.a, dplant.b, config.q, config.r)
    else:
        p_term = config.p_term
    problem = MpcProblem(
        plant=dplant,
        horizon=config.horizon,
        q=config.q,
        r=config.r,
        p_term=p_term,
        state_con=config.state_con,
        input_con=config.input_con,
    )
    qp = condense(problem)
    return problem, qp, build_network(qp)


class _OracleController:
    def __init__(self, qp: CondensedQp):
        self.qp = qp
        self.last_u = np.zeros(qp.upsilon_rows)

    def compute(self, x, record=False):
        try:
            sol = solve_active_set_enumeration(self.qp, x)
        except InfeasibleProblem:
            log.info("oracle: infeasible sample, holding previous input")
            return self.last_u, False, float("nan"), None
        u = sol.u[: self.qp.upsilon_rows]
        self.last_u = u
        return u, True, float(np.linalg.norm(sol.lam)), None


class _SingleLayerController:
    def __init__(self, data: NetworkData, config: ExperimentConfig, eps0: float):
        self.net = FiringRateNetwork(data=data, eta=config.eta, eps0=eps0)
        self.tol = config.settle_tol
        self.budget = config.ts
        self.warm = config.warm_start

    def compute(self, x, record=False):
        if not self.warm:
            self.net.reset()
        if record:
            lam, settled, times, traj = settle(
                self.net, x, tol=self.tol, max_time=self.budget, record=True
            )
            extra = (times, traj)
        else:
            lam, settled = settle(self.net, x, tol=self.tol, max_time=self.budget)
            extra = None
        u = extract_control(self.net, lam, x)
        return u, settled, float(np.linalg.norm(lam)), extra


class _MultilayerController:
    def __init__(self, net: MultilayerNetwork, aux: NetworkData, config: ExperimentConfig):
        self.net = net
        self.aux = aux
        self.tol = config.settle_tol
        self.budget = config.ts
        self.warm = config.warm_start

    def compute(self, x, record=False):
        if not self.warm:
            self.net.reset()
        state, settled = settle_multilayer(
            self.net, self.aux, x, tol=self.tol, max_time=self.budget
        )
        u = extract_control_multilayer(self.net, self.aux, x)
        return u, settled, float(np.linalg.norm(state)), None


def _make_controller(variant, config, qp, data, shared):
    if variant == "oracle":
        return _OracleController(qp)
    if variant == "single_layer":
        return _SingleLayerController(data, config, eps0=0.0)
    if variant == "single_layer_eps":
        return _SingleLayerController(data, config, eps0=config.eps0)
    if variant in ("multilayer_exact", "multilayer_approx"):
        key = "exact" if variant == "multilayer_exact" else "approx"
        factors = shared["factorization"][key]
        net = MultilayerNetwork(
            omega1=factors["omega1"],
            omega2=factors["omega2"],
            psi=factors["psi"],
            eta=config.eta,
            residual=factors["residual"],
        )
        return _MultilayerController(net, data, config)
    if variant == "perturbed":
        pert = shared["perturbation"]
        pdata = NetworkData(
            gamma=data.gamma + pert.delta,
            m_map=data.m_map,
            bias=data.bias,
            u_feedback=data.u_feedback,
            u_dual_map=data.u_dual_map,
            node_labels=data.node_labels,
        )
        return _SingleLayerController(pdata, config, eps0=0.0)
    if variant == "slack":
        sdata, _ = shared["slack"]
        return _SingleLayerController(sdata, config, eps0=0.0)
    raise ValueError(f"unknown variant {variant!r}")


def _factorize(data: NetworkData, s_omega: int, s_psi: int, k_bar: int = 100_000):
    theta = stack_target(data.gamma, data.u_dual_map)
    prob = FactorizationProblem(theta=theta, s_omega=s_omega, s_psi=s_psi, k_bar=k_bar)
    # Start from the zero-residual factorization with an identity hidden layer
    # (when the synaptic matrix is invertible) so the sparsified factors keep
    # the recurrence in the second layer rather than mirroring it.
    try:
        omega0, psi0 = identity_layer_init(data.gamma, data.u_dual_map)
    except np.linalg.LinAlgError:
        omega0 = psi0 = None
    omega, psi, history = palm_factorize(prob, omega0=omega0, psi0=psi0)
    omega1, omega2 = split_factors(omega, data.u_dual_map.shape[0])
    return {
        "omega1": omega1,
        "omega2": omega2,
        "psi": psi,
        "residual": float(history[-1]),
        "iterations": int(len(history)),
        "history": history,
    }


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every requested controller variant in closed loop and compare them.

    Each variant reads the sampled state of its own loop, computes its control,
    holds it for one sample period, and the plant propagates (linear model by
    default, nonlinear cart-pole when configured).  The report collects max
    pairwise control/state deviations, constraint-violation counts, settle
    statistics, factorization residuals, and deviation-bound checks for the
    pruned variant.
    """
    problem, qp, data = build_problem(config)
    n_samples = int(round(config.duration / config.ts))
    model = config.plant_model
    params = model.cart_pole_params
    if config.nonlinear_plant and params is None:
        raise ValueError("nonlinear plant requested but no cart-pole parameters present")

    shared: dict = {}
    if "multilayer_exact" in config.variants:
        shared.setdefault("factorization", {})["exact"] = _factorize(
            data, config.s_omega, config.s_psi
        )
    if "multilayer_approx" in config.variants:
        shared.setdefault("factorization", {})["approx"] = _factorize(
            data, config.s_omega_approx, config.s_psi_approx
        )
    if "perturbed" in config.variants:
        shared["perturbation"] = prune_edges(
            data.gamma, config.prune_threshold, config.prune_shift
        )
    if "slack" in config.variants:
        shared["slack"] = augment_slack(qp, config.rho)

    record_nominal = "perturbed" in config.variants and "single_layer" in config.variants

    traces: dict[str, ClosedLoopTrace] = {}
    runtimes: dict[str, float] = {}
    nominal_settle: list = []
    for variant in config.variants:
        controller = _make_controller(variant, config, qp, data, shared)
        record = record_nominal and variant == "single_layer"
        tic = time.perf_counter()
        trace = _run_loop(controller, config, n_samples, record, nominal_settle)
        runtimes[variant] = time.perf_counter() - tic
        traces[variant] = trace
        log.info("variant %s finished in %.2f s", variant, runtimes[variant])

    report = _build_report(config, traces, shared, runtimes, data, nominal_settle)
    graphs = _build_graphs(data, shared)
    return ExperimentResult(traces=traces, report=report, graphs=graphs)


def _run_loop(controller, config, n_samples, record, nominal_settle):
    model = config.plant_model
    x = config.x0.copy()
    n = model.state_dim
    p = model.input_dim
    ts = config.ts
    t_arr = np.zeros(n_samples)
    x_arr = np.zeros((n_samples, n))
    u_arr = np.zeros((n_samples, p))
    settled_arr = np.zeros(n_samples, dtype=bool)
    lam_arr = np.zeros(n_samples)
    viol_arr = np.zeros(n_samples)
    sc = config.state_con
    for j in range(n_samples):
        u, settled, lam_norm, extra = controller.compute(x, record=record)
        if record:
            nominal_settle.append(extra)
        t_arr[j] = j * ts
        x_arr[j] = x
        u_arr[j] = u
        settled_arr[j] = settled
        lam_arr[j] = lam_norm
        out = sc.c_rows @ x
        viol_arr[j] = max(
            0.0, float(np.max(np.maximum(out - sc.upper, sc.lower - out)))
        )
        if config.nonlinear_plant:
            x = propagate_nonlinear_cartpole(model.cart_pole_params, x, u, ts)
        else:
            x = propagate_linear(model, x, u, ts)
        if not np.isfinite(x).all():
            raise FloatingPointError("closed-loop state diverged to non-finite values")
    return ClosedLoopTrace(
        t=t_arr, x=x_arr, u=u_arr, settled=settled_arr, lam_norm=lam_arr, violation=viol_arr
    )


def _build_report(config, traces, shared, runtimes, data, nominal_settle):
    report: dict = {
        "config": config.to_dict(),
        "samples": int(round(config.duration / config.ts)),
        "runtime_seconds": {k: round(v, 4) for k, v in runtimes.items()},
        "pairwise": {},
        "constraint_violations": {},
        "settled_fraction": {},
    }
    names = list(traces)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            du = float(np.max(np.abs(traces[a].u - traces[b].u)))
            dx = float(np.max(np.abs(traces[a].x - traces[b].x)))
            report["pairwise"][f"{a}|{b}"] = {
                "max_control_deviation": du,
                "max_state_deviation": dx,
            }
    for name, tr in traces.items():
        report["constraint_violations"][name] = {
            "count": int(np.sum(tr.violation > 1e-6)),
            "max_margin": float(np.max(tr.violation)),
        }
        report["settled_fraction"][name] = float(np.mean(tr.settled))

    if "factorization" in shared:
        report["factorization"] = {
            key: {
                "residual": fac["residual"],
                "iterations": fac["iterations"],
                "nnz_omega": int(np.count_nonzero(np.vstack([fac["omega1"], fac["omega2"]]))),
                "nnz_psi": int(np.count_nonzero(fac["psi"])),
            }
            for key, fac in shared["factorization"].items()
        }

    if "perturbation" in shared:
        pert = shared["perturbation"]
        entry = {
            "threshold": config.prune_threshold,
            "diag_shift": config.prune_shift,
            "contracting": bool(pert.contracting),
            "mu": float(pert.mu),
            "nnz_before": int(np.count_nonzero(data.gamma)),
            "nnz_after": int(np.count_nonzero(data.gamma + pert.delta)),
        }
        if nominal_settle and "perturbed" in traces and "single_layer" in traces:
            checks = []
            tr1, tr2 = traces["single_layer"], traces["perturbed"]
            for j, extra in enumerate(nominal_settle):
                _, traj = extra
                bound = control_deviation_bound(
                    data, pert.delta, tr1.x[j], tr2.x[j], traj, pert.mu
                )
                measured = float(np.linalg.norm(tr1.u[j] - tr2.u[j]))
                checks.append(
                    {
                        "t": float(tr1.t[j]),
                        "bound": bound,
                        "measured": measured,
                        "margin": bound - measured,
                    }
                )
            entry["bound_checks"] = checks
            entry["min_margin"] = min(c["margin"] for c in checks)
        report["perturbation"] = entry

    if "slack" in shared:
        _, meta = shared["slack"]
        report["slack"] = {"rho": meta.rho, "m": meta.m, "m_s": meta.m_s}
    return report


def _build_graphs(data, shared) -> dict[str, NetworkGraph]:
    graphs = {"gamma": extract_graph(data.gamma, labels=data.node_labels)}
    fac = shared.get("factorization", {}).get("exact")
    if fac is not None:
        graphs["omega1"] = extract_graph(fac["omega1"])
        graphs["psi"] = extract_graph(fac["psi"])
    if "perturbation" in shared:
        graphs["gamma_pruned"] = extract_graph(
            data.gamma + shared["perturbation"].delta, labels=data.node_labels
        )
    if "slack" in shared:
        sdata, _ = shared["slack"]
        graphs["gamma_slack"] = extract_graph(sdata.gamma, labels=sdata.node_labels)
    return graphs


def write_trace_csv(trace: ClosedLoopTrace, path: str | Path) -> None:
    """Write a trace with fixed column order t,x1..xn,u1..up,settled."""
    n = trace.x.shape[1]
    p = trace.u.shape[1]
    header = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"u{i + 1}" for i in range(p)]
    header.append("settled")
    lines = [",".join(header)]
    for j in range(len(trace.t)):
        cells = [repr(float(trace.t[j]))]
        cells += [repr(float(v)) for v in trace.x[j]]
        cells += [repr(float(v)) for v in trace.u[j]]
        cells.append(str(int(trace.settled[j])))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def qp_to_json(qp: CondensedQp, data: NetworkData) -> dict:
    """JSON document with the condensed QP and the derived network weights."""
    return {
        "h": qp.h.tolist(),
        "s": qp.s.tolist(),
        "g_mat": qp.g_mat.tolist(),
        "t_mat": qp.t_mat.tolist(),
        "g_vec": qp.g_vec.tolist(),
        "m": qp.m,
        "upsilon_rows": qp.upsilon_rows,
        "row_labels": qp.row_labels,
        "input_row_count": qp.input_row_count,
        "network": {
            "gamma": data.gamma.tolist(),
            "m_map": data.m_map.tolist(),
            "bias": data.bias.tolist(),
            "u_feedback": data.u_feedback.tolist(),
            "u_dual_map": data.u_dual_map.tolist(),
        },
    }


def _write_or_print(text: str, out: str | None):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig.cart_pole_default()
    return ExperimentConfig.from_json(path)


def _load_matrix(path: str) -> tuple[np.ndarray, list[str] | None]:
    with open(path) as fh:
        doc = json.load(fh)
    labels = None
    if isinstance(doc, dict):
        labels = doc.get("labels")
        for key in ("gamma", "matrix"):
            if key in doc:
                doc = doc[key]
                break
        else:
            if "network" in doc:
                doc = doc["network"]["gamma"]
            else:
                raise ValueError(f"no matrix found in {path}")
    return np.array(doc, dtype=float), labels


def _cmd_condense(args) -> int:
    config = _load_config(args.config)
    _, qp, data = build_problem(config)
    _write_or_print(json.dumps(qp_to_json(qp, data), indent=2) + "\n", args.out)
    return 0


def _cmd_simulate(args) -> int:
    config = _load_config(args.config)
    result = run_experiment(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, trace in result.traces.items():
        write_trace_csv(trace, out / f"{name}.csv")
    (out / "report.json").write_text(json.dumps(result.report, indent=2) + "\n")
    log.info("wrote %d traces to %s", len(result.traces), out)
    return 0


def _cmd_factorize(args) -> int:
    config = _load_config(args.config)
    _, _, data = build_problem(config)
    fac = _factorize(data, args.s_omega, args.s_psi)
    doc = {
        "s_omega": args.s_omega,
        "s_psi": args.s_psi,
        "residual": fac["residual"],
        "iterations": fac["iterations"],
        "omega1": fac["omega1"].tolist(),
        "omega2": fac["omega2"].tolist(),
        "psi": fac["psi"].tolist(),
    }
    _write_or_print(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def _cmd_perturb(args) -> int:
    config = _load_config(args.config)
    if args.threshold is not None:
        config.prune_threshold = args.threshold
    if args.shift is not None:
        config.prune_shift = args.shift
    _, _, data = build_problem(config)
    pert = prune_edges(data.gamma, config.prune_threshold, config.prune_shift)
    doc = {
        "threshold": config.prune_threshold,
        "diag_shift": config.prune_shift,
        "contracting": bool(pert.contracting),
        "mu": float(pert.mu),
        "nnz_before": int(np.count_nonzero(data.gamma)),
        "nnz_after": int(np.count_nonzero(data.gamma + pert.delta)),
        "delta": pert.delta.tolist(),
    }
    _write_or_print(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def _cmd_analyze(args) -> int:
    matrix, labels = _load_matrix(args.matrix)
    graph = extract_graph(matrix, threshold=args.threshold, labels=labels)
    payload = export_graph(graph, format=args.format).decode()
    _write_or_print(payload, args.out)
    return 0


def _cmd_reproduce(args) -> int:
    config = ExperimentConfig.cart_pole_default(variants=VARIANTS)
    result = run_experiment(config)
    out = Path(args.out)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    (out / "graphs").mkdir(parents=True, exist_ok=True)
    for name, trace in result.traces.items():
        write_trace_csv(trace, out / "traces" / f"{name}.csv")
    for name, graph in result.graphs.items():
        (out / "graphs" / f"{name}.json").write_bytes(export_graph(graph, "json"))
        (out / "graphs" / f"{name}.dot").write_bytes(export_graph(graph, "dot"))
    lines = ["matrix,degree,in_count,out_count"]
    for name, graph in result.graphs.items():
        in_hist, out_hist = degree_distributions(graph)
        for k in range(len(in_hist)):
            lines.append(f"{name},{k},{in_hist[k]},{out_hist[k]}")
    (out / "degree_distributions.csv").write_text("\n".join(lines) + "\n")
    (out / "report.json").write_text(json.dumps(result.report, indent=2) + "\n")
    sys.stdout.write(f"benchmark suite written to {out}\n")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neural-mpc",
        description="Compile constrained linear MPC into firing-rate networks and study them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("condense", help="emit the condensed QP and network weights as JSON")
    p.add_argument("--config", help="experiment config JSON (default: built-in benchmark)")
    p.add_argument("--out", default="-", help="output path (default stdout)")
    p.set_defaults(func=_cmd_condense)

    p = sub.add_parser("simulate", help="run a closed-loop experiment from a config file")
    p.add_argument("--config", help="experiment config JSON (default: built-in benchmark)")
    p.add_argument("--out", required=True, help="output directory for CSV traces + report")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("factorize", help="factorize the network with nonzero budgets")
    p.add_argument("--config", help="experiment config JSON (default: built-in benchmark)")
    p.add_argument("--s-omega", type=int, default=144, dest="s_omega")
    p.add_argument("--s-psi", type=int, default=144, dest="s_psi")
    p.add_argument("--out", default="-", help="output path (default stdout)")
    p.set_defaults(func=_cmd_factorize)

    p = sub.add_parser("perturb", help="prune edges and report the contraction check")
    p.add_argument("--config", help="experiment config JSON (default: built-in benchmark)")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--shift", type=float, default=None)
    p.add_argument("--out", default="-", help="output path (default stdout)")
    p.set_defaults(func=_cmd_perturb)

    p = sub.add_parser("analyze", help="extract a graph from a matrix JSON and export it")
    p.add_argument("--matrix", required=True, help="JSON file with a square matrix")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.add_argument("--threshold", type=float, default=1e-5)
    p.add_argument("--out", default="-", help="output path (default stdout)")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser(
        "reproduce-paper",
        help="run the full cart-pole benchmark suite and write traces, graphs, and the report",
    )
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_reproduce)
    return parser


def _configure_logging():
    level_name = os.environ.get("NEURAL_MPC_LOG", "error").lower()
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        level_name, logging.ERROR
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def cli_main(argv: list[str] | None = None) -> int:
    """Entry point; returns the process exit code (0 ok, 1 failure, 2 usage)."""
    _configure_logging()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, np.linalg.LinAlgError, InfeasibleProblem) as exc:
        sys.stderr.write(f"error: {exc}\n")
        log.debug("traceback", exc_info=True)
        return 1


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))
