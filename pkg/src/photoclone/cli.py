"""Command-line front end.

Examples::

    photoclone --experiment cloner --set M=2 --set eta=0:1:0.05 --format csv
    photoclone --config sweep.json --output sweep.csv
    photoclone --verify --tolerance 1e-15

Exit codes: 0 success, 1 usage or configuration error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from collections.abc import Mapping
from dataclasses import dataclass, field
from math import isclose, pi, sqrt

import numpy as np

from . import acceptance
from . import analysis as an
from . import circuits as cc
from .amplifier import AmplifierModel, amplifier_output, evolution_deviation
from .fock import overlap, relabel, single_photon_fidelity
from .postselection import success_probability_formula

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2

COLUMNS = (
    "experiment", "point", "M", "eta", "q", "phi", "lambda",
    "quantity", "simulated", "closed_form", "abs_diff", "provenance", "within_tolerance",
)

# parameter name -> (kind, default); kind "grid" floats, "igrid" integers, "int" scalar
EXPERIMENTS: dict[str, dict[str, tuple[str, object]]] = {
    "partial_symmetrizer": {"eta": ("grid", sqrt(2.0 / 3.0))},
    "cloner": {"M": ("igrid", 2), "eta": ("grid", None), "q": ("grid", None)},
    "partial_swap": {"phi": ("grid", pi / 2), "samples": ("int", 10)},
    "amplifier_oracle": {"lambda": ("grid", 0.3), "M": ("igrid", 2), "truncation": ("int", 12)},
    "formulas": {"M": ("igrid", {"start": 1, "stop": 10, "step": 1})},
}

TOP_KEYS = {"schema", "experiment", "parameters", "output", "seed", "tolerance", "max_m"}


class ConfigError(ValueError):
    pass


def expand_grid(name: str, spec, integer: bool = False) -> list:
    """Scalar, or {"start", "stop", "step"} inclusive arithmetic progression."""
    if isinstance(spec, bool):
        raise ConfigError(f"{name}: expected a number or grid, got a boolean")
    if isinstance(spec, (int, float)):
        values = [spec]
    elif isinstance(spec, Mapping):
        extra = set(spec) - {"start", "stop", "step"}
        if extra or len(spec) != 3:
            raise ConfigError(f"{name}: grid needs exactly start, stop, step")
        start, stop, step = (spec[k] for k in ("start", "stop", "step"))
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (start, stop, step)):
            raise ConfigError(f"{name}: grid entries must be numbers")
        if step <= 0 or stop < start:
            raise ConfigError(f"{name}: grid needs step > 0 and stop >= start")
        count = (stop - start) / step
        n = round(count)
        if abs(count - n) > 1e-9 * max(1.0, abs(count)):
            raise ConfigError(f"{name}: (stop - start) is not a whole number of steps")
        if n > 100000:
            raise ConfigError(f"{name}: grid too large")
        values = [start + i * step for i in range(n + 1)]
        values[-1] = stop
    else:
        raise ConfigError(f"{name}: expected a number or a start/stop/step grid")
    if integer:
        if any(float(v) != int(v) for v in values):
            raise ConfigError(f"{name}: expected integer values")
        return [int(v) for v in values]
    return [float(v) for v in values]


@dataclass
class ExperimentConfig:
    experiment: str
    parameters: dict = field(default_factory=dict)
    format: str = "csv"
    path: str | None = None
    seed: int = acceptance.DEFAULT_SEED
    tolerance: float | None = None
    max_m: int = an.DEFAULT_MAX_M

    @classmethod
    def from_dict(cls, d: Mapping) -> ExperimentConfig:
        if not isinstance(d, Mapping):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        if d.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema {d.get('schema')!r}; expected {SCHEMA_VERSION}")
        if "experiment" not in d:
            raise ConfigError("config must name an experiment")
        out = d.get("output", {}) or {}
        if set(out) - {"format", "path"}:
            raise ConfigError(f"unknown output key(s): {', '.join(sorted(set(out) - {'format', 'path'}))}")
        cfg = cls(
            experiment=d["experiment"],
            parameters=dict(d.get("parameters", {}) or {}),
            format=out.get("format", "csv"),
            path=out.get("path"),
            seed=d.get("seed", acceptance.DEFAULT_SEED),
            tolerance=d.get("tolerance"),
            max_m=d.get("max_m", an.DEFAULT_MAX_M),
        )
        cfg.validate()
        return cfg

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}"
            )
        allowed = EXPERIMENTS[self.experiment]
        unknown = set(self.parameters) - set(allowed)
        if unknown:
            raise ConfigError(
                f"unknown parameter(s) for {self.experiment}: {', '.join(sorted(unknown))}"
            )
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError("seed must be an integer")
        if self.tolerance is not None and (
            not isinstance(self.tolerance, (int, float)) or self.tolerance < 0
        ):
            raise ConfigError("tolerance must be a non-negative number")
        if not isinstance(self.max_m, int) or self.max_m < 2:
            raise ConfigError("max_m must be an integer >= 2")
        if self.experiment == "cloner" and "eta" in self.parameters and "q" in self.parameters:
            raise ConfigError("cloner: give eta or q, not both")
        self.resolved()

    def resolved(self) -> dict:
        """Parameters with defaults filled in and grids expanded."""
        out = {}
        for name, (kind, default) in EXPERIMENTS[self.experiment].items():
            spec = self.parameters.get(name, default)
            if spec is None:
                continue
            if kind == "int":
                if not isinstance(spec, int) or isinstance(spec, bool) or spec < 1:
                    raise ConfigError(f"{name}: expected a positive integer")
                out[name] = spec
            else:
                out[name] = expand_grid(name, spec, integer=(kind == "igrid"))
        if self.experiment == "cloner" and "eta" not in out and "q" not in out:
            out["eta"] = [sqrt(2.0 / 3.0)]
        return out


# ----------------------------------------------------------------------------
# experiments -> rows


class _Rows:
    def __init__(self, experiment: str, tolerance: float | None):
        self.experiment = experiment
        self.override = tolerance
        self.rows: list[dict] = []
        self.point = 0

    def next_point(self):
        self.point += 1

    def add(self, params, quantity, simulated, closed=None, provenance="", tol=1e-12):
        tol = tol if self.override is None else self.override
        diff = None
        ok = None
        if simulated is not None and closed is not None:
            diff = abs(simulated - closed)
            ok = diff <= tol
        row = {c: None for c in COLUMNS}
        row.update(
            experiment=self.experiment,
            point=self.point,
            quantity=quantity,
            simulated=None if simulated is None else float(simulated),
            closed_form=None if closed is None else float(closed),
            abs_diff=None if diff is None else float(diff),
            provenance=provenance,
            within_tolerance=ok,
        )
        row.update(params)
        self.rows.append(row)


def _partial_symmetrizer(cfg, params, rows):
    pp, pm = an.two_qubit_projectors()
    for eta in params["eta"]:
        rows.next_point()
        p = {"eta": eta}
        got = cc.symmetrizer_matrix(eta)
        want = an.partial_symmetrization_matrix(eta) / (2 * sqrt(2.0))
        rows.add(p, "map_max_deviation", float(np.max(np.abs(got - want))), 0.0,
                 "(Pi_plus + eta Pi_minus) / (2 sqrt 2)")
        inputs = {
            "psi_psiperp": np.array([0, 1, 0, 0], dtype=complex),
            "singlet": np.array([0, 1, -1, 0], dtype=complex) / sqrt(2.0),
            "psi_psi": np.array([1, 0, 0, 0], dtype=complex),
        }
        for label, vec in inputs.items():
            w_minus = float(np.real(np.vdot(vec, pm @ vec)))
            sim = cc.run_partial_symmetrizer(cc.two_photon_state(vec, "A_in", "B_in"), eta).probability
            closed = success_probability_formula(1.0 - w_minus, w_minus, eta)
            rows.add(p, f"probability_{label}", sim, closed, "(w_plus + eta^2 w_minus) / 8")


def _cloner(cfg, params, rows):
    if "q" in params:
        points = [(M, an.eta_from_q(q), q) for M in params["M"] for q in params["q"]]
    else:
        points = [(M, eta, an.q_from_eta(eta)) for M in params["M"] for eta in params["eta"]]
    for M, eta, q in points:
        if not 0.0 <= eta <= 1.0:
            raise ConfigError(f"cloner: q={q} gives eta={eta} outside [0, 1]")
        rows.next_point()
        p = {"M": M, "eta": eta, "q": q}
        res = cc.run_cloner(M, eta, max_m=cfg.max_m)
        q_sim, _ = cc.cloner_q(res)
        rows.add(p, "q", q_sim, q, "(1 - eta) / (1 + eta)")
        at_opt = M >= 2 and isclose(q, an.optimal_q(M), rel_tol=0.0, abs_tol=1e-12)
        if M == 2:
            closed, prov = an.fidelity_F2(q), "fidelity_F2(q)"
        elif at_opt:
            closed, prov = an.fidelity_Fperp(M), "fidelity_Fperp(M)"
        else:
            closed, prov = None, ""
        rows.add(p, "fidelity", res.fidelity, closed, prov, tol=1e-10 if M > 2 else 1e-12)
        rows.add(p, "anticlone_fidelity", res.anticlone_fidelity, closed, prov,
                 tol=1e-10 if M > 2 else 1e-12)
        target = an.target_state(M, "A_out", "B_out", max_m=max(cfg.max_m, M)).target
        rows.add(p, "overlap_with_target", overlap(target, res.state), 1.0 if at_opt else None,
                 "optimal covariant target" if at_opt else "", tol=1e-10)
        rows.add(p, "symmetrizer_probability", res.stage_probabilities[0],
                 success_probability_formula(0.5, 0.5, eta), "(1 + eta^2) / 16")
        rows.add(p, "clone_stage_probability", res.stage_probabilities[1])
        rows.add(p, "total_probability", res.probability)


def _partial_swap(cfg, params, rows):
    swap = np.eye(4)[[0, 2, 1, 3]]
    rng = np.random.default_rng(cfg.seed)
    for phi in params["phi"]:
        rows.next_point()
        p = {"phi": phi}
        got = cc.partial_swap_matrix(phi)
        want = an.partial_symmetrization_matrix(np.exp(1j * phi)) / (2 * sqrt(2.0))
        rows.add(p, "map_max_deviation", float(np.max(np.abs(got - want))), 0.0,
                 "(Pi_plus + exp(i phi) Pi_minus) / (2 sqrt 2)")
        circuit = cc.build_partial_swap(phi)
        for k in range(params["samples"]):
            vec = rng.normal(size=4) + 1j * rng.normal(size=4)
            vec /= np.linalg.norm(vec)
            prob = circuit.run(cc.two_photon_state(vec, "A_in", "B_in")).probability
            rows.add(p, f"probability_random_input_{k}", prob, 1 / 8, "1/8")
        twice = cc.two_stage_swap_matrix(phi, phi)
        u2 = an.partial_symmetrization_matrix(np.exp(2j * phi)) / 8
        rows.add(p, "two_stage_max_deviation", float(np.max(np.abs(twice - u2))), 0.0,
                 "(Pi_plus + exp(2 i phi) Pi_minus) / 8")
        if isclose((2 * phi) % (2 * pi), pi, abs_tol=1e-12):
            rows.add(p, "two_stage_swap_deviation", float(np.max(np.abs(twice - swap / 8))), 0.0,
                     "SWAP / 8")


def _amplifier_oracle(cfg, params, rows):
    trunc = params["truncation"]
    for lam in params["lambda"]:
        for M in params["M"]:
            rows.next_point()
            p = {"lambda": lam, "M": M}
            model = AmplifierModel.from_lambda(lam, max(trunc, 2 * M))
            rows.add(p, "factorized_vs_dense", evolution_deviation(model, sectors=(M,)), 0.0,
                     "exp(lam X)(1-lam^2)^(n/2+1)exp(-lam X^dag)", tol=1e-10)
            out = amplifier_output(model, M)
            rows.add(p, "fit_residual", out.residual, 0.0, "X^(M-1)(a b' + q a' b)|0>", tol=1e-10)
            rows.add(p, "q_fit", out.q_fit)
            rows.add(p, "heralding_probability", out.probability)
            eta = an.eta_from_q(out.q_fit)
            if M >= 2 and 0.0 <= eta <= 1.0 and M <= cfg.max_m:
                clone = cc.run_cloner(M, eta, max_m=cfg.max_m)
                ov = overlap(relabel(clone.state, {"A_out": "A", "B_out": "B"}), out.state)
                rows.add(p, "cloner_overlap", ov, 1.0, "linear-optics cloner at matched q", tol=1e-9)


def _formulas(cfg, params, rows):
    for M in params["M"]:
        rows.next_point()
        p = {"M": M}
        rows.add(p, "alpha_norm", an.alpha_norm(M), 1.0, "sum_j alpha(j,M)^2")
        rows.add(p, "fidelity_from_alphas", an.alpha_fidelity(M), an.fidelity_Fperp(M),
                 "fidelity_Fperp(M)")
        target = an.target_state(M, max_m=M).target
        rows.add(p, "target_state_fidelity", single_photon_fidelity(target, "A", 0),
                 an.fidelity_Fperp(M), "fidelity_Fperp(M)")
        if M >= 2:
            rows.add(p, "optimal_q", None, an.optimal_q(M),
                     "(sqrt(3M) - sqrt(M+2)) / (sqrt(3M) + sqrt(M+2))")


_RUNNERS = {
    "partial_symmetrizer": _partial_symmetrizer,
    "cloner": _cloner,
    "partial_swap": _partial_swap,
    "amplifier_oracle": _amplifier_oracle,
    "formulas": _formulas,
}


def run_experiment(cfg: ExperimentConfig) -> list[dict]:
    params = cfg.resolved()
    rows = _Rows(cfg.experiment, cfg.tolerance)
    try:
        _RUNNERS[cfg.experiment](cfg, params, rows)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{cfg.experiment}: {exc}") from exc
    return rows.rows


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return f"{v:.16e}"
    return str(v)


def render(rows: list[dict], fmt: str, meta: Mapping | None = None) -> str:
    if fmt == "json":
        doc = {"schema": SCHEMA_VERSION, **(meta or {}), "rows": rows}
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = list(rows[0].keys()) if rows else list(COLUMNS)
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def verify_all(tolerance=None, max_m=an.DEFAULT_MAX_M, seed=acceptance.DEFAULT_SEED, out=None):
    """Run every acceptance criterion, print one line per check; returns (ok, checks)."""
    out = sys.stdout if out is None else out
    checks = acceptance.run_all(tolerance=tolerance, max_m=max_m, seed=seed)
    for c in checks:
        print(c.line(), file=out)
    failed = [c for c in checks if not c.passed]
    by_criterion = {}
    for c in checks:
        by_criterion.setdefault(c.criterion, True)
        by_criterion[c.criterion] &= c.passed
    summary = " ".join(f"C{k}:{'pass' if v else 'FAIL'}" for k, v in by_criterion.items())
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed  [{summary}]", file=out)
    return not failed, checks


def _parse_set(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        key = key.strip()
        if raw.count(":") == 2:
            try:
                start, stop, step = (float(x) for x in raw.split(":"))
            except ValueError:
                raise ConfigError(f"--set {key}: bad grid {raw!r}") from None
            out[key] = {"start": start, "stop": stop, "step": step}
            continue
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            raise ConfigError(f"--set {key}: cannot parse value {raw!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="photoclone",
        description="Linear-optics cloning experiments and verification tables.",
    )
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--experiment", choices=sorted(EXPERIMENTS))
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="parameter override; VALUE is JSON or start:stop:step")
    p.add_argument("--output", help="write the table here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--tolerance", type=float, help="override every comparison tolerance")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-m", type=int, dest="max_m", help="cap on the number of clones")
    p.add_argument("--verify", action="store_true",
                   help="run the acceptance suite, or fail an experiment run on any out-of-tolerance row")
    return p


def _error(kind: str, message: str) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return EXIT_USAGE


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE

    if args.verify and not (args.config or args.experiment):
        max_m = args.max_m if args.max_m is not None else an.DEFAULT_MAX_M
        seed = args.seed if args.seed is not None else acceptance.DEFAULT_SEED
        ok, checks = verify_all(args.tolerance, max_m, seed)
        if args.output:
            rows = [
                {"criterion": c.criterion, "check": c.name, "measured": c.measured,
                 "expected": c.expected, "abs_diff": c.diff, "tolerance": c.tolerance,
                 "kind": c.kind, "passed": c.passed}
                for c in checks
            ]
            with open(args.output, "w") as fh:
                fh.write(render(rows, args.format or "csv"))
        return EXIT_OK if ok else EXIT_VERIFY

    try:
        doc: dict = {}
        if args.config:
            try:
                with open(args.config) as fh:
                    doc = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
            if not isinstance(doc, dict):
                raise ConfigError("config must be a JSON object")
        elif not args.experiment:
            raise ConfigError("give --config, --experiment or --verify")
        doc = dict(doc)
        if args.experiment:
            if doc.get("experiment", args.experiment) != args.experiment:
                # flags win over the config file; parameters from the file no longer apply
                doc["parameters"] = {}
            doc["experiment"] = args.experiment
        params = dict(doc.get("parameters", {}) or {})
        params.update(_parse_set(args.set))
        doc["parameters"] = params
        output = dict(doc.get("output", {}) or {})
        if args.format:
            output["format"] = args.format
        if args.output:
            output["path"] = args.output
        doc["output"] = output
        for key in ("tolerance", "seed", "max_m"):
            if getattr(args, key) is not None:
                doc[key] = getattr(args, key)
        cfg = ExperimentConfig.from_dict(doc)
        rows = run_experiment(cfg)
    except ConfigError as exc:
        return _error("config", str(exc))

    meta = {
        "experiment": cfg.experiment,
        "parameters": cfg.resolved(),
        "seed": cfg.seed,
        "tolerance": cfg.tolerance,
    }
    text = render(rows, cfg.format, meta)
    if cfg.path:
        with open(cfg.path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.verify and any(r["within_tolerance"] is False for r in rows):
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
