"""Command-line interface: solve, verify, experiment, dataset, delta-search.

Configuration resolves in layers: built-in defaults, then a named preset,
then a key=value config file, then explicit flags. Every output file embeds
the fully resolved configuration in comment lines, and contains nothing
nondeterministic, so a rerun with the same configuration and seed is
byte-identical.
"""

from __future__ import annotations

import configparser
import csv
import json
from dataclasses import dataclass
from itertools import product
from pathlib import Path

import click

from .policies import (
    deadline_policy,
    delta_policy,
    greedy_policy,
    optimize_delta,
    table_policy,
)
from .solver import value_iterate
from .states import ModelParams, cardinality
from .stats import summarize
from .structure import export_policy_grid, reachable_set, run_all_checks
from .simulate import coupled_experiment

# Named parameter scenarios; values are strings so they merge uniformly
# with config files and flags.
PRESETS: dict[str, dict[str, str]] = {
    "fig4a": {"L": "2,3,5,7,10", "T": "10", "p": "0.1", "cex": "15", "omega": "1", "gamma": "1"},
    "fig4b": {"L": "2,3,5,7,10", "T": "10", "p": "0.2", "cex": "7", "omega": "1", "gamma": "1"},
    "fig4c": {"L": "2,3,5,7,10", "T": "10", "p": "0.6", "cex": "30", "omega": "1", "gamma": "1"},
    "fig5a": {"L": "2,3,5,7", "T": "20", "p": "0.5", "cex": "25", "omega": "1", "gamma": "0.8"},
    "fig5b": {"L": "2,3,5,7", "T": "20", "p": "0.1", "cex": "100", "omega": "1", "gamma": "0.9"},
    "fig5c": {"L": "20,40,60,80,100", "T": "100", "p": "0.3", "cex": "100", "omega": "1.5", "gamma": "0.8"},
}

DEFAULTS: dict[str, str] = {
    "L": "3",
    "T": "10",
    "p": "0.2",
    "cex": "7",
    "omega": "1",
    "gamma": "1",
    "replications": "20",
    "slots": "100000",
    "seed": "0",
    "out": "out",
    "policies": "optimal,delta,deadline,greedy",
    "solve_budget": "100000",
    "search_replications": "5",
    "search_slots": "20000",
}

# Instances considered for threshold-labeling sweeps must stay enumerable.
DATASET_STATE_BUDGET = 90_000


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved run configuration (strings already parsed)."""

    L_values: tuple[int, ...]
    T: int
    p: float
    cex: float
    omega: float
    gamma: float
    replications: int
    slots: int
    seed: int
    out: str
    policies: tuple[str, ...]
    solve_budget: int
    search_replications: int
    search_slots: int

    def params_for(self, L: int) -> ModelParams:
        return ModelParams(L=L, T=self.T, p=self.p, c_ex=self.cex, omega=self.omega, gamma=self.gamma)

    def as_provenance(self) -> dict[str, str]:
        return {
            "L": ",".join(str(v) for v in self.L_values),
            "T": str(self.T),
            "p": _fmt(self.p),
            "cex": _fmt(self.cex),
            "omega": _fmt(self.omega),
            "gamma": _fmt(self.gamma),
            "replications": str(self.replications),
            "slots": str(self.slots),
            "seed": str(self.seed),
            "policies": ",".join(self.policies),
            "solve_budget": str(self.solve_budget),
            "search_replications": str(self.search_replications),
            "search_slots": str(self.search_slots),
        }


def _fmt(x: float) -> str:
    return repr(float(x))


def _load_config_file(path: str) -> dict[str, str]:
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys are case sensitive (L vs p)
    parser.read_string("[config]\n" + Path(path).read_text())
    return dict(parser["config"])


def _resolve_config(preset: str | None, config_path: str | None, flags: dict) -> ScenarioConfig:
    merged = dict(DEFAULTS)
    if preset is not None:
        if preset not in PRESETS:
            raise click.ClickException(f"unknown preset {preset!r}")
        merged.update(PRESETS[preset])
    if config_path is not None:
        for key, value in _load_config_file(config_path).items():
            if key not in DEFAULTS:
                raise click.ClickException(f"unknown config key {key!r}")
            merged[key] = value
    for key, value in flags.items():
        if value is not None:
            merged[key] = str(value)
    try:
        return ScenarioConfig(
            L_values=tuple(int(part) for part in merged["L"].split(",") if part.strip()),
            T=int(merged["T"]),
            p=float(merged["p"]),
            cex=float(merged["cex"]),
            omega=float(merged["omega"]),
            gamma=float(merged["gamma"]),
            replications=int(merged["replications"]),
            slots=int(merged["slots"]),
            seed=int(merged["seed"]),
            out=merged["out"],
            policies=tuple(part.strip() for part in merged["policies"].split(",") if part.strip()),
            solve_budget=int(merged["solve_budget"]),
            search_replications=int(merged["search_replications"]),
            search_slots=int(merged["search_slots"]),
        )
    except ValueError as err:
        raise click.ClickException(f"bad configuration value: {err}") from err


def _tag(params: ModelParams) -> str:
    return (
        f"L{params.L}_T{params.T}_p{params.p:g}_cex{params.c_ex:g}"
        f"_omega{params.omega:g}_gamma{params.gamma:g}"
    )


def _write_csv(path: Path, provenance: dict[str, str], header: list[str], rows: list[list[str]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for key, value in provenance.items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _model_options(f):
    options = [
        click.option("--preset", type=click.Choice(sorted(PRESETS)), default=None, help="Named parameter scenario."),
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None, help="key=value file mirroring the flags."),
        click.option("--L", "L", default=None, help="Station capacity, or comma list for sweeps."),
        click.option("--T", "T", type=int, default=None, help="Deadline horizon."),
        click.option("--p", "p", type=float, default=None, help="Per-slot arrival probability."),
        click.option("--cex", type=float, default=None, help="Expiration penalty."),
        click.option("--omega", type=float, default=None, help="Per-truck per-slot waiting cost."),
        click.option("--gamma", type=float, default=None, help="Dispatch-penalty shape factor."),
        click.option("--seed", type=int, default=None, help="Master seed for all randomness."),
        click.option("--out", default=None, help="Output directory."),
        click.option("--solve-budget", "solve_budget", type=int, default=None, help="Largest state count the solver will enumerate."),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _sim_options(f):
    options = [
        click.option("--replications", type=int, default=None, help="Replications per policy."),
        click.option("--slots", type=int, default=None, help="Slots per replication."),
        click.option("--policies", default=None, help="Comma list: optimal,delta,deadline,greedy."),
        click.option("--search-replications", "search_replications", type=int, default=None, help="Replications for simulated threshold search."),
        click.option("--search-slots", "search_slots", type=int, default=None, help="Slots for simulated threshold search."),
    ]
    for option in reversed(options):
        f = option(f)
    return f


@click.group()
def main() -> None:
    """Finite-capacity platoon dispatch: solver, checks, simulation."""


@main.command("solve")
@_model_options
def cmd_solve(preset, config_path, **flags) -> None:
    """Solve instances and write value/policy tables and the policy grid."""
    cfg = _resolve_config(preset, config_path, flags)
    outdir = Path(cfg.out)
    for L in cfg.L_values:
        params = cfg.params_for(L)
        size = cardinality(params)
        if size > cfg.solve_budget:
            raise click.ClickException(
                f"SIZE_EXCEEDED: instance L={L}, T={cfg.T} has {size} states, "
                f"over the solve budget of {cfg.solve_budget}"
            )
        values, policy, report = value_iterate(params)
        reach = reachable_set(policy, params)
        tag = _tag(params)
        provenance = {"command": "solve", "instance": tag, **cfg.as_provenance()}

        rows = []
        for i, s in enumerate(values.space.decision_states):
            rows.append([s.text(), _fmt(values.values[i]), _fmt(policy.deltas[i]), policy.decide(s).name])
        _write_csv(outdir / f"{tag}_policy.csv", provenance, ["state", "V", "delta", "action"], rows)

        grid_rows = []
        for row in export_policy_grid(policy, params, reach):
            grid_rows.append([
                row.state.text(),
                "" if row.d2 is None else str(row.d2),
                "" if row.d1 is None else str(row.d1),
                row.action.name,
                "1" if row.reachable else "0",
            ])
        _write_csv(outdir / f"{tag}_grid.csv", provenance, ["state", "d2", "d1", "action", "reachable"], grid_rows)

        _write_json(outdir / f"{tag}_solve.json", {
            "instance": tag,
            "config": cfg.as_provenance(),
            "states": size,
            "iterations_run": report.iterations_run,
            "policy_stable_at": report.policy_stable_at,
            "average_cost_estimate": report.average_cost_estimate,
            "converged": report.converged,
            "warnings": list(report.warnings),
        })
        click.echo(
            f"{tag}: {size} states, {report.iterations_run} sweeps, "
            f"average cost ~ {report.average_cost_estimate:.6f}"
        )
        for warning in report.warnings:
            click.echo(f"  warning: {warning}")


@main.command("verify")
@_model_options
@click.pass_context
def cmd_verify(ctx, preset, config_path, **flags) -> None:
    """Solve instances and run the structural checks on the solved policy.

    Exits nonzero exactly when a capacity-3 instance has violations; checks
    at other capacities are advisory.
    """
    cfg = _resolve_config(preset, config_path, flags)
    outdir = Path(cfg.out)
    strict_failure = False
    for L in cfg.L_values:
        params = cfg.params_for(L)
        size = cardinality(params)
        if size > cfg.solve_budget:
            raise click.ClickException(
                f"SIZE_EXCEEDED: instance L={L}, T={cfg.T} has {size} states, "
                f"over the solve budget of {cfg.solve_budget}"
            )
        _, policy, report = value_iterate(params)
        reports = run_all_checks(policy, params)
        tag = _tag(params)
        advisory = params.L != 3
        _write_json(outdir / f"{tag}_properties.json", {
            "instance": tag,
            "config": cfg.as_provenance(),
            "advisory": advisory,
            "reports": [r.to_json_dict() for r in reports],
        })
        mode = "advisory" if advisory else "strict"
        click.echo(f"{tag} ({mode}):")
        for r in reports:
            status = "ok" if r.ok else f"{len(r.violations)} violation(s)"
            click.echo(f"  property {r.property_id}: {status} ({r.checked} checked)")
            if not r.ok and not advisory:
                strict_failure = True
    if strict_failure:
        ctx.exit(1)


def _build_policies(cfg: ScenarioConfig, params: ModelParams, notes: list[str], delta_lookup) -> list:
    size = cardinality(params)
    chosen = []
    for name in cfg.policies:
        if name == "optimal":
            if size > cfg.solve_budget:
                notes.append(f"L={params.L}: optimal skipped, {size} states over budget {cfg.solve_budget}")
                continue
            _, table, report = value_iterate(params)
            chosen.append(table_policy(table))
            for warning in report.warnings:
                notes.append(f"L={params.L}: {warning}")
        elif name == "delta":
            if delta_lookup is not None:
                delta = delta_lookup(params)
                notes.append(f"L={params.L}: delta={delta} from predictions file")
            elif size <= cfg.solve_budget:
                result = optimize_delta(params, "exact")
                delta = result.best_delta
            else:
                result = optimize_delta(
                    params,
                    "simulated",
                    replications=cfg.search_replications,
                    slots_per_run=cfg.search_slots,
                    master_seed=cfg.seed,
                )
                delta = result.best_delta
                notes.append(f"L={params.L}: threshold search ran in simulated mode ({size} states over budget)")
            chosen.append(delta_policy(delta, params))
        elif name == "deadline":
            chosen.append(deadline_policy(params))
        elif name == "greedy":
            chosen.append(greedy_policy(params))
        else:
            raise click.ClickException(f"unknown policy {name!r}")
    return chosen


def _load_delta_predictions(path: str):
    """Threshold lookup keyed by instance parameters, from a predictions CSV."""
    table: dict[tuple, int] = {}
    with open(path) as fh:
        header: list[str] | None = None
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
                continue
            record = dict(zip(header, line.split(",")))
            key = (
                int(float(record["L"])),
                int(float(record["T"])),
                round(float(record["p"]), 12),
                round(float(record["c_ex"]), 12),
                round(float(record["omega"]), 12),
                round(float(record["gamma"]), 12),
            )
            table[key] = int(float(record["delta_predicted"]))

    def lookup(params: ModelParams) -> int:
        key = (
            params.L,
            params.T,
            round(params.p, 12),
            round(params.c_ex, 12),
            round(params.omega, 12),
            round(params.gamma, 12),
        )
        if key not in table:
            raise click.ClickException(f"no prediction for instance {_tag(params)} in {path}")
        return table[key]

    return lookup


@main.command("experiment")
@_model_options
@_sim_options
@click.option("--delta-from", "delta_from", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Predictions CSV supplying the threshold per instance.")
def cmd_experiment(preset, config_path, delta_from, **flags) -> None:
    """Coupled replication study of the configured policies, per capacity."""
    cfg = _resolve_config(preset, config_path, flags)
    outdir = Path(cfg.out)
    notes: list[str] = []
    delta_lookup = _load_delta_predictions(delta_from) if delta_from else None
    summary_rows: list[list[str]] = []
    outputs: list[str] = []

    for L in cfg.L_values:
        params = cfg.params_for(L)
        policies = _build_policies(cfg, params, notes, delta_lookup)
        if not policies:
            notes.append(f"L={L}: no policies to run")
            continue
        batches = coupled_experiment(policies, params, cfg.replications, cfg.slots, cfg.seed)

        run_rows = []
        for policy, runs in zip(policies, batches):
            for r_index, run in enumerate(runs):
                run_rows.append(
                    [policy.label, str(r_index), str(run.slots), _fmt(run.avg_cost_per_slot),
                     str(run.expirations), str(run.forced_dispatches), str(run.voluntary_dispatches)]
                    + [str(c) for c in run.platoon_size_histogram[1:]]
                )
        provenance = {"command": "experiment", "instance": _tag(params), **cfg.as_provenance()}
        hist_header = [f"hist_{k}" for k in range(1, params.L + 1)]
        runs_name = f"runs_{_tag(params)}.csv"
        _write_csv(outdir / runs_name, provenance,
                   ["policy", "replication", "slots", "avg_cost", "expirations",
                    "forced_dispatches", "voluntary_dispatches"] + hist_header,
                   run_rows)
        outputs.append(runs_name)

        for policy, runs in zip(policies, batches):
            s = summarize(policy.label, runs)
            mean_of = lambda attr: sum(getattr(r, attr) for r in runs) / len(runs)
            summary_rows.append([
                str(L), policy.label, str(s.replications), str(cfg.slots),
                _fmt(s.mean), _fmt(s.ci_low), _fmt(s.ci_high),
                _fmt(mean_of("expirations")), _fmt(mean_of("forced_dispatches")),
                _fmt(mean_of("voluntary_dispatches")),
            ])
            click.echo(
                f"L={L} {policy.label}: mean {s.mean:.6f} "
                f"[{s.ci_low:.6f}, {s.ci_high:.6f}] over {s.replications} replications"
            )

    provenance = {"command": "experiment", **cfg.as_provenance()}
    _write_csv(outdir / "summary.csv", provenance,
               ["L", "policy", "replications", "slots", "mean_avg_cost", "ci_low", "ci_high",
                "mean_expirations", "mean_forced_dispatches", "mean_voluntary_dispatches"],
               summary_rows)
    outputs.append("summary.csv")
    _write_json(outdir / "manifest.json", {
        "command": "experiment",
        "config": cfg.as_provenance(),
        "outputs": sorted(outputs),
        "notes": notes,
    })
    for note in notes:
        click.echo(f"note: {note}")


@main.command("dataset")
@click.option("--grid-L", "grid_L", default="2,3,4", help="Capacities to sweep.")
@click.option("--grid-T", "grid_T", default="5,8,10,12", help="Horizons to sweep.")
@click.option("--grid-p", "grid_p", default="0.1,0.2,0.3,0.4,0.5", help="Arrival probabilities to sweep.")
@click.option("--grid-cex", "grid_cex", default="7,15,30,100", help="Expiration penalties to sweep.")
@click.option("--grid-omega", "grid_omega", default="0.5,1.0,1.5", help="Waiting costs to sweep.")
@click.option("--grid-gamma", "grid_gamma", default="0.7,0.85,1.0", help="Shape factors to sweep.")
@click.option("--out", default="out", help="Output directory.")
def cmd_dataset(grid_L, grid_T, grid_p, grid_cex, grid_omega, grid_gamma, out) -> None:
    """Label a parameter grid with its best threshold, for model training.

    Every instance is scored exactly through its induced chains; instances
    whose state count exceeds the enumeration budget are skipped.
    """
    ls = [int(v) for v in grid_L.split(",") if v.strip()]
    ts = [int(v) for v in grid_T.split(",") if v.strip()]
    ps = [float(v) for v in grid_p.split(",") if v.strip()]
    cexs = [float(v) for v in grid_cex.split(",") if v.strip()]
    omegas = [float(v) for v in grid_omega.split(",") if v.strip()]
    gammas = [float(v) for v in grid_gamma.split(",") if v.strip()]

    rows: list[list[str]] = []
    skipped = 0
    combos = list(product(ls, ts, ps, cexs, omegas, gammas))
    for i, (L, T, p, cex, omega, gamma) in enumerate(combos):
        params = ModelParams(L=L, T=T, p=p, c_ex=cex, omega=omega, gamma=gamma)
        if cardinality(params) > DATASET_STATE_BUDGET:
            skipped += 1
            continue
        result = optimize_delta(params, "exact")
        rows.append([
            str(L), str(T), _fmt(p), _fmt(cex), _fmt(omega), _fmt(gamma),
            str(result.best_delta), _fmt(result.cost_by_delta[result.best_delta]),
        ])
        if (i + 1) % 200 == 0:
            click.echo(f"labeled {i + 1}/{len(combos)} instances")

    provenance = {
        "command": "dataset",
        "grid_L": grid_L, "grid_T": grid_T, "grid_p": grid_p,
        "grid_cex": grid_cex, "grid_omega": grid_omega, "grid_gamma": grid_gamma,
        "state_budget": str(DATASET_STATE_BUDGET),
    }
    path = Path(out) / "dataset.csv"
    _write_csv(path, provenance,
               ["L", "T", "p", "c_ex", "omega", "gamma", "delta_star", "cost_at_delta_star"],
               rows)
    click.echo(f"wrote {len(rows)} labeled instances to {path} ({skipped} skipped over budget)")


@main.command("delta-search")
@_model_options
@_sim_options
@click.option("--mode", type=click.Choice(["exact", "simulated"]), default="exact")
def cmd_delta_search(preset, config_path, mode, **flags) -> None:
    """Score every threshold for one instance and report the best."""
    cfg = _resolve_config(preset, config_path, flags)
    outdir = Path(cfg.out)
    for L in cfg.L_values:
        params = cfg.params_for(L)
        if mode == "exact" and cardinality(params) > cfg.solve_budget:
            raise click.ClickException(
                f"SIZE_EXCEEDED: instance L={L} has {cardinality(params)} states, "
                f"over the solve budget of {cfg.solve_budget}; use --mode simulated"
            )
        result = optimize_delta(
            params, mode,
            replications=cfg.search_replications if mode == "simulated" else 10,
            slots_per_run=cfg.search_slots,
            master_seed=cfg.seed,
        )
        tag = _tag(params)
        provenance = {"command": "delta-search", "instance": tag, "mode": mode, **cfg.as_provenance()}
        rows = [[str(d), _fmt(result.cost_by_delta[d])] for d in sorted(result.cost_by_delta)]
        _write_csv(outdir / f"{tag}_delta_search.csv", provenance, ["delta", "avg_cost"], rows)
        click.echo(
            f"{tag}: best delta {result.best_delta} "
            f"(avg cost {result.cost_by_delta[result.best_delta]:.6f}, {mode})"
        )


if __name__ == "__main__":
    main()
