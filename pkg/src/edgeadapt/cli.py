"""Command-line entry point: ``edgeadapt <command> ...``."""

from __future__ import annotations

import contextlib
import json
from collections import Counter
from importlib import resources
from pathlib import Path

import click
import yaml

from . import formats
from .fsm import FsmError, FsmRuntime, load_fsm, validate_fsm
from .objectives import dump_trials, load_device_model, load_trials, unique_trials
from .pareto import extract_front
from .report import FORMATS, emit_boxplot, emit_radar, emit_report
from .scenario import SimulationSettings, compare as compare_reports, generate_scenario, simulate_adaptive, simulate_static
from .search import SAMPLERS, SearchBudget
from .space import SpaceError, cardinality, load_space, parse_space
from .wgra import EmptyFrontError, load_mode_specs, select_mode_config, select_modes

DOMAIN_ERRORS = (ValueError, KeyError, RuntimeError, OSError)

existing_file = click.Path(exists=True, dir_okay=False)


def _builtin(name: str) -> str:
    return str(resources.files("edgeadapt").joinpath(f"data/{name}"))


def _space(path):
    return load_space(path or _builtin("pedestrian_space.yaml"))


@contextlib.contextmanager
def _outputs():
    """Collect written paths; on any failure remove them and surface a domain error."""
    written: list[Path] = []
    try:
        yield written
    except click.ClickException:
        _remove(written)
        raise
    except DOMAIN_ERRORS as exc:
        _remove(written)
        raise click.ClickException(str(exc)) from exc


def _remove(paths):
    for p in paths:
        with contextlib.suppress(FileNotFoundError):
            Path(p).unlink()


def _write(written: list, path, text: str) -> Path:
    path = Path(path)
    written.append(path)
    formats.atomic_write(path, text)
    return path


def _manifest(written: list, output, command: str, inputs: dict, seeds=None, params=None):
    written.append(Path(f"{output}.manifest.json"))
    formats.write_manifest(output, command, inputs, seeds, params)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Design energy-aware self-adaptive applications and replay them against traffic scenarios."""


# -- space ------------------------------------------------------------------

@main.group()
def space():
    """Search-space documents."""


@space.command("validate")
@click.argument("space_file", type=existing_file, required=False)
def space_validate(space_file):
    """Parse SPACE_FILE (default: bundled pedestrian space) and print its size."""
    try:
        sp = parse_space(Path(space_file or _builtin("pedestrian_space.yaml")).read_text())
    except SpaceError as exc:
        raise click.ClickException(str(exc)) from exc
    for p in sp.parameters:
        click.echo(f"{p.name}: {p.kind}, {len(p)} values")
    click.echo(f"cardinality: {cardinality(sp)}")


# -- search -----------------------------------------------------------------

def _seed_path(out: Path, seed: int) -> Path:
    return out.with_name(f"{out.stem}.seed{seed}{out.suffix}")


@main.command()
@click.option("--space", "space_file", type=existing_file, help="Space document (default: bundled).")
@click.option("--device-model", type=existing_file, help="Device-model document (default: bundled).")
@click.option("--sampler", type=click.Choice(sorted(SAMPLERS)), default="nsga2", show_default=True)
@click.option("--budget", type=click.IntRange(min=1), help="Unique-trial budget.")
@click.option("--budget-frac", type=click.FloatRange(0, 1, min_open=True), help="Budget as a fraction of the space.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--population-size", type=click.IntRange(min=2), default=50, show_default=True)
@click.option("--repeats", type=click.IntRange(min=1), default=1, show_default=True,
              help="Independent runs with seeds seed, seed+1, ...")
@click.option("--modes", "modes_file", type=existing_file, help="Mode specs for the repeat frequency summary.")
@click.option("--zeta", type=click.FloatRange(0, 1, min_open=True), default=1.0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Trial log (JSON lines).")
def search(space_file, device_model, sampler, budget, budget_frac, seed, population_size, repeats,
           modes_file, zeta, out):
    """Explore the space and write the full trial history."""
    if (budget is None) == (budget_frac is None):
        raise click.UsageError("give exactly one of --budget or --budget-frac")
    out = Path(out)
    with _outputs() as written:
        sp = _space(space_file)
        evaluator = load_device_model(device_model).evaluator(sp)
        specs = load_mode_specs(modes_file) if repeats > 1 else []
        counts = {s.name: Counter() for s in specs}
        inputs = {"space": space_file or "pedestrian_space", "device_model": device_model or "device_model"}
        for k in range(repeats):
            run_seed = seed + k
            if budget_frac is not None:
                b = SearchBudget.from_fraction(sp, budget_frac, population_size=population_size, seed=run_seed)
            else:
                b = SearchBudget(budget, population_size, run_seed)
            store = SAMPLERS[sampler](sp, evaluator, b)
            path = out if repeats == 1 else _seed_path(out, run_seed)
            _write(written, path, dump_trials(sp, store.trials))
            _manifest(written, path, "search", inputs, {"seed": run_seed},
                      {"sampler": sampler, "budget": b.max_unique_trials, "population_size": population_size})
            click.echo(f"{path}: {unique_trials(store)} unique trials ({store.proposals} proposals)")
            if specs:
                front = extract_front(store)
                for s in specs:
                    try:
                        chosen = select_mode_config(front, s, zeta).chosen
                        counts[s.name][json.dumps(sp.as_dict(chosen))] += 1
                    except EmptyFrontError:
                        counts[s.name]["null"] += 1
        if specs:
            summary = {}
            for name, c in counts.items():
                top = max(c.values())
                summary[name] = {
                    "most_frequent": [json.loads(k) for k, v in sorted(c.items()) if v == top],
                    "count": top,
                    "tied": sum(v == top for v in c.values()) > 1,
                    "all": [{"config": json.loads(k), "count": v} for k, v in sorted(c.items())],
                }
            doc = {"repeats": repeats, "seeds": list(range(seed, seed + repeats)), "modes": summary}
            summary_path = Path(f"{out}.mode-frequency.json")
            _write(written, summary_path, formats.dumps(doc))
            for name, entry in summary.items():
                flag = " (tie)" if entry["tied"] else ""
                click.echo(f"{name}: {entry['count']}/{repeats}{flag} {entry['most_frequent']}")


# -- front ------------------------------------------------------------------

@main.group()
def front():
    """Pareto fronts."""


@front.command("extract")
@click.option("--space", "space_file", type=existing_file)
@click.option("--trials", "trial_files", type=existing_file, multiple=True, required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def front_extract(space_file, trial_files, out):
    """Extract the non-dominated set from one or more trial logs."""
    with _outputs() as written:
        sp = _space(space_file)
        store = load_trials(sp, "".join(Path(f).read_text() for f in trial_files))
        pf = extract_front(store)
        _write(written, out, formats.front_to_json(sp, pf))
        inputs = {"space": space_file or "pedestrian_space"}
        inputs.update({f"trials[{i}]": f for i, f in enumerate(trial_files)})
        _manifest(written, out, "front extract", inputs)
        click.echo(f"{out}: {len(pf)} of {unique_trials(store)} unique trials are non-dominated")


# -- modes ------------------------------------------------------------------

@main.group()
def modes():
    """Operation-mode selection."""


@modes.command("select")
@click.option("--space", "space_file", type=existing_file)
@click.option("--front", "front_file", type=existing_file, required=True)
@click.option("--modes", "modes_file", type=existing_file, help="Mode specs (default: bundled).")
@click.option("--zeta", type=click.FloatRange(0, 1, min_open=True), default=1.0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def modes_select(space_file, front_file, modes_file, zeta, out):
    """Pick one configuration per mode with threshold filtering and weighted GRA."""
    with _outputs() as written:
        sp = _space(space_file)
        pf = formats.front_from_json(sp, Path(front_file).read_text())
        chosen = select_modes(pf, load_mode_specs(modes_file), zeta)
        _write(written, out, formats.modes_to_json(sp, chosen, zeta))
        _manifest(written, out, "modes select",
                  {"space": space_file or "pedestrian_space", "front": front_file,
                   "modes": modes_file or "pedestrian_modes"}, params={"zeta": zeta})
        for m in chosen:
            acc, eng, rate = m.objectives
            click.echo(f"{m.name}: {sp.as_dict(m.chosen)} acc={acc:.4f} eng={eng:.4f} rate={rate} grg={m.grg:.4f}")


# -- fsm --------------------------------------------------------------------

@main.group()
def fsm():
    """Adaptation-logic state machines."""


@fsm.command("validate")
@click.option("--fsm", "fsm_file", type=existing_file, help="FSM document (default: bundled).")
@click.option("--modes-table", type=existing_file, help="Mode table from 'modes select' to bind states.")
@click.option("--space", "space_file", type=existing_file)
def fsm_validate(fsm_file, modes_table, space_file):
    """Check determinism, reachability, and the initial state."""
    with _outputs():
        bound = None
        if modes_table:
            bound = formats.modes_from_json(_space(space_file), Path(modes_table).read_text())
        spec = load_fsm(fsm_file, bound)
        problems = validate_fsm(spec)
    if problems:
        for p in problems:
            click.echo(p, err=True)
        raise click.ClickException(f"{len(problems)} problem(s) in FSM")
    click.echo(f"ok: {len(spec.states)} states, {len(spec.transitions)} transitions")


# -- simulate / compare / report ---------------------------------------------

def _scenario(name: str, seed: int):
    if name in ("weekdays", "weekends"):
        return generate_scenario(name, seed)
    path = Path(name)
    if not path.is_file():
        raise click.BadParameter(f"{name!r} is neither a built-in scenario nor a file", param_hint="--scenario")
    doc = yaml.safe_load(path.read_text())
    return generate_scenario("custom", seed, labels=doc["hours"])


@main.command()
@click.option("--space", "space_file", type=existing_file)
@click.option("--device-model", type=existing_file)
@click.option("--modes-table", type=existing_file, required=True, help="Output of 'modes select'.")
@click.option("--scenario", "scenario_name", default="weekdays", show_default=True,
              help="weekdays, weekends, or a YAML file with 24 'hours' labels.")
@click.option("--fsm", "fsm_file", type=existing_file, help="FSM document (default: bundled).")
@click.option("--static", "static_mode", help="Replay a single mode instead of the FSM.")
@click.option("--seed", type=int, default=0, show_default=True, help="Detection seed.")
@click.option("--scenario-seed", type=int, help="Traffic seed (default: --seed).")
@click.option("--cadence", type=click.FloatRange(0, min_open=True), default=2.0, show_default=True,
              help="Seconds per frame.")
@click.option("--switch-energy", type=click.FloatRange(0), default=0.0, show_default=True,
              help="Wh charged per mode switch.")
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Report (JSON).")
def simulate(space_file, device_model, modes_table, scenario_name, fsm_file, static_mode, seed,
             scenario_seed, cadence, switch_energy, out):
    """Replay a scenario with the adaptive FSM or a static mode."""
    if static_mode and fsm_file:
        raise click.UsageError("--fsm and --static are mutually exclusive")
    scenario_seed = seed if scenario_seed is None else scenario_seed
    with _outputs() as written:
        sp = _space(space_file)
        params = load_device_model(device_model)
        table = formats.modes_from_json(sp, Path(modes_table).read_text())
        sc = _scenario(scenario_name, scenario_seed)
        settings = SimulationSettings(frame_cadence_s=cadence, switch_energy_wh=switch_energy)
        if static_mode:
            if static_mode not in table:
                raise click.ClickException(f"unknown mode {static_mode!r}; have {sorted(table)}")
            rep = simulate_static(sc, table[static_mode], params, seed, settings)
        else:
            spec = load_fsm(fsm_file, table)
            problems = validate_fsm(spec)
            if problems:
                raise click.ClickException("invalid FSM: " + "; ".join(problems))
            rep = simulate_adaptive(sc, FsmRuntime(spec), params, seed, settings)
        _write(written, out, formats.report_to_json(rep))
        inputs = {"space": space_file or "pedestrian_space", "device_model": device_model or "device_model",
                  "modes_table": modes_table}
        if not static_mode:
            inputs["fsm"] = fsm_file or "pedestrian_fsm"
        if Path(scenario_name).is_file():
            inputs["scenario"] = scenario_name
        _manifest(written, out, "simulate", inputs, {"seed": seed, "scenario_seed": scenario_seed},
                  {"scenario": scenario_name, "static": static_mode, "cadence": cadence,
                   "switch_energy": switch_energy})
        click.echo(f"{rep.subject} on {rep.scenario}: {rep.total_energy_wh:.4f} Wh, "
                   f"{rep.total_frames} frames, accuracy proxy {rep.accuracy_proxy:.4f}")


@main.command()
@click.argument("reports", nargs=-1, type=existing_file)
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Comparison (JSON).")
@click.option("--boxplot", type=click.Path(dir_okay=False), help="Per-block energy quantiles (CSV).")
@click.option("--radar", type=click.Path(dir_okay=False), help="Normalized radar-chart data (CSV).")
@click.option("--block-windows", type=click.IntRange(min=1), default=4, show_default=True)
def compare(reports, out, boxplot, radar, block_windows):
    """Compare REPORTS against the first one."""
    if len(reports) < 2:
        raise click.UsageError("need at least two reports")
    with _outputs() as written:
        table = compare_reports([formats.report_from_json(Path(r).read_text()) for r in reports], block_windows)
        _write(written, out, formats.comparison_to_json(table))
        _manifest(written, out, "compare", {f"report[{i}]": r for i, r in enumerate(reports)},
                  params={"block_windows": block_windows})
        if boxplot:
            _write(written, boxplot, emit_boxplot(table))
        if radar:
            _write(written, radar, emit_radar(table))
        click.echo(emit_report(table, "table"), nl=False)


@main.command()
@click.argument("source", type=existing_file)
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="table", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="Write here instead of stdout.")
def report(source, fmt, out):
    """Render a simulation report or comparison."""
    with _outputs() as written:
        text = emit_report(formats.load_result(source), fmt)
        if out:
            _write(written, out, text)
            _manifest(written, out, "report", {"source": source}, params={"format": fmt})
        else:
            click.echo(text, nl=False)


def run_command(argv: list[str]) -> int:
    """Run the CLI in-process and return its exit status."""
    try:
        main.main(args=list(argv), prog_name="edgeadapt", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        return 1
    return 0


if __name__ == "__main__":
    main()
