"""Command line driver: config ingestion, the family catalog, report emission.

Reports are CSV tables plus one machine-readable JSON sidecar per run, all
byte-deterministic so a warm cache reproduces them exactly.  Exit status is 0
on success, 2 when a falsification finding is present (fit inconsistency,
freeness mismatch, stability onset later than predicted), and 1 on usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import cache as cache_mod
from .arrangement import (
    ArrangementSpec,
    LatticeError,
    family_mkr,
    normalize,
    orbit_decomposition,
    primitive_classes,
)
from .characters import (
    CharacterPolynomial,
    FitInconsistentError,
    FitUnderdeterminedError,
    binomial_basis_form,
    character_of_cohomology,
    fit_character_polynomial,
    invariants_dim,
    stability_report,
    twisted_betti,
    verify_free_decomposition,
)
from .exactlin import format_rational
from .fim import MultiIndex, conj_classes, degree_add, degree_times
from .homology import LatticeHomology

ENV_CACHE = "ARRSTAB_CACHE"
DEFAULT_CACHE = ".arrstab-cache"
DEFAULT_OUT = "arrstab-out"

OUTPUT_KINDS = (
    "betti",
    "characters",
    "fit",
    "freeness",
    "normalize",
    "stability",
    "twisted",
)

CATALOG = (
    ("braid", "mkr(1,2,1)", "ordered configurations of distinct points in the plane"),
    ("conf(r)", "mkr(1,2,r)", "ordered configurations of distinct points in C^r"),
    ("k-equals(k)", "mkr(1,k,1)", "coordinate tuples with no value repeated k times"),
    ("rational-maps(m)", "mkr(m,1,1)", "ordered-root covers of based rational maps to P^(m-1)"),
)


class ConfigError(ValueError):
    """The job configuration is unusable."""


@dataclass(frozen=True)
class JobConfig:
    spec: ArrangementSpec
    level_min: MultiIndex
    level_max: MultiIndex
    i_max: int
    outputs: tuple[str, ...]
    fit_degree_bound: MultiIndex | None = None
    twisted_polynomial: CharacterPolynomial | None = None
    predicted_onset: MultiIndex | None = None
    cache_dir: str | None = None
    out_dir: str | None = None

    def levels(self) -> tuple[MultiIndex, ...]:
        ranges = [range(a, b + 1) for a, b in zip(self.level_min, self.level_max)]
        return tuple(MultiIndex(t) for t in itertools.product(*ranges))


def _parse_family(data) -> ArrangementSpec:
    if not isinstance(data, dict) or "kind" not in data:
        raise ConfigError("family must be an object with a 'kind'")
    kind = data["kind"]
    try:
        if kind == "mkr":
            return family_mkr(int(data["m"]), int(data["k"]), int(data["r"]))
        if kind == "preset":
            name = data.get("name")
            if name == "braid":
                return family_mkr(1, 2, 1)
            if name == "conf":
                return family_mkr(1, 2, int(data["r"]))
            if name == "k-equals":
                return family_mkr(1, int(data["k"]), 1)
            if name == "rational-maps":
                return family_mkr(int(data["m"]), 1, 1)
            raise ConfigError(f"unknown preset {name!r}")
        if kind == "custom":
            m = int(data["m"])
            r = int(data["r"])
            from .exactlin import subspace_from_constraints
            from .fim import ambient_dim

            gens = []
            for gen in data["generators"]:
                degree = MultiIndex(gen["degree"])
                sub = subspace_from_constraints(ambient_dim(degree, r), gen["rows"])
                gens.append((degree, sub))
            return ArrangementSpec(m, r, tuple(gens))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid family: {exc}") from exc
    raise ConfigError(f"unknown family kind {kind!r}")


def load_config(path: Path | str) -> JobConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        spec = _parse_family(data["family"])
        level_min = MultiIndex(data["levels"]["min"])
        level_max = MultiIndex(data["levels"]["max"])
        i_max = int(data["i_max"])
        outputs = tuple(data["outputs"])
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc
    if level_min.m != spec.m or level_max.m != spec.m:
        raise ConfigError("level range has the wrong number of factors")
    if not level_min.leq(level_max):
        raise ConfigError("empty level range")
    if i_max < 0:
        raise ConfigError("i_max must be nonnegative")
    unknown = [o for o in outputs if o not in OUTPUT_KINDS]
    if unknown or not outputs:
        raise ConfigError(f"outputs must be a nonempty subset of {OUTPUT_KINDS}")
    fit_bound = None
    if "fit_degree_bound" in data:
        fit_bound = MultiIndex(data["fit_degree_bound"])
    if "fit" in outputs and fit_bound is None:
        raise ConfigError("fit output requires fit_degree_bound")
    twisted = None
    if "twisted_polynomial" in data:
        try:
            twisted = CharacterPolynomial.parse(data["twisted_polynomial"], spec.m)
        except ValueError as exc:
            raise ConfigError(f"bad twisted polynomial: {exc}") from exc
    if "twisted" in outputs and twisted is None:
        raise ConfigError("twisted output requires twisted_polynomial")
    onset = None
    if "predicted_onset" in data:
        onset = MultiIndex(data["predicted_onset"])
    return JobConfig(
        spec,
        level_min,
        level_max,
        i_max,
        outputs,
        fit_bound,
        twisted,
        onset,
        data.get("cache_dir"),
        data.get("out_dir"),
    )


def list_catalog() -> str:
    lines = ["named families (all instances of the mkr construction):"]
    for name, recipe, blurb in CATALOG:
        lines.append(f"  {name} = {recipe}  -- {blurb}")
    return "\n".join(lines)


def _level_worker(args):
    spec, level, i_max, want_betti, want_chars, cache_dir = args
    get = cache_mod.CachingBuilder(cache_dir)
    payload = {"level": level, "betti": None, "characters": None}
    if want_betti:
        row = [1]
        if i_max >= 1:
            ctx = LatticeHomology(get(spec, level, max(1, i_max)))
            row.extend(ctx.betti_report(i).total for i in range(1, i_max + 1))
        payload["betti"] = row
    if want_chars:
        payload["characters"] = {
            i: character_of_cohomology(spec, level, i, get)
            for i in range(i_max + 1)
        }
    return payload


def _jsonable(value):
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, MultiIndex):
        return value.render()
    if isinstance(value, dict):
        return {str(_jsonable(k)): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _cell(value) -> str:
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, MultiIndex):
        return value.render()
    if isinstance(value, bool):
        return "yes" if value else "no"
    return str(value)


def run(config: JobConfig, jobs: int = 1, verbose: bool = False) -> int:
    """Execute the configured computations and write the report files."""

    def log(message: str) -> None:
        if verbose:
            print(message, file=sys.stderr)

    spec = config.spec
    levels = config.levels()
    out_dir = Path(config.out_dir or DEFAULT_OUT)
    out_dir.mkdir(parents=True, exist_ok=True)
    cache_dir = config.cache_dir
    get = cache_mod.CachingBuilder(cache_dir)
    findings: list[str] = []
    results: dict[str, object] = {}

    want_chars = bool(
        {"characters", "fit", "stability", "twisted"} & set(config.outputs)
    )
    want_betti = "betti" in config.outputs
    payloads = []
    if want_betti or want_chars:
        tasks = [
            (spec, level, config.i_max, want_betti, want_chars, cache_dir)
            for level in levels
        ]
        if jobs > 1:
            log(f"computing {len(tasks)} levels on {jobs} workers")
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                payloads = list(pool.map(_level_worker, tasks))
        else:
            for task in tasks:
                log(f"computing level {task[1].render()}")
                payloads.append(_level_worker(task))
    by_level = {p["level"]: p for p in payloads}

    if want_betti:
        header = ["level"] + [f"b{i}" for i in range(config.i_max + 1)]
        rows = [[level] + by_level[level]["betti"] for level in levels]
        _write_csv(out_dir / "betti.csv", header, rows)
        results["betti"] = {
            level.render(): by_level[level]["betti"] for level in levels
        }

    if "characters" in config.outputs:
        rows = []
        table: dict[str, dict] = {}
        for level in levels:
            chars = by_level[level]["characters"]
            for i in range(config.i_max + 1):
                chi = chars[i]
                for c in conj_classes(level):
                    rows.append([level, i, c.render(), chi(c)])
                table.setdefault(level.render(), {})[str(i)] = {
                    c.render(): chi(c) for c in conj_classes(level)
                }
        _write_csv(out_dir / "characters.csv", ["level", "i", "class", "value"], rows)
        results["characters"] = table

    if "fit" in config.outputs:
        fit_entries = []
        for i in range(config.i_max + 1):
            samples = [(level, by_level[level]["characters"][i]) for level in levels]
            try:
                poly = fit_character_polynomial(samples, config.fit_degree_bound)
            except FitInconsistentError as exc:
                findings.append(f"fit i={i}: {exc}")
                fit_entries.append({"i": i, "status": "inconsistent"})
                continue
            except FitUnderdeterminedError as exc:
                raise ConfigError(f"fit i={i}: {exc}") from exc
            print(f"fit i={i}: {poly.render()}")
            fit_entries.append(
                {
                    "i": i,
                    "status": "ok",
                    "polynomial": poly.render(),
                    "binomial_form": binomial_basis_form(poly),
                    "multidegree": poly.multidegree(),
                }
            )
        results["fit"] = fit_entries

    if "freeness" in config.outputs:
        rows = []
        detail = []
        for i in range(config.i_max + 1):
            log(f"freeness check i={i}")
            report = verify_free_decomposition(spec, i, levels, get)
            for level, ok in report.level_matches:
                rows.append([i, level, ok])
                if not ok:
                    findings.append(
                        f"freeness i={i}: character mismatch at level {level.render()}"
                    )
            for cls in report.classes:
                if not cls.degree_bound_ok:
                    findings.append(
                        f"freeness i={i}: class degree {cls.degree.render()} "
                        f"exceeds bound {report.degree_bound.render()}"
                    )
            detail.append(
                {
                    "i": i,
                    "degree_bound": report.degree_bound,
                    "classes": [
                        {
                            "degree": cls.degree,
                            "codim": cls.codim,
                            "stabilizer_order": cls.stabilizer_order,
                            "degree_bound_ok": cls.degree_bound_ok,
                            "generator_character": {
                                c.render(): v
                                for c, v in cls.generator_character.values.items()
                            },
                        }
                        for cls in report.classes
                    ],
                    "levels": {
                        level.render(): ok for level, ok in report.level_matches
                    },
                }
            )
        if config.i_max >= 1:
            classes = primitive_classes(spec, max(1, config.i_max), get)
            orbit_summary = {}
            for level in levels:
                lat = get(spec, level, max(1, config.i_max))
                if not len(lat):
                    orbit_summary[level.render()] = {}
                    continue
                try:
                    decomposition = orbit_decomposition(lat, classes)
                except LatticeError as exc:
                    # non-normal input; the freeness mismatch above is the
                    # finding, the orbit table just degrades
                    orbit_summary[level.render()] = {"error": str(exc)}
                    continue
                blocks = decomposition.blocks()
                orbit_summary[level.render()] = {
                    str(ci): {
                        "elements": sum(len(v) for v in keyed.values()),
                        "binomial_classes": len(keyed),
                    }
                    for ci, keyed in sorted(blocks.items())
                }
            results["orbits"] = orbit_summary
        _write_csv(out_dir / "freeness.csv", ["i", "level", "match"], rows)
        results["freeness"] = detail

    if "stability" in config.outputs:
        rows = []
        detail = []
        for i in range(config.i_max + 1):
            values = {
                level: Fraction(invariants_dim(by_level[level]["characters"][i]))
                for level in levels
            }
            predicted = config.predicted_onset or degree_times(i, spec.cmax)
            report = stability_report(values, predicted)
            if not report.meets_prediction:
                findings.append(
                    f"stability i={i}: onset later than predicted {predicted.render()}"
                )
            rows.append(
                [
                    i,
                    predicted,
                    ";".join(v.render() for v in report.onsets),
                    report.stable_value if report.stable_value is not None else "none",
                    report.meets_prediction,
                ]
            )
            detail.append(
                {
                    "i": i,
                    "values": {level.render(): values[level] for level in levels},
                    "predicted_onset": predicted,
                    "onsets": list(report.onsets),
                    "stable_value": report.stable_value,
                    "meets_prediction": report.meets_prediction,
                }
            )
        _write_csv(
            out_dir / "stability.csv",
            ["i", "predicted_onset", "onsets", "stable_value", "meets_prediction"],
            rows,
        )
        results["stability"] = detail

    if "twisted" in config.outputs:
        poly = config.twisted_polynomial
        rows = []
        detail = []
        for i in range(config.i_max + 1):
            values = {}
            for level in levels:
                chi_n = poly.as_class_function(level)
                values[level] = twisted_betti(
                    by_level[level]["characters"][i], chi_n
                )
            predicted = degree_add(
                degree_times(i, spec.cmax), poly.multidegree()
            )
            report = stability_report(values, predicted)
            if not report.meets_prediction:
                findings.append(
                    f"twisted i={i}: onset later than predicted {predicted.render()}"
                )
            for level in levels:
                rows.append([i, level, values[level]])
            detail.append(
                {
                    "i": i,
                    "polynomial": poly.render(),
                    "values": {level.render(): values[level] for level in levels},
                    "predicted_onset": predicted,
                    "meets_prediction": report.meets_prediction,
                }
            )
        _write_csv(out_dir / "twisted.csv", ["i", "level", "value"], rows)
        results["twisted"] = detail

    if "normalize" in config.outputs:
        normalized = normalize(spec)
        results["normalize"] = {
            "changed": normalized != spec,
            "original": [
                {"degree": deg, "subspace": sub.serialize()}
                for deg, sub in spec.generators
            ],
            "normalized": [
                {"degree": deg, "subspace": sub.serialize()}
                for deg, sub in normalized.generators
            ],
        }
        (out_dir / "normalization.json").write_text(
            json.dumps(_jsonable(results["normalize"]), indent=2, sort_keys=True)
            + "\n",
            encoding="utf-8",
        )

    report = {
        "spec": spec.serialize(),
        "levels": [level for level in levels],
        "i_max": config.i_max,
        "outputs": list(config.outputs),
        "results": results,
        "findings": findings,
    }
    (out_dir / "report.json").write_text(
        json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    if findings:
        for finding in findings:
            print(f"FINDING: {finding}", file=sys.stderr)
        return 2
    return 0


def _resolve_cache(flag_value: str | None, config_value: str | None = None) -> str:
    if flag_value:
        return flag_value
    env = os.environ.get(ENV_CACHE)
    if env:
        return env
    if config_value:
        return config_value
    return DEFAULT_CACHE


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="arrstab",
        description="exact cohomology and character stability for arrangement families",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="execute a job described by a config file")
    run_parser.add_argument("--config", required=True, help="path to the JSON job config")
    run_parser.add_argument("--cache", default=None, help="lattice cache directory")
    run_parser.add_argument("--out", default=None, help="report output directory")
    run_parser.add_argument("--jobs", type=int, default=1, help="parallel level workers")
    run_parser.add_argument("--verbose", action="store_true")

    sub.add_parser("catalog", help="list the named arrangement families")

    clean_parser = sub.add_parser("clean-cache", help="delete cached lattices")
    clean_parser.add_argument("--cache", default=None, help="lattice cache directory")

    args = parser.parse_args(argv)

    if args.command == "catalog":
        print(list_catalog())
        return 0

    if args.command == "clean-cache":
        cache_dir = _resolve_cache(args.cache)
        removed = cache_mod.clean(cache_dir)
        print(f"removed {removed} cached lattice(s) from {cache_dir}")
        return 0

    try:
        config = load_config(args.config)
        cache_dir = _resolve_cache(args.cache, config.cache_dir)
        out_dir = args.out or config.out_dir or DEFAULT_OUT
        config = JobConfig(
            config.spec,
            config.level_min,
            config.level_max,
            config.i_max,
            config.outputs,
            config.fit_degree_bound,
            config.twisted_polynomial,
            config.predicted_onset,
            cache_dir,
            out_dir,
        )
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        return run(config, jobs=args.jobs, verbose=args.verbose)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (LatticeError, ValueError) as exc:
        # engine-level precondition failures (e.g. a spec that is not normal
        # where an operation requires it) are input problems, not findings
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
