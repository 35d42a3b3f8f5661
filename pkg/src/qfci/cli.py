"""Batch driver: scan FCIDUMP series with IPEA, emit CSV/JSON curves.

Subcommands:
  run      execute a scan described by a JSON config file
  scaling  gate-count / FCI-dimension scaling table on random tensors

Scan CSV layout is one row per scan point; variant-B success
probabilities occupy one b_success_r<N> column per configured
repetition count.  All stochastic columns derive from a master seed, so
replaying a scan reproduces the files byte for byte.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import QfciError
from .guess import (
    GuessState,
    hf_determinant,
    load_amplitude_guess,
    open_shell_csf,
    random_sector_state,
)
from .hamiltonian import (
    build_second_quantized,
    exact_eigensolve,
    sector_of,
)
from .integrals import (
    parse_fcidump,
    random_molecular_integrals,
    to_spin_orbitals,
)
from .hamiltonian import jordan_wigner
from .phase_estimation import (
    IpeaConfig,
    ipea_a_run,
    ipea_a_success_probability,
    ipea_b_run,
    ipea_b_success_probability,
)
from .propagator import EvolutionWindow
from .resources import count_controlled_u, fci_dimension, fitted_exponent

SCAN_SCHEMA_ID = "qfci.scan_report.v1"
SCALING_SCHEMA_ID = "qfci.scaling_report.v1"
SEARCH_CAVEAT = (
    "lowest-energy search assumes the window brackets every eigenvalue; "
    "energies outside [E_min, E_max] alias back into the window and can "
    "masquerade as low results"
)


@dataclass(frozen=True)
class ScanPoint:
    label: str
    fcidump: Path
    guess: dict
    sector: tuple[int, int]
    target: int


@dataclass(frozen=True)
class ScanConfig:
    points: tuple[ScanPoint, ...]
    ipea: IpeaConfig
    repetition_counts: tuple[int, ...]
    csv_path: Path
    json_path: Path
    master_seed: int | None


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise QfciError(f"{where}: missing required key {key!r}")
    return mapping[key]


def load_scan_config(path: str | Path, overrides: dict | None = None) -> ScanConfig:
    """Read a JSON scan description; overrides replace ipea-level fields.

    Relative paths inside the file resolve against the file's directory.
    """
    path = Path(path)
    base = path.parent
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    overrides = overrides or {}

    ipea_raw = dict(_require(raw, "ipea", str(path)))
    bits = int(overrides.get("bits", ipea_raw.get("bits", 20)))
    variant = str(overrides.get("variant", ipea_raw.get("variant", "A")))
    e_max = float(overrides.get("e_max", _require(ipea_raw, "e_max", "ipea")))
    e_min = float(overrides.get("e_min", _require(ipea_raw, "e_min", "ipea")))
    seed = overrides.get("seed", ipea_raw.get("seed"))
    seed = None if seed is None else int(seed)
    reps_list = tuple(
        int(r) for r in overrides.get(
            "repetition_counts", raw.get("repetition_counts", [11, 31, 51, 101])
        )
    )
    for r in reps_list:
        if r < 1 or r % 2 == 0:
            raise QfciError(f"repetition counts must be odd, got {r}")
    cfg = IpeaConfig(
        window=EvolutionWindow(e_max=e_max, e_min=e_min),
        m=bits,
        variant=variant,
        repetitions_per_bit=int(ipea_raw.get("repetitions_per_bit", reps_list[0])),
        whole_run_repeats=int(ipea_raw.get("whole_run_repeats", 1)),
        rng_seed=seed,
    )

    outputs = raw.get("outputs", {})
    csv_path = Path(overrides.get("csv", outputs.get("csv", "scan.csv")))
    json_path = Path(overrides.get("json", outputs.get("json", "scan.json")))
    if not csv_path.is_absolute():
        csv_path = base / csv_path
    if not json_path.is_absolute():
        json_path = base / json_path

    points = []
    for i, entry in enumerate(raw.get("points", [])):
        where = f"points[{i}]"
        fcidump = Path(_require(entry, "fcidump", where))
        if not fcidump.is_absolute():
            fcidump = base / fcidump
        if not fcidump.exists():
            raise QfciError(f"{where}: no such file {fcidump}")
        guess = dict(_require(entry, "guess", where))
        if guess.get("kind") == "amplitudes":
            gpath = Path(_require(guess, "path", f"{where}.guess"))
            if not gpath.is_absolute():
                gpath = base / gpath
            if not gpath.exists():
                raise QfciError(f"{where}: no such file {gpath}")
            guess["path"] = str(gpath)
        sector = tuple(int(x) for x in _require(entry, "sector", where))
        if len(sector) != 2:
            raise QfciError(f"{where}: sector must be [n_alpha, n_beta]")
        points.append(
            ScanPoint(
                label=str(entry.get("label", f"point{i}")),
                fcidump=fcidump,
                guess=guess,
                sector=sector,  # type: ignore[arg-type]
                target=int(entry.get("target", 0)),
            )
        )

    return ScanConfig(
        points=tuple(points),
        ipea=cfg,
        repetition_counts=reps_list,
        csv_path=csv_path,
        json_path=json_path,
        master_seed=seed,
    )


def _build_guess(desc: dict, mol, sector, rng) -> GuessState:
    kind = desc.get("kind", "hf")
    if kind == "hf":
        return hf_determinant(mol.n_orb, sector[0], sector[1])
    if kind == "csf":
        return open_shell_csf(
            mol.n_orb,
            core=tuple(desc.get("core", ())),
            open_pair=tuple(_require(desc, "open_pair", "guess")),
            coupling=desc.get("coupling", "singlet"),
        )
    if kind == "amplitudes":
        return load_amplitude_guess(
            _require(desc, "path", "guess"), threshold=float(desc.get("threshold", 0.0))
        )
    if kind == "random":
        return random_sector_state(mol.n_orb, sector, rng)
    raise QfciError(f"unknown guess kind {kind!r}")


def _evaluate_point(
    point: ScanPoint,
    cfg: IpeaConfig,
    reps_list: tuple[int, ...],
    seed_seq: np.random.SeedSequence,
    search_runs: int,
) -> tuple[dict, list[str]]:
    """Full per-point pipeline; exceptions become an error record."""
    warnings: list[str] = []
    try:
        rng = np.random.default_rng(seed_seq)
        mol = parse_fcidump(point.fcidump)
        na, nb = point.sector
        if mol.n_elec != na + nb:
            warnings.append(
                f"{point.label}: file electron count {mol.n_elec} "
                f"differs from sector {na}+{nb}"
            )
        soi = to_spin_orbitals(mol)
        terms = build_second_quantized(soi)
        guess = _build_guess(point.guess, mol, point.sector, rng)
        sv = guess.to_statevector()
        if sv.n_qubits != soi.n_so:
            raise QfciError(
                f"guess spans {sv.n_qubits} qubits but system has {soi.n_so}"
            )

        support = np.nonzero(sv.amplitudes)[0]
        sectors = {sector_of(int(i), mol.n_orb) for i in support}
        sectors.add(point.sector)
        spectra = [exact_eigensolve(terms, soi.n_so, s) for s in sorted(sectors)]
        block = sorted(sectors).index(point.sector)
        target = (block, point.target)

        fci_energy = float(spectra[block].eigenvalues[point.target])
        u_target = spectra[block].embed(point.target, soi.n_so)
        overlap_sq = float(abs(np.vdot(u_target, sv.amplitudes)) ** 2)

        p_down, p_up = ipea_a_success_probability(sv, spectra, cfg, target)
        b_success = {
            r: float(
                ipea_b_success_probability(
                    sv,
                    spectra,
                    IpeaConfig(
                        window=cfg.window,
                        m=cfg.m,
                        variant="B",
                        repetitions_per_bit=r,
                    ),
                    target,
                )
            )
            for r in reps_list
        }

        if cfg.variant == "A":
            record, _ = ipea_a_run(sv, spectra, cfg, rng)
        else:
            record = ipea_b_run(lambda: sv, spectra, cfg, rng)

        result = {
            "label": point.label,
            "fcidump": str(point.fcidump),
            "n_alpha": na,
            "n_beta": nb,
            "target": point.target,
            "status": "ok",
            "fci_energy": fci_energy,
            "overlap_sq": overlap_sq,
            "overlap_scaled": 0.81 * overlap_sq,
            "p_down": p_down,
            "p_up": p_up,
            "p_tot": p_down + p_up,
            "b_success": {str(r): b_success[r] for r in reps_list},
            "sampled_energy": record.energy,
            "sampled_outcome": record.bits.outcome,
        }
        if search_runs > 0:
            energies = [
                ipea_a_run(sv, spectra, cfg, rng)[0].energy
                for _ in range(search_runs)
            ]
            lowest = min(energies)
            result["search"] = {
                "runs": search_runs,
                "min_energy": lowest,
                "multiplicity": sum(1 for e in energies if e == lowest),
            }
        return result, warnings
    except Exception as exc:  # per-point isolation: scan must not abort
        return (
            {
                "label": point.label,
                "fcidump": str(point.fcidump),
                "status": "error",
                "error": f"{type(exc).__name__}: {exc}",
            },
            warnings,
        )


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def run_scan(cfg: ScanConfig, search_runs: int = 0) -> dict:
    """Evaluate all points, write CSV + JSON sidecar, return the report."""
    seeds = np.random.SeedSequence(cfg.master_seed).spawn(max(1, len(cfg.points)))
    workers = min(8, len(cfg.points)) or 1
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(
            pool.map(
                lambda pair: _evaluate_point(
                    pair[0], cfg.ipea, cfg.repetition_counts, pair[1], search_runs
                ),
                zip(cfg.points, seeds),
            )
        )
    points = [row for row, _ in outcomes]
    warnings = [w for _, ws in outcomes for w in ws]

    report = {
        "schema": SCAN_SCHEMA_ID,
        "master_seed": cfg.master_seed,
        "bits": cfg.ipea.m,
        "variant": cfg.ipea.variant,
        "window": {"e_max": cfg.ipea.window.e_max, "e_min": cfg.ipea.window.e_min},
        "repetition_counts": list(cfg.repetition_counts),
        "warnings": warnings,
        "points": points,
    }
    if search_runs > 0:
        report["search_caveat"] = SEARCH_CAVEAT

    fieldnames = [
        "label",
        "fcidump",
        "n_alpha",
        "n_beta",
        "target",
        "variant",
        "bits",
        "e_max",
        "e_min",
        "fci_energy",
        "overlap_sq",
        "overlap_scaled",
        "p_down",
        "p_up",
        "p_tot",
        *[f"b_success_r{r}" for r in cfg.repetition_counts],
        "sampled_energy",
        "error",
    ]
    cfg.csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(cfg.csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, extrasaction="ignore")
        writer.writeheader()
        for row in points:
            flat = {
                k: _fmt(v)
                for k, v in row.items()
                if k in fieldnames and v is not None
            }
            flat["variant"] = cfg.ipea.variant
            flat["bits"] = str(cfg.ipea.m)
            flat["e_max"] = _fmt(cfg.ipea.window.e_max)
            flat["e_min"] = _fmt(cfg.ipea.window.e_min)
            for r in cfg.repetition_counts:
                if row.get("status") == "ok":
                    flat[f"b_success_r{r}"] = _fmt(row["b_success"][str(r)])
            writer.writerow(flat)

    cfg.json_path.parent.mkdir(parents=True, exist_ok=True)
    with open(cfg.json_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def emit_scaling_report(
    sizes,
    seed: int,
    csv_path: Path,
    json_path: Path,
) -> dict:
    """Gate counts and FCI dimension vs spin-orbital count on random tensors."""
    rows = []
    for n_so in sizes:
        if n_so < 2 or n_so % 2:
            raise QfciError(f"sizes must be even spin-orbital counts, got {n_so}")
        n_orb = n_so // 2
        rng = np.random.default_rng(np.random.SeedSequence((seed, n_so)))
        mol = random_molecular_integrals(n_orb, rng)
        op = jordan_wigner(build_second_quantized(to_spin_orbitals(mol)), n_so)
        counts = count_controlled_u(op)
        n_alpha = (n_orb + 1) // 2
        n_beta = n_orb // 2
        rows.append(
            {
                "n_basis": n_so,
                "fci_dim": fci_dimension(n_orb, n_alpha, n_beta),
                "counts": counts.as_dict(),
            }
        )

    report: dict = {
        "schema": SCALING_SCHEMA_ID,
        "seed": seed,
        "points": rows,
    }
    if len(rows) >= 2:
        report["fitted_exponent"] = fitted_exponent(
            [r["n_basis"] for r in rows],
            [r["counts"]["total"] for r in rows],
        )

    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["n_basis", "fci_dim", "hadamard", "cnot", "rx", "rz",
             "controlled_rz", "gate_total"]
        )
        for r in rows:
            c = r["counts"]
            writer.writerow(
                [r["n_basis"], r["fci_dim"], c["hadamard"], c["cnot"],
                 c["rx"], c["rz"], c["controlled_rz"], c["total"]]
            )

    json_path.parent.mkdir(parents=True, exist_ok=True)
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfci",
        description="Iterative phase estimation for full-CI energies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scan config")
    run_p.add_argument("--config", required=True, help="JSON scan description")
    run_p.add_argument("--seed", type=int, help="override master seed")
    run_p.add_argument("--variant", choices=["A", "B"])
    run_p.add_argument("--bits", type=int, help="phase bits m")
    run_p.add_argument("--emax", type=float)
    run_p.add_argument("--emin", type=float)
    run_p.add_argument("--reps", type=_int_list,
                       help="comma-separated odd repetition counts")
    run_p.add_argument("--search-runs", type=int, default=0,
                       help="variant-A lowest-energy search over N runs")
    run_p.add_argument("--csv", help="override CSV output path")
    run_p.add_argument("--json", help="override JSON output path")

    scal_p = sub.add_parser("scaling", help="gate-count scaling table")
    scal_p.add_argument("--sizes", type=_int_list, required=True,
                        help="even spin-orbital counts, e.g. 4,8,12")
    scal_p.add_argument("--seed", type=int, default=0)
    scal_p.add_argument("--csv", default="scaling.csv")
    scal_p.add_argument("--json", default="scaling.json")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            overrides = {}
            if args.seed is not None:
                overrides["seed"] = args.seed
            if args.variant is not None:
                overrides["variant"] = args.variant
            if args.bits is not None:
                overrides["bits"] = args.bits
            if args.emax is not None:
                overrides["e_max"] = args.emax
            if args.emin is not None:
                overrides["e_min"] = args.emin
            if args.reps is not None:
                overrides["repetition_counts"] = args.reps
            if args.csv is not None:
                overrides["csv"] = args.csv
            if args.json is not None:
                overrides["json"] = args.json
            cfg = load_scan_config(args.config, overrides)
            report = run_scan(cfg, search_runs=args.search_runs)
            n_err = sum(1 for p in report["points"] if p["status"] == "error")
            print(
                f"scan: {len(report['points'])} points, {n_err} failed -> "
                f"{cfg.csv_path}"
            )
            if args.search_runs > 0:
                print(f"search caveat: {SEARCH_CAVEAT}")
                for p in report["points"]:
                    if "search" in p:
                        s = p["search"]
                        print(
                            f"  {p['label']}: min energy {s['min_energy']:.10f} "
                            f"({s['multiplicity']}/{s['runs']} runs)"
                        )
            for w in report["warnings"]:
                print(f"warning: {w}", file=sys.stderr)
        elif args.command == "scaling":
            report = emit_scaling_report(
                args.sizes, args.seed, Path(args.csv), Path(args.json)
            )
            if "fitted_exponent" in report:
                print(f"fitted exponent: {report['fitted_exponent']:.3f}")
            print(f"scaling: {len(report['points'])} sizes -> {args.csv}")
    except QfciError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
