#!/usr/bin/env python3
"""
Command-line front end for the orbital zeta function checks

Subcommands:
- atlas census | stabilizer | g27
- gauss verify | value
- zeta coeffs | verify-on | oracle | progression
- density verify | residue | gamma
- verify-all: every gating suite at desk scale

Exit codes: 0 when every check passes, 1 on a verification mismatch,
2 on usage errors, when a run would exceed a resource cap, or when a
report cannot be written.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from orbital import config
from orbital.errors import ContractViolationError, DomainError, ResourceCapError, UnsupportedRingError, VerificationError
from orbital.gauss_fourier import (
    FiniteFunction,
    check_decomposition,
    check_fourier_inversion,
    check_identities,
    check_product_fourier,
    check_pv_reduction,
    check_reduction,
    divisible_indicator,
    orbital_gauss_sum,
    parseval_check,
    phi,
    phi_prime,
    verify_divisible_fourier,
    verify_phi_transforms,
    verify_mori_table,
    verify_singular_table,
    verify_squarefree_divisible,
)
from orbital.local_densities import (
    SUITES,
    compare_progressions,
    residue_of_zeta,
    unramified_cubic_character,
    verify_gamma,
    verify_residue_tables,
)
from orbital.orbit_atlas import stabilizer_order, verify_census, verify_g27
from orbital.residue_rings import DirichletCharacter, all_characters
from orbital.shintani_counts import (
    ClassNumberTable,
    class_number_table,
    divisible_coeffs,
    theta_coeffs,
    twisted_weight,
    verify_ohno_nakagawa,
    verify_oracle,
    verify_partial_zeta,
    verify_stabilizer_rings,
    verify_theta,
    verify_twisted,
)
from orbital.types import DualForm, Form
from utils.batching import process_in_batches, setup_logging
from utils.report import VerificationReport, format_value, write_reports

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2

Task = Tuple[str, Callable[[], List[VerificationReport]]]


# ============================================================================
# ARGUMENT PARSING
# ============================================================================

def _int_list(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _four_ints(text: str) -> Tuple[int, ...]:
    values = _int_list(text)
    if len(values) != 4:
        raise argparse.ArgumentTypeError(f"expected four coefficients, got {text!r}")
    return values


def _sign(text: str) -> int:
    if text in ("+", "+1", "1", "plus"):
        return 1
    if text in ("-", "-1", "minus"):
        return -1
    raise argparse.ArgumentTypeError(f"sign must be + or -, got {text!r}")


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--threads",
        type=int,
        default=config.default_workers(),
        help="Worker threads for group scans (default: available CPUs)"
    )
    common.add_argument(
        "--json",
        type=str,
        metavar="FILE",
        help="Write the report as JSON"
    )
    common.add_argument(
        "--csv",
        type=str,
        metavar="FILE",
        help="Write the report cells as CSV"
    )
    common.add_argument(
        "--seed",
        type=int,
        default=0,
        help="Seed for every sampled property check (default: 0)"
    )
    common.add_argument(
        "--verbose",
        action="store_true",
        help="Log every verified cell"
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="runner.py",
        description="Orbital L-functions of binary cubic forms: tables, coefficients and residue checks"
    )
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    # atlas ------------------------------------------------------------------
    atlas = commands.add_parser("atlas", help="Orbit types of V_p and V_{p^2}")
    atlas_cmds = atlas.add_subparsers(dest="action", metavar="ACTION")
    atlas_cmds.required = True

    census = atlas_cmds.add_parser("census", parents=[common], help="Exhaustive type census against closed forms")
    census.add_argument("--prime", type=int, required=True)
    census.add_argument("--level", choices=("p", "p2"), default="p")
    census.add_argument("--method", choices=("auto", "valuation", "closure"), default="auto")

    stab = atlas_cmds.add_parser("stabilizer", parents=[common], help="Stabilizer order of a form mod N")
    stab.add_argument("--form", type=_four_ints, required=True, metavar="X1,X2,X3,X4")
    stab.add_argument("--modulus", type=int, required=True)

    atlas_cmds.add_parser("g27", parents=[common], help="Stabilizers of the 1^3_max representatives mod 27")

    # gauss ------------------------------------------------------------------
    gauss = commands.add_parser("gauss", help="Orbital Gauss sums and Fourier transforms")
    gauss_cmds = gauss.add_subparsers(dest="action", metavar="ACTION")
    gauss_cmds.required = True

    gverify = gauss_cmds.add_parser("verify", parents=[common], help="Verify a Gauss sum or Fourier table")
    gverify.add_argument("--prime", type=int, required=True)
    gverify.add_argument("--level", choices=("p", "p2"), default=None,
                         help="Accepted for symmetry; each table fixes its own level")
    gverify.add_argument(
        "--table",
        choices=("mori", "singular", "fourier", "parseval", "divisible"),
        default="mori",
    )

    gvalue = gauss_cmds.add_parser("value", parents=[common], help="One orbital Gauss sum W(chi, a, b)")
    gvalue.add_argument("--modulus", type=int, required=True)
    gvalue.add_argument("--character", type=int, default=0, help="Index into the characters mod N")
    gvalue.add_argument("--form", type=_four_ints, required=True, metavar="A1,A2,A3,A4")
    gvalue.add_argument("--dual", type=_four_ints, required=True, metavar="B1,B2,B3,B4")

    # zeta -------------------------------------------------------------------
    zeta = commands.add_parser("zeta", help="Class numbers and zeta coefficients")
    zeta_cmds = zeta.add_subparsers(dest="action", metavar="ACTION")
    zeta_cmds.required = True

    coeffs = zeta_cmds.add_parser("coeffs", parents=[common], help="Coefficient table of a zeta function")
    coeffs.add_argument("--max-disc", type=int, required=True)
    coeffs.add_argument("--sign", type=_sign, default=1)
    coeffs.add_argument("--mod", type=int, default=None, help="Modulus N for --weight or --residue")
    coeffs.add_argument("--residue", type=int, default=None, help="Keep only n = residue mod N")
    coeffs.add_argument("--weight", choices=("none", "divisible", "theta"), default="none")
    coeffs.add_argument("--out", type=str, default=None, help="Table JSON path (default: stdout)")

    on = zeta_cmds.add_parser("verify-on", parents=[common], help="Ohno-Nakagawa relation up to X")
    on.add_argument("--max-disc", type=int, default=config.ON_BOUND)

    oracle = zeta_cmds.add_parser("oracle", parents=[common], help="Reduction against the BFS oracle up to X")
    oracle.add_argument("--max-disc", type=int, default=config.ORACLE_BOUND)

    prog = zeta_cmds.add_parser("progression", parents=[common], help="Progression counts against predictions")
    prog.add_argument("--modulus", type=int, required=True)
    prog.add_argument("--max-disc", type=int, default=config.PROGRESSION_BOUND)
    prog.add_argument("--sign", type=_sign, default=1)
    prog.add_argument("--checkpoints", type=_int_list, default=None)

    # density ----------------------------------------------------------------
    density = commands.add_parser("density", help="Local densities and residues")
    density_cmds = density.add_subparsers(dest="action", metavar="ACTION")
    density_cmds.required = True

    dverify = density_cmds.add_parser("verify", parents=[common], help="Residue table suite")
    dverify.add_argument("--suite", choices=SUITES, required=True)
    dverify.add_argument("--primes", type=_int_list, default=None)

    residue = density_cmds.add_parser("residue", parents=[common], help="Residues of xi(s, f) at s = 1 and 5/6")
    residue.add_argument("--modulus", type=int, required=True)
    residue.add_argument(
        "--weight",
        type=str,
        default="divisible",
        help="divisible | phi | phiprime | orbit:A1,A2,A3,A4 | twisted:R"
    )
    residue.add_argument("--character", type=int, default=0, help="Index into the characters mod N")

    dgamma = density_cmds.add_parser("gamma", parents=[common], help="Gamma-matrix identity at random s")
    dgamma.add_argument("--samples", type=int, default=20)

    # verify-all -------------------------------------------------------------
    vall = commands.add_parser("verify-all", parents=[common], help="Every gating suite at desk scale")
    vall.add_argument("--primes", type=_int_list, default=config.primes_for_suite("unramified"))
    vall.add_argument("--max-disc", type=int, default=config.ON_BOUND)

    return parser


# ============================================================================
# OUTPUT
# ============================================================================

def _write_outputs(args: argparse.Namespace, reports: Sequence[VerificationReport]) -> None:
    for report in reports:
        report.workers = args.threads
    if args.json:
        write_reports(reports, args.json, "json")
        print(f"[OK]Saved JSON report to: {args.json}")
    if args.csv:
        write_reports(reports, args.csv, "csv")
        print(f"[OK]Saved CSV report to: {args.csv}")


def _finish(args: argparse.Namespace, reports: Sequence[VerificationReport]) -> int:
    _write_outputs(args, reports)
    for report in reports:
        print(report.summary())
        for cell in report.failures:
            print(f"  [FAIL] {cell.location}: expected {cell.expected}, got {cell.got}")
    try:
        for report in reports:
            report.raise_for_failures()
    except VerificationError as e:
        logger.error(str(e))
        return EXIT_MISMATCH
    return EXIT_OK


def _print_payload(args: argparse.Namespace, payload: Dict) -> None:
    text = json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    if args.json:
        Path(args.json).write_text(text, encoding="utf-8")
        print(f"[OK]Saved JSON to: {args.json}")
    else:
        sys.stdout.write(text)


def _character(modulus: int, index: int) -> DirichletCharacter:
    characters = all_characters(modulus)
    if not 0 <= index < len(characters):
        raise DomainError(f"character index {index} out of range for modulus {modulus} ({len(characters)} characters)")
    return characters[index]


# ============================================================================
# COMMANDS
# ============================================================================

def cmd_atlas(args: argparse.Namespace) -> int:
    if args.action == "census":
        e = 1 if args.level == "p" else 2
        return _finish(args, [verify_census(args.prime, e, args.method, args.threads)])
    if args.action == "stabilizer":
        a = Form.of(args.form, args.modulus)
        order = stabilizer_order(a, args.threads)
        _print_payload(args, {"form": list(a.coeffs), "modulus": args.modulus, "stabilizer_order": order})
        return EXIT_OK
    return _finish(args, [verify_g27(args.threads)])


def cmd_gauss(args: argparse.Namespace) -> int:
    if args.action == "value":
        chi = _character(args.modulus, args.character)
        a = Form.of(args.form, args.modulus)
        b = DualForm.of(args.dual, args.modulus)
        w = orbital_gauss_sum(chi, a, b, args.threads)
        _print_payload(args, {
            "modulus": args.modulus,
            "character": args.character,
            "a": list(a.coeffs),
            "b": list(b.coeffs),
            "value": format_value(w),
        })
        return EXIT_OK
    p = args.prime
    tables = {
        "mori": lambda: verify_mori_table(p, args.threads),
        "singular": lambda: verify_singular_table(p, args.threads),
        "fourier": lambda: verify_phi_transforms(p, args.threads),
        "parseval": lambda: parseval_check(p, args.threads),
        "divisible": lambda: verify_divisible_fourier(p),
    }
    return _finish(args, [tables[args.table]()])


def _coefficient_table(args: argparse.Namespace) -> ClassNumberTable:
    bound, sign = args.max_disc, args.sign
    if args.weight == "none":
        table = class_number_table(bound, sign, args.threads)
    else:
        if args.mod is None:
            raise DomainError(f"--weight {args.weight} needs --mod")
        if args.weight == "divisible":
            coefficients = divisible_coeffs(args.mod, bound, sign, args.threads)
        else:
            coefficients = theta_coeffs(args.mod, bound, sign, args.threads)
        table = ClassNumberTable(sign, bound, coefficients, metadata={"weight": args.weight, "modulus": args.mod})
    if args.residue is not None:
        if args.mod is None:
            raise DomainError("--residue needs --mod")
        kept = {n: h for n, h in table.coefficients.items() if n % args.mod == args.residue % args.mod}
        table = ClassNumberTable(sign, bound, kept, table.dual,
                                 {**table.metadata, "modulus": args.mod, "residue": args.residue})
    return table


def cmd_zeta(args: argparse.Namespace) -> int:
    if args.action == "coeffs":
        table = _coefficient_table(args)
        if args.out:
            table.save(args.out)
            print(f"[OK]Saved {len(table.coefficients)} coefficients to: {args.out}")
        else:
            sys.stdout.write(json.dumps(table.to_dict(), indent=2, ensure_ascii=False) + "\n")
        return EXIT_OK
    if args.action == "verify-on":
        return _finish(args, [verify_ohno_nakagawa(args.max_disc, args.threads)])
    if args.action == "oracle":
        return _finish(args, [
            verify_oracle(args.max_disc, args.threads),
            verify_stabilizer_rings(args.max_disc, args.threads),
        ])
    table = class_number_table(args.max_disc, args.sign, args.threads)
    checkpoints = args.checkpoints or [args.max_disc // 10 * k for k in range(1, 11)]
    return _finish(args, [compare_progressions(table, args.modulus, checkpoints)])


def _weight_function(spec: str, modulus: int, chi: DirichletCharacter) -> FiniteFunction:
    kind, _, rest = spec.partition(":")
    if kind == "divisible":
        return divisible_indicator(modulus)
    if kind in ("phi", "phiprime"):
        root = round(modulus ** 0.5)
        if root * root != modulus:
            raise DomainError(f"--weight {kind} needs N = p^2, got {modulus}")
        return phi(root) if kind == "phi" else phi_prime(root)
    if kind == "orbit":
        return FiniteFunction.orbit_function(chi, Form.of(_four_ints(rest), modulus))
    if kind == "twisted":
        return twisted_weight(chi, int(rest or 1))
    raise DomainError(f"unknown weight {spec!r}")


def cmd_density(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    if args.action == "verify":
        return _finish(args, verify_residue_tables(args.suite, args.primes, rng, args.threads))
    if args.action == "gamma":
        return _finish(args, [verify_gamma(rng, args.samples)])
    chi = _character(args.modulus, args.character)
    f = _weight_function(args.weight, args.modulus, chi)
    invariance = chi ** 2 if args.weight.startswith("twisted") else chi
    residues = residue_of_zeta(f, invariance, rng)
    _print_payload(args, {"modulus": args.modulus, "weight": args.weight, "character": args.character,
                          **residues.to_dict()})
    return EXIT_OK


# ============================================================================
# VERIFY-ALL
# ============================================================================

def _suite_tasks(args: argparse.Namespace, rng: np.random.Generator) -> List[Task]:
    """Every gating suite, in a fixed order."""
    threads = args.threads
    primes = sorted(set(args.primes))
    bound = args.max_disc
    small = min(bound, config.PARTIAL_ZETA_BOUND)
    tasks: List[Task] = []

    for p in sorted({2, 3} | set(primes)):
        for e in (1, 2):
            if (p ** e) ** 4 > config.MAX_CENSUS_SIZE:
                logger.warning(f"Skipping census at p={p} e={e}: above MAX_CENSUS_SIZE")
                continue
            tasks.append((f"census p={p} e={e}", lambda p=p, e=e: [verify_census(p, e, threads=threads)]))
    tasks.append(("g27", lambda: [verify_g27(threads)]))

    gauss_primes = [p for p in primes if p >= 5]
    for p in gauss_primes:
        tasks.append((f"mori p={p}", lambda p=p: [verify_mori_table(p, threads)]))
        tasks.append((f"singular p={p}", lambda p=p: [verify_singular_table(p, threads)]))
        tasks.append((f"fourier p={p}", lambda p=p: [verify_phi_transforms(p, threads)]))
    if gauss_primes:
        tasks.append(("parseval", lambda: [parseval_check(gauss_primes[0], threads)]))
    for p in sorted({2, 3} | set(primes)):
        tasks.append((f"divisible fourier p={p}", lambda p=p: [verify_divisible_fourier(p)]))
    tasks.append(("squarefree divisible", lambda: [verify_squarefree_divisible(15, 5, rng)]))

    chi5, chi15 = all_characters(5)[1], all_characters(15)[1]
    tasks.append(("identities N=5", lambda: [check_identities(5, chi5, rng), check_fourier_inversion(5, rng)]))
    tasks.append(("decomposition N=15", lambda: [check_decomposition(chi15, rng), check_product_fourier(3, 5, rng)]))
    tasks.append(("reduction N=25", lambda: [check_reduction(chi5, 25, 5, rng), check_pv_reduction(5, rng)]))
    tasks.append(("partial zeta N=5", lambda: [verify_partial_zeta(Form.of((1, 0, 1, 1), 5), small, 1, threads)]))

    tasks.append(("ohno-nakagawa", lambda: [verify_ohno_nakagawa(bound, threads)]))
    oracle_bound = min(bound, config.ORACLE_BOUND)
    tasks.append(("oracle", lambda: [verify_oracle(oracle_bound, threads),
                                     verify_stabilizer_rings(oracle_bound, threads)]))
    tasks.append(("theta", lambda: [verify_theta(n, small, sign, threads) for n in (6, 15) for sign in (1, -1)]))
    tasks.append(("twisted", lambda: [verify_twisted(unramified_cubic_character(7), 1, small, 1, threads)]))

    unramified = [p for p in primes if p >= 5]
    for suite in SUITES:
        suite_primes = unramified if suite.startswith("ur") or suite in ("corollaries", "properties") else None
        if suite_primes is not None and not suite_primes:
            continue
        tasks.append((f"density {suite}",
                      lambda suite=suite, sp=suite_primes: verify_residue_tables(suite, sp, rng, threads)))
    return tasks


def cmd_verify_all(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    tasks = _suite_tasks(args, rng)
    names = [name for name, _ in tasks]
    thunks = dict(tasks)
    logger.info(f"verify-all: {len(tasks)} suites with {args.threads} worker(s)")

    def run_batch(batch: List[str]) -> Dict[str, Tuple[List[VerificationReport], float]]:
        out = {}
        for name in batch:
            start = time.time()
            out[name] = (thunks[name](), time.time() - start)
        return out

    outcome = process_in_batches(names, 1, run_batch, verbose=args.verbose, logger=logger)
    reports: List[VerificationReport] = []
    for name in names:
        if name not in outcome["results"]:
            continue
        suite_reports, elapsed = outcome["results"][name]
        logger.info(f"{name}: {elapsed:.1f}s")
        reports.extend(suite_reports)
    for error in outcome["errors"]:
        failed = VerificationReport(f"error in {names[error['batch'] - 1]}")
        failed.check("suite completed", False, note=error["error"])
        reports.append(failed.finish())
    code = _finish(args, reports)
    passed = sum(r.passed for r in reports)
    print(f"\n{'=' * 80}")
    print(f"verify-all: {passed}/{len(reports)} reports passed")
    print(f"{'=' * 80}")
    return code


# ============================================================================
# CLI INTERFACE
# ============================================================================

COMMANDS = {
    "atlas": cmd_atlas,
    "gauss": cmd_gauss,
    "zeta": cmd_zeta,
    "density": cmd_density,
    "verify-all": cmd_verify_all,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    setup_logging("orbital", logging.DEBUG if args.verbose else logging.INFO)
    setup_logging(__name__, logging.DEBUG if args.verbose else logging.INFO)
    if args.threads < 1:
        parser.print_usage(sys.stderr)
        print("runner.py: error: --threads must be at least 1", file=sys.stderr)
        return EXIT_USAGE

    try:
        return COMMANDS[args.command](args)
    except (ResourceCapError, DomainError, UnsupportedRingError, ContractViolationError) as e:
        print(f"runner.py: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"runner.py: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except VerificationError as e:
        print(f"runner.py: verification failed: {e}", file=sys.stderr)
        return EXIT_MISMATCH


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
