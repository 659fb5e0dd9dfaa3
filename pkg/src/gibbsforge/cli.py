"""Command-line front end: file-based pipelines with reproducibility manifests.

Commands: gen, encode, parent-ham, exact, sample, decode, verify, thresholds.
Every file output is paired with <out>.manifest.json recording the resolved
parameters, seed, inputs, package version, and backend, sufficient to
regenerate the output byte for byte.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, analysis, encoding, kernels
from .caps import _ENV_VAR, resolve_dense_cap
from .circuit import (
    FAMILIES,
    LatticeSpec,
    XProgram,
    encode_bms,
    encode_cnot,
    generate_family,
    restrict,
)
from .errors import (
    GibbsforgeError,
    InputError,
    ResourceCapError,
    VerificationError,
)
from .hamiltonian import ParentHamiltonian, analyze, build_parent
from .simulate import (
    Distribution,
    bitstring_of,
    gibbs_diagonal_dense,
    gibbs_diagonal_spectral,
    noisy_circuit_exact,
    noisy_circuit_sample,
    q_of_beta,
    read_samples_jsonl,
    write_exact_csv,
    write_samples_jsonl,
)

_SUITES = ("equivalence", "encoding", "lemmas", "thresholds", "all")


def _info(args, message: str) -> None:
    if not getattr(args, "quiet", False):
        print(message, file=sys.stderr)


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"corrupt JSON in {path}: {exc}") from exc


def _load_program(path: str) -> XProgram:
    return XProgram.from_json_dict(_load_json(path))


def _manifest(args, command: str, params: dict, inputs: list, outputs: list, t0: float) -> dict:
    return {
        "command": command,
        "params": params,
        "seed": getattr(args, "seed", None),
        "inputs": inputs,
        "outputs": outputs,
        "version": __version__,
        "backend": kernels.backend_name,
        "dense_cap": resolve_dense_cap(),
        "cap_env": os.environ.get(_ENV_VAR),
        "wall_time_s": round(time.perf_counter() - t0, 6),
    }


def _emit(args, text: str, manifest: dict | None) -> None:
    """Write the payload to --out (plus manifest) or stdout."""
    out = getattr(args, "out", None)
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text)
    if manifest is not None:
        manifest["outputs"] = [out]
        with open(out + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    _info(args, f"wrote {out}")


def _check_format(args, allowed: tuple[str, ...]) -> str:
    fmt = getattr(args, "format", None) or allowed[0]
    if fmt not in allowed:
        raise InputError(
            f"format {fmt!r} not supported by this command (allowed: {', '.join(allowed)})"
        )
    return fmt


def _resolve_rate(args) -> tuple[float | None, float]:
    """(beta or None, q) from the mutually exclusive --beta / --q pair."""
    if args.beta is not None:
        beta = float(args.beta)
        return beta, q_of_beta(beta)
    q = float(args.q)
    if not (math.isfinite(q) and 0.0 <= q <= 1.0):
        raise InputError(f"rate must lie in [0, 1], got {q}")
    return None, q


# --- commands ---------------------------------------------------------------


def cmd_gen(args) -> int:
    t0 = time.perf_counter()
    pattern = json.loads(args.phase_pattern) if args.phase_pattern else None
    if pattern is not None:
        pattern = {int(k): int(v) for k, v in pattern.items()}
    spec = LatticeSpec(family=args.family, L=args.L, phase_pattern=pattern)
    program = generate_family(spec)
    _check_format(args, ("json",))
    text = json.dumps(program.to_json_dict(), indent=2) + "\n"
    params = {"family": args.family, "L": args.L, "phase_pattern": pattern}
    _emit(args, text, _manifest(args, "gen", params, [], [], t0))
    return 0


def cmd_encode(args) -> int:
    t0 = time.perf_counter()
    program = _load_program(args.infile)
    if args.form == "bms":
        encoded = encode_bms(program, args.reps)
    else:
        encoded = encode_cnot(program, args.reps)
    _check_format(args, ("json",))
    text = json.dumps(encoded.to_json_dict(), indent=2) + "\n"
    params = {"r": args.reps, "form": args.form}
    _emit(args, text, _manifest(args, "encode", params, [args.infile], [], t0))
    return 0


def cmd_parent(args) -> int:
    t0 = time.perf_counter()
    program = _load_program(args.infile)
    parent = build_parent(program)
    payload = parent.to_json_dict()
    if args.analyze:
        payload = {"hamiltonian": payload, "profile": analyze(parent).to_json_dict()}
    _check_format(args, ("json",))
    text = json.dumps(payload, indent=2) + "\n"
    params = {"analyze": bool(args.analyze)}
    _emit(args, text, _manifest(args, "parent-ham", params, [args.infile], [], t0))
    return 0


def cmd_exact(args) -> int:
    t0 = time.perf_counter()
    program = _load_program(args.infile)
    beta, q = _resolve_rate(args)
    dist = noisy_circuit_exact(program, q)
    fmt = _check_format(args, ("csv", "json"))
    params = {"beta": beta, "q": q}
    manifest = _manifest(args, "exact", params, [args.infile], [], t0)
    if fmt == "csv":
        if args.out is None:
            lines = ["bitstring,probability"]
            lines += [
                f"{bits},{p!r}"
                for bits, p in sorted(
                    (bitstring_of(i, dist.n), float(dist.probs[i])) for i in range(1 << dist.n)
                )
            ]
            _emit(args, "\n".join(lines) + "\n", None)
        else:
            write_exact_csv(dist, args.out)
            manifest["outputs"] = [args.out]
            with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
                json.dump(manifest, fh, indent=2)
                fh.write("\n")
            _info(args, f"wrote {args.out}")
    else:
        table = {
            bits: p
            for bits, p in sorted(
                (bitstring_of(i, dist.n), float(dist.probs[i])) for i in range(1 << dist.n)
            )
        }
        text = json.dumps({"n": dist.n, "beta": beta, "q": q, "probabilities": table}, indent=2)
        _emit(args, text + "\n", manifest)
    return 0


def cmd_sample(args) -> int:
    t0 = time.perf_counter()
    program = _load_program(args.infile)
    beta, q = _resolve_rate(args)
    dist = noisy_circuit_sample(program, q, args.shots, args.seed, threads=args.threads)
    _check_format(args, ("jsonl",))
    params = {"beta": beta, "q": q, "shots": args.shots, "threads": args.threads}
    manifest = _manifest(args, "sample", params, [args.infile], [], t0)
    if args.out is None:
        lines = [json.dumps({"shots": dist.shots, "seed": args.seed, "q": q})]
        lines += [
            json.dumps({"s": bits, "count": count})
            for bits, count in sorted(
                (bitstring_of(i, dist.n), c) for i, c in dist.counts.items()
            )
        ]
        _emit(args, "\n".join(lines) + "\n", None)
    else:
        write_samples_jsonl(dist, args.out, seed=args.seed, q=q)
        manifest["outputs"] = [args.out]
        with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
        _info(args, f"wrote {args.out}")
    return 0


def cmd_decode(args) -> int:
    t0 = time.perf_counter()
    layout = encoding.BlockLayout(n_logical=args.n_logical, r=args.reps)
    dist, header = read_samples_jsonl(args.infile)
    if dist.n != layout.n_physical:
        raise InputError(
            f"samples are over {dist.n} bits but layout needs {layout.n_physical}"
        )
    decoded = encoding.decode_distribution(dist, layout, args.tie_rule, args.form)
    _check_format(args, ("jsonl",))
    lines = [
        json.dumps(
            {"layout": {"n": layout.n_logical, "r": layout.r}, "tie_rule": args.tie_rule}
        )
    ]
    lines += [
        json.dumps({"s": bits, "count": count})
        for bits, count in sorted(
            (bitstring_of(i, decoded.n), c) for i, c in decoded.counts.items()
        )
    ]
    params = {
        "n_logical": args.n_logical,
        "r": args.reps,
        "tie_rule": args.tie_rule,
        "form": args.form,
        "input_header": header,
    }
    _emit(args, "\n".join(lines) + "\n", _manifest(args, "decode", params, [args.infile], [], t0))
    return 0


def cmd_thresholds(args) -> int:
    t0 = time.perf_counter()
    report = analysis.threshold_report()
    deltas = list(range(5, args.delta_max + 1, args.delta_step))
    frontier = [
        {"delta": d, "beta_min": analysis.degree_frontier(d)} for d in deltas
    ]
    fmt = _check_format(args, ("json", "csv"))
    if fmt == "csv":
        lines = ["delta,beta_min"]
        lines += [f"{row['delta']},{row['beta_min']!r}" for row in frontier]
        text = "\n".join(lines) + "\n"
    else:
        payload = {
            "report": report.to_json_dict(),
            "frontier": frontier,
            "chain_at_beta_star": analysis.p_fail_chain(report.beta_star, 30.0),
        }
        text = json.dumps(payload, indent=2) + "\n"
    params = {"delta_max": args.delta_max, "delta_step": args.delta_step}
    _emit(args, text, _manifest(args, "thresholds", params, [], [], t0))
    if not report.in_range_ok:
        raise VerificationError("threshold constants failed their consistency window")
    return 0


# --- verify suites ----------------------------------------------------------


def _random_program(rng: np.random.Generator, n: int) -> XProgram:
    count = int(rng.integers(n, 2 * n + 3))
    monomials = []
    seen = set()
    for _ in range(count):
        size = int(rng.integers(1, min(3, n) + 1))
        support = tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))
        k = int(rng.integers(1, 8))
        if support in seen:
            continue
        seen.add(support)
        monomials.append((support, k))
    if not monomials:
        monomials = [((0,), 1)]
    return XProgram(n, tuple(sorted(monomials)))


def equivalence_program_suite(max_n: int, seed: int = 0) -> list[tuple[str, XProgram]]:
    """Deterministic program list: families, encodings, random programs."""
    rng = np.random.default_rng(seed)
    suite: list[tuple[str, XProgram]] = []
    brick = generate_family(LatticeSpec("brickwork2d", 2))
    if brick.n <= max_n:
        suite.append(("brickwork2d-L2", brick))
    rauss = generate_family(LatticeSpec("raussendorf3d", 1))
    if max_n >= 8:
        suite.append(("raussendorf3d-L1-first8", restrict(rauss, tuple(range(8)))))
    elif max_n >= 6:
        suite.append(("raussendorf3d-L1-first6", restrict(rauss, tuple(range(6)))))
    base2 = _random_program(rng, 2)
    base3 = _random_program(rng, 3)
    for r in (2, 3):
        if 2 * r <= max_n:
            suite.append((f"cnot-encoded-n2-r{r}", encode_cnot(base2, r)))
            suite.append((f"bms-encoded-n2-r{r}", encode_bms(base2, r)))
    if 6 <= max_n:
        suite.append(("cnot-encoded-n3-r2", encode_cnot(base3, 2)))
    n = 2
    while len(suite) < 20:
        suite.append((f"random-n{n}-{len(suite)}", _random_program(rng, n)))
        n = 2 + (n - 1) % max(1, min(max_n, 8) - 1)
    return suite


def _suite_equivalence(max_n: int, seed: int) -> list[dict]:
    verdicts = []
    for name, program in equivalence_program_suite(max_n, seed):
        if program.n > max_n:
            continue
        parent = build_parent(program)
        for beta in (0.5, 1.0, 1.87, 3.0):
            spectral = gibbs_diagonal_spectral(program, beta)
            noisy = noisy_circuit_exact(program, q_of_beta(beta))
            dense = gibbs_diagonal_dense(parent, beta)
            l1_sn = spectral.l1_distance(noisy)
            l1_sd = spectral.l1_distance(dense)
            verdicts.append(
                verdict_record(
                    "gibbs_noisy_equivalence",
                    {"program": name, "n": program.n, "beta": beta},
                    {"l1_spectral_noisy": l1_sn, "l1_spectral_dense": l1_sd},
                    l1_sn <= 1e-10 and l1_sd <= 1e-10,
                )
            )
    return verdicts


def _suite_encoding(seed: int) -> list[dict]:
    rng = np.random.default_rng(seed)
    verdicts = []
    base = _random_program(rng, 2)
    for r in (1, 2, 3):
        layout = encoding.BlockLayout(base.n, r)
        for q in (0.0, 0.1, 0.25):
            rule = "leader" if r % 2 == 0 else "zero"
            p_exact = encoding.failure_rate_exact(q, r, rule)
            target = noisy_circuit_exact(base, p_exact)
            worst = 0.0
            for form, prog in (("cnot", encode_cnot(base, r)), ("bms", encode_bms(base, r))):
                phys = noisy_circuit_exact(prog, q)
                decoded = encoding.decode_distribution(phys, layout, rule, form)
                worst = max(worst, decoded.l1_distance(target))
            verdicts.append(
                verdict_record(
                    "encoding_pipeline_exact",
                    {"n": base.n, "r": r, "q": q, "tie_rule": rule},
                    {"worst_l1": worst, "p_exact": p_exact},
                    worst <= 1e-10,
                )
            )
    worst_gap = -math.inf
    ok = True
    for r in range(1, 16):
        for qi in range(0, 51):
            q = qi / 100.0
            for rule in ("zero", "leader"):
                gap = encoding.failure_rate_bound(q, r) - encoding.failure_rate_exact(q, r, rule)
                worst_gap = max(worst_gap, -gap)
                if gap < -1e-12:
                    ok = False
    verdicts.append(
        verdict_record(
            "failure_rate_bound_grid",
            {"r_max": 15, "q_grid": "0:0.5:0.01"},
            {"worst_excess": worst_gap},
            ok,
        )
    )
    return verdicts


def _suite_lemmas(trials: int, seed: int) -> list[dict]:
    rng = np.random.default_rng(seed)
    verdicts = []

    worst = 0.0
    premise_count = 0
    violations = 0
    delta = 0.3
    for _ in range(trials):
        n = int(rng.integers(2, 7))
        dim = 1 << n
        pv = rng.random(dim) + 1e-3
        pv /= pv.sum()
        mask = dim - 2  # all bits except decision bit 0
        budget = 0.9 * (delta / (2.0 + delta)) * pv[(np.arange(dim) & mask) == 0].sum()
        v = rng.standard_normal(dim)
        v -= v.mean()
        v *= budget / np.abs(v).sum()
        while (pv + v).min() < 0.0:
            v *= 0.5
        qv = pv + v
        qv /= qv.sum()
        gap, premise_ok = analysis.postselect_gap(
            Distribution.exact(n, pv), Distribution.exact(n, qv), delta
        )
        if premise_ok:
            premise_count += 1
            worst = max(worst, gap)
            if gap >= delta:
                violations += 1
    verdicts.append(
        verdict_record(
            "postselection_stability",
            {"trials": trials, "delta": delta},
            {"premise_trials": premise_count, "worst_gap": worst, "violations": violations},
            premise_count > 0 and violations == 0,
        )
    )

    violations = 0
    worst_ratio = 0.0
    for trial in range(trials):
        d = int(rng.integers(2, 17))
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        h1 = (g + g.conj().T) / 2.0
        e = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        herm = (e + e.conj().T) / 2.0
        h2 = h1 + 0.05 * herm if trial % 2 else herm
        lhs, rhs, ok = analysis.gibbs_perturbation_check(h1, h2)
        if not ok:
            violations += 1
        if rhs > 0:
            worst_ratio = max(worst_ratio, lhs / rhs)
    verdicts.append(
        verdict_record(
            "gibbs_perturbation",
            {"trials": trials, "dim_max": 16},
            {"violations": violations, "worst_lhs_over_rhs": worst_ratio},
            violations == 0,
        )
    )

    verdicts.append(analysis.cosh_bound_check(0.005))

    chain_ok = True
    worst_line = None
    for delta_deg in range(5, 101, 5):
        for bi in range(1, 27):
            record = analysis.p_fail_chain(bi / 10.0, float(delta_deg))
            if not record["ok"]:
                chain_ok = False
                worst_line = record["inputs"]
    verdicts.append(
        verdict_record(
            "p_fail_chain_grid",
            {"beta_grid": "0.1:2.6:0.1", "delta_grid": "5:100:5"},
            {"first_failure": worst_line},
            chain_ok,
        )
    )
    return verdicts


def _suite_thresholds() -> list[dict]:
    report = analysis.threshold_report()
    verdicts = [
        verdict_record(
            "beta_star_window",
            {},
            report.to_json_dict(),
            report.in_range_ok,
        )
    ]
    worst = 0.0
    for delta in (5, 20, 80, 100):
        numeric = analysis.degree_frontier(delta)
        closed = 2.0 * math.acosh((1.0 / analysis.Q_STAR) ** (5.0 / delta))
        worst = max(worst, abs(numeric - closed))
    scaling_ok = analysis.degree_frontier(80) <= analysis.degree_frontier(20) / 2.0 * 1.05
    verdicts.append(
        verdict_record(
            "degree_frontier",
            {"deltas": [5, 20, 80, 100]},
            {"worst_abs_dev_from_closed_form": worst, "scaling_ok": scaling_ok},
            worst <= 1e-5 and scaling_ok,
        )
    )
    return verdicts


def verdict_record(check: str, inputs: dict, values: dict, ok: bool) -> dict:
    return analysis.verdict(check, inputs, values, ok)


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    verdicts: list[dict] = []
    if args.suite in ("equivalence", "all"):
        verdicts += _suite_equivalence(args.max_n, args.seed)
    if args.suite in ("encoding", "all"):
        verdicts += _suite_encoding(args.seed)
    if args.suite in ("lemmas", "all"):
        verdicts += _suite_lemmas(args.trials, args.seed)
    if args.suite in ("thresholds", "all"):
        verdicts += _suite_thresholds()
    _check_format(args, ("jsonl", "json"))
    fmt = getattr(args, "format", None) or "jsonl"
    if fmt == "json":
        text = json.dumps(verdicts, indent=2) + "\n"
    else:
        text = "\n".join(json.dumps(v) for v in verdicts) + "\n"
    params = {"suite": args.suite, "max_n": args.max_n, "trials": args.trials}
    _emit(args, text, _manifest(args, "verify", params, [], [], t0))
    failed = [v for v in verdicts if not v["ok"]]
    if failed:
        _info(args, f"{len(failed)} of {len(verdicts)} checks failed")
        return 1
    _info(args, f"all {len(verdicts)} checks passed")
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gibbsforge",
        description="IQP circuit families, parent Hamiltonians, and noisy-sampling pipelines",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--out", "-o", help="output file (default: stdout, no manifest)")
    common.add_argument("--format", choices=("json", "csv", "jsonl"), help="output format")
    common.add_argument("--quiet", action="store_true", help="suppress progress messages")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a lattice family program")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("-L", type=int, default=1, help="linear lattice size")
    p.add_argument("--phase-pattern", help="JSON object {qubit: k} for the single-qubit layer")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("encode", parents=[common], help="repetition-encode a program")
    p.add_argument("--in", dest="infile", required=True, help="XProgram JSON")
    p.add_argument("-r", "--reps", dest="reps", type=int, required=True)
    p.add_argument("--form", required=True, choices=("bms", "cnot"))
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("parent-ham", parents=[common], help="build the parent Hamiltonian")
    p.add_argument("--in", dest="infile", required=True, help="XProgram JSON")
    p.add_argument("--analyze", action="store_true", help="include locality/degree profile")
    p.set_defaults(func=cmd_parent)

    p = sub.add_parser("exact", parents=[common], help="exact output distribution")
    p.add_argument("--in", dest="infile", required=True, help="XProgram JSON")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--beta", type=float)
    group.add_argument("--q", type=float)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("sample", parents=[common], help="Monte Carlo sampling")
    p.add_argument("--in", dest="infile", required=True, help="XProgram JSON")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--beta", type=float)
    group.add_argument("--q", type=float)
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("decode", parents=[common], help="majority-decode sampled outputs")
    p.add_argument("--in", dest="infile", required=True, help="samples JSONL")
    p.add_argument("--n-logical", dest="n_logical", type=int, required=True)
    p.add_argument("-r", "--reps", dest="reps", type=int, required=True)
    p.add_argument("--tie-rule", dest="tie_rule", choices=("zero", "leader"), default="zero")
    p.add_argument("--form", choices=("cnot", "bms"), default="cnot")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", choices=_SUITES)
    p.add_argument("--max-n", dest="max_n", type=int, default=6)
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("thresholds", parents=[common], help="hardness thresholds and frontier")
    p.add_argument("--delta-max", dest="delta_max", type=int, default=100)
    p.add_argument("--delta-step", dest="delta_step", type=int, default=5)
    p.set_defaults(func=cmd_thresholds)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    except GibbsforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
