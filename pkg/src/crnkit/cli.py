"""``crnkit`` command line.

Subcommands: ``analyze``, ``moments``, ``cbn``, ``simulate``, ``compare``.

Exit codes: 0 ok, 1 other usage or analysis error, 2 parse error, 3 moment cap
exceeded, 4 no complex-balance certificate, 5 empty or infinite fiber,
6 comparison failed.

Every JSON report carries the tool version, the sha256 of the input file, the
seed and the full configuration; nothing time-dependent goes into any output,
so reruns are byte-identical.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import re
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, cbn, moments, network, serialize, ssa
from .parse import ParseError, format_network, parse_source

EXIT_OK, EXIT_ERROR, EXIT_PARSE, EXIT_CAP, EXIT_NO_CERT, EXIT_FIBER, EXIT_COMPARE = range(7)


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_ERROR):
        super().__init__(message)
        self.code = code


# --- formatting -----------------------------------------------------------------------


def fmt(x) -> str:
    """``p/q (float)`` for rationals, plain text for integers, ``%.10g`` for floats."""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x} ({float(x):.10g})"
    if isinstance(x, int):
        return str(x)
    return f"{float(x):.10g}"


def number_json(x):
    return serialize.encode_number(x if not isinstance(x, np.floating) else float(x))


def monomial_label(names, u) -> str:
    parts = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, u) if e]
    return "*".join(parts) or "1"


def complex_label(names, c) -> str:
    return " + ".join(n if e == 1 else f"{e} {n}" for n, e in zip(names, c) if e) or "0"


def parse_monomial(text: str, names) -> tuple[int, ...]:
    """``S1^2*S3`` (optionally wrapped in ``E[...]``) to an exponent vector."""
    t = text.strip()
    m = re.fullmatch(r"E\[(.*)\]", t)
    if m:
        t = m.group(1)
    u = [0] * len(names)
    for factor in t.split("*"):
        m = re.fullmatch(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\^\s*([0-9]+))?\s*", factor)
        if not m:
            raise CliError(f"bad moment target {text!r}")
        name, power = m.group(1), int(m.group(2) or 1)
        if name not in names:
            raise CliError(f"moment target {text!r} uses unknown or eliminated species {name!r}")
        u[names.index(name)] += power
    if not any(u):
        raise CliError(f"moment target {text!r} is constant")
    return tuple(u)


def parse_law(text: str, names, params) -> tuple[tuple[int, ...], Fraction]:
    """``S1 + S2 = 10`` (or ``= beta`` for a declared parameter) to ``(row, value)``."""
    if text.count("=") != 1:
        raise CliError(f"conservation law {text!r} must look like 'S1 + S2 = 10'")
    lhs, rhs = text.split("=")
    row = [0] * len(names)
    for term in lhs.split("+"):
        m = re.fullmatch(r"\s*([0-9]*)\s*([A-Za-z_][A-Za-z0-9_]*)\s*", term)
        if not m or m.group(2) not in names:
            raise CliError(f"bad term {term.strip()!r} in conservation law {text!r}")
        row[names.index(m.group(2))] += int(m.group(1) or 1)
    rhs = rhs.strip()
    if rhs in params:
        value = params[rhs]
    else:
        try:
            value = Fraction(rhs)
        except (ValueError, ZeroDivisionError):
            raise CliError(f"bad value {rhs!r} in conservation law {text!r}") from None
    return tuple(row), value


def parse_rationals(values, what: str) -> tuple[Fraction, ...]:
    try:
        return tuple(Fraction(v) for v in values)
    except (ValueError, ZeroDivisionError):
        raise CliError(f"{what} must be rationals, got {values}") from None


# --- shared plumbing ------------------------------------------------------------------


def default_seed() -> int:
    raw = os.environ.get("CRN_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"CRN_SEED must be an integer, got {raw!r}") from None


def load(args):
    path = Path(args.network)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    overrides = {}
    for item in args.set or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise CliError(f"--set expects NAME=VALUE, got {item!r}")
        overrides[name.strip()] = parse_rationals([value.strip()], "--set values")[0]
    text = data.decode("utf-8")
    try:
        src = parse_source(text, overrides)
    except ParseError as exc:
        lines = text.splitlines()
        msg = f"{path}:{exc.line}:{exc.column}: error: {exc.message}"
        if 1 <= exc.line <= len(lines):
            msg += "\n    " + lines[exc.line - 1] + "\n    " + " " * max(exc.column - 1, 0) + "^"
        raise CliError(msg, EXIT_PARSE) from None
    except network.InvalidNetwork as exc:
        raise CliError(f"{path}: error: {exc}", EXIT_PARSE) from None
    return src, hashlib.sha256(data).hexdigest()


def config_of(args) -> dict:
    skip = {"func", "format"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        out[k] = list(v) if isinstance(v, tuple) else v
    return out


def envelope(args, digest: str, command: str, result: dict) -> dict:
    return {
        "tool": {"name": "crnkit", "version": __version__},
        "command": command,
        "input": {"file": Path(args.network).name, "sha256": digest},
        "seed": args.seed,
        "config": config_of(args),
        "result": result,
    }


def dump_json(d) -> str:
    return json.dumps(d, sort_keys=True, indent=2) + "\n"


def write_outputs(args, files: dict[str, str]):
    if not args.out:
        return
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, content in files.items():
        (out / name).write_text(content, encoding="utf-8")


def emit(args, report: dict, text: str):
    sys.stdout.write(dump_json(report) if args.format == "json" else text)


def reaction_lines(net) -> list[str]:
    return [line for line in format_network(net).splitlines() if not line.startswith("species")]


# --- analyze --------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    src, digest = load(args)
    net = src.network
    gamma = network.stoichiometry(net)
    basis = network.conservation_basis(gamma)
    cs = network.complexes(net)
    summary = network.structure(net)
    try:
        cert = network.ffn_certificate(net)
        ffn = serialize.to_dict(cert)
    except network.NotFFN as exc:
        cert = None
        ffn = {"error": str(exc), "cycle": list(exc.cycle or []), "reaction": exc.reaction}
    result = {
        "species": list(net.species),
        "reactions": reaction_lines(net),
        "stoichiometry": serialize.to_dict(gamma),
        "conservation": serialize.to_dict(basis),
        "complexes": [complex_label(net.species, c) for c in cs.complexes],
        "structure": serialize.to_dict(summary),
        "ffn": ffn,
    }
    report = envelope(args, digest, "analyze", result)
    write_outputs(args, {"analysis.json": dump_json(report)})

    lines = [f"species: {' '.join(net.species)}", "reactions:"]
    lines += [f"  R{j + 1}: {s}" for j, s in enumerate(result["reactions"])]
    lines.append("stoichiometry (species x reactions):")
    lines += ["  " + " ".join(f"{x:>3}" for x in row) for row in gamma.entries]
    lines.append(f"rank: {summary.rank}")
    if basis.rows:
        lines.append("conservation laws:")
        for row in basis.rows:
            lines.append("  " + " + ".join(
                (s if c == 1 else f"{c} {s}") for s, c in zip(net.species, row) if c
            ) + " = const")
    else:
        lines.append("conservation laws: none")
    lines.append(f"complexes ({summary.n_complexes}): {', '.join(result['complexes'])}")
    lines.append(f"linkage classes: {summary.n_linkage_classes}")
    lines.append(f"weakly reversible: {'yes' if summary.weakly_reversible else 'no'}")
    lines.append(f"deficiency: {summary.deficiency}")
    if cert is not None:
        layers = "; ".join(f"{i + 1}: {' '.join(ss)}" for i, ss in enumerate(cert.layers()))
        lines.append(f"feedforward: yes, layers {layers}")
    else:
        lines.append(f"feedforward: no ({ffn['error']})")
    emit(args, report, "\n".join(lines) + "\n")
    return EXIT_OK


# --- moments --------------------------------------------------------------------------


def reduced_network(args, src):
    """Apply ``--conserve`` laws; returns the polynomial network and the laws used."""
    net = src.network
    pnet = net.polynomial_form()
    laws = []
    eliminate = list(args.eliminate or [])
    for t, text in enumerate(args.conserve or []):
        row, value = parse_law(text, list(pnet.species), src.params)
        if t < len(eliminate):
            target = eliminate[t]
            if target not in pnet.species:
                raise CliError(f"--eliminate {target!r} is not a remaining species")
        else:
            ones = [i for i, c in enumerate(row) if c == 1]
            if not ones:
                raise CliError(f"law {text!r} has no species with coefficient 1 to eliminate")
            target = pnet.species[ones[-1]]
        try:
            pnet = network.reduce_by_conservation(pnet, row, value, target)
        except (network.NotConserved, network.BadCoefficient) as exc:
            raise CliError(str(exc)) from None
        laws.append({"law": text, "row": list(row), "value": number_json(value), "eliminated": target})
    return pnet, laws


def build_system(args, src):
    pnet, laws = reduced_network(args, src)
    names = list(pnet.species)
    if args.target:
        targets = [parse_monomial(t, names) for t in args.target]
    else:
        n = len(names)
        targets = [tuple(p * (i == j) for j in range(n)) for i in range(n) for p in (1, 2)]
    try:
        system = moments.moment_system(pnet, targets, args.cap)
    except moments.CapExceeded as exc:
        frontier = ", ".join(monomial_label(names, u) for u in exc.frontier[:10])
        more = f" (+{len(exc.frontier) - 10} more)" if len(exc.frontier) > 10 else ""
        raise CliError(
            f"moment closure exceeded cap {exc.cap} after {len(exc.basis)} moments; "
            f"frontier: {frontier}{more}",
            EXIT_CAP,
        ) from None
    return pnet, laws, system


def reduced_state(args, net, pnet, laws):
    """Map ``--k0`` (full state) to the reduced species; checks the conservation laws."""
    k0 = tuple(args.k0)
    if len(k0) != net.n_species:
        raise CliError(f"--k0 needs {net.n_species} entries, got {len(k0)}")
    if any(x < 0 for x in k0):
        raise CliError("--k0 must be nonnegative")
    state = dict(zip(net.species, k0))
    for law in laws:
        names = [s for s in net.species if s in state]
        total = sum(c * state[s] for c, s in zip(law["row"], names))
        if total != serialize.decode_number(law["value"]):
            raise CliError(f"--k0 violates conservation law {law['law']!r}")
        del state[law["eliminated"]]
    return [net.species.index(s) for s in pnet.species]


def cmd_moments(args) -> int:
    src, digest = load(args)
    pnet, laws, system = build_system(args, src)
    names = list(pnet.species)
    labels = [monomial_label(names, u) for u in system.basis.moments]
    result = {
        "species": names,
        "conservation": laws,
        "system": serialize.to_dict(system),
        "labels": labels,
    }
    lines = [f"moment basis ({system.size}): " + ", ".join(f"E[{s}]" for s in labels)]
    lines.append("A:")
    lines += ["  [" + ", ".join(fmt(x) for x in row) + "]" for row in system.A]
    lines.append("b: [" + ", ".join(fmt(x) for x in system.b) + "]")

    if args.times:
        if args.k0 is None:
            raise CliError("--times needs --k0")
        keep = reduced_state(args, src.network, pnet, laws)
        k = [args.k0[i] for i in keep]
        x0 = [Fraction(math.prod(k[i] ** e for i, e in enumerate(u))) for u in system.basis.moments]
        values = moments.transient(system, x0, args.times)
        result["transient"] = [serialize.to_dict(v) for v in values]
        lines.append("transient:")
        for v in values:
            lines.append(f"  t = {v.time:g}: " + ", ".join(
                f"E[{s}] = {fmt(x)}" for s, x in zip(labels, v.values)
            ))
    else:
        try:
            values = moments.steady_state(system)
        except moments.Inconsistent as exc:
            raise CliError(f"steady state: {exc}") from None
        result["steady_state"] = serialize.to_dict(values)
        lines.append("steady state" + ("" if values.unique else " (not unique; one solution shown)") + ":")
        lines += [f"  E[{s}] = {fmt(x)}" for s, x in zip(labels, values.values)]

    report = envelope(args, digest, "moments", result)
    write_outputs(args, {"moments.json": dump_json(report)})
    emit(args, report, "\n".join(lines) + "\n")
    return EXIT_OK


# --- cbn ------------------------------------------------------------------------------


def equilibrium(args, net, verify: bool):
    if args.lam is not None:
        lam = parse_rationals(args.lam, "--lambda")
        if len(lam) != net.n_species or any(x <= 0 for x in lam):
            raise CliError(f"--lambda needs {net.n_species} positive values")
        if not verify:
            return lam, "given (not verified)"
        try:
            cbn.verify_complex_balance(net, lam, 0)
        except cbn.Unbalanced as exc:
            raise CliError(f"given lambda is not complex balanced: {exc}", EXIT_NO_CERT) from None
        return lam, "given"
    try:
        eq = cbn.solve_complex_balance(net)
    except cbn.NoCertificate as exc:
        raise CliError(str(exc), EXIT_NO_CERT) from None
    return eq.lam, "solved" if eq.exact else "solved (floating point)"


def conservation_table(args, net, lam):
    basis = network.conservation_basis(net)
    if not basis.nonnegative and basis.rows:
        raise CliError("conservation classes are not finite (no nonnegative law basis)", EXIT_FIBER)
    beta = tuple(args.beta or ())
    if len(beta) != basis.m:
        laws = "; ".join(" + ".join(f"{c}*{s}" for s, c in zip(net.species, r) if c) for r in basis.rows)
        raise CliError(f"--beta needs {basis.m} value(s), one per law: {laws or 'none'}")
    table = cbn.PartitionTable(basis, lam)
    if table.Z(beta) == 0:
        raise CliError(f"conservation class beta={list(beta)} contains no states", EXIT_FIBER)
    return basis, table, beta


def cbn_quantities(table, beta, net):
    """Per-species conditional mean and variance (Poisson for free species)."""
    out = []
    for j, s in enumerate(net.species):
        if j in table.free:
            lam = table.lam[j]
            out.append((s, lam, lam, True))
        else:
            mean, _, var = cbn.conditional_moments(table, beta, j)
            out.append((s, mean, var, False))
    return out


def cmd_cbn(args) -> int:
    src, digest = load(args)
    net = src.network
    summary = network.structure(net)
    lam, origin = equilibrium(args, net, verify=True)
    basis, table, beta = conservation_table(args, net, lam)
    dist = cbn.conditional_distribution(table, beta, net.species)
    stats = cbn_quantities(table, beta, net)
    marginals = {net.species[j]: dist.marginal(j) for j in range(net.n_species) if j not in table.free}

    result = {
        "structure": serialize.to_dict(summary),
        "lambda": [number_json(x) for x in lam],
        "lambda_origin": origin,
        "conservation": serialize.to_dict(basis),
        "beta": list(beta),
        "Z": number_json(table.Z(beta)),
        "distribution": serialize.to_dict(dist),
        "moments": {
            s: {"mean": number_json(m), "variance": number_json(v), "poisson": free}
            for s, m, v, free in stats
        },
        "marginals": {
            s: [[k, number_json(p)] for k, p in sorted(marg.items())] for s, marg in marginals.items()
        },
    }
    report = envelope(args, digest, "cbn", result)
    write_outputs(args, {
        "cbn.json": dump_json(report),
        "z_table.csv": serialize.z_table_csv(table),
    })

    lines = [
        f"deficiency {summary.deficiency}, "
        f"{'weakly reversible' if summary.weakly_reversible else 'not weakly reversible'}",
        f"lambda ({origin}): " + ", ".join(f"{s} = {fmt(x)}" for s, x in zip(net.species, lam)),
        f"beta: {list(beta)}",
        f"Z(beta) = {fmt(table.Z(beta))}",
        f"stationary distribution ({len(dist.support)} states):",
    ]
    if table.free:
        free = ", ".join(net.species[i] for i in table.free)
        lines[-1] = f"stationary distribution ({len(dist.support)} states; {free} independent Poisson, shown as 0):"
    shown = dist.support[: args.max_states]
    for k, p in zip(shown, dist.probabilities):
        lines.append(f"  {list(k)}: {fmt(p)}")
    if len(dist.support) > len(shown):
        lines.append(f"  ... {len(dist.support) - len(shown)} more")
    for s, m, v, free in stats:
        tag = " (Poisson, unconstrained)" if free else ""
        lines.append(f"{s}: mean {fmt(m)}, variance {fmt(v)}{tag}")
    for s, marg in marginals.items():
        lines.append(f"marginal {s}: " + ", ".join(f"{k}: {fmt(p)}" for k, p in marg.items()))
    emit(args, report, "\n".join(lines) + "\n")
    return EXIT_OK


# --- simulate / compare ---------------------------------------------------------------


def run_ensemble(args, net, k0, times=None):
    if args.backend and args.backend not in ssa.available_backends():
        raise CliError(f"backend {args.backend!r} is not available")
    horizon = args.horizon if args.horizon is not None else ssa.default_horizon(net)
    return ssa.simulate_ensemble(
        net, k0, args.trajectories, args.seed,
        times=times if times is not None else [horizon],
        backend=args.backend, n_jobs=args.jobs,
    )


def cmd_simulate(args) -> int:
    src, digest = load(args)
    net = src.network
    if len(args.k0) != net.n_species:
        raise CliError(f"--k0 needs {net.n_species} entries, got {len(args.k0)}")
    ens = run_ensemble(args, net, args.k0, args.times)
    summary = ens.summary()
    summary.pop("backend")
    report = envelope(args, digest, "simulate", summary)
    files = {"ensemble.csv": ens.to_csv(), "ensemble.json": dump_json(report)}
    if args.dump_trajectory:
        traj = ssa.ssa_run(net, args.k0, float(ens.times[-1]), args.seed, 0, args.backend)
        files["trajectory.csv"] = traj.to_csv()
    write_outputs(args, files)
    lines = [
        f"{ens.size} trajectories, {ens.n_events} events, seed {args.seed}",
        f"state at t = {float(ens.times[-1]):g}:",
    ]
    for j, s in enumerate(net.species):
        e = [0] * net.n_species
        e[j] = 1
        mean, se = ens.estimate_moments(e)
        lines.append(f"  {s}: mean {mean:.6g} +- {se:.3g}")
    emit(args, report, "\n".join(lines) + "\n")
    return EXIT_OK


def compare_row(name, exact, estimate, se, z_max):
    diff = float(exact) - estimate
    z = abs(diff) / se if se > 0 else (0.0 if diff == 0 else float("inf"))
    return {
        "quantity": name,
        "analytic": number_json(exact),
        "estimate": repr(float(estimate)),
        "se": repr(float(se)),
        "z": repr(float(z)),
        "pass": bool(z <= z_max),
    }


def cmd_compare(args) -> int:
    src, digest = load(args)
    net = src.network
    mode = args.mode or ("cbn" if args.beta is not None else "moments")
    rows = []
    if mode == "moments":
        if args.k0 is None:
            raise CliError("moments comparison needs --k0")
        pnet, laws, system = build_system(args, src)
        keep = reduced_state(args, net, pnet, laws)
        values = moments.steady_state(system)
        if not values.unique:
            raise CliError("steady state is not unique; add --conserve laws")
        k0 = args.k0
        ens = run_ensemble(args, net, k0)
        names = list(pnet.species)
        for u, x in zip(system.basis.moments, values.values):
            full = [0] * net.n_species
            for i, e in zip(keep, u):
                full[i] = e
            est, se = ens.estimate_moments(full)
            rows.append(compare_row(f"E[{monomial_label(names, u)}]", x, est, se, args.z))
    else:
        lam, origin = equilibrium(args, net, verify=False)
        basis, table, beta = conservation_table(args, net, lam)
        k0 = args.k0 if args.k0 is not None else cbn.first_fiber_state(table, beta)
        if len(k0) != net.n_species:
            raise CliError(f"--k0 needs {net.n_species} entries")
        if any(sum(a * x for a, x in zip(row, k0)) != b for row, b in zip(basis.rows, beta)):
            raise CliError("--k0 is not in the conservation class beta")
        ens = run_ensemble(args, net, k0)
        for s, m, v, _ in cbn_quantities(table, beta, net):
            j = net.species.index(s)
            e = [0] * net.n_species
            e[j] = 1
            est, se = ens.estimate_moments(e)
            rows.append(compare_row(f"E[{s}]", m, est, se, args.z))
            vest, vse = ens.estimate_variance(j)
            rows.append(compare_row(f"Var[{s}]", v, vest, vse, args.z))
    ok = all(r["pass"] for r in rows)
    result = {
        "mode": mode,
        "k0": [int(x) for x in k0],
        "trajectories": ens.size,
        "horizon": repr(float(ens.times[-1])),
        "rng": ssa.RNG_NAME,
        "z_threshold": repr(float(args.z)),
        "rows": rows,
        "pass": ok,
    }
    report = envelope(args, digest, "compare", result)
    write_outputs(args, {"compare.json": dump_json(report), "ensemble.csv": ens.to_csv()})
    lines = [f"{mode} vs SSA: {ens.size} trajectories, horizon {float(ens.times[-1]):g}, seed {args.seed}"]
    for r in rows:
        exact = serialize.decode_number(r["analytic"])
        lines.append(
            f"  {r['quantity']}: analytic {fmt(exact)}, SSA {float(r['estimate']):.6g} "
            f"+- {float(r['se']):.3g} (z = {float(r['z']):.2f}) {'ok' if r['pass'] else 'FAIL'}"
        )
    lines.append("PASS" if ok else "FAIL")
    emit(args, report, "\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_COMPARE


# --- argument parsing -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("network", help="network file (.crn)")
    common.add_argument("--out", help="directory for JSON/CSV outputs")
    common.add_argument("--seed", type=int, default=None, help="master seed (default: $CRN_SEED or 0)")
    common.add_argument("--set", action="append", metavar="NAME=VALUE", help="override a declared parameter")
    common.add_argument("--format", choices=["text", "json"], default="text", help="stdout format")

    moment_opts = argparse.ArgumentParser(add_help=False)
    moment_opts.add_argument("--target", action="append", metavar="MONOMIAL",
                             help="moment to close, e.g. S3 or S1^2*S3 (repeatable; default: first and second moment of every species)")
    moment_opts.add_argument("--conserve", action="append", metavar="LAW",
                             help="conservation law used to eliminate a species, e.g. 'S1+S2=10'")
    moment_opts.add_argument("--eliminate", action="append", metavar="SPECIES",
                             help="species eliminated by the matching --conserve law")
    moment_opts.add_argument("--cap", type=int, default=moments.DEFAULT_CAP, help="maximum basis size")

    cbn_opts = argparse.ArgumentParser(add_help=False)
    cbn_opts.add_argument("--beta", type=int, nargs="+", help="conservation class values")
    cbn_opts.add_argument("--lambda", dest="lam", nargs="+", metavar="VALUE",
                          help="equilibrium to use instead of solving")

    sim_opts = argparse.ArgumentParser(add_help=False)
    sim_opts.add_argument("--k0", type=int, nargs="+", help="initial state")
    sim_opts.add_argument("--trajectories", type=int, default=10000)
    sim_opts.add_argument("--horizon", type=float, help="end time (default 20 / slowest degradation rate)")
    sim_opts.add_argument("--jobs", type=int, default=1, help="worker threads")
    sim_opts.add_argument("--backend", choices=["cython", "python"], help="SSA kernel")

    p = argparse.ArgumentParser(prog="crnkit", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"crnkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="structure, conservation laws, feedforward layers")
    a.set_defaults(func=cmd_analyze)

    m = sub.add_parser("moments", parents=[common, moment_opts], help="closed moment system and its solution")
    mode = m.add_mutually_exclusive_group()
    mode.add_argument("--steady", action="store_true", help="solve A x + b = 0 (default)")
    mode.add_argument("--times", type=float, nargs="+", help="transient values at these times")
    m.add_argument("--k0", type=int, nargs="+", help="initial state for --times")
    m.set_defaults(func=cmd_moments)

    c = sub.add_parser("cbn", parents=[common, cbn_opts], help="product-form stationary law on one class")
    c.add_argument("--max-states", type=int, default=50, help="rows of the distribution printed")
    c.set_defaults(func=cmd_cbn)

    s = sub.add_parser("simulate", parents=[common, sim_opts], help="SSA ensemble")
    s.add_argument("--times", type=float, nargs="+", help="sample times (default: horizon only)")
    s.add_argument("--dump-trajectory", action="store_true", help="also write trajectory.csv for run 0")
    s.set_defaults(func=cmd_simulate)

    k = sub.add_parser("compare", parents=[common, moment_opts, cbn_opts, sim_opts],
                       help="analytic results against an SSA ensemble")
    k.add_argument("--mode", choices=["moments", "cbn"], help="default: cbn if --beta is given")
    k.add_argument("--z", type=float, default=3.0, help="pass threshold in standard errors")
    k.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = default_seed()
        if getattr(args, "trajectories", 2) < 2:
            raise CliError("--trajectories must be at least 2")
        if args.command == "simulate" and args.k0 is None:
            raise CliError("simulate needs --k0")
        return args.func(args)
    except CliError as exc:
        print(f"crnkit: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
