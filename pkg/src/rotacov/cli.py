"""Command-line front end: state files in, machine-readable JSON out.

Verbs: charfun, maxprob, detfeasible, fidelity, interferometer, majorana,
u1check, batch.  Exit codes: 0 computed, 2 input error, 3 solver failure.
All numeric output is deterministic (floats printed to 12 significant
digits); ROTACOV_SOLVER_TOL overrides the conic solver tolerance.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .halfint import HalfInt
from .spin_core import BlockDensity, SpinKet
from .group_poly import canonical, charfun_mixed, charfun_pure
from .majorana import majorana_stars
from .u1_line import (
    InterferometerSpec,
    ProbSeq,
    coherent_charfun_coeffs,
    extraction_probability,
    phase_uncertainty,
    squeezed_target_coeffs,
    su2_coherent_line_feasible,
    u1_deterministic_feasible,
)
from .covariant_sdp import (
    SolverFailure,
    blocks_from_dense,
    deterministic_feasible,
    kraus_from_blocks,
    max_fidelity,
    max_fidelity_pure_target,
    max_prob,
)
from . import covariant_sdp


class InputError(Exception):
    """User-facing problem with an input file or flag."""


# --------------------------------------------------------------------------
# parsing and serialization
# --------------------------------------------------------------------------

def _parse_half(value, where: str) -> HalfInt:
    try:
        return HalfInt.of(value)
    except (ValueError, TypeError) as exc:
        raise InputError(f"{where}: {exc}") from None


def _parse_entry(x, where: str) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if (isinstance(x, list) and len(x) == 2
            and all(isinstance(v, (int, float)) for v in x)):
        return complex(x[0], x[1])
    raise InputError(f"{where}: matrix entries must be numbers or [re, im] pairs")


def load_state(path: str, normalize=False):
    """Read a ket ({"terms": [...]}) or density ({"blocks": {...}}) file."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be an object")
    if "terms" in doc:
        amps = {}
        for i, term in enumerate(doc["terms"]):
            where = f"{path}: terms[{i}]"
            if not isinstance(term, dict):
                raise InputError(f"{where}: must be an object")
            for key in ("j", "m"):
                if key not in term:
                    raise InputError(f"{where}: missing field {key!r}")
            j = _parse_half(term["j"], f"{where}.j")
            m = _parse_half(term["m"], f"{where}.m")
            amp = complex(term.get("re", 0.0), term.get("im", 0.0))
            amps[(j, m)] = amps.get((j, m), 0.0) + amp
        try:
            ket = SpinKet(amps)
        except ValueError as exc:
            raise InputError(f"{path}: {exc}") from None
        if normalize:
            ket = ket.normalized()
        elif not ket.is_normalized():
            raise InputError(f"{path}: ket is not normalized "
                             f"(norm {ket.norm():.6g}); pass --normalize to rescale")
        return ket
    if "blocks" in doc:
        blocks = {}
        for jkey, rows in doc["blocks"].items():
            where = f"{path}: blocks[{jkey!r}]"
            j = _parse_half(jkey, where)
            d = j.twice + 1
            if not (isinstance(rows, list) and len(rows) == d
                    and all(isinstance(r, list) and len(r) == d for r in rows)):
                raise InputError(f"{where}: must be a {d}x{d} matrix")
            mat = np.array([[_parse_entry(x, f"{where}[{r}][{c}]")
                             for c, x in enumerate(row)]
                            for r, row in enumerate(rows)])
            blocks[j] = mat
        try:
            rho = BlockDensity(blocks).validate(tol=1e-6)
        except ValueError as exc:
            raise InputError(f"{path}: {exc}") from None
        tr = rho.trace()
        if normalize:
            if tr <= 0:
                raise InputError(f"{path}: cannot normalize trace {tr:.6g}")
            rho = rho.scaled(1.0 / tr)
        elif not abs(tr - 1.0) <= 1e-6:
            raise InputError(f"{path}: density trace is {tr:.6g}; "
                             "pass --normalize to rescale")
        return rho
    raise InputError(f"{path}: need either 'terms' (ket) or 'blocks' (density)")


def _round_sig(x: float) -> float:
    if x == 0 or not math.isfinite(x):
        return 0.0 if x == 0 else x
    return float(f"{x:.12g}")


def _jsonable(obj):
    """Recursively round floats to 12 significant digits for stable output."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return _round_sig(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _pair(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def density_doc(rho: BlockDensity) -> dict:
    return {"blocks": {str(j): [[_pair(x) for x in row] for row in np.asarray(b)]
                       for j, b in sorted(rho.blocks.items())}}


def coeffs_doc(coeffs: dict) -> dict:
    return {",".join(map(str, key)): _pair(c) for key, c in sorted(coeffs.items())}


def report_doc(report) -> dict:
    return {"status": report.status,
            "objective": report.objective,
            "residuals": dict(report.residuals),
            "message": report.message}


# --------------------------------------------------------------------------
# commands (each returns a JSON-able document)
# --------------------------------------------------------------------------

def cmd_charfun(args):
    state = load_state(args.state, args.normalize)
    chi = charfun_pure(state) if isinstance(state, SpinKet) else charfun_mixed(state)
    doc = coeffs_doc(canonical(chi).coeffs)
    if args.csv:
        lines = ["a,b,c,d,re,im"]
        for key, (re, im) in sorted(doc.items()):
            lines.append(f"{key},{_round_sig(re):.12g},{_round_sig(im):.12g}")
        return "\n".join(lines) + "\n"
    return doc


def _require_ket(state, path: str) -> SpinKet:
    if not isinstance(state, SpinKet):
        raise InputError(f"{path}: this command needs a ket file ('terms')")
    return state


def cmd_maxprob(args):
    psi = _require_ket(load_state(args.psi, args.normalize), args.psi)
    phi = _require_ket(load_state(args.phi, args.normalize), args.phi)
    result = max_prob(psi, phi)
    return {"p": result.p,
            "rho": density_doc(result.rho),
            "sigma": density_doc(result.sigma),
            "solver_report": report_doc(result.report)}


def cmd_detfeasible(args):
    psi = _require_ket(load_state(args.psi, args.normalize), args.psi)
    phi = _require_ket(load_state(args.phi, args.normalize), args.phi)
    result = deterministic_feasible(psi, phi)
    return {"feasible": result.feasible,
            "xi": density_doc(result.xi) if result.xi is not None else None,
            "solver_report": report_doc(result.report)}


def _channel_doc(channel) -> dict:
    out = {}
    for J in sorted(channel.pairs):
        out[str(J)] = {
            "pairs": [[str(jp), str(j)] for (jp, j) in channel.pairs[J]],
            "matrix": [[_pair(x) for x in row] for row in channel.mats[J]],
        }
    return out


def cmd_fidelity(args):
    rho = load_state(args.rho, args.normalize)
    sigma = load_state(args.sigma, args.normalize)
    if args.pure_target:
        sigma_ket = _require_ket(sigma, args.sigma)
        result = max_fidelity_pure_target(rho, sigma_ket)
    else:
        result = max_fidelity(rho, sigma)
    try:
        ops = kraus_from_blocks(result.channel)
        in_irreps = result.channel.input_irreps()
        out_irreps = result.channel.output_irreps()
        _, _, rho_dense = covariant_sdp._dense_state(rho, in_irreps)
        out_dense = sum(op.matrix @ rho_dense @ op.matrix.conj().T for op in ops)
        output_state = blocks_from_dense(out_dense, out_irreps)
        keep = {j: b for j, b in output_state.blocks.items()
                if np.abs(b).max() > 1e-9}
        output_doc = density_doc(BlockDensity(keep))
    except ValueError:
        output_doc = None  # solver noise pushed a block below the PSD cutoff
    return {"fidelity": result.fidelity,
            "channel_blocks": _channel_doc(result.channel),
            "output_state": output_doc,
            "solver_report": report_doc(result.report)}


def cmd_interferometer(args):
    try:
        gamma = complex(args.gamma)
    except ValueError:
        raise InputError(f"--gamma: cannot parse {args.gamma!r} as a complex number")
    try:
        spec = InterferometerSpec(gamma, args.epsilon, args.tau, args.theta)
    except ValueError as exc:
        raise InputError(str(exc))
    damped = InterferometerSpec(spec.damped_gamma, 0.0, spec.tau, spec.theta)
    baseline = InterferometerSpec(gamma, 0.0, 0.0, spec.theta)
    try:
        delta_theta = phase_uncertainty(damped)
        improvement = delta_theta / phase_uncertainty(baseline)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    doc = {"gamma": _pair(gamma), "epsilon": spec.epsilon, "tau": spec.tau,
           "theta": spec.theta, "delta_theta": delta_theta,
           "improvement_factor": improvement,
           "p_extract": None, "kmax_used": None, "C_k": None, "P_k": None}
    want_coeffs = args.kmax is not None
    kmax = args.kmax
    try:
        if spec.epsilon > 0.0 or (spec.epsilon == 0.0 and spec.tau == 0.0):
            p = extraction_probability(spec, K=args.kmax)
            doc["p_extract"], doc["kmax_used"] = float(p), p.kmax
            want_coeffs = want_coeffs or p.kmax <= 4096
            kmax = p.kmax if p.kmax else (args.kmax or 8)
        if want_coeffs and kmax:
            C = coherent_charfun_coeffs(gamma, kmax)
            P = squeezed_target_coeffs(spec, kmax)
            doc["C_k"] = {str(k): C.get(k) for k in range(-kmax, kmax + 1)}
            doc["P_k"] = {str(k): P.get(k) for k in range(-kmax, kmax + 1)}
            doc["kmax_used"] = kmax
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if args.csv:
        lines = ["k,C_k,P_k"]
        if doc["C_k"]:
            for k in range(-kmax, kmax + 1):
                lines.append(f"{k},{_round_sig(doc['C_k'][str(k)]):.12g},"
                             f"{_round_sig(doc['P_k'][str(k)]):.12g}")
        return "\n".join(lines) + "\n"
    return doc


def cmd_majorana(args):
    state = load_state(args.state, args.normalize)
    if not isinstance(state, SpinKet):
        raise InputError(f"{args.state}: stellar representation needs a ket file")
    try:
        constellation = majorana_stars(state)
    except ValueError as exc:
        raise InputError(f"{args.state}: {exc}")
    stars = sorted(([float(x) for x in n], int(mult))
                   for n, mult in constellation.stars)
    return {"j": str(constellation.j),
            "stars": [{"n": n, "multiplicity": mult} for n, mult in stars]}


def _load_probseq(path: str) -> ProbSeq:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from None
    if not isinstance(doc, dict) or "values" not in doc:
        raise InputError(f"{path}: expected an object with a 'values' map")
    try:
        return ProbSeq({_parse_half(k, f"{path}: values[{k!r}]"): v
                        for k, v in doc["values"].items()})
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def _probseq_doc(seq: ProbSeq) -> dict:
    return {"values": {str(k): v for k, v in sorted(seq.values.items())}}


def cmd_u1check(args):
    p = _load_probseq(args.p)
    q = _load_probseq(args.q)
    try:
        if args.su2_line:
            feasible, xi = su2_coherent_line_feasible(p, q)
            return {"feasible": feasible,
                    "xi": _probseq_doc(xi) if xi is not None else None}
        feasible, delta, w = u1_deterministic_feasible(p, q)
        return {"feasible": feasible, "delta": delta,
                "w": _probseq_doc(w) if w is not None else None}
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_batch(args):
    try:
        with open(args.jobs) as fh:
            jobs = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{args.jobs}: {exc}") from None
    if not isinstance(jobs, list):
        raise InputError(f"{args.jobs}: expected a JSON list of job objects")
    for i, job in enumerate(jobs):
        if not (isinstance(job, dict) and isinstance(job.get("args"), list)
                and isinstance(job.get("output"), str)):
            raise InputError(f"{args.jobs}: jobs[{i}] needs 'args' and 'output'")

    def run(job):
        try:
            doc, _ = _dispatch(job["args"])
        except InputError as exc:
            return {"output": job["output"], "exit_code": 2, "error": str(exc)}
        except SolverFailure as exc:
            return {"output": job["output"], "exit_code": 3, "error": str(exc)}
        _write(doc, job["output"])
        return {"output": job["output"], "exit_code": 0}

    with ThreadPoolExecutor(max_workers=min(8, max(1, len(jobs)))) as pool:
        results = list(pool.map(run, jobs))
    return {"jobs": results,
            "failed": sum(1 for r in results if r["exit_code"] != 0)}


# --------------------------------------------------------------------------
# wiring
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotacov",
        description="Reachability of spin states under rotationally covariant channels.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_state_flags(sp):
        sp.add_argument("--normalize", action="store_true",
                        help="rescale inputs to unit norm / unit trace")
        sp.add_argument("-o", "--output", default=None, help="write JSON here")

    sp = sub.add_parser("charfun", help="canonical characteristic coefficients")
    sp.add_argument("state")
    sp.add_argument("--csv", action="store_true")
    add_state_flags(sp)
    sp.set_defaults(func=cmd_charfun)

    sp = sub.add_parser("maxprob", help="maximum covariant transformation probability")
    sp.add_argument("psi")
    sp.add_argument("phi")
    add_state_flags(sp)
    sp.set_defaults(func=cmd_maxprob)

    sp = sub.add_parser("detfeasible", help="deterministic covariant reachability")
    sp.add_argument("psi")
    sp.add_argument("phi")
    add_state_flags(sp)
    sp.set_defaults(func=cmd_detfeasible)

    sp = sub.add_parser("fidelity", help="best covariant-channel fidelity")
    sp.add_argument("rho")
    sp.add_argument("sigma")
    sp.add_argument("--pure-target", action="store_true",
                    help="target file is a ket; optimize the overlap directly")
    add_state_flags(sp)
    sp.set_defaults(func=cmd_fidelity)

    sp = sub.add_parser("interferometer", help="two-arm phase estimation analysis")
    sp.add_argument("--gamma", required=True)
    sp.add_argument("--epsilon", type=float, default=0.0)
    sp.add_argument("--tau", type=float, default=0.0)
    sp.add_argument("--theta", type=float, default=math.pi / 4)
    sp.add_argument("--kmax", type=int, default=None)
    sp.add_argument("--csv", action="store_true")
    sp.add_argument("-o", "--output", default=None)
    sp.set_defaults(func=cmd_interferometer)

    sp = sub.add_parser("majorana", help="star constellation of a single-irrep ket")
    sp.add_argument("state")
    add_state_flags(sp)
    sp.set_defaults(func=cmd_majorana)

    sp = sub.add_parser("u1check", help="number-ladder deconvolution criterion")
    sp.add_argument("p")
    sp.add_argument("q")
    sp.add_argument("--su2-line", action="store_true",
                    help="use the aligned coherent-superposition criterion")
    sp.add_argument("-o", "--output", default=None)
    sp.set_defaults(func=cmd_u1check)

    sp = sub.add_parser("batch", help="run a JSON list of jobs concurrently")
    sp.add_argument("jobs")
    sp.add_argument("-o", "--output", default=None)
    sp.set_defaults(func=cmd_batch)
    return parser


def _dispatch(argv):
    args = build_parser().parse_args(argv)
    return args.func(args), args


def _write(doc, path=None):
    if isinstance(doc, str):
        text = doc
    else:
        text = json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    try:
        doc, args = _dispatch(argv if argv is not None else sys.argv[1:])
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    _write(doc, getattr(args, "output", None))
    return 0


if __name__ == "__main__":
    sys.exit(main())
