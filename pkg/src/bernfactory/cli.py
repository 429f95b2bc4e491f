"""Command-line interface.

Exit codes: 0 success (and every statistical check passed), 1 a statistical
check failed, 2 usage or domain error, 3 a stream coin ran dry.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings

from . import bounds, estimator, harness
from .basic import von_neumann
from .coins import SimulatedCoin, StreamCoin, parse_coin_spec
from .errors import BernoulliFactoryError, DomainError, InfeasibleBoundWarning, InputExhaustedError
from .linear import make_params, sample, simulate, summarize
from .randomness import RandomSeed, UniformSource, make_generator
from .stats import FlipStats

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_EXHAUSTED = 0, 1, 2, 3

PROMISE_NOTE = ("The factory is exact only if the coin satisfies C*p <= 1 - eps; it cannot "
                "check this. Outside the promise the output distribution is not Bernoulli(Cp).")


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("must be an unsigned 64-bit integer")
    return v


def _count(text: str) -> int:
    v = _u64(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _real(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError("must be finite")
    return v


def _add_factory_args(sp: argparse.ArgumentParser, tuning: bool = True) -> None:
    sp.add_argument("--C", type=_real, required=True, help="multiplier C > 1")
    sp.add_argument("--eps", type=_real, required=True,
                    help="promised slack: C*p <= 1 - eps (clamped to 0.644)")
    if tuning:
        sp.add_argument("--gamma", type=_real, default=None, help="slack fraction spent per stage (default 0.5)")
        sp.add_argument("--m", type=_real, default=None, help="threshold scale, k = m/(gamma*eps) (default 2.3)")


def _add_run_args(sp: argparse.ArgumentParser, n_default: int | None = None) -> None:
    sp.add_argument("--coin", required=True,
                    help="'sim:p=<real>' for a simulated coin or 'stream:<path|->' for '0'/'1' text")
    if n_default is None:
        sp.add_argument("--n", type=_count, required=True, help="number of replicates")
    else:
        sp.add_argument("--n", type=_count, default=n_default, help="number of replicates")
    sp.add_argument("--seed", type=_u64, default=0, help="u64 seed for all randomness")
    sp.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="bernfactory",
        description="Exact simulation of a C*p-coin from p-coin flips. " + PROMISE_NOTE)
    ap.add_argument("--threads", type=_count, default=os.cpu_count() or 1,
                    help="cap on concurrent replicate blocks (default: CPU count)")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sample", help="draw output bits", description=PROMISE_NOTE)
    _add_factory_args(sp)
    _add_run_args(sp)
    sp.add_argument("--factory", choices=("linear", "vn"), default="linear",
                    help="'linear' for Bernoulli(Cp), 'vn' for von Neumann's fair bit (ignores C, eps)")

    sp = sub.add_parser("bound", help="evaluate the expected-flip bounds")
    _add_factory_args(sp)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--p", type=_real, help="evaluate at this p")
    g.add_argument("--sup", action="store_true", help="worst case over p in [0, (1-eps)/C] (default)")
    sp.add_argument("--json", action="store_true")

    sp = sub.add_parser("optimize", help="choose (m, gamma) minimising the worst-case bound")
    _add_factory_args(sp, tuning=False)
    sp.add_argument("--json", action="store_true")

    sp = sub.add_parser("estimate", help="estimate p from four successes of the factory",
                        description=PROMISE_NOTE)
    _add_factory_args(sp)
    _add_run_args(sp)

    sp = sub.add_parser("verify", help="z-test of the output mean against C*p",
                        description=PROMISE_NOTE)
    _add_factory_args(sp)
    _add_run_args(sp, n_default=100_000)

    sp = sub.add_parser("stage1", help="check the first-stage exit and duration bounds")
    _add_factory_args(sp)
    _add_run_args(sp, n_default=100_000)

    sp = sub.add_parser("bench", help="flip-count benchmark for C in {2, 5, 10, 20}, eps = 0.2")
    sp.add_argument("--n", type=_count, default=10_000)
    sp.add_argument("--seed", type=_u64, default=0)
    sp.add_argument("--p-frac", type=_real, default=1.0,
                    help="run at p = p_frac*(1-eps)/C (default 1: the largest allowed p)")
    sp.add_argument("--csv", metavar="PATH", help="write the table as CSV ('-' for stdout)")
    sp.add_argument("--json", metavar="PATH", help="write the reports as JSON ('-' for stdout)")
    return ap


def _params(args):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", InfeasibleBoundWarning)
        params = make_params(args.C, args.eps, getattr(args, "gamma", None), getattr(args, "m", None))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return params


def _emit(obj: dict, as_json: bool, lines: list[str]) -> None:
    if as_json:
        print(json.dumps(obj))
    else:
        print("\n".join(lines))


def _fmt_stats(fs: FlipStats) -> str:
    return f"flips: mean {fs.mean:.4f}  sd {fs.sd:.4f}  max {fs.max}"


def _open_coin(value: str) -> StreamCoin:
    try:
        return StreamCoin.open(value)
    except OSError as exc:
        raise DomainError(f"cannot open coin stream: {exc}") from None


def cmd_sample(args) -> int:
    kind, value = parse_coin_spec(args.coin)
    if args.factory == "vn":
        coin = (SimulatedCoin(value, UniformSource.from_generator(make_generator(args.seed, 0, 1)))
                if kind == "sim" else _open_coin(value))
        bits, flips = [], []
        for _ in range(args.n):
            res = von_neumann(coin)
            bits.append(res.bit)
            flips.append(res.flips)
        params_d = {"factory": "vn"}
    else:
        params = _params(args)
        params_d = {"factory": "linear", **params.as_dict()}
        if kind == "sim":
            res = simulate(params, value, args.n, args.seed, threads=args.threads)
            bits, flips = res.outputs.tolist(), res.flips.tolist()
        else:
            coin = _open_coin(value)
            bits, flips = [], []
            for rep in range(args.n):
                rec = sample(params, coin, UniformSource(RandomSeed(args.seed, rep)))
                bits.append(rec.output)
                flips.append(rec.flips)
    fs = FlipStats.from_values(flips)
    out = "".join(map(str, bits))
    mean = sum(bits) / len(bits)
    _emit({**params_d, "n": args.n, "seed": args.seed, "outputs": out, "output_mean": mean,
           "flips": fs.as_dict()}, args.json,
          [out, f"n {args.n}  output mean {mean:.6f}", _fmt_stats(fs)])
    return EXIT_OK


def cmd_bound(args) -> int:
    params = _params(args)
    C, eps, g, m, k = params.C, params.eps, params.gamma, params.m, params.k
    if args.p is not None:
        value = bounds.theorem4_bound(C, eps, g, k, args.p)
        mode = {"p": args.p}
    else:
        detail = bounds.sup_bound_detail(C, eps, g, m)
        value = detail["value"]
        mode = {"sup": True, "argmax_p": detail["argmax_p"]}
    obj = {**params.as_dict(), "r": params.r, **mode, "bound": value,
           "simple_bound": bounds.simple_bound(C, eps), "lower_bound": bounds.lower_bound(C, eps),
           "lower_bound_abstract": bounds.lower_bound_abstract(C, eps)}
    where = f"p = {args.p}" if args.p is not None else f"sup over p (at p = {mode['argmax_p']:.6g})"
    _emit(obj, args.json, [
        f"C {C}  eps {eps}  gamma {g}  m {m}  k {k:.6g}  r {params.r:.6g}",
        f"bound ({where}): {value:.6g}",
        f"simple bound 9.5C/eps: {obj['simple_bound']:.6g}",
        f"lower bound (any factory): {obj['lower_bound']:.6g}",
    ])
    return EXIT_OK


def cmd_optimize(args) -> int:
    eps = _params(args).eps
    opt = bounds.optimize_params(args.C, eps)
    _emit({"C": args.C, "eps": eps, **opt.as_dict()}, args.json, [
        f"C {args.C}  eps {eps}",
        f"m* {opt.m_star:.6g}  gamma* {opt.gamma_star:.6g}  k* {opt.k_star:.6g}",
        f"worst-case bound {opt.bound_value:.6g}",
    ])
    return EXIT_OK


def cmd_estimate(args) -> int:
    params = _params(args)
    kind, value = parse_coin_spec(args.coin)
    if kind == "sim":
        if params.C * value >= 1.0 or value == 0.0:
            raise DomainError("estimate needs 0 < C*p < 1")
        b = estimator.estimate_many(params, value, args.n, args.seed)
        p_hat, A, tot = b.p_hat.tolist(), b.A.tolist(), b.total_flips.tolist()
    else:
        coin = _open_coin(value)
        aux = UniformSource(RandomSeed(args.seed, 0))
        p_hat, A, tot = [], [], []
        for _ in range(args.n):
            rec = estimator.estimate_p(params, coin, aux)
            p_hat.append(rec.p_hat)
            A.append(rec.A)
            tot.append(rec.total_flips)
    mean_p = sum(p_hat) / len(p_hat)
    obj = {**params.as_dict(), "n": args.n, "seed": args.seed, "p_hat_mean": mean_p,
           "A": FlipStats.from_values(A).as_dict(),
           "total_flips": FlipStats.from_values(tot).as_dict()}
    lines = [f"n {args.n}  mean p_hat {mean_p:.6g}",
             f"factory calls A: mean {obj['A']['mean']:.4f}",
             f"total flips: mean {obj['total_flips']['mean']:.4f}"]
    if args.n == 1:
        obj["p_hat"] = p_hat[0]
    if kind == "sim":
        obj["coverage"] = estimator.coverage(b.p_hat, value, params.eps)
        lines.append(f"within relative error sqrt(eps): {obj['coverage']:.4f}")
    _emit(obj, args.json, lines)
    return EXIT_OK


def _known_p(args) -> float:
    kind, value = parse_coin_spec(args.coin)
    if kind != "sim":
        raise DomainError("this check needs a simulated coin (sim:p=<real>) with known p")
    return value


def cmd_verify(args) -> int:
    params = _params(args)
    p = _known_p(args)
    if params.C * p >= 1.0:
        raise DomainError("C*p >= 1: no Bernoulli(Cp) target exists")
    if params.C * p > 1.0 - params.eps:
        print("warning: coin violates the promise C*p <= 1 - eps; diagnostic run only",
              file=sys.stderr)
    rep = harness.verify_mean(params, p, args.n, args.seed, threads=args.threads)
    _emit(rep.as_dict(), args.json, [
        f"target C*p {rep.target:.6g}  observed {rep.output_mean:.6g}  "
        f"(+/- {rep.halfwidth:.3g} at 1e-4)  z {rep.z:.3f}",
        _fmt_stats(rep.flips),
        "PASS" if rep.passed else "FAIL",
    ])
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_stage1(args) -> int:
    params = _params(args)
    rep = harness.instrument_stage1(params, _known_p(args), args.n, args.seed)
    _emit(rep.as_dict(), args.json, [
        f"P(exit high) {rep.exit_high_rate:.6g} (se {rep.exit_high_se:.3g})  "
        f"bound {rep.exit_high_bound:.6g}  {'PASS' if rep.pass_exit else 'FAIL'}",
        f"E[flips] {rep.tau_mean:.6g} (se {rep.tau_se:.3g})  "
        f"bound {rep.tau_bound:.6g}  {'PASS' if rep.pass_tau else 'FAIL'}",
    ])
    return EXIT_OK if rep.pass_exit and rep.pass_tau else EXIT_FAIL


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def cmd_bench(args) -> int:
    reps = harness.bench_figure1(args.n, args.seed, args.p_frac, threads=args.threads)
    if args.csv:
        _write(args.csv, harness.reports_to_csv(reps))
    if args.json:
        _write(args.json, harness.reports_to_json(reps))
    if not (args.csv == "-" or args.json == "-"):
        print(f"{'C':>4} {'p':>7} {'theory':>9} {'mean':>9} {'sd':>9} "
              f"{'published':>13} {'earlier alg':>13} {'out':>7}  checks")
        for r in reps:
            e = r.empirical
            ok = "ok" if r.pass_mean_test and r.pass_bound_test else "FAIL"
            print(f"{r.C:4g} {r.p:7.4g} {r.theory_sup_bound:9.4g} {e.mean:9.4g} {e.sd:9.4g} "
                  f"{f'({r.reference_mean:g},{r.reference_sd:g})':>13} {f'({r.tb_mean:g},{r.tb_sd:g})':>13} "
                  f"{r.output_mean:7.4f}  {ok}")
        print("p is the largest value the promise allows unless --p-frac is given; "
              "'earlier alg' columns are published figures for a different factory.")
    return EXIT_OK if all(r.pass_mean_test and r.pass_bound_test for r in reps) else EXIT_FAIL


COMMANDS = {"sample": cmd_sample, "bound": cmd_bound, "optimize": cmd_optimize,
            "estimate": cmd_estimate, "verify": cmd_verify, "stage1": cmd_stage1,
            "bench": cmd_bench}


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except InputExhaustedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except (DomainError, BernoulliFactoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


run = main


if __name__ == "__main__":
    sys.exit(main())
