"""
Command line for the erasure / deconstruction simulator.

  entropy  Rényi conditional entropy of a state
  bounds   closed-form bound report for one parameter point
  run      seeded sweep from a key = value config file
  accept   acceptance suite (exit status 1 on any failure)
  plot     PNGs from a sweep CSV (and optionally the bound decay of a state)
"""
import sys, os, argparse
from pathlib import Path

import orjson
import pandas as pd
from tqdm import tqdm

# make src importable no matter where you run from
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src.acceptance import verify_acceptance
from src.bounds import Dims, bound_decay, bound_report
from src.config import BUILTIN_STATES, DEFAULT_ALPHA, DEFAULT_DELTA, DEFAULT_RANDOM_RANK
from src.entropy import EntropyParams, renyi_conditional
from src.plots import plot_bound_decay, plot_sweep
from src.protocol import ProtocolConfig, choose_sizes, protocol_entropies
from src.states import purify
from src.summary import summarise_records
from src.sweep import load_state, load_sweep_config, records_frame, run_sweep, write_records


def _labels(value: str):
    return tuple(v.strip() for v in value.split(",") if v.strip())


def _load_state(args):
    try:
        return load_state(args.state, args.rank, args.seed)
    except FileNotFoundError:
        raise SystemExit(f"No state file {args.state!r}; use a path or one of {list(BUILTIN_STATES)}.")
    except ValueError as exc:
        raise SystemExit(f"Could not read state {args.state!r}: {exc}")


def _emit(payload: dict, out):
    data = orjson.dumps(payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_bytes(data)
        print(f"Wrote {out}")
    else:
        print(data.decode("utf-8"))


def cmd_entropy(args):
    rho = _load_state(args)
    try:
        value = renyi_conditional(rho, _labels(args.a), _labels(args.c), EntropyParams(args.alpha))
    except (ValueError, RuntimeError) as exc:
        raise SystemExit(str(exc))
    _emit({"a": args.a, "c": args.c, "alpha": args.alpha, "entropy_bits": value}, args.out)


def cmd_bounds(args):
    rho = _load_state(args)
    try:
        config = ProtocolConfig(rho=rho, n=args.n, alpha=args.alpha, delta=args.delta,
                                log2_F=args.log2_F, log2_M=args.log2_M)
        psi = purify(config.rho)
        dims = Dims(*(psi.layout.dim(x) for x in ("A", "B", "R", "E")))
        h = protocol_entropies(config.rho, args.alpha)
        sizes = choose_sizes(config, h, dims)
        report = bound_report(args.alpha, args.delta, args.n, dims, sizes.log2_F, sizes.log2_M,
                              h.H_alphatilde_A_given_B, h.H_alpha_A_given_BR,
                              h.H_alpha_A_given_RE, h.cmi)
    except (ValueError, RuntimeError) as exc:
        raise SystemExit(str(exc))
    payload = report.to_dict()
    payload["size_warnings"] = list(sizes.warnings)
    _emit(payload, args.out)


def cmd_run(args):
    if not args.config:
        raise SystemExit("run needs --config PATH (flat key = value file).")
    try:
        config = load_sweep_config(args.config)
    except FileNotFoundError:
        raise SystemExit(f"Missing config file {args.config}.")
    except ValueError as exc:
        raise SystemExit(f"Bad config {args.config}: {exc}")
    config = config.with_overrides(seed=args.seed, out=args.out, format=args.format, rank=args.rank)
    out = Path(config.out or f"output/sweep.{config.format}")

    n_items = len(config.n) * len(config.alpha) * config.samples
    print(f"Running sweep: {n_items} runs over n={list(config.n)} alpha={list(config.alpha)}")
    records = run_sweep(config, progress=lambda it, total: tqdm(it, total=total))
    write_records(records, out, config.format)
    failed = sum(1 for r in records if r.error)
    print(f"Wrote {out} ({len(records)} records, {failed} failed)")

    if args.summary:
        summary_path = out.with_name(out.stem + "_summary.csv")
        summarise_records(records_frame(records)).to_csv(summary_path, index=False)
        print(f"Wrote {summary_path}")


def cmd_accept(args):
    print("Running acceptance suite...")
    report = verify_acceptance(scale=args.scale, progress=lambda it, total: tqdm(it, total=total))
    for r in report.results:
        verdict = "PASS" if r.passed else "FAIL"
        print(f"[{verdict}] {r.number:2d} {r.name}: measured {r.measured:.3e} "
              f"(threshold {r.threshold:.1e}) {r.detail}")
    print(f"Total runtime {report.seconds:.1f} s")
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        report.to_frame().to_csv(args.out, index=False)
        print(f"Wrote {args.out}")
    if not report.passed:
        raise SystemExit(1)


def cmd_plot(args):
    src = Path(args.input)
    if not src.exists():
        raise SystemExit(f"Missing {src}. Run the `run` command first.")
    frame = pd.read_json(src) if src.suffix == ".json" else pd.read_csv(src)
    outdir = Path(args.out or "plots")
    written = plot_sweep(frame, outdir)
    if args.decay:
        rho = _load_state(args)
        psi = purify(rho)
        dims = Dims(*(psi.layout.dim(x) for x in ("A", "B", "R", "E")))
        h = protocol_entropies(rho, args.alpha)
        profile = bound_decay(args.alpha, args.delta, dims, h.H_alphatilde_A_given_B, h.H_alpha_A_given_BR)
        written.append(plot_bound_decay(profile, outdir))
    for p in written:
        print(f"Wrote {p}")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, state=True):
        p.add_argument("--seed", type=int, default=None if not state else 0)
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--rank", type=int, default=None if not state else DEFAULT_RANDOM_RANK)
        if state:
            p.add_argument("--state", default="random",
                           help=f"builtin ({', '.join(BUILTIN_STATES)}) or path to a state file")

    p = sub.add_parser("entropy", help="conditional Rényi entropy H_alpha(A|C)")
    common(p)
    p.add_argument("--a", default="A")
    p.add_argument("--c", default="B")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("bounds", help="bound report for one (state, n, alpha, delta)")
    common(p)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--log2-F", dest="log2_F", type=float, default=None)
    p.add_argument("--log2-M", dest="log2_M", type=float, default=None)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("run", help="sweep from a config file")
    common(p, state=False)
    p.add_argument("--config", default=None)
    p.add_argument("--summary", action="store_true", help="also write per-(n, alpha) summary CSV")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("accept", help="acceptance suite")
    common(p, state=False)
    p.add_argument("--scale", type=float, default=1.0, help="multiply every sample count")
    p.set_defaults(func=cmd_accept)

    p = sub.add_parser("plot", help="plots from a sweep output file")
    common(p)
    p.add_argument("--input", default="output/sweep.csv")
    p.add_argument("--decay", action="store_true", help="also plot bound decay for --state")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.set_defaults(func=cmd_plot)

    args = ap.parse_args()
    args.func(args)


if __name__ == "__main__":
    main()
