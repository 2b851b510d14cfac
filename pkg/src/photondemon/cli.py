"""Command-line client for the photondemon service.

Every subcommand builds a request, sends it to the HTTP service, and renders
the response (CSV files plus a short human-readable summary). By default the
requests run against an in-process instance of the service, so no server has
to be started; pass --server to talk to a remote one.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from typing import Any, Sequence

import httpx

FAMILIES = ("uncorrelated", "split", "tmss", "noon", "anticorr-thermal")
FIGURES = ("fig3", "fig4", "fig5", "fig6", "fig7")


def make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=None)
    # No server given: run the service in-process behind the same HTTP
    # interface (ASGITransport is async-only, so use the portal-backed client).
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def parse_grid(spec: str) -> list[float]:
    """Grid syntax: 'start:stop:count[:log]' or comma-separated values."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) not in (3, 4):
            raise argparse.ArgumentTypeError(f"bad grid {spec!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise argparse.ArgumentTypeError("grid count must be >= 1")
        if len(parts) == 4 and parts[3] == "log":
            if start <= 0:
                raise argparse.ArgumentTypeError("log grid needs a positive start")
            return [start * (stop / start) ** (i / max(count - 1, 1)) for i in range(count)]
        if len(parts) == 4:
            raise argparse.ArgumentTypeError(f"bad grid suffix {parts[3]!r}")
        return [start + (stop - start) * i / max(count - 1, 1) for i in range(count)]
    return [float(x) for x in spec.split(",") if x.strip()]


def parse_floats(spec: str) -> list[float]:
    return [float(x) for x in spec.split(",") if x.strip()]


def family_payload(args: argparse.Namespace) -> dict:
    kind = args.family
    if kind == "uncorrelated":
        if args.nbar is None:
            raise SystemExit("uncorrelated family needs --nbar")
        return {"kind": kind, "nbar_a": args.nbar, "nbar_b": args.nbar_b if args.nbar_b is not None else args.nbar}
    if kind == "split":
        if args.nbar is None:
            raise SystemExit("split family needs --nbar (input mean) and --theta")
        theta = args.theta if args.theta is not None else math.pi / 4.0
        return {"kind": kind, "nbar_in": args.nbar, "theta": theta}
    if kind in ("tmss", "anticorr-thermal"):
        if args.nbar is None:
            raise SystemExit(f"{kind} family needs --nbar")
        return {"kind": kind, "nbar": args.nbar}
    if kind == "noon":
        if args.m is None:
            raise SystemExit("noon family needs --m")
        return {"kind": kind, "m": args.m}
    raise SystemExit(f"unknown family {kind!r}")


def demon_params_payload(args: argparse.Namespace) -> dict:
    payload: dict[str, Any] = {"eta_a": args.eta_a, "eta_b": args.eta_b}
    if args.independent_r:
        if args.r_a is None or args.r_b is None:
            raise SystemExit("--independent-r needs --r-a and --r-b")
        payload.update(r_a=args.r_a, r_b=args.r_b)
    else:
        if args.r is None:
            raise SystemExit("--r is required (or use --independent-r with --r-a/--r-b)")
        payload["r"] = args.r
    return payload


def write_csv(path: str, fields: Sequence[str], rows: Sequence[dict]) -> None:
    out = sys.stdout if path == "-" else open(path, "w", newline="", encoding="utf-8")
    try:
        writer = csv.DictWriter(out, fieldnames=list(fields), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(row.get(k)) for k in fields})
    finally:
        if out is not sys.stdout:
            out.close()


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    return value


def post(client: httpx.Client, path: str, payload: dict, verbose: bool) -> dict:
    if verbose:
        print(f"POST {path} {json.dumps(payload)}", file=sys.stderr)
    response = client.post(path, json=payload)
    if response.status_code != 200:
        detail = response.text
        try:
            detail = response.json().get("detail", detail)
        except Exception:  # noqa: BLE001 - diagnostics only
            pass
        raise SystemExit(f"service error {response.status_code}: {detail}")
    return response.json()


def cmd_eval(client: httpx.Client, args: argparse.Namespace) -> int:
    payload = {
        "family": family_payload(args),
        "params": demon_params_payload(args),
        "eps_tail": args.eps_tail,
    }
    if args.strategy is not None:
        payload["strategy_mask"] = args.strategy
    if args.dump_state:
        payload["include_state"] = True
    data = post(client, "/eval", payload, args.verbose)
    fields = ("c_a", "c_b", "prob", "mean_a", "mean_b", "delta", "defined")
    rows = [
        {"c_a": r["outcome"][0], "c_b": r["outcome"][1], "prob": r["prob"],
         "mean_a": r["mean_a"], "mean_b": r["mean_b"], "delta": r["delta"], "defined": r["defined"]}
        for r in data["reports"]
    ]
    if args.out:
        write_csv(args.out, fields, rows)
    print(f"delta_n (strategy mask {data['strategy_mask']}): {data['delta_n']:.12g}")
    print(f"best strategy mask {data['best_strategy_mask']}: {data['best_value']:.12g}")
    print(f"baseline without feed-forward: {data['baseline']:.12g}")
    print(f"demon contribution: {data['contribution']:.12g}")
    st = data["state"]
    print(f"state: cutoff={st['cutoff']} support={st['support_size']} "
          f"tail_mass={st['tail_mass']:.3g} marginals=({st['nbar_a']:.6g}, {st['nbar_b']:.6g})")
    if args.dump_state:
        write_csv(args.dump_state, ("n_a", "n_b", "p"),
                  [{"n_a": a, "n_b": b, "p": p} for a, b, p in data["state_rows"]])
        print(f"state lattice written to {args.dump_state}")
    return 0


def cmd_optimize(client: httpx.Client, args: argparse.Namespace) -> int:
    payload = {
        "family": family_payload(args),
        "objective": args.objective,
        "common_r": not args.independent_r,
        "seed": args.seed,
        "n_starts": args.starts,
        "grid_points": args.grid_points,
        "budget": args.budget,
        "eps_tail": args.eps_tail,
        "include_trace": args.verbose,
    }
    if args.strategy is not None:
        payload["fixed_strategy_mask"] = args.strategy
    data = post(client, "/optimize", payload, args.verbose)
    params = data["params"]
    fields = ("value", "r", "r_a", "r_b", "eta_a", "eta_b", "strategy_mask",
              "evaluations", "converged", "starts", "objective")
    row = {"value": data["value"], **{k: params.get(k) for k in ("r", "r_a", "r_b", "eta_a", "eta_b")},
           "strategy_mask": data["strategy_mask"], "evaluations": data["evaluations"],
           "converged": data["converged"], "starts": data["starts"], "objective": data["objective"]}
    if args.out:
        write_csv(args.out, fields, [row])
    if args.verbose and data.get("trace") and args.out:
        trace_path = args.out + ".trace.csv" if args.out != "-" else "-"
        dim = len(data["trace"][0]) - 1
        tfields = ("start", "value") + tuple(f"x{i}" for i in range(dim))
        trows = [{"start": i, "value": t[0], **{f"x{j}": t[1 + j] for j in range(dim)}}
                 for i, t in enumerate(data["trace"])]
        write_csv(trace_path, tfields, trows)
    r_text = (f"r={params['r']:.6g}" if params.get("r") is not None
              else f"r_a={params['r_a']:.6g} r_b={params['r_b']:.6g}")
    print(f"max {data['objective']}: {data['value']:.12g}")
    print(f"params: {r_text} eta_a={params['eta_a']:.6g} eta_b={params['eta_b']:.6g}")
    print(f"strategy mask: {data['strategy_mask']}  evaluations: {data['evaluations']}  "
          f"converged: {data['converged']}")
    return 0 if data["converged"] else 1


def cmd_passivity(client: httpx.Client, args: argparse.Namespace) -> int:
    payload = {
        "family": family_payload(args),
        "nbar_bath": args.nbar_bath,
        "tol": args.tol,
        "eps_tail": args.eps_tail,
    }
    data = post(client, "/passivity", payload, args.verbose)
    if args.out:
        write_csv(args.out, ("passive", "reason", "nbar_a", "nbar_b", "nbar_bath"), [data])
    print(f"{'passive' if data['passive'] else 'not passive'} ({data['reason']}); "
          f"marginals=({data['nbar_a']:.6g}, {data['nbar_b']:.6g}) bath={data['nbar_bath']:.6g}")
    return 0


def cmd_table3(client: httpx.Client, args: argparse.Namespace) -> int:
    payload = {"seed": args.seed, "eps_tail": args.eps_tail,
               "n_starts": args.starts, "budget": args.budget}
    data = post(client, "/tables/table3", payload, args.verbose)
    if args.out:
        write_csv(args.out, data["fields"], data["rows"])
    for row in data["rows"]:
        status = "ok" if row["ok"] else "MISMATCH"
        print(f"{row['family']:>17}: unit {row['unit_computed']!s:>22} "
              f"(expected {row['unit_expected']}), large {row['large_computed']!s:>22} "
              f"(expected {row['large_expected']}) [{status}]")
    if not data["ok"]:
        failing = ", ".join(r["family"] for r in data["rows"] if not r["ok"])
        print(f"mismatch beyond tolerance in: {failing}", file=sys.stderr)
        return 1
    return 0


def cmd_figure(client: httpx.Client, args: argparse.Namespace) -> int:
    payload: dict[str, Any] = {"seed": args.seed, "eps_tail": args.eps_tail}
    if args.grid:
        payload["grid"] = args.grid
    if args.ratio:
        payload["ratios"] = args.ratio
    if args.figure == "fig6" and args.nbar is not None:
        payload["nbar_a"] = args.nbar
    if args.starts is not None:
        payload["n_starts"] = args.starts
    if args.grid_points is not None:
        payload["grid_points"] = args.grid_points
    if args.budget is not None:
        payload["budget"] = args.budget
    data = post(client, f"/figures/{args.figure}", payload, args.verbose)
    out = args.out or "-"
    write_csv(out, data["fields"], data["rows"])
    if not data["ok"]:
        print("some grid points failed to converge", file=sys.stderr)
        return 1
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("photondemon.service:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photondemon",
        description="Photonic Maxwell's demon: evaluate, optimize, and reproduce "
        "summary tables and figure data as CSV.",
    )
    parser.add_argument("--server", help="service URL; default runs the service in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, budget_default: int | None = 10_000) -> None:
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--eps-tail", type=float, default=1e-12,
                       help="truncation budget per state (at most 1e-6)")
        p.add_argument("--out", help="CSV output path ('-' for stdout)")
        p.add_argument("--verbose", action="store_true")
        if budget_default is not None:
            p.add_argument("--budget", type=int, default=budget_default,
                           help="evaluation cap per optimizer descent")
            p.add_argument("--starts", type=int, default=16, help="multistart count")

    def family_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--family", choices=FAMILIES, required=True)
        p.add_argument("--nbar", type=float, help="mean photon number (input mean for split)")
        p.add_argument("--nbar-b", type=float, help="mode-b mean (uncorrelated only)")
        p.add_argument("--theta", type=float, help="splitter angle (split only; default pi/4)")
        p.add_argument("--m", type=int, help="photon count (noon only)")

    p_eval = sub.add_parser("eval", help="outcome reports and figure of merit for one setting")
    family_flags(p_eval)
    p_eval.add_argument("--r", type=float, help="common splitter reflectance")
    p_eval.add_argument("--eta-a", type=float, required=True)
    p_eval.add_argument("--eta-b", type=float, required=True)
    p_eval.add_argument("--independent-r", action="store_true")
    p_eval.add_argument("--r-a", type=float)
    p_eval.add_argument("--r-b", type=float)
    p_eval.add_argument("--strategy", type=int,
                        help="polarity bitmask, bit i flips ((0,0),(0,1),(1,0),(1,1))[i]")
    p_eval.add_argument("--dump-state", help="write the state lattice as (n_a, n_b, p) CSV")
    common(p_eval, budget_default=None)

    p_opt = sub.add_parser("optimize", help="maximize the figure of merit over demon parameters")
    family_flags(p_opt)
    p_opt.add_argument("--objective", choices=("total-delta", "demon-contribution"),
                       default="total-delta")
    p_opt.add_argument("--independent-r", action="store_true",
                       help="optimize per-mode reflectances (demonstrates the trivial optimum)")
    p_opt.add_argument("--strategy", type=int, help="hold the polarity bitmask fixed")
    p_opt.add_argument("--grid-points", type=int, default=9)
    common(p_opt)

    p_pass = sub.add_parser("passivity", help="single-copy passivity against a free bath")
    family_flags(p_pass)
    p_pass.add_argument("--nbar-bath", type=float, required=True)
    p_pass.add_argument("--tol", type=float, default=1e-9)
    common(p_pass, budget_default=None)

    p_table = sub.add_parser("table3", help="summary table of demon contributions per family")
    common(p_table)

    for name in FIGURES:
        p_fig = sub.add_parser(name, help=f"reproduce {name} data as CSV")
        p_fig.add_argument("--grid", type=parse_grid,
                           help="grid values: 'start:stop:count[:log]' or comma list")
        p_fig.add_argument("--ratio", type=parse_floats,
                           help="comma list of mean ratios (fig4)")
        if name == "fig6":
            p_fig.add_argument("--nbar", type=float, help="fixed mode-a mean (default 1e4)")
        # None means "figure-specific default"; fig6 ships a reduced search.
        p_fig.add_argument("--grid-points", type=int)
        p_fig.add_argument("--budget", type=int, help="evaluation cap per optimizer descent")
        p_fig.add_argument("--starts", type=int, help="multistart count")
        common(p_fig, budget_default=None)
        p_fig.set_defaults(figure=name)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return cmd_serve(args)
    # figure subcommands may omit --budget/--starts overrides
    for attr in ("budget", "starts", "grid_points", "ratio", "grid", "nbar"):
        if not hasattr(args, attr):
            setattr(args, attr, None)
    with make_client(args.server) as client:
        if args.command == "eval":
            return cmd_eval(client, args)
        if args.command == "optimize":
            return cmd_optimize(client, args)
        if args.command == "passivity":
            return cmd_passivity(client, args)
        if args.command == "table3":
            return cmd_table3(client, args)
        return cmd_figure(client, args)


if __name__ == "__main__":
    sys.exit(main())
