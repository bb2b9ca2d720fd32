"""Command-line front end.

    listved ved VECTORS.txt
    listved code-ved --code "gens=5,7" --L 1,2,3
    listved min-list --code "gens=5,7" --depth 6
    listved simulate --code "gens=5,7" --ebno 5 --trials 100000
    listved sweep --code "gens=5,7" --ebno-grid 3:6:1 --svg pce.svg

Settings come from built-in defaults, then ``--config FILE`` (``key = value``
lines, ``#`` comments), then command-line flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .codes import ConvCode, SignalMapping, free_distance, merged_pool_complete
from .errors import InvalidConfig, ListVedError
from .geometry import ved, gram_of, read_vector_file
from .listmin import min_ved, minimal_list_size, write_csv
from .plot import sweep_svg
from .simulator import DECODERS, ChannelSpec, SimResult, ebno_grid, simulate_ce

SIM_HEADER = ["ebno_db", "decoder", "L", "trials", "ce_count", "p_ce", "ci95", "asymptote"]


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int_list(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x.strip()]


# key -> (converter, lower bound or None)
_KEYS = {
    "seed": (int, 0),
    "out": (str, None),
    "strategy": (str, None),
    "code": (str, None),
    "L": (_int_list, None),
    "max_weight": (int, 1),
    "max_steps": (int, 1),
    "window": (int, 0),
    "unmerged": (_bool, None),
    "node_cap": (int, 1),
    "symbol_energy": (float, None),
    "depth": (int, 1),
    "target": (float, 0),
    "b_max": (int, 1),
    "decoder": (str, None),
    "ebno": (float, None),
    "ebno_grid": (str, None),
    "info_len": (int, 1),
    "trials": (int, 1),
    "workers": (int, 1),
    "min_ved": (float, None),
    "svg": (str, None),
}

_COMMAND_KEYS = {
    "ved": {"strategy"},
    "code-ved": {"code", "L", "max_weight", "max_steps", "window", "unmerged", "node_cap", "symbol_energy"},
    "min-list": {"code", "max_weight", "depth", "window", "target", "b_max", "node_cap", "symbol_energy"},
    "simulate": {"code", "decoder", "L", "ebno", "info_len", "trials", "workers", "min_ved",
                 "max_weight", "max_steps", "window", "node_cap"},
    "sweep": {"code", "decoder", "L", "ebno_grid", "info_len", "trials", "workers", "min_ved",
              "max_weight", "max_steps", "window", "node_cap", "svg"},
}
_GLOBAL_KEYS = {"seed", "out"}

_DEFAULTS = {
    "seed": 0,
    "strategy": "exhaustive",
    "L": [1],
    "unmerged": False,
    "node_cap": 10_000_000,
    "symbol_energy": 1.0,
    "b_max": 8,
    "decoder": "viterbi",
    "info_len": 100,
    "trials": 10_000,
    "workers": 1,
}


def read_config(path) -> dict[str, str]:
    settings = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidConfig(f"{path}:{n}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            settings[key.replace("-", "_")] = value
    return settings


def _convert(key: str, value):
    if key not in _KEYS:
        raise InvalidConfig(f"unknown setting {key!r}")
    conv, low = _KEYS[key]
    try:
        out = conv(value) if isinstance(value, str) else value
    except ValueError as exc:
        raise InvalidConfig(f"bad value for {key}: {exc}") from None
    if low is not None:
        vals = out if isinstance(out, list) else [out]
        if any(v < low for v in vals):
            raise InvalidConfig(f"{key} must be >= {low}")
    return out


@dataclass
class RunConfig:
    command: str
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)


def resolve(command: str, cli: dict, config_path: str | None) -> RunConfig:
    allowed = _COMMAND_KEYS[command] | _GLOBAL_KEYS
    values = {k: v for k, v in _DEFAULTS.items() if k in allowed}
    if config_path:
        for k, v in read_config(config_path).items():
            if k not in allowed:
                raise InvalidConfig(f"setting {k!r} is not valid for '{command}'")
            values[k] = _convert(k, v)
    for k, v in cli.items():
        if v is not None and k in allowed:
            values[k] = _convert(k, v)
    return RunConfig(command, values)


@contextmanager
def _output(path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh
    else:
        yield sys.stdout


def _code(cfg: RunConfig) -> ConvCode:
    if not cfg.get("code"):
        raise InvalidConfig("a code spec is required, e.g. --code 'rate=1/2 gens=5,7 mem=2'")
    return ConvCode.parse(cfg["code"])


def _pool_bounds(cfg: RunConfig, code: ConvCode) -> tuple[int, int, int]:
    max_weight = cfg.get("max_weight") or free_distance(code) + 3
    max_steps = cfg.get("max_steps")
    if not max_steps:
        # shortest depth at which every merged event of weight <= max_weight is in the pool
        max_steps = next(
            (s for s in range(code.memory + 1, 65) if merged_pool_complete(code, max_weight, s)), 64
        )
    window = cfg.get("window")
    return max_weight, max_steps, max_steps if window is None else window


def run_ved(cfg: RunConfig, vector_file) -> str:
    problem = gram_of(read_vector_file(vector_file))
    sol = ved(problem, cfg["strategy"])
    lines = [
        f"ved={sol.ved:.9g}",
        f"ved_sq={sol.ved_sq:.9g}",
        f"rank={sol.rank}",
        "active=" + ",".join(str(i) for i in sol.active_set),
        "multipliers=" + ",".join(f"{x:.9g}" for x in sol.multipliers),
    ]
    return "\n".join(lines) + "\n"


def run_code_ved(cfg: RunConfig) -> str:
    code = _code(cfg)
    mw, ms, win = _pool_bounds(cfg, code)
    mapping = SignalMapping(cfg["symbol_energy"])
    specs = [
        min_ved(code, L, mw, ms, win, cfg["unmerged"], mapping, cfg["node_cap"]) for L in cfg["L"]
    ]
    buf = io.StringIO()
    write_csv(specs, buf)
    return buf.getvalue()


def run_min_list(cfg: RunConfig) -> tuple[str, int]:
    code = _code(cfg)
    mw = cfg.get("max_weight") or free_distance(code) + 3
    depth = cfg.get("depth") or 2 * (code.memory + 1)
    window = cfg.get("window")
    if window is None:
        window = depth
    res = minimal_list_size(
        code, mw, depth, window, cfg.get("target"), cfg["b_max"], SignalMapping(cfg["symbol_energy"]), cfg["node_cap"]
    )
    buf = io.StringIO()
    write_csv(res.table, buf)
    return buf.getvalue(), res.B


def _asymptote_ved(cfg: RunConfig, code: ConvCode, decoder: str, size: int) -> float | None:
    if cfg.get("min_ved") is not None:
        return cfg["min_ved"]
    if decoder == "viterbi" or size == 1 and decoder == "list_viterbi":
        return math.sqrt(free_distance(code))
    mw, ms, win = _pool_bounds(cfg, code)
    spec = min_ved(code, size, mw, ms, win, decoder == "breadth_first", node_cap=cfg["node_cap"])
    return spec.min_ved


def _sim_rows(cfg: RunConfig, grid: list[float]) -> list[SimResult]:
    code = _code(cfg)
    decoder = cfg["decoder"]
    if decoder not in DECODERS:
        raise InvalidConfig(f"decoder must be one of {', '.join(DECODERS)}")
    sizes = cfg["L"]
    if len(sizes) != 1:
        raise InvalidConfig("simulate/sweep take a single L")
    size = sizes[0]
    mv = _asymptote_ved(cfg, code, decoder, size)
    return [
        simulate_ce(code, decoder, size, ChannelSpec(e, code.rate), cfg["info_len"], cfg["trials"],
                    cfg["seed"], cfg["workers"], mv)
        for e in grid
    ]


def sim_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SIM_HEADER)
    for r in results:
        w.writerow([f"{r.ebno_db:.9g}", r.decoder, r.L_or_B, r.trials, r.ce_count,
                    f"{r.p_ce:.9g}", f"{r.ci95:.9g}", f"{r.asymptote:.9g}"])
    return buf.getvalue()


def run_simulate(cfg: RunConfig) -> str:
    if cfg.get("ebno") is None:
        raise InvalidConfig("--ebno is required")
    return sim_csv(_sim_rows(cfg, [cfg["ebno"]]))


def run_sweep(cfg: RunConfig) -> tuple[str, str]:
    grid = ebno_grid(cfg.get("ebno_grid") or "")
    rows = _sim_rows(cfg, grid)
    title = f"{cfg['code']}  {cfg['decoder']}  L={cfg['L'][0]}  {cfg['trials']} trials/point"
    return sim_csv(rows), sweep_svg(rows, title)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--seed", type=int)

    p = argparse.ArgumentParser(prog="listved", description=__doc__.split("\n\n")[0], parents=[common])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ved", parents=[common], help="VED of vectors listed in a text file")
    s.add_argument("vector_file")
    s.add_argument("--strategy", choices=["exhaustive", "iterative"])

    def pool(s):
        s.add_argument("--max-weight", type=int)
        s.add_argument("--max-steps", type=int)
        s.add_argument("--window", type=int)
        s.add_argument("--node-cap", type=int)

    def code(s):
        s.add_argument("--code", help="e.g. 'rate=1/2 gens=5,7 mem=2' (octal generators)")

    s = sub.add_parser("code-ved", parents=[common], help="minimum VED over L-subsets of error events")
    code(s)
    pool(s)
    s.add_argument("--L", help="list size(s), comma separated")
    s.add_argument("--unmerged", action="store_const", const=True)
    s.add_argument("--symbol-energy", type=float)

    s = sub.add_parser("min-list", parents=[common], help="smallest list size reaching the ML asymptote")
    code(s)
    s.add_argument("--max-weight", type=int)
    s.add_argument("--depth", type=int, help="decision depth for open events")
    s.add_argument("--window", type=int)
    s.add_argument("--target", type=float)
    s.add_argument("--b-max", type=int)
    s.add_argument("--node-cap", type=int)
    s.add_argument("--symbol-energy", type=float)

    for name, helptext in (("simulate", "Monte Carlo P_CE at one Eb/N0"), ("sweep", "P_CE over an Eb/N0 grid")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        code(s)
        pool(s)
        s.add_argument("--decoder", choices=list(DECODERS))
        s.add_argument("--L", help="list size / survivor count")
        s.add_argument("--info-len", type=int)
        s.add_argument("--trials", type=int)
        s.add_argument("--workers", type=int)
        s.add_argument("--min-ved", type=float, help="override the asymptote's VED")
        if name == "simulate":
            s.add_argument("--ebno", type=float)
        else:
            s.add_argument("--ebno-grid", help="a:b:step in dB")
            s.add_argument("--svg", metavar="PATH")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cli = {k: v for k, v in vars(args).items() if k not in ("command", "config", "vector_file")}
    try:
        cfg = resolve(args.command, cli, args.config)
        if args.command == "ved":
            text = run_ved(cfg, args.vector_file)
        elif args.command == "code-ved":
            text = run_code_ved(cfg)
        elif args.command == "min-list":
            text, B = run_min_list(cfg)
            print(f"B*={B}", file=sys.stderr)
        elif args.command == "simulate":
            text = run_simulate(cfg)
        else:
            text, svg = run_sweep(cfg)
            if cfg.get("svg"):
                Path(cfg["svg"]).write_text(svg, encoding="utf-8")
        with _output(cfg.get("out")) as fh:
            fh.write(text)
    except (ListVedError, OSError) as exc:
        print(f"listved: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
