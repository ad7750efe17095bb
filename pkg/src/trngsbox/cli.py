"""Command-line pipeline: extract -> gen -> optimize -> eval / encrypt."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__, metrics, spn
from . import sbox as sbox_mod
from .entropy import bits as bits_mod
from .entropy import ldar, stattests
from .errors import MalformedLine, TrngSboxError
from .evolver import GAConfig, Individual, evolve, histogram_csv, nl_histogram, seed_population
from .walker import WalkConfig, construct

log = logging.getLogger("trngsbox")

EXIT_IO = 3


def write_manifest(path: Path, command: str, inputs, config: dict, outputs, seed=None) -> None:
    manifest = {
        "command": command,
        "inputs": [str(p) for p in inputs],
        "config": config,
        "rng_seed": seed,
        "outputs": [str(p) for p in outputs],
        "version": __version__,
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _sbox_name(i: int, fmt: str) -> str:
    return f"sbox_{i:05d}.{'hex' if fmt == sbox_mod.HEX_LINE else 'txt'}"


def write_sbox_dir(out_dir: Path, individuals, fmt: str) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    rows = []
    for i, ind in enumerate(individuals):
        p = out_dir / _sbox_name(i, fmt)
        sbox_mod.save(ind.sbox, p, fmt)
        paths.append(p)
        rows.append((p.name, ind.digest.hex(), ind.fitness, metrics.min_nonlinearity(ind.sbox)))
    with open(out_dir / "index.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("file", "sha3_256", "nonlinearity", "nonlinearity_min"))
        writer.writerows(rows)
    return paths


def read_sbox_dir(in_dir: Path) -> list[sbox_mod.SBox]:
    index = in_dir / "index.csv"
    if index.exists():
        with open(index, newline="") as fh:
            names = [row["file"] for row in csv.DictReader(fh)]
    else:
        names = sorted(p.name for p in in_dir.iterdir() if p.suffix in (".txt", ".hex"))
    return [sbox_mod.load(in_dir / n) for n in names]


def _range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.replace(":", ",").split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}") from None
    return lo, hi


def _walk_config(args) -> WalkConfig:
    return WalkConfig(grid_side=args.grid_side, wrap=not args.no_wrap)


# subcommands

def cmd_extract(args) -> int:
    errors: list[MalformedLine] = []
    records = ldar.read_ldar(args.ldar, strict=args.strict, errors=errors)
    raw = bits_mod.strike_diff_bits(records)
    stages = [("raw", raw)]
    out_stream = raw
    if args.whiten:
        out_stream = bits_mod.von_neumann(raw)
        stages.append(("whitened", out_stream))
    out = Path(args.out)
    bits_mod.write_bits(out_stream, out, packed=args.packed)

    report = [f"records={len(records)}", f"skipped_lines={len(errors)}"]
    for err in errors:
        report.append(f"skipped.line_{err.line_no}={err.reason}")
    for stage, stream in stages:
        report.append(f"{stage}.bits={len(stream)}")
        results = stattests.run_battery(stream)
        print(f"[{stage}] {len(stream)} bits")
        print(stattests.format_table(results), end="")
        report.extend(f"{stage}.{line}" for line in stattests.format_keyvalue(results).split())
    report_path = Path(args.report) if args.report else out.with_name(out.name + ".report.txt")
    report_path.write_text("\n".join(report) + "\n")
    write_manifest(
        out.with_name(out.name + ".manifest.json"), "extract", [args.ldar],
        {"strict": args.strict, "whiten": args.whiten, "packed": args.packed},
        [out, report_path],
    )
    return 0


def cmd_gen(args) -> int:
    bits = bits_mod.read_bits(args.bits)
    built = construct(bits, args.total, _walk_config(args))
    inds = [Individual.of(s) for s in built.sboxes]
    out = Path(args.out)
    paths = write_sbox_dir(out, inds, args.format)
    print(f"wrote {len(paths)} S-boxes from a {built.grid.k}x{built.grid.k} grid to {out}")
    write_manifest(
        out / "manifest.json", "gen", [args.bits],
        {"total": args.total, "grid_side": args.grid_side, "wrap": not args.no_wrap,
         "format": args.format},
        paths + [out / "index.csv"],
    )
    return 0


def cmd_trace(args) -> int:
    bits = bits_mod.read_bits(args.bits)
    built = construct(bits, args.index + 1, _walk_config(args))
    out = Path(args.out)
    out.write_text(built.traces[args.index].to_csv(built.grid.k))
    write_manifest(
        out.with_name(out.name + ".manifest.json"), "trace", [args.bits],
        {"index": args.index, "grid_side": args.grid_side, "wrap": not args.no_wrap},
        [out],
    )
    return 0


def cmd_eval(args) -> int:
    s = sbox_mod.load(args.sbox)
    report = metrics.evaluate(s)
    if args.format == "csv":
        text = metrics.reports_to_csv([(Path(args.sbox).name, report)])
    else:
        text = report.to_text()
    outputs = []
    if args.out:
        Path(args.out).write_text(text)
        outputs.append(Path(args.out))
    else:
        sys.stdout.write(text)
    if args.ddt:
        table, _ = metrics.dp(s)
        Path(args.ddt).write_text(metrics.ddt_to_csv(table))
        outputs.append(Path(args.ddt))
    if outputs:
        write_manifest(
            outputs[0].with_name(outputs[0].name + ".manifest.json"), "eval", [args.sbox],
            {"format": args.format}, outputs,
        )
    return 0


def cmd_optimize(args) -> int:
    in_dir = Path(args.in_dir)
    candidates = read_sbox_dir(in_dir)
    cfg = GAConfig(
        islands=args.islands,
        population_per_island=args.pop,
        generations=args.generations,
        migration_interval=args.migration_interval,
        migration_count=args.migration_count,
        selection_range=args.range,
        rng_seed=args.seed,
    )
    seeded = seed_population(candidates, cfg)
    final, glog = evolve(seeded, cfg)
    out = Path(args.out)
    paths = write_sbox_dir(out, final.individuals, args.format)
    (out / "generations.csv").write_text(glog.to_csv())
    (out / "histogram.csv").write_text(histogram_csv({
        "input": nl_histogram(Individual.of(s) for s in candidates),
        "seed": nl_histogram(seeded.individuals),
        "optimized": nl_histogram(final.individuals),
    }))
    print(f"best nonlinearity {seeded.best()} -> {final.best()}; {len(paths)} S-boxes in {out}")
    write_manifest(
        out / "manifest.json", "optimize", [in_dir],
        {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(cfg).items()},
        paths + [out / "index.csv", out / "generations.csv", out / "histogram.csv"],
        seed=args.seed,
    )
    return 0


def cmd_material(args) -> int:
    bits = bits_mod.read_bits(args.bits)
    if args.image:
        img = spn.read_image(args.image)
        channel_len = img.width * img.height
    elif args.channel_len:
        channel_len = args.channel_len
    else:
        raise SystemExit("material: give --image or --channel-len")
    pool = read_sbox_dir(Path(args.sboxes)) if args.sboxes else None
    m = spn.derive_material(bits, channel_len, pool)
    out = Path(args.out)
    spn.save_material(m, out)
    inputs = [args.bits] + ([args.sboxes] if args.sboxes else []) + ([args.image] if args.image else [])
    write_manifest(
        out.with_name(out.name + ".manifest.json"), "material", inputs,
        {"channel_len": channel_len}, [out],
    )
    return 0


def _crypt(args, func, name: str) -> int:
    img = spn.read_image(args.image)
    m = spn.read_material(args.material)
    result = func(img, m)
    out = Path(args.out)
    spn.write_image(result, out)
    write_manifest(
        out.with_name(out.name + ".manifest.json"), name, [args.image, args.material], {}, [out]
    )
    return 0


def cmd_encrypt(args) -> int:
    return _crypt(args, spn.encrypt_image, "encrypt")


def cmd_decrypt(args) -> int:
    return _crypt(args, spn.decrypt_image, "decrypt")


def cmd_sensitivity(args) -> int:
    img = spn.read_image(args.image)
    m = spn.read_material(args.material)
    where = tuple(args.pixel) if args.pixel else None
    n, u = spn.sensitivity(img, m, where)
    lines = ["channel,npcr,uaci"]
    for name, a, b in zip("RGB", n, u):
        lines.append(f"{name},{a:.4f},{b:.4f}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        write_manifest(
            out.with_name(out.name + ".manifest.json"), "sensitivity",
            [args.image, args.material], {"pixel": list(where) if where else None}, [out],
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trngsbox", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="LDAR records -> random bit file + test report")
    p.add_argument("ldar")
    p.add_argument("out")
    p.add_argument("--strict", action="store_true", help="abort on malformed lines")
    p.add_argument("--whiten", action="store_true", help="apply the Von Neumann extractor")
    p.add_argument("--packed", action="store_true", help="write packed bytes, not ASCII")
    p.add_argument("--report", help="key=value report path (default OUT.report.txt)")
    p.set_defaults(func=cmd_extract)

    def walk_flags(p):
        p.add_argument("--grid-side", type=int, default=None)
        p.add_argument("--no-wrap", action="store_true",
                       help="fail instead of re-reading the direction stream")

    p = sub.add_parser("gen", help="bit file -> S-boxes by random walk")
    p.add_argument("bits")
    p.add_argument("--total", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=sbox_mod.FORMATS, default=sbox_mod.GRID16)
    walk_flags(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("trace", help="CSV trace of one construction walk")
    p.add_argument("bits")
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--out", required=True)
    walk_flags(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("eval", help="security metrics of one S-box file")
    p.add_argument("sbox")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--out")
    p.add_argument("--ddt", help="also write the 256x256 difference table as CSV")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("optimize", help="genetic optimization of an S-box directory")
    p.add_argument("in_dir")
    p.add_argument("--out", required=True)
    p.add_argument("--islands", type=int, default=4)
    p.add_argument("--pop", type=int, default=100, help="population per island")
    p.add_argument("--generations", type=int, default=50)
    p.add_argument("--migration-interval", type=int, default=10)
    p.add_argument("--migration-count", type=int, default=2)
    p.add_argument("--range", type=_range, default=(100, 106), help="selection range LO,HI")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=sbox_mod.FORMATS, default=sbox_mod.GRID16)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("material", help="derive SPN round material from a bit file")
    p.add_argument("bits")
    p.add_argument("--out", required=True)
    p.add_argument("--image", help="size the material for this image")
    p.add_argument("--channel-len", type=int)
    p.add_argument("--sboxes", help="directory of S-boxes to use as round S-boxes")
    p.set_defaults(func=cmd_material)

    for name, func in (("encrypt", cmd_encrypt), ("decrypt", cmd_decrypt)):
        p = sub.add_parser(name, help=f"{name} a PPM or raw RGB image")
        p.add_argument("image")
        p.add_argument("material")
        p.add_argument("out")
        p.set_defaults(func=func)

    p = sub.add_parser("sensitivity", help="NPCR/UACI for a one-pixel change")
    p.add_argument("image")
    p.add_argument("material")
    p.add_argument("--pixel", type=int, nargs=2, metavar=("ROW", "COL"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_sensitivity)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except TrngSboxError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
