"""Command-line entry point: the pipeline as composable subcommands.

Exit codes: 0 success, 2 unusable input (files, flags, config), 3 pipeline
failure (geometry, rendering, classification), 4 I/O failure. Every command
that owns an output directory drops a ``run_config.json`` there with the
resolved configuration so a run can be replayed exactly. Report commands
write a figure next to each delimited output.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace

from . import __version__, figures
from .acp import DEFAULT_SIGNAL, synth_dataset, write_acp_csv
from .cgr import LayoutError, load_layout
from .classify import (
    confusion_matrix,
    disagreement_counts,
    mcnemar_from_counts,
    read_predictions,
    write_metrics,
    write_predictions,
)
from .config import PipelineConfig, write_run_config
from .perturb import PerturbationError, PerturbationSpec, perturb
from .pipeline import (
    PipelineError,
    batch_images,
    evaluate_dataset,
    evaluate_manifest,
    robustness_assessment,
    sequence_complex,
)
from .render import ink_count, read_image
from .rips import complex_to_json, distance_matrix, h0_persistence, persistence_to_json
from .seqio import (
    Dataset,
    DatasetError,
    Sequence,
    dataset_stats,
    load_dataset,
    load_split,
    save_split,
    stratified_split,
    write_dataset_csv,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PIPELINE = 3
EXIT_IO = 4

log = logging.getLogger("cgrips")


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(",") if t.strip())


# Flags that mirror PipelineConfig fields use None defaults so that only
# flags the user actually passed override the config file / built-ins.
_CONFIG_FLAGS = {
    "alpha": float,
    "epsilon": float,
    "image_size": int,
    "margin_frac": float,
    "vertex_radius": int,
    "test_frac": float,
    "val_frac": float,
    "seed": int,
    "pool_factor": int,
    "threads": int,
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline configuration")
    g.add_argument("--config", metavar="FILE", help="JSON config file (flags win)")
    for name, typ in _CONFIG_FLAGS.items():
        g.add_argument(f"--{name.replace('_', '-')}", type=typ, default=None)
    g.add_argument("--k-candidates", type=_parse_ints, default=None,
                   metavar="K1,K2,...", help="neighbor counts tried on validation")
    g.add_argument("--triangles", action="store_true", default=None,
                   help="also fill triangles (lower intensity than edges)")


def _resolve_config(args) -> PipelineConfig:
    base = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    overrides = {}
    for name in _CONFIG_FLAGS:
        val = getattr(args, name, None)
        if val is not None:
            overrides[name] = val
    if getattr(args, "k_candidates", None) is not None:
        overrides["knn_k_candidates"] = args.k_candidates
    if getattr(args, "triangles", None):
        overrides["include_triangles"] = True
    if getattr(args, "epsilons", None):
        overrides["epsilon_list"] = args.epsilons
    return replace(base, **overrides) if overrides else base


def _load_input(path, fmt: str, strict: bool):
    if fmt == "auto":
        fmt = "fasta" if path.endswith((".fa", ".fasta", ".faa")) else "csv"
    result = load_dataset(path, format=fmt, strict=strict)
    for ref, reason in result.skipped:
        log.warning("skipped %s: %s", ref, reason)
    return result.dataset


def _ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_stats(args) -> int:
    dataset = _load_input(args.input, args.format, args.strict)
    stats = dataset_stats(dataset)
    out = _ensure_dir(args.out_dir)
    with open(os.path.join(out, "stats.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["label", "count", "min_len", "max_len", "mean_len"])
        for s in stats:
            w.writerow([s.label, s.count, s.min_len, s.max_len, f"{s.mean_len:.4f}"])
    figures.save_class_counts(stats, os.path.join(out, "class_counts.png"))
    figures.save_length_hist(dataset, os.path.join(out, "length_hist.png"))
    print(f"{'label':<24}{'count':>7}{'min':>5}{'max':>5}{'mean':>8}")
    for s in stats:
        print(f"{s.label:<24}{s.count:>7}{s.min_len:>5}{s.max_len:>5}{s.mean_len:>8.2f}")
    print(f"{'total':<24}{len(dataset):>7}")
    return EXIT_OK


def cmd_split(args) -> int:
    cfg = _resolve_config(args)
    dataset = _load_input(args.input, args.format, args.strict)
    split = stratified_split(dataset, cfg.test_frac, cfg.val_frac, cfg.seed)
    out = _ensure_dir(args.out_dir)
    save_split(split, os.path.join(out, "split.json"))
    write_run_config(os.path.join(out, "run_config.json"), cfg, "split",
                     input=args.input)
    print(f"train={len(split.train)} validation={len(split.validation)} "
          f"test={len(split.test)} -> {out}/split.json")
    return EXIT_OK


def cmd_batch(args) -> int:
    cfg = _resolve_config(args)
    dataset = _load_input(args.input, args.format, args.strict)
    split = None
    if args.split_file:
        split = load_split(args.split_file)
    elif args.make_split:
        split = stratified_split(dataset, cfg.test_frac, cfg.val_frac, cfg.seed)
    out = _ensure_dir(args.out_dir)
    if split is not None and args.make_split:
        save_split(split, os.path.join(out, "split.json"))
    result = batch_images(dataset, out, cfg, split=split, strict=args.strict)
    write_run_config(os.path.join(out, "run_config.json"), cfg, "batch",
                     input=args.input, n_images=len(result.entries),
                     n_failures=len(result.failures))
    if result.failures:
        with open(os.path.join(out, "failures.csv"), "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["id", "reason"])
            w.writerows(result.failures)
        print(f"{len(result.entries)} images written, "
              f"{len(result.failures)} sequences FAILED (see failures.csv)",
              file=sys.stderr)
        return EXIT_PIPELINE
    print(f"{len(result.entries)} images -> {result.manifest_path}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _resolve_config(args)
    if not cfg.epsilon_list:
        raise DatasetError("sweep requires --epsilons (or epsilon_list in config)")
    dataset = _load_input(args.input, args.format, args.strict)
    out = _ensure_dir(args.out_dir)
    layout = cfg.layout()
    rows = []
    for eps in cfg.epsilon_list:
        sub = os.path.join(out, f"eps_{eps:g}")
        result = batch_images(dataset, sub, replace(cfg, epsilon=eps), strict=True)
        ink = sum(
            ink_count(read_image(os.path.join(sub, e.image_path)))
            for e in result.entries
        )
        edges = sum(
            sequence_complex(seq, layout, eps)[1].n_edges
            for seq in dataset.sequences
        )
        rows.append((eps, edges, ink))
    with open(os.path.join(out, "sweep.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["epsilon", "total_edges", "total_ink_pixels"])
        w.writerows(rows)
    figures.save_sweep([r[0] for r in rows], [r[1] for r in rows],
                       [r[2] for r in rows], os.path.join(out, "sweep.png"))
    write_run_config(os.path.join(out, "run_config.json"), cfg, "sweep",
                     input=args.input)
    for eps, edges, ink in rows:
        print(f"eps={eps:g} edges={edges} ink={ink}")
    return EXIT_OK


def cmd_persistence(args) -> int:
    cfg = _resolve_config(args)
    if args.sequence:
        seq = Sequence("cli", args.sequence.strip().upper(), "")
    else:
        dataset = _load_input(args.input, args.format, args.strict)
        match = [s for s in dataset.sequences if s.id == args.id]
        if not match:
            raise DatasetError(f"id {args.id!r} not found in {args.input}")
        seq = match[0]
    layout = load_layout(args.layout) if args.layout else cfg.layout()
    traj, cx = sequence_complex(seq, layout, cfg.epsilon, cfg.include_triangles)
    diagram = h0_persistence(distance_matrix(traj))
    out = _ensure_dir(args.out_dir)
    with open(os.path.join(out, "complex.json"), "w") as f:
        json.dump(complex_to_json(cx, traj), f, indent=2, sort_keys=True)
    with open(os.path.join(out, "persistence.json"), "w") as f:
        json.dump({"pairs": persistence_to_json(diagram)}, f, indent=2)
    figures.save_complex(traj.points, cx.edges, os.path.join(out, "complex.png"),
                         epsilon=cfg.epsilon)
    figures.save_persistence_diagram(diagram, os.path.join(out, "diagram.png"))
    figures.save_barcode(diagram, os.path.join(out, "barcode.png"))
    write_run_config(os.path.join(out, "run_config.json"), cfg, "persistence")
    print(f"{cx.n_vertices} vertices, {cx.n_edges} edges at eps={cfg.epsilon:g}; "
          f"{len(diagram.finite_deaths)} finite pairs + {diagram.n_infinite} essential")
    return EXIT_OK


def cmd_perturb(args) -> int:
    cfg = _resolve_config(args)
    dataset = _load_input(args.input, args.format, args.strict)
    out = _ensure_dir(args.out_dir)
    if args.curve:
        result = robustness_assessment(
            dataset, cfg, mutation_counts=args.mutations, n_seeds=args.curve_seeds
        )
        with open(os.path.join(out, "robustness.csv"), "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["sigma_l1", "accuracy_mean"]
                       + [f"accuracy_seed{s}" for s in result.seeds])
            for j, row in enumerate(result.rows):
                w.writerow([row.sigma_l1, f"{row.accuracy:.6f}"]
                           + [f"{a:.6f}" for a in result.per_seed[:, j]])
        with open(os.path.join(out, "robustness.json"), "w") as f:
            json.dump({
                "mutation_counts": list(result.mutation_counts),
                "seeds": list(result.seeds),
                "mean_accuracy": [r.accuracy for r in result.rows],
                "sigma_l1": [r.sigma_l1 for r in result.rows],
                "empirical_slope": result.slope,
            }, f, indent=2)
        figures.save_robustness(result.rows, os.path.join(out, "robustness.png"))
        for row in result.rows:
            print(f"sigma={row.sigma_l1:g} accuracy={row.accuracy:.4f}")
        print(f"empirical slope {result.slope:.4f}")
    else:
        spec = PerturbationSpec(args.mutations_n, args.indels,
                                args.truncate_to, cfg.seed)
        perturbed = [
            perturb(s, replace(spec, seed=spec.seed ^ i))
            for i, s in enumerate(dataset.sequences)
        ]
        dest = os.path.join(out, "perturbed.csv")
        write_dataset_csv(Dataset(perturbed), dest)
        print(f"{len(perturbed)} perturbed sequences -> {dest}")
    write_run_config(os.path.join(out, "run_config.json"), cfg, "perturb",
                     input=args.input)
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _resolve_config(args)
    fmt = args.format
    if fmt == "auto":
        fmt = "manifest" if args.input.endswith(".jsonl") else "auto"
    if fmt == "manifest":
        result = evaluate_manifest(args.input, cfg)
    else:
        dataset = _load_input(args.input, fmt, args.strict)
        result = evaluate_dataset(dataset, cfg)
    out = _ensure_dir(args.out_dir)
    write_predictions(result.predictions, os.path.join(out, "predictions.jsonl"))
    write_metrics(result.report, os.path.join(out, "metrics.json"))
    conf = confusion_matrix(result.predictions, result.label_set)
    figures.save_confusion(conf, result.label_set, os.path.join(out, "confusion.png"))
    write_run_config(os.path.join(out, "run_config.json"), cfg, "eval",
                     input=args.input, chosen_k=result.k)
    r = result.report
    auc = "n/a" if r.roc_auc_ovr_macro is None else f"{r.roc_auc_ovr_macro:.4f}"
    print(f"k={result.k} accuracy={r.accuracy:.4f} f1_weighted={r.f1_weighted:.4f} "
          f"f1_macro={r.f1_macro:.4f} auc={auc}")
    return EXIT_OK


def cmd_mcnemar(args) -> int:
    if args.counts:
        b, c = args.counts
    else:
        if not (args.a and args.b):
            raise DatasetError("mcnemar needs two prediction files or --counts B C")
        b, c = disagreement_counts(read_predictions(args.a), read_predictions(args.b))
    p = mcnemar_from_counts(b, c)
    if args.out:
        with open(args.out, "w") as f:
            json.dump({"b": b, "c": c, "p_value": p}, f, indent=2)
    print(f"b={b} c={c} p={p:.6g}")
    return EXIT_OK


def cmd_synth(args) -> int:
    dataset = synth_dataset(args.kind, seed=args.seed, signal=args.signal)
    write_acp_csv(dataset, args.out)
    print(f"{len(dataset)} sequences ({args.kind}) -> {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cgrips",
        description="Chaos-game + neighborhood-complex imaging of sequence datasets",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    def add_input(sp, with_format=True):
        sp.add_argument("input", help="dataset file (CSV, FASTA, or manifest)")
        if with_format:
            sp.add_argument("--format", choices=["auto", "csv", "fasta"],
                            default="auto")
        sp.add_argument("--strict", action="store_true",
                        help="fail on the first bad row instead of skipping")

    sp = sub.add_parser("stats", help="per-class counts and length statistics")
    add_input(sp)
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(fn=cmd_stats)

    sp = sub.add_parser("split", help="stratified train/validation/test split")
    add_input(sp)
    sp.add_argument("--out-dir", required=True)
    _add_config_flags(sp)
    sp.set_defaults(fn=cmd_split)

    sp = sub.add_parser("batch", help="render every sequence to a PNG + manifest")
    add_input(sp)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--split-file", help="existing split.json to stamp into the manifest")
    sp.add_argument("--make-split", action="store_true",
                    help="compute a stratified split and stamp it into the manifest")
    _add_config_flags(sp)
    sp.set_defaults(fn=cmd_batch)

    sp = sub.add_parser("sweep", help="batch at several scale thresholds")
    add_input(sp)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--epsilons", type=_parse_floats, metavar="E1,E2,...",
                    help="strictly increasing scale thresholds")
    _add_config_flags(sp)
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("persistence",
                        help="connectivity persistence of one sequence")
    sp.add_argument("input", nargs="?", help="dataset file (with --id)")
    sp.add_argument("--format", choices=["auto", "csv", "fasta"], default="auto")
    sp.add_argument("--strict", action="store_true")
    sp.add_argument("--id", help="sequence id inside the dataset file")
    sp.add_argument("--sequence", help="literal residue string instead of a file")
    sp.add_argument("--layout", help="custom layout JSON (default: 20-gon)")
    sp.add_argument("--out-dir", required=True)
    _add_config_flags(sp)
    sp.set_defaults(fn=cmd_persistence)

    sp = sub.add_parser("perturb",
                        help="perturb sequences; --curve for a robustness curve")
    add_input(sp)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--curve", action="store_true",
                    help="measure accuracy vs mutation strength instead")
    sp.add_argument("--mutations", type=_parse_ints, default=(0, 1, 2, 4),
                    metavar="M1,M2,...", help="mutation counts for --curve")
    sp.add_argument("--curve-seeds", type=int, default=5,
                    help="number of split seeds averaged in --curve mode")
    sp.add_argument("--mutations-n", type=int, default=0,
                    help="point mutations per sequence (plain mode)")
    sp.add_argument("--indels", type=int, default=0,
                    help="indel events per sequence (plain mode)")
    sp.add_argument("--truncate-to", type=int, default=None,
                    help="keep only the first N residues (plain mode)")
    _add_config_flags(sp)
    sp.set_defaults(fn=cmd_perturb)

    sp = sub.add_parser("eval", help="k-NN baseline over rendered images")
    sp.add_argument("input", help="manifest.jsonl or dataset CSV/FASTA")
    sp.add_argument("--format", choices=["auto", "manifest", "csv", "fasta"],
                    default="auto")
    sp.add_argument("--strict", action="store_true")
    sp.add_argument("--out-dir", required=True)
    _add_config_flags(sp)
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("mcnemar", help="paired significance of two prediction sets")
    sp.add_argument("a", nargs="?", help="predictions.jsonl of classifier A")
    sp.add_argument("b", nargs="?", help="predictions.jsonl of classifier B")
    sp.add_argument("--counts", type=int, nargs=2, metavar=("B", "C"),
                    help="use disagreement counts directly")
    sp.add_argument("--out", help="write {b, c, p_value} JSON here")
    sp.set_defaults(fn=cmd_mcnemar)

    sp = sub.add_parser("synth", help="write a surrogate screening dataset CSV")
    sp.add_argument("kind", choices=["breast", "lung"])
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--signal", type=float, default=DEFAULT_SIGNAL,
                    help="per-residue class-arc probability in [0, 1]")
    sp.set_defaults(fn=cmd_synth)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.fn(args)
    except (DatasetError, LayoutError, PerturbationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PipelineError as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
