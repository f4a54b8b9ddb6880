"""Command-line entry point: ``lexalign {train,eval,induce,synth,procrustes}``.

Reports are printed as ``key=value`` lines on stdout; diagnostics go to the log
on stderr. Library errors map to exit codes 2 (config), 3 (data) and 4 (numeric).
"""

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

from lexalign.lib.config_utils import (
    dtype_for,
    dump_config,
    effective_workers,
    load_config_file,
    validate_config,
)
from lexalign.lib.default_config import get_default_config
from lexalign.lib.embio import (
    BilingualTables,
    ContextualTable,
    EmbeddingTable,
    build_contextual_table,
    load_vec_file,
    normalize_pipeline,
)
from lexalign.lib.errors import ConfigError, LexAlignError
from lexalign.lib.lexicon import SeedLexicon, parse_dictionary
from lexalign.lib.mapping import (
    AlignmentModel,
    checkpoint_settings,
    create_alignment_model,
    load_checkpoint,
    save_model,
)
from lexalign.lib.merge_configs import merge_configs, overrides_from_mapping
from lexalign.lib.procrustes import fit_lexicon, procrustes_index
from lexalign.lib.retrieval import (
    RetrievalIndex,
    build_index,
    evaluation_report,
    induce,
)
from lexalign.lib.synth import generate_synthetic
from lexalign.lib.training import train
from lexalign.lib.types import ConfigOverrides, RunConfig, SynthSpec

logger = logging.getLogger("lexalign")

EFFECTIVE_CONFIG = "effective_config.json"
HISTORY_FILE = "history.jsonl"
CHECKPOINT_FILE = "checkpoint.npz"
REPORT_FILE = "report.txt"

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}
_INT_KEYS = {"hard_pool", "max_neighbors", "n_reflectors"}


def parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {value!r}")


def _flag_type(key: str, default: Any) -> Callable[[str], Any]:
    if isinstance(default, bool):
        return parse_bool
    if isinstance(default, int) or key in _INT_KEYS:
        return int
    if isinstance(default, float):
        return float
    return str


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its values")
    for key, default in get_default_config().items():
        flag = "--" + key.replace("_", "-")
        kind = _flag_type(key, default)
        if kind is parse_bool:
            parser.add_argument(
                flag, type=parse_bool, nargs="?", const=True, default=None
            )
        else:
            parser.add_argument(flag, type=kind, default=None)


def resolve_config(
    args: argparse.Namespace, stored: ConfigOverrides | None = None
) -> RunConfig:
    """Defaults, then settings stored in a checkpoint, then the ``--config`` file,
    then explicit flags."""
    base = merge_configs(get_default_config(), stored or {})
    if args.config:
        base = load_config_file(args.config, base)
    flags = {key: getattr(args, key, None) for key in get_default_config()}
    config = merge_configs(base, overrides_from_mapping(flags))
    validate_config(config)
    return config


def _require_path(config: RunConfig | dict[str, Any], key: str) -> Path:
    flag = "--" + key.replace("_", "-")
    value = config.get(key)
    if not value:
        raise ConfigError(f"{flag} is required")
    path = Path(value)
    if not path.is_file():
        raise ConfigError(f"{flag}: no such file {path}")
    return path


def _emit(lines: Sequence[str], path: Path | None = None) -> None:
    text = "".join(f"{line}\n" for line in lines)
    sys.stdout.write(text)
    if path is not None:
        path.write_text(text, encoding="utf-8")


def _report_lines(report: dict[str, float | int]) -> list[str]:
    return [
        f"{key}={value:.6f}" if isinstance(value, float) else f"{key}={value}"
        for key, value in report.items()
    ]


def _load_embeddings(config: RunConfig, key: str) -> EmbeddingTable:
    path = _require_path(config, key)
    table = load_vec_file(path, config["max_vocab"], dtype=dtype_for(config).type)
    return normalize_pipeline(table)


def load_tables(config: RunConfig) -> BilingualTables:
    src = _load_embeddings(config, "src_vec")
    tgt = _load_embeddings(config, "tgt_vec")
    workers = effective_workers(config)

    def contextual(table: EmbeddingTable, threshold: float) -> ContextualTable:
        return build_contextual_table(
            table,
            threshold,
            config["max_neighbors"],
            block_size=config["block_size"],
            workers=workers,
        )

    return BilingualTables(
        src, tgt, contextual(src, config["tau_src"]), contextual(tgt, config["tau_tgt"])
    )


def _parse(config: RunConfig, key: str, tables: BilingualTables) -> SeedLexicon:
    lexicon, _ = parse_dictionary(_require_path(config, key), tables.src, tables.tgt)
    return lexicon


def cmd_train(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    for key in ("src_vec", "tgt_vec", "train_dict"):
        _require_path(config, key)
    if config["test_dict"]:
        _require_path(config, "test_dict")
    if not config["out_dir"]:
        raise ConfigError("--out-dir is required")
    out_dir = Path(config["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    dump_config(config, out_dir / EFFECTIVE_CONFIG)

    tables = load_tables(config)
    lexicon = _parse(config, "train_dict", tables)
    test = _parse(config, "test_dict", tables) if config["test_dict"] else None

    model = create_alignment_model(
        tables.dim,
        n_reflectors=config["n_reflectors"],
        activation=config["activation"],
        seed=config["rng_seed"],
        dtype=dtype_for(config).type,
        projection=config["projection"],
    )
    result = train(
        model,
        tables,
        lexicon,
        config,
        history_path=out_dir / HISTORY_FILE,
        checkpoint_path=out_dir / CHECKPOINT_FILE,
    )
    save_model(
        result.model, out_dir / CHECKPOINT_FILE, settings=checkpoint_settings(config)
    )

    lines = [
        f"iterations={max(record['iteration'] for record in result.history)}",
        f"epochs={len(result.history)}",
        f"dict_size={len(result.lexicon)}",
    ]
    if result.best_val_p1 is not None:
        lines.append(f"val_p_at_1={result.best_val_p1:.6f}")
    if test is not None:
        index = build_index(
            result.model,
            tables,
            config["csls_k"],
            use_adapter=config["use_adapter"],
            block_size=config["block_size"],
            workers=effective_workers(config),
        )
        lines += _report_lines(evaluation_report(index, test))
    _emit(lines, out_dir / REPORT_FILE)
    return 0


def _load_checkpoint(args: argparse.Namespace) -> tuple[AlignmentModel, RunConfig]:
    """The checkpoint's model and the config to score it with.

    Settings recorded at training time replace the defaults; the config file and
    explicit flags still win.
    """
    if not args.checkpoint:
        raise ConfigError("--checkpoint is required")
    model, settings = load_checkpoint(args.checkpoint)
    return model, resolve_config(args, overrides_from_mapping(settings))


def _checkpoint_index(
    model: AlignmentModel, config: RunConfig
) -> tuple[BilingualTables, RetrievalIndex]:
    tables = load_tables(config)
    index = build_index(
        model,
        tables,
        config["csls_k"],
        use_adapter=config["use_adapter"],
        block_size=config["block_size"],
        workers=effective_workers(config),
    )
    return tables, index


def cmd_eval(args: argparse.Namespace) -> int:
    model, config = _load_checkpoint(args)
    _require_path(config, "test_dict")
    tables, index = _checkpoint_index(model, config)
    test = _parse(config, "test_dict", tables)
    _emit(_report_lines(evaluation_report(index, test, tuple(args.k))))
    return 0


def cmd_induce(args: argparse.Namespace) -> int:
    if not args.out:
        raise ConfigError("--out is required")
    model, config = _load_checkpoint(args)
    _, index = _checkpoint_index(model, config)
    written = induce(index, args.out, args.k)
    _emit([f"translations={written}", f"out={args.out}"])
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    spec = SynthSpec(
        vocab=args.vocab,
        dim=args.dim,
        noise_sigma=args.noise_sigma,
        seed_pairs=args.seed_pairs,
        test_pairs=args.test_pairs,
        rng_seed=args.rng_seed,
        distortion=args.distortion,
    )
    paths = generate_synthetic(spec, args.out_dir)
    _emit(
        [
            f"src_vec={paths.src_vec}",
            f"tgt_vec={paths.tgt_vec}",
            f"seed_dict={paths.seed_dict}",
            f"test_dict={paths.test_dict}",
        ]
    )
    return 0


def cmd_procrustes(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    src = _load_embeddings(config, "src_vec")
    tgt = _load_embeddings(config, "tgt_vec")
    train_path = _require_path(config, "train_dict")
    test_path = _require_path(config, "test_dict")
    seed, _ = parse_dictionary(train_path, src, tgt)
    test, _ = parse_dictionary(test_path, src, tgt)

    fit = fit_lexicon(src, tgt, seed)
    index = procrustes_index(
        fit,
        src,
        tgt,
        config["csls_k"],
        block_size=config["block_size"],
        workers=effective_workers(config),
    )
    report = evaluation_report(index, test, tuple(args.k))
    lines = [f"rank={fit.rank}", *_report_lines(report)]
    _emit(lines)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexalign", description="Bilingual lexicon induction", allow_abbrev=False
    )
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="diagnostic verbosity (stderr)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    train_parser = commands.add_parser(
        "train", help="train and evaluate", allow_abbrev=False
    )
    _add_config_flags(train_parser)
    train_parser.set_defaults(handler=cmd_train)

    eval_parser = commands.add_parser(
        "eval", help="score a checkpoint", allow_abbrev=False
    )
    _add_config_flags(eval_parser)
    eval_parser.add_argument("--checkpoint")
    eval_parser.add_argument("--k", type=int, nargs="+", default=[1, 5, 10])
    eval_parser.set_defaults(handler=cmd_eval)

    induce_parser = commands.add_parser(
        "induce", help="write top-k translations", allow_abbrev=False
    )
    _add_config_flags(induce_parser)
    induce_parser.add_argument("--checkpoint")
    induce_parser.add_argument("--k", type=int, default=10)
    induce_parser.add_argument("--out")
    induce_parser.set_defaults(handler=cmd_induce)

    synth_parser = commands.add_parser(
        "synth", help="generate a synthetic rotation task", allow_abbrev=False
    )
    synth_parser.add_argument("--vocab", type=int, default=1000)
    synth_parser.add_argument("--dim", type=int, default=32)
    synth_parser.add_argument("--noise-sigma", type=float, default=0.0)
    synth_parser.add_argument("--seed-pairs", type=int, default=200)
    synth_parser.add_argument("--test-pairs", type=int, default=200)
    synth_parser.add_argument("--rng-seed", type=int, default=0)
    synth_parser.add_argument(
        "--distortion", choices=["none", "per-word-jitter"], default="per-word-jitter"
    )
    synth_parser.add_argument("--out-dir", required=True)
    synth_parser.set_defaults(handler=cmd_synth)

    procrustes_parser = commands.add_parser(
        "procrustes", help="closed-form orthogonal baseline", allow_abbrev=False
    )
    _add_config_flags(procrustes_parser)
    procrustes_parser.add_argument("--k", type=int, nargs="+", default=[1, 5, 10])
    procrustes_parser.set_defaults(handler=cmd_procrustes)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except LexAlignError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
