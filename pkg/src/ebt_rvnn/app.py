"""
Main application class for ebt-rvnn

Each ``run_*`` method implements one CLI subcommand and returns its exit
code; exceptions from the library propagate to the CLI, which maps them to
exit codes.
"""

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import torch

from .bench.runner import BenchRunner, peak_ratio, report_csv, report_text
from .config.settings import Config
from .core.diagnostics import GRADCHECK_TOLERANCE, gradient_suite, oracle_check
from .core.models import build_model
from .core.trainer import Trainer
from .data.checkpoint import load_checkpoint, read_checkpoint, save_checkpoint
from .data.dataset_io import FileDatasetStore
from .data.listops import ListOpsSample, generate_dataset
from .ui.report import ReportPrinter
from .utils.helpers import format_file_size, format_scalar_count, get_system_info
from .utils.logging import get_logger

EXIT_OK = 0
EXIT_FAILED = 2


@dataclass
class AppState:
    """Settings shared by every subcommand"""
    seed: int = 0
    out: Optional[str] = None
    debug_mode: bool = False


class EBTApp:
    """Main application class"""

    def __init__(self, config_path: Optional[str] = None, seed: Optional[int] = None,
                 out: Optional[str] = None, debug_mode: bool = False, no_color: bool = False):
        self.config = Config(config_path)
        if seed is not None:
            self.config.seed = seed
        self.state = AppState(seed=self.config.seed, out=out, debug_mode=debug_mode)
        self.logger = get_logger(__name__)
        self.ui = ReportPrinter(no_color=no_color)

    def _out(self, default: str) -> Path:
        return Path(self.state.out or default)

    # gen

    def generate_splits(self) -> Dict[str, List[ListOpsSample]]:
        """Train/val from the training bounds, plus the longer and wider test splits"""
        data, seed = self.config.data, self.state.seed
        plan = [
            ("train", data.train_gen(seed), data.train_size),
            ("val", data.train_gen(seed + 1), data.val_size),
            ("test_length", data.length_split_gen(seed + 2), data.test_size),
            ("test_args", data.args_split_gen(seed + 3), data.test_size),
        ]
        splits = {}
        for name, gen_config, count in plan:
            splits[name] = generate_dataset(gen_config, count, random.Random(gen_config.seed))
            self.logger.info(f"Generated {count} samples for split {name}")
        return splits

    def run_gen(self) -> int:
        self.ui.print_header("generate ListOps")
        store = FileDatasetStore(self._out("data"))
        for name, samples in self.generate_splits().items():
            path = store.save_split(name, samples)
            self.ui.print_success(f"{name}: {len(samples)} samples -> {path}")

        rows = [
            [name, s["samples"], s["min_length"], s["max_length"], f"{s['mean_length']:.1f}", format_file_size(s["file_size"])]
            for name, s in store.get_stats().items()
        ]
        self.ui.print_table(["split", "samples", "min_len", "max_len", "mean_len", "size"], rows)
        return EXIT_OK

    # train / eval

    def _load_or_generate(self, data_dir: Path) -> FileDatasetStore:
        store = FileDatasetStore(data_dir)
        if not store.has_split("train") or not store.has_split("val"):
            self.ui.print_warning(f"No train/val splits in {data_dir}; generating them")
            for name, samples in self.generate_splits().items():
                store.save_split(name, samples)
        return store

    def run_train(self, data_dir: str = "data", variant: Optional[str] = None, epochs: Optional[int] = None) -> int:
        if variant:
            self.config.update_config(model={"variant": variant})
        if epochs is not None:
            self.config.update_config(train={"epochs": epochs})

        model_config = self.config.model
        self.ui.print_header(f"train {model_config.variant}")
        store = self._load_or_generate(Path(data_dir))
        train, val = store.load_split("train"), store.load_split("val")

        model = build_model(model_config, self.state.seed)
        self.ui.print_info(f"{model_config.variant}: {model.parameter_count} parameters, "
                           f"{len(train)} train / {len(val)} val samples")
        trainer = Trainer(model, self.config.train, seed=self.state.seed, show_progress=self.state.debug_mode)
        history = trainer.fit(train, val)

        self.ui.print_table(
            ["epoch", "loss", "train_acc", "val_acc", "seconds"],
            [[m.epoch, f"{m.loss:.4f}", f"{m.accuracy:.4f}",
              "-" if m.val_accuracy is None else f"{m.val_accuracy:.4f}", f"{m.seconds:.1f}"] for m in history],
        )

        path = self._out(f"checkpoints/{model_config.variant}.ckpt")
        save_checkpoint(path, model, model_config.variant, self.config.to_dict())
        self.ui.print_success(f"Checkpoint saved to {path}")
        return EXIT_OK

    def run_eval(self, checkpoint: str, data_dir: str = "data") -> int:
        header, _ = read_checkpoint(checkpoint)
        config = Config.from_dict(header["config"])
        model = build_model(config.model, config.seed)
        load_checkpoint(checkpoint, model, header["variant"])

        self.ui.print_header(f"evaluate {header['variant']}")
        store = FileDatasetStore(data_dir)
        trainer = Trainer(model, config.train, seed=self.state.seed)
        rows = []
        for name in store.list_splits():
            if name == "train":
                continue
            samples = store.load_split(name)
            accuracy = trainer.evaluate(samples)
            rows.append([name, len(samples), f"{accuracy:.4f}"])
            self.logger.info(f"{header['variant']} accuracy on {name}: {accuracy:.4f}")

        if not rows:
            self.ui.print_error(f"No evaluation splits found in {data_dir}")
            return EXIT_FAILED
        self.ui.print_table(["split", "samples", "accuracy"], rows)
        return EXIT_OK

    # bench

    def run_bench(self, lengths: Optional[str] = None, variants: Optional[str] = None,
                  repetitions: Optional[int] = None) -> int:
        overrides = {k: v for k, v in (("lengths", lengths), ("variants", variants),
                                       ("repetitions", repetitions)) if v is not None}
        if overrides:
            self.config.update_config(bench=overrides)
        bench = self.config.bench

        self.ui.print_header("activation memory benchmark")
        info = get_system_info()
        self.ui.print_info(f"{info['platform']} {info['architecture']}, python {info['python_version']}, "
                           f"torch {torch.__version__}, {info['cpu_count']} cores, "
                           f"{format_file_size(info['memory_total'])} RAM "
                           f"({format_file_size(info['memory_available'])} free)")
        self.ui.print_info(f"K={bench.beam_size} d={bench.d} d_cell={bench.d_cell} d_s={bench.d_s} "
                           f"repetitions={bench.repetitions} budget={format_scalar_count(bench.scalar_budget)}")

        rows = BenchRunner(bench, self.state.seed).run()
        self.ui.print_table(["variant", "length", "seconds", "peak"], [row.cells(human=True) for row in rows])

        for length in bench.length_list():
            ratio = peak_ratio(rows, "bt-grc", "ebt-grc", length)
            if ratio is not None:
                self.ui.print_info(f"n={length}: bt-grc / ebt-grc peak ratio {ratio:.2f}")

        out_dir = self._out("bench_results")
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "bench.txt").write_text(report_text(rows) + "\n", encoding="utf-8")
        (out_dir / "bench.csv").write_text(report_csv(rows), encoding="utf-8")
        self.ui.print_success(f"Reports written to {out_dir}")
        return EXIT_OK

    # checks

    def run_gradcheck(self) -> int:
        self.ui.print_header("finite-difference gradient check")
        results = gradient_suite(self.state.seed)
        self.ui.print_table(
            ["op", "shapes", "max_rel_error", "status"],
            [[r.name, str(r.shapes), f"{r.max_error:.3e}", "ok" if r.passed else "FAIL"] for r in results],
        )
        failed = [r.name for r in results if not r.passed]
        if failed:
            self.ui.print_error(f"Gradient check above {GRADCHECK_TOLERANCE:g}: {', '.join(failed)}")
            return EXIT_FAILED
        self.ui.print_success(f"All {len(results)} checks below {GRADCHECK_TOLERANCE:g}")
        return EXIT_OK

    def run_oracle(self, n: int, k: int, mode: str = "disentangled") -> int:
        self.ui.print_header("beam search vs exhaustive merge orders")
        report = oracle_check(n, k, self.state.seed, mode)
        self.ui.print_info(f"n={n} K={k} mode={mode}: {report.beams} beams, {report.sequences} merge orders")
        if not report.exhaustive:
            self.ui.print_warning(f"K={k} keeps fewer beams than the {report.sequences} merge orders; "
                                  "comparing the surviving beams only")
        print(f"max root deviation: {report.max_root_deviation:.3e}", file=self.ui.stream)
        print(f"max score deviation: {report.max_score_deviation:.3e}", file=self.ui.stream)
        print(f"probability mass: {report.probability_mass:.12f}", file=self.ui.stream)
        if not report.passed:
            self.ui.print_error("Beam search disagrees with the exhaustive oracle")
            return EXIT_FAILED
        self.ui.print_success("Beam search matches the exhaustive oracle")
        return EXIT_OK
