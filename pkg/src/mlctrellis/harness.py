"""Cross-validated benchmark runs, rank tables and INI experiment configs."""
from __future__ import annotations

import configparser
import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import models
from .base_learner import SgdConfig
from .data import Dataset, generate_bn_dataset, kfold_split, load_dataset, make_rng
from .errors import ConfigurationError
from .inference import GibbsConfig
from .localization import generate_localization_dataset
from .metrics import (
    REPORT_FIELDS,
    average_ranks,
    evaluate,
    nemenyi_cd,
)
from .structure import DEFAULT_PATTERN, PARENT_PATTERNS, fs_structure, lead_structure

METHODS = ("ic", "cc", "ecc", "mcc", "ebcc", "ct", "ect", "cdt", "fs", "lead")

_OPT_INT = "optint"
METHOD_PARAMS = {
    "ic": {},
    "cc": {},
    "ecc": {"m": (int, 10)},
    "mcc": {"m": (int, 10)},
    "ebcc": {"m": (_OPT_INT, None)},
    "ct": {"width": (_OPT_INT, None), "pattern": (str, DEFAULT_PATTERN)},
    "ect": {"m": (int, 10), "width": (_OPT_INT, None), "pattern": (str, DEFAULT_PATTERN)},
    "cdt": {"width": (_OPT_INT, None), "t_total": (int, 100), "t_burn": (int, 10)},
    "fs": {"max_parents": (int, 2), "threshold": (float, 0.0)},
    "lead": {"max_parents": (int, 2), "threshold": (float, 0.0)},
}

GENERATORS = {
    "bn": {
        "n": (int, 1000), "d": (int, 20), "l": (int, 6), "t": (int, 5),
        "alpha": (float, 1.0), "sigma2": (float, 1.0), "delta": (float, 0.0), "seed": (int, 0),
    },
    "local": {
        "w": (int, 20), "sensors": (int, 30), "n": (int, 1000), "m": (int, 1),
        "eps_fn": (float, 0.15), "eps_fp": (float, 0.01), "seed": (int, 0),
    },
}

SECTION = "experiment"


def _convert(kind, raw, key):
    if raw is None:
        return None
    try:
        if kind is _OPT_INT:
            return None if str(raw).strip().lower() in ("", "none", "auto") else int(raw)
        return kind(raw)
    except (TypeError, ValueError):
        raise ConfigurationError(f"bad value {raw!r} for {key}") from None


def _resolve(schema: dict, given: dict, where: str) -> dict:
    unknown = set(given) - set(schema)
    if unknown:
        raise ConfigurationError(f"unknown {where} parameter(s): {', '.join(sorted(unknown))}")
    return {k: _convert(kind, given.get(k, default), f"{where}.{k}") for k, (kind, default) in schema.items()}


@dataclass
class ExperimentConfig:
    methods: tuple = ("ic",)
    data_path: Optional[str] = None
    label_count: Optional[int] = None
    generator: Optional[str] = None
    generator_params: dict = field(default_factory=dict)
    method_params: dict = field(default_factory=dict)
    name: Optional[str] = None
    folds: int = 5
    test_fraction: Optional[float] = None
    seed: int = 0
    epochs: int = 100
    learning_rate: float = 0.1
    l2: float = 1e-4
    out: Optional[str] = None
    format: str = "csv"
    workers: int = 1
    timing: bool = True

    def validate(self) -> "ExperimentConfig":
        """Normalise and check every field; raises before any training starts."""
        methods = tuple(m.strip().lower() for m in self.methods if m.strip())
        if not methods:
            raise ConfigurationError("at least one method is required")
        bad = [m for m in methods if m not in METHODS]
        if bad:
            raise ConfigurationError(f"unknown method(s): {', '.join(bad)}; known: {', '.join(METHODS)}")
        if (self.data_path is None) == (self.generator is None):
            raise ConfigurationError("give exactly one of a data file or a generator")
        if self.data_path is not None and (self.label_count is None or self.label_count < 1):
            raise ConfigurationError("a data file needs label_count >= 1")
        gen_params = {}
        if self.generator is not None:
            if self.generator not in GENERATORS:
                raise ConfigurationError(f"unknown generator {self.generator!r}; known: bn, local")
            gen_params = _resolve(GENERATORS[self.generator], self.generator_params, self.generator)
        method_params = {}
        for m in set(self.method_params) - set(methods):
            if m not in METHODS:
                raise ConfigurationError(f"parameters given for unknown method {m!r}")
        for m in methods:
            method_params[m] = _resolve(METHOD_PARAMS[m], self.method_params.get(m, {}), m)
            pat = method_params[m].get("pattern")
            if pat is not None and pat not in PARENT_PATTERNS:
                raise ConfigurationError(f"unknown trellis pattern {pat!r}")
            if m == "cdt":
                GibbsConfig(method_params[m]["t_total"], method_params[m]["t_burn"])
        if self.test_fraction is not None:
            if not 0 < self.test_fraction < 1:
                raise ConfigurationError("test_fraction must lie in (0, 1)")
        elif self.folds < 2:
            raise ConfigurationError("folds must be >= 2")
        if self.format not in ("csv", "json"):
            raise ConfigurationError("format must be csv or json")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        SgdConfig(self.epochs, self.learning_rate, self.l2)
        return replace(self, methods=methods, generator_params=gen_params, method_params=method_params)

    @property
    def dataset_name(self) -> str:
        if self.name:
            return self.name
        if self.data_path:
            return Path(self.data_path).stem
        return str(self.generator)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        sec = {"methods": ",".join(self.methods)}
        for key in ("name", "data_path", "label_count", "generator", "test_fraction", "out"):
            val = getattr(self, key)
            if val is not None:
                sec[key] = str(val)
        for key in ("folds", "seed", "epochs", "learning_rate", "l2", "format", "workers"):
            sec[key] = repr(getattr(self, key)) if isinstance(getattr(self, key), float) else str(getattr(self, key))
        sec["timing"] = "yes" if self.timing else "no"
        for k, v in sorted(self.generator_params.items()):
            sec[f"gen.{k}"] = "none" if v is None else str(v)
        for m, params in sorted(self.method_params.items()):
            for k, v in sorted(params.items()):
                sec[f"{m}.{k}"] = "none" if v is None else str(v)
        cp[SECTION] = sec
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigurationError(f"unreadable config: {exc}") from None
        if SECTION not in cp:
            raise ConfigurationError(f"config needs an [{SECTION}] section")
        sec = dict(cp[SECTION])
        kwargs: dict = {"generator_params": {}, "method_params": {}}
        for key, raw in sec.items():
            if key.startswith("gen."):
                kwargs["generator_params"][key[4:]] = raw
            elif "." in key:
                m, _, p = key.partition(".")
                kwargs["method_params"].setdefault(m, {})[p] = raw
            elif key == "methods":
                kwargs["methods"] = tuple(v.strip() for v in raw.split(",") if v.strip())
            elif key in ("name", "data_path", "generator", "out", "format"):
                kwargs[key] = raw
            elif key in ("label_count", "folds", "seed", "epochs", "workers"):
                kwargs[key] = _convert(int, raw, key)
            elif key in ("learning_rate", "l2", "test_fraction"):
                kwargs[key] = _convert(float, raw, key)
            elif key == "timing":
                kwargs[key] = cp[SECTION].getboolean(key)
            else:
                raise ConfigurationError(f"unknown config key {key!r}")
        return cls(**kwargs)


def load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_ini(Path(path).read_text(encoding="utf-8"))


def materialize_dataset(config: ExperimentConfig) -> Dataset:
    if config.data_path is not None:
        return load_dataset(config.data_path, config.label_count)
    p = config.generator_params
    if config.generator == "bn":
        return generate_bn_dataset(p["n"], p["d"], p["l"], p["t"], p["alpha"], p["sigma2"], p["delta"], p["seed"])[0]
    return generate_localization_dataset(p["w"], p["sensors"], p["n"], p["m"], p["seed"], p["eps_fn"], p["eps_fp"])


def fit_method(method: str, train: Dataset, params: dict, base: SgdConfig, seed: int):
    """Train one named method; ``seed`` drives every random choice it makes."""
    if method == "ic":
        return models.train_ic(train, base)
    if method == "cc":
        order = make_rng(seed).permutation(train.l)
        return models.train_cc(train, order, base)
    if method == "ecc":
        return models.train_ensemble_cc(train, params["m"], base, seed)
    if method == "mcc":
        return models.select_mcc(train, params["m"], base, seed)
    if method == "ebcc":
        return models.train_ebcc(train, params["m"], base, seed)
    if method == "ct":
        return models.train_ct(train, params["width"], params["pattern"], base, seed)
    if method == "ect":
        return models.train_ect(train, params["m"], params["width"], params["pattern"], base, seed)
    if method == "cdt":
        gibbs = GibbsConfig(params["t_total"], params["t_burn"], seed)
        return models.train_cdt(train, params["width"], base, seed, gibbs)
    if method == "fs":
        structure = fs_structure(train.labels, params["max_parents"], params["threshold"], seed)
        return models.train_bcc(train, structure, base)
    if method == "lead":
        structure = lead_structure(train, base, params["max_parents"], params["threshold"], seed)
        return models.train_bcc(train, structure, base)
    raise ConfigurationError(f"unknown method {method!r}")


def task_seed(global_seed: int, fold: int, method: str) -> int:
    ss = np.random.SeedSequence([global_seed, fold, METHODS.index(method)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _run_task(args):
    dataset, train_idx, test_idx, method, params, base, seed = args
    train, test = dataset.subset(train_idx), dataset.subset(test_idx)
    t0 = time.perf_counter()
    model = fit_method(method, train, params, replace(base, seed=seed), seed)
    t1 = time.perf_counter()
    pred = model.predict(test.features)
    t2 = time.perf_counter()
    return evaluate(test.labels, pred, t1 - t0, t2 - t1)


def _splits(config: ExperimentConfig, n: int):
    if config.test_fraction is not None:
        perm = make_rng(config.seed).permutation(n)
        n_test = int(round(config.test_fraction * n))
        if not 0 < n_test < n:
            raise ConfigurationError("test_fraction leaves an empty train or test set")
        return [(np.sort(perm[n_test:]), np.sort(perm[:n_test]))]
    plan = kfold_split(n, config.folds, config.seed)
    return [(plan.train_indices(f), plan.test_indices(f)) for f in range(plan.k)]


def run_experiment(config: ExperimentConfig) -> list[dict]:
    """Train and score every configured method on every fold.

    Returns one record per method with fold means (``hamming``, ``exact``,
    ``jaccard``, ``train_s``, ``test_s``), their standard deviations
    (``*_std``) and the per-fold scores. Results do not depend on ``workers``.
    """
    config = config.validate()
    dataset = materialize_dataset(config)
    splits = _splits(config, dataset.n)
    base = SgdConfig(config.epochs, config.learning_rate, config.l2, 0)
    tasks, keys = [], []
    for method in config.methods:
        for fold, (tr, te) in enumerate(splits):
            seed = task_seed(config.seed, fold, method)
            tasks.append((dataset, tr, te, method, config.method_params[method], base, seed))
            keys.append(method)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            reports = list(pool.map(_run_task, tasks))
    else:
        reports = [_run_task(t) for t in tasks]
    rows = []
    for method in config.methods:
        rs = [r for k, r in zip(keys, reports) if k == method]
        cols = {
            "hamming": [r.hamming for r in rs],
            "exact": [r.exact_match for r in rs],
            "jaccard": [r.jaccard_accuracy for r in rs],
            "train_s": [r.train_seconds if config.timing else 0.0 for r in rs],
            "test_s": [r.test_seconds if config.timing else 0.0 for r in rs],
        }
        row = {"dataset": config.dataset_name, "method": method, "folds": len(rs)}
        for k, v in cols.items():
            row[k] = float(np.mean(v))
            row[f"{k}_std"] = float(np.std(v))
        row["fold_scores"] = {k: cols[k] for k in ("hamming", "exact", "jaccard")}
        rows.append(row)
    return rows


def _fmt(key, value):
    return f"{value:.3f}" if key.endswith("_s") else f"{value:.6f}"


def format_rows(rows, fmt: str = "csv") -> str:
    if fmt == "json":
        out = []
        for r in rows:
            rec = {}
            for k, v in r.items():
                if isinstance(v, float):
                    rec[k] = round(v, 3) if k.endswith("_s") or k.endswith("_s_std") else v
                else:
                    rec[k] = v
            out.append(rec)
        return json.dumps(out, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_FIELDS)
    for r in rows:
        writer.writerow([r["dataset"], r["method"]] + [_fmt(k, r[k]) for k in REPORT_FIELDS[2:]])
    return buf.getvalue()


def summary_table(rows) -> str:
    head = ["dataset", "method", "hamming", "exact", "jaccard", "train_s", "test_s"]
    lines = ["  ".join(f"{h:>17}" if i > 1 else f"{h:<12}" for i, h in enumerate(head))]
    for r in rows:
        cells = [f"{r['dataset']:<12}", f"{r['method']:<12}"]
        cells += [f"{r[k]:.4f}±{r[k + '_std']:.4f}".rjust(17) for k in ("hamming", "exact", "jaccard")]
        cells += [f"{r[k]:>17.3f}" for k in ("train_s", "test_s")]
        lines.append("  ".join(cells))
    return "\n".join(lines)


def read_report(path) -> list[dict]:
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("["):
        return json.loads(text)
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append({k: (v if k in ("dataset", "method") else float(v)) for k, v in rec.items()})
    return rows


RANK_METRICS = (("hamming", True), ("exact", True), ("jaccard", True), ("train_s", False), ("test_s", False))


def rank_report(paths, q_p: Optional[float] = None) -> dict:
    """Average ranks per metric over datasets where every method has a result,
    plus the Nemenyi critical distance when ``q_p`` is given."""
    rows = [r for p in paths for r in read_report(p)]
    if not rows:
        raise ConfigurationError("no report rows to rank")
    methods = list(dict.fromkeys(r["method"] for r in rows))
    datasets = list(dict.fromkeys(r["dataset"] for r in rows))
    table = {(r["dataset"], r["method"]): r for r in rows}
    complete = [d for d in datasets if all((d, m) in table for m in methods)]
    if not complete:
        raise ConfigurationError("no dataset has results for every method")
    out = {"methods": methods, "datasets": complete, "ranks": {}, "cd": None}
    for metric, higher in RANK_METRICS:
        scores = np.array([[table[(d, m)][metric] for d in complete] for m in methods])
        out["ranks"][metric] = dict(zip(methods, (float(v) for v in average_ranks(scores, higher))))
    if q_p is not None and len(methods) >= 2:
        out["cd"] = nemenyi_cd(len(methods), len(complete), q_p)
    return out


def format_rank_report(result: dict, fmt: str = "csv") -> str:
    if fmt == "json":
        return json.dumps(result, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    metrics = [m for m, _ in RANK_METRICS]
    writer.writerow(["method"] + metrics + ["cd"])
    cd = "" if result["cd"] is None else f"{result['cd']:.6f}"
    for m in result["methods"]:
        writer.writerow([m] + [f"{result['ranks'][k][m]:.4f}" for k in metrics] + [cd])
    return buf.getvalue()
