"""netchrono command-line interface.

Subcommands: stats, features, train, predict, order, eval, augment, synth,
and the experiment group ``exp split|joint|augjoint|ratio|equiv``.  Experiment
subcommands write a JSON report, a flat CSV, and a PNG figure into the output
directory.  Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__, plots
from .cpnn import (
    CpnnConfig,
    build_pair_dataset,
    load_model,
    pairwise_matrix,
    save_model,
    train,
)
from .experiments import (
    ExperimentConfig,
    config_hash,
    run_augmented_joint,
    run_equivalence_sim,
    run_joint,
    run_ratio_sweep,
    run_split_matrix,
)
from .features import FEATURE_NAMES, edge_embeddings
from .netio import (
    ParseError,
    distinguishable_pairs,
    network_stats,
    normalized_positions,
    parse_edge_list,
    write_edge_list,
)
from .ordering import PairwiseMatrix, borda_scores, evaluate, order_from_scores
from .synthgen import SynthConfig, generate
from .topoevodiff import DiffusionConfig, generate_augmented


def _load_net(path: str):
    return parse_edge_list(Path(path).read_text())


def _write_json(path: Path, doc: dict):
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


@click.group()
@click.version_option(__version__)
def cli():
    """Reconstruct the generation order of a static network's edges."""


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
def stats(input_path):
    """Print dataset statistics (N, M, E_d, P_Ed, S) as JSON."""
    net = _load_net(input_path)
    click.echo(json.dumps(network_stats(net), sort_keys=True))


@cli.command()
@click.option("--model", "model_name", type=click.Choice(["ba", "pso", "fitness"]), default="ba")
@click.option("--n", default=100, show_default=True)
@click.option("--m", default=2, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--pso-fading", default=0.5, show_default=True)
@click.option("--pso-temperature", default=0.1, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def synth(model_name, n, m, seed, pso_fading, pso_temperature, out_path):
    """Generate a synthetic temporal network (BA, PSO, or Fitness model)."""
    cfg = SynthConfig(
        model=model_name, n=n, m=m, seed=seed, pso_fading=pso_fading,
        pso_temperature=pso_temperature,
    )
    Path(out_path).write_text(write_edge_list(generate(cfg)))
    click.echo(f"wrote {out_path}")


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--output", "output_path", required=True, type=click.Path())
def features(input_path, output_path):
    """Write the per-edge feature table plus a standardization sidecar."""
    net = _load_net(input_path)
    X, mean, std = edge_embeddings(net)
    with open(output_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["u", "v"] + [f"f{i+1}" for i in range(X.shape[1])])
        for (u, v, _), row in zip(net.edges, X):
            writer.writerow([net.node_ids[u], net.node_ids[v]] + [f"{x:.10g}" for x in row])
    sidecar = {
        "feature_names": list(FEATURE_NAMES),
        "mean": mean.tolist(),
        "std": std.tolist(),
    }
    _write_json(Path(output_path).with_suffix(".json"), sidecar)
    click.echo(f"wrote {output_path}")


@cli.command(name="train")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def train_cmd(config_path, out_path):
    """Train a comparator from a JSON config listing training networks."""
    doc = json.loads(Path(config_path).read_text())
    paths = doc.get("networks")
    if not paths:
        raise click.UsageError("config must list at least one network under 'networks'")
    cfg = CpnnConfig(
        lr=doc.get("lr", 1e-3),
        epochs=doc.get("epochs", 100),
        batch=doc.get("batch", 256),
        lam=doc.get("lambda", 1e-4),
        seed=doc.get("seed", 0),
        pair_cap=doc.get("pair_cap", 100_000),
    )
    datasets = []
    raws = []
    for path in paths:
        net = _load_net(path)
        X, mean, std = edge_embeddings(net)
        raws.append((mean, std))
        datasets.append(
            build_pair_dataset(net, X, seed=cfg.seed, pair_cap=cfg.pair_cap, network_id=path)
        )
    model, trace = train(datasets, cfg)
    # sidecar: mean of the per-network standardization statistics
    mean = np.mean([m for m, _ in raws], axis=0)
    std = np.mean([s for _, s in raws], axis=0)
    Path(out_path).write_text(save_model(model, mean, std))
    click.echo(f"final loss {trace[-1]:.6f}; wrote {out_path}")


def _save_matrix(P: np.ndarray, path: str):
    if path.endswith(".npy"):
        np.save(path, P)
    else:
        np.savetxt(path, P, delimiter=",")


def _load_matrix(path: str) -> np.ndarray:
    if path.endswith(".npy"):
        return np.load(path)
    return np.loadtxt(path, delimiter=",")


@cli.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--matrix-cap", default=20_000, show_default=True)
def predict(model_path, input_path, out_path, matrix_cap):
    """Emit the full pairwise before-probability matrix for a network."""
    model, _, _ = load_model(Path(model_path).read_text())
    net = _load_net(input_path)
    X, _, _ = edge_embeddings(net)
    P = pairwise_matrix(model, X, matrix_cap=matrix_cap)
    _save_matrix(P.P, out_path)
    click.echo(f"wrote {out_path} ({net.n_edges}x{net.n_edges})")


@cli.command()
@click.option("--matrix", "matrix_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def order(matrix_path, out_path):
    """Aggregate a pairwise matrix into a global order via Borda scoring."""
    P = PairwiseMatrix(_load_matrix(matrix_path))
    est = order_from_scores(borda_scores(P))
    rank_of = np.empty(est.ranking.size, dtype=int)
    rank_of[est.ranking] = np.arange(1, est.ranking.size + 1)
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["edge_id", "score", "rank", "alpha_hat"])
        for i in range(est.ranking.size):
            writer.writerow([i, f"{est.scores[i]:.10g}", rank_of[i], f"{est.alpha_hat[i]:.10g}"])
    click.echo(f"wrote {out_path}")


@cli.command(name="eval")
@click.option("--order", "order_path", required=True, type=click.Path(exists=True))
@click.option("--truth", "truth_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def eval_cmd(order_path, truth_path, out_path):
    """Score a reconstructed order against the true timestamps."""
    net = _load_net(truth_path)
    with open(order_path) as fh:
        rows = list(csv.DictReader(fh))
    alpha_hat = np.empty(len(rows))
    for row in rows:
        alpha_hat[int(row["edge_id"])] = float(row["alpha_hat"])
    truth = normalized_positions(net)
    result = evaluate(alpha_hat, truth)
    e_d, _ = distinguishable_pairs(net)
    report = {
        "accuracy": result["pairwise_accuracy"],
        "rmse": result["rmse"],
        "nrmse": result["nrmse"],
        "M": net.n_edges,
        "E_d": e_d,
    }
    _write_json(Path(out_path), report)
    click.echo(json.dumps(report, sort_keys=True))


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--count", default=10, show_default=True)
@click.option("--out-dir", "out_dir", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
@click.option("--epochs", default=200, show_default=True)
@click.option("--subsamples", default=100, show_default=True)
@click.option("--steps", default=300, show_default=True, help="diffusion steps T")
def augment(input_path, count, out_dir, seed, epochs, subsamples, steps):
    """Generate diffusion-augmented temporal networks for one source network."""
    net = _load_net(input_path)
    cfg = DiffusionConfig(T=steps, epochs=epochs, seed=seed, n_subsamples=subsamples)
    nets, _model = generate_augmented(net, count, cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for k, aug in enumerate(nets):
        (out / f"sample_{k}.tsv").write_text(write_edge_list(aug))
    manifest = {
        "source": str(input_path),
        "seed": seed,
        "count": count,
        "schedule": {"T": cfg.T, "beta_start": cfg.beta_start, "beta_end": cfg.beta_end},
        "denoiser_config": {
            "layers": cfg.layers,
            "hidden": cfg.hidden,
            "step_dim": cfg.step_dim,
            "cond_dim": cfg.cond_dim,
            "epochs": cfg.epochs,
            "lr": cfg.lr,
            "full_attention": cfg.full_attention,
            "n_subsamples": cfg.n_subsamples,
        },
    }
    _write_json(out / "manifest.json", manifest)
    click.echo(f"wrote {count} samples to {out_dir}")


@cli.group()
def exp():
    """Experiment protocols producing JSON + CSV reports and figures."""


def _exp_config(config_path: str) -> tuple[ExperimentConfig, dict]:
    doc = json.loads(Path(config_path).read_text())

    def load_group(key):
        group = doc.get(key, {})
        if isinstance(group, list):
            group = {Path(p).stem: p for p in group}
        return {name: _load_net(path) for name, path in group.items()}

    cpnn_doc = doc.get("cpnn", {})
    cfg = ExperimentConfig(
        training_networks=load_group("training_networks"),
        test_networks=load_group("test_networks"),
        cpnn=CpnnConfig(
            lr=cpnn_doc.get("lr", 1e-3),
            epochs=cpnn_doc.get("epochs", 100),
            batch=cpnn_doc.get("batch", 256),
            lam=cpnn_doc.get("lambda", 1e-4),
            pair_cap=cpnn_doc.get("pair_cap", 100_000),
        ),
        seeds=tuple(doc.get("seeds", [1, 2, 3, 4, 5])),
        eval_pair_cap=doc.get("eval_pair_cap", 50_000),
    )
    for src, aug_dir in doc.get("augmented", {}).items():
        cfg.augmented[src] = [
            parse_edge_list(p.read_text()) for p in sorted(Path(aug_dir).glob("sample_*.tsv"))
        ]
    return cfg, doc


def _emit_report(report: dict, doc: dict, out_dir: str, csv_rows_key: str, figure_fn):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report["config_hash"] = config_hash(doc)
    _write_json(out / "report.json", report)
    rows = report.get(csv_rows_key, [])
    with open(out / "report.csv", "w", newline="") as fh:
        if rows:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    figure_fn(out)
    click.echo(f"wrote report to {out_dir}")


@exp.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", "out_dir", required=True, type=click.Path())
def split(config_path, out_dir):
    """Per-network training matrix: every train x test accuracy."""
    cfg, doc = _exp_config(config_path)
    report = run_split_matrix(cfg)
    _emit_report(
        report, doc, out_dir, "cells",
        lambda out: plots.plot_matrix(report["matrix_mean"], str(out / "matrix.png")),
    )


@exp.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", "out_dir", required=True, type=click.Path())
def joint(config_path, out_dir):
    """One comparator trained jointly on all training networks."""
    cfg, doc = _exp_config(config_path)
    report = run_joint(cfg)
    _emit_report(
        report, doc, out_dir, "cells",
        lambda out: plots.plot_accuracy_bars(
            report["mean_accuracy"], str(out / "accuracy.png"), title="joint training"
        ),
    )


@exp.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", "out_dir", required=True, type=click.Path())
def augjoint(config_path, out_dir):
    """Joint training fused with deduplicated augmented pair data."""
    cfg, doc = _exp_config(config_path)
    report = run_augmented_joint(cfg)
    _emit_report(
        report, doc, out_dir, "cells",
        lambda out: plots.plot_accuracy_bars(
            report["mean_accuracy"], str(out / "accuracy.png"), title="augmented joint training"
        ),
    )


@exp.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--ratios", default="0.1,0.2,0.4,0.6,0.8", show_default=True)
@click.option("--seeds", default="1,2,3,4,5", show_default=True)
@click.option("--epochs", default=100, show_default=True)
@click.option("--out-dir", "out_dir", required=True, type=click.Path())
def ratio(input_path, ratios, seeds, epochs, out_dir):
    """Accuracy as a function of the fraction of edges with known order."""
    net = _load_net(input_path)
    ratio_list = [float(r) for r in ratios.split(",")]
    seed_list = tuple(int(s) for s in seeds.split(","))
    report = run_ratio_sweep(net, ratio_list, seed_list, CpnnConfig(epochs=epochs))
    doc = {"input": str(input_path), "ratios": ratio_list, "seeds": list(seed_list)}
    _emit_report(
        report, doc, out_dir, "rows",
        lambda out: plots.plot_ratio_curve(report["curve"], str(out / "curve.png")),
    )


@exp.command()
@click.option("--m", "m", default=500, show_default=True)
@click.option("--x-values", default="0.6,0.75,0.9", show_default=True)
@click.option("--seeds", default=",".join(str(s) for s in range(1, 21)), show_default=True)
@click.option("--out-dir", "out_dir", required=True, type=click.Path())
def equiv(m, x_values, seeds, out_dir):
    """Bernoulli-comparator simulation vs the closed-form error law."""
    xs = [float(x) for x in x_values.split(",")]
    seed_list = tuple(int(s) for s in seeds.split(","))
    report = run_equivalence_sim(m, xs, seed_list)
    doc = {"M": m, "x_values": xs, "seeds": list(seed_list)}
    _emit_report(
        report, doc, out_dir, "table",
        lambda out: plots.plot_equivalence(report["table"], str(out / "error.png")),
    )


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.Abort:
        return 2
    except click.ClickException as exc:
        exc.show()
        return 2
    except (ParseError, ValueError, OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except ArithmeticError as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
