#!/usr/bin/env python3

import math
import sys
from pathlib import Path
from typing import Dict, Any, Optional

import click
from rich.console import Console
from rich.table import Table
from rich import box

sys.path.insert(0, str(Path(__file__).parent))

from src.config.settings import RunSettings, GlobalSettings, SettingsManager, THREADS_ENV_VAR
from src.pipeline.benchmark_manager import BenchmarkManager
from src.metrics.quality import psnr, ssim
from src.utils.atlas import render_atlas
from src.utils.dictionary_io import load_dictionary
from src.utils.errors import SparseDenoiseError
from src.utils.image_io import read_image, write_image
from src.utils.logger import setup_logging
from src.data.models import format_metric

console = Console()

BENCHMARK_SIGMAS = (15.0, 20.0, 25.0, 50.0, 75.0, 100.0)
BENCHMARK_CODERS = ("pdas", "omp")


def run_options(function):
    """Options shared by the commands that run denoising jobs."""
    options = [
        click.option('--input', '-i', 'inputs', multiple=True, help='Input image (PGM or PNG); repeatable'),
        click.option('--sigma', '-s', 'sigmas', multiple=True, type=float, help='Noise level; repeatable'),
        click.option('--coder', '-c', 'coders', multiple=True,
                     type=click.Choice(['pdas', 'omp', 'lasso']), help='Sparse coder; repeatable'),
        click.option('--t0', type=int, default=None, help='Sparsity level (default: noise-level schedule)'),
        click.option('--lambda', 'lam', type=float, default=None,
                     help='LASSO penalty (default: calibrated per noise level)'),
        click.option('--seed', type=int, default=None, help='Random seed'),
        click.option('--out-dir', '-o', default=None, help='Output directory'),
        click.option('--format', '-f', 'formats', multiple=True,
                     type=click.Choice(['csv', 'json']), help='Results format; repeatable'),
        click.option('--image-format', type=click.Choice(['pgm', 'png']), default=None,
                     help='Format of the denoised images'),
        click.option('--threads', '-t', type=int, default=None, envvar=THREADS_ENV_VAR,
                     help='Worker threads for patch coding'),
        click.option('--config', 'config_path', type=click.Path(), default=None,
                     help='YAML or JSON run spec; flags override its values'),
        click.option('--run', 'run_name', default=None, help='Named entry under "runs:" in the --config file'),
        click.option('--ksvd-iterations', type=int, default=None, help='K-SVD iterations'),
        click.option('--atoms', 'num_atoms', type=int, default=None, help='Dictionary size K'),
        click.option('--train-patches', type=int, default=None, help='Training patches per image'),
        click.option('--stride', type=int, default=None, help='Patch stride'),
        click.option('--blend', type=float, default=None, help='Reconstruction blend weight (default 30/sigma)'),
        click.option('--save-noisy', is_flag=True, default=None, help='Also write the noisy inputs'),
        click.option('--save-dictionary', is_flag=True, default=None, help='Also write the trained dictionaries'),
        click.option('--dictionary', 'dictionary', type=click.Path(exists=True), default=None,
                     help='Saved dictionary CSV, or a dictionaries/ directory of a previous run (skips training)'),
        click.option('--noisy', 'noisy', type=click.Path(exists=True), default=None,
                     help='Saved noisy image (.npy, PGM or PNG), or a noisy/ directory of a previous run'),
        click.option('--progress', is_flag=True, help='Show coding progress bars'),
    ]
    for option in reversed(options):
        function = option(function)
    return function


def _settings(config_path: Optional[str], run_name: Optional[str], overrides: Dict[str, Any],
              defaults: Dict[str, Any] = None) -> RunSettings:
    """Run spec from the optional file, the command defaults and the flags, in that order."""
    if config_path or run_name:
        base = SettingsManager().load_run_settings(config_path, name=run_name)
    else:
        base = RunSettings(threads=GlobalSettings().threads).merged(defaults or {})
    return base.merged(overrides)


def _overrides(**kwargs) -> Dict[str, Any]:
    # click hands back None for unset scalars, False for unset flags and () for unset multiples
    overrides = dict(kwargs)
    for flag in ('save_noisy', 'save_dictionary'):
        if not overrides.get(flag):
            overrides[flag] = None
    return overrides


def _format_db(value) -> str:
    value = format_metric(value)
    return value if isinstance(value, str) else f"{value:.4f}"


def _print_records(summary: Dict[str, Any]) -> None:
    records = [r['record'] for r in summary['results'] if r['status'] == 'success']
    if records:
        table = Table(title=f"📊 Denoising Results ({len(records)} jobs)",
                      box=box.ROUNDED,
                      show_header=True,
                      header_style="bold blue")
        for header in ("Image", "Sigma", "Coder", "T0", "Lambda", "PSNR (dB)", "SSIM", "Seconds", "Converged"):
            table.add_column(header)
        for r in records:
            table.add_row(r.image, f"{r.sigma:g}", r.coder,
                          "" if r.t0 is None else str(r.t0),
                          "" if r.lam is None else f"{r.lam:g}",
                          _format_db(r.psnr_db), f"{r.ssim:.4f}", f"{r.seconds:.1f}",
                          f"{r.converged_frac:.3f}")
        console.print(table)

    for failure in summary['failures']:
        console.print(f"❌ {failure['job']}: {failure['error']}", style="red")


def _run(settings: RunSettings, progress: bool, write_summary: bool = False) -> None:
    if not settings.inputs:
        console.print("❌ No input images given (use --input or a run spec)", style="red")
        sys.exit(2)

    manager = BenchmarkManager(settings, progress=progress)
    summary = manager.run_all()
    if write_summary:
        path = manager.writer.write_summary()
        console.print(f"✅ Summary written to {path}", style="green")
    _print_records(summary)

    if summary['failed']:
        console.print(f"❌ {summary['failed']}/{summary['jobs']} jobs failed", style="red")
        sys.exit(1)
    console.print(f"✅ {summary['succeeded']} jobs completed; results in {settings.out_dir}", style="green")


@click.group()
@click.option('--log-level', default=None, help='Logging level (DEBUG, INFO, WARNING, ERROR)')
@click.option('--log-file', default=None, help='Also log to this file under logs/')
def cli(log_level, log_file):
    """Sparse Denoise CLI - K-SVD image denoising with PDAS, OMP and LASSO coders"""
    settings = GlobalSettings()
    setup_logging(level=log_level or settings.log_level, log_file=log_file or settings.log_file,
                  log_dir=settings.log_dir)


@cli.command()
@run_options
def denoise(inputs, sigmas, coders, t0, lam, seed, out_dir, formats, image_format, threads,
            config_path, run_name, ksvd_iterations, num_atoms, train_patches, stride, blend,
            save_noisy, save_dictionary, dictionary, noisy, progress):
    """Denoise images at each noise level with each coder"""
    try:
        settings = _settings(config_path, run_name, _overrides(
            inputs=inputs, sigmas=sigmas, coders=coders, t0=t0, lam=lam, seed=seed, out_dir=out_dir,
            formats=formats, image_format=image_format, threads=threads, ksvd_iterations=ksvd_iterations,
            num_atoms=num_atoms, train_patches=train_patches, stride=stride, blend=blend,
            save_noisy=save_noisy, save_dictionary=save_dictionary, dictionary=dictionary, noisy=noisy))
        settings.validate()
    except SparseDenoiseError as e:
        console.print(f"❌ Invalid run spec: {e}", style="red")
        sys.exit(2)
    _run(settings, progress)


@cli.command()
@run_options
def benchmark(inputs, sigmas, coders, t0, lam, seed, out_dir, formats, image_format, threads,
              config_path, run_name, ksvd_iterations, num_atoms, train_patches, stride, blend,
              save_noisy, save_dictionary, dictionary, noisy, progress):
    """Run the noise-level × coder grid and write per-level averages"""
    try:
        settings = _settings(
            config_path,
            run_name,
            _overrides(
                inputs=inputs, sigmas=sigmas, coders=coders, t0=t0, lam=lam, seed=seed, out_dir=out_dir,
                formats=formats, image_format=image_format, threads=threads,
                ksvd_iterations=ksvd_iterations, num_atoms=num_atoms, train_patches=train_patches,
                stride=stride, blend=blend, save_noisy=save_noisy, save_dictionary=save_dictionary,
                dictionary=dictionary, noisy=noisy),
            defaults={'sigmas': list(BENCHMARK_SIGMAS), 'coders': list(BENCHMARK_CODERS)},
        )
        settings.validate()
    except SparseDenoiseError as e:
        console.print(f"❌ Invalid run spec: {e}", style="red")
        sys.exit(2)
    _run(settings, progress, write_summary=True)


@cli.command(name='sweep-t0')
@click.option('--input', '-i', 'image', required=True, help='Image to sweep on')
@click.option('--sigma', '-s', 'sigmas', multiple=True, type=float, required=True, help='Noise level; repeatable')
@click.option('--t0-min', type=int, default=1, help='Smallest sparsity level')
@click.option('--t0-max', type=int, default=20, help='Largest sparsity level')
@click.option('--seed', type=int, default=0, help='Random seed')
@click.option('--out-dir', '-o', default='results', help='Output directory')
@click.option('--threads', '-t', type=int, default=None, envvar=THREADS_ENV_VAR, help='Worker threads')
@click.option('--ksvd-iterations', type=int, default=10, help='K-SVD iterations')
@click.option('--atoms', 'num_atoms', type=int, default=256, help='Dictionary size K')
@click.option('--train-patches', type=int, default=500, help='Training patches per image')
@click.option('--stride', type=int, default=1, help='Patch stride')
@click.option('--progress', is_flag=True, help='Show coding progress bars')
def sweep_t0(image, sigmas, t0_min, t0_max, seed, out_dir, threads, ksvd_iterations, num_atoms,
             train_patches, stride, progress):
    """PDAS PSNR versus sparsity level, with the best level per noise level"""
    patch_dimension = 64
    limit = min(patch_dimension, num_atoms)
    if not 1 <= t0_min <= t0_max <= limit:
        console.print(f"❌ Sparsity range must satisfy 1 <= t0-min <= t0-max <= {limit}", style="red")
        sys.exit(2)

    settings = RunSettings(inputs=[image], sigmas=list(sigmas), coders=['pdas'], seed=seed, out_dir=out_dir,
                           threads=threads or GlobalSettings().threads, ksvd_iterations=ksvd_iterations,
                           num_atoms=num_atoms, train_patches=train_patches, stride=stride)
    manager = BenchmarkManager(settings, progress=progress)
    result = manager.sweep_sparsity(image, list(range(t0_min, t0_max + 1)))

    path = manager.writer.write_table(result['rows'], "sweep_t0.csv", columns=['image', 'sigma', 't0', 'psnr_db'])
    best_rows = [{'sigma': s, 'best_t0': t} for s, t in result['best'].items()]
    manager.writer.write_table(best_rows, "sweep_t0_best.csv", columns=['sigma', 'best_t0'])

    table = Table(title="📈 Best sparsity level", box=box.ROUNDED, show_header=True, header_style="bold green")
    table.add_column("Sigma")
    table.add_column("Best T0")
    for row in best_rows:
        table.add_row(f"{row['sigma']:g}", str(row['best_t0']))
    console.print(table)

    for failure in result['failures']:
        console.print(f"❌ {failure['job']}: {failure['error']}", style="red")
    if result['failures']:
        sys.exit(1)
    console.print(f"✅ Sweep written to {path}", style="green")


@cli.command(name='export-dict')
@click.argument('dictionary_path', type=click.Path())
@click.argument('output', type=click.Path())
@click.option('--border', type=int, default=1, help='Frame width in pixels')
def export_dict(dictionary_path, output, border):
    """Render a dictionary (CSV or .npy) as a grayscale atlas image"""
    try:
        dictionary = load_dictionary(dictionary_path)
        atlas = render_atlas(dictionary, border=border)
        write_image(atlas, output)
    except (SparseDenoiseError, OSError) as e:
        console.print(f"❌ Export failed: {e}", style="red")
        sys.exit(1)
    console.print(f"✅ Wrote {atlas.width}x{atlas.height} atlas of {dictionary.num_atoms} atoms to {output}",
                  style="green")


def format_metrics_line(psnr_db: float, ssim_value: float) -> str:
    """'PSNR=<v> dB SSIM=<v>' with six decimals; an infinite PSNR prints as inf."""
    psnr_text = "inf" if math.isinf(psnr_db) else f"{psnr_db:.6f}"
    return f"PSNR={psnr_text} dB SSIM={ssim_value:.6f}"


@cli.command()
@click.argument('image_a', type=click.Path())
@click.argument('image_b', type=click.Path())
def metrics(image_a, image_b):
    """Print PSNR and SSIM between two images"""
    try:
        a, b = read_image(image_a), read_image(image_b)
        line = format_metrics_line(psnr(a, b), ssim(a, b))
    except (SparseDenoiseError, OSError) as e:
        console.print(f"❌ {e}", style="red")
        sys.exit(1)
    click.echo(line)


if __name__ == "__main__":
    cli()
