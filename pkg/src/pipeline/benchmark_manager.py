import logging
import time
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Any, Optional, Tuple

import numpy as np

from .denoiser import DenoisePipeline, calibrate_lambda
from .noise import add_gaussian_noise
from ..config.coder_configs import CoderType, PdasConfig
from ..config.settings import RunSettings
from ..data.models import GrayImage, NoiseSpec, BenchmarkRecord, Dictionary
from ..metrics.quality import psnr
from ..utils.dictionary_io import save_dictionary, load_dictionary
from ..utils.errors import InvalidArgumentError
from ..utils.image_io import read_image, read_noisy, write_image, write_pgm
from ..utils.results_writer import ResultsWriter


@dataclass(frozen=True)
class BenchmarkJob:
    """One (image, σ, coder) cell."""
    image_path: str
    sigma: float
    coder: CoderType

    @property
    def image_name(self) -> str:
        return Path(self.image_path).stem

    @property
    def label(self) -> str:
        return f"{self.image_name}/sigma={self.sigma:g}/{self.coder.value}"

    @property
    def stem(self) -> str:
        return f"{self.image_name}_sigma{self.sigma:g}_{self.coder.value}"


class BenchmarkManager:
    """
    Runs the image × σ × coder grid of a run spec, records one row per
    successful job and keeps going past failed jobs.
    """

    def __init__(self, settings: RunSettings, writer: Optional[ResultsWriter] = None, progress: bool = False):
        """
        Initialize the benchmark manager.

        Args:
            settings: Run specification
            writer: Results writer (defaults to one on settings.out_dir)
            progress: Show progress bars while coding
        """
        settings.validate()
        self.settings = settings
        self.writer = writer or ResultsWriter(settings.out_dir, settings.formats)
        self.progress = progress
        self.logger = logging.getLogger(f"{__name__}.BenchmarkManager")

        self.out_dir = Path(settings.out_dir)
        self._clean: Dict[str, GrayImage] = {}
        self._noisy: Dict[Tuple[str, float], GrayImage] = {}
        self._lambdas: Dict[float, float] = {}
        self._dictionaries: Dict[str, Dictionary] = {}
        self.failures: List[Dict[str, Any]] = []
        self.noisy_psnr: List[Dict[str, Any]] = []
        self.calibration_rows: List[Dict[str, Any]] = []

    def jobs(self) -> List[BenchmarkJob]:
        """All jobs in image, σ, coder order."""
        return [
            BenchmarkJob(image, float(sigma), CoderType(coder))
            for image in self.settings.inputs
            for sigma in self.settings.sigmas
            for coder in self.settings.coders
        ]

    def clean_image(self, path: str) -> GrayImage:
        if path not in self._clean:
            self._clean[path] = read_image(path)
        return self._clean[path]

    @staticmethod
    def saved_file(location: str, name: str, suffixes: Tuple[str, ...]) -> Path:
        """
        File to resume from: ``location`` itself, or ``name`` with the first
        existing suffix inside the directory ``location``.
        """
        path = Path(location)
        if not path.is_dir():
            return path
        for suffix in suffixes:
            candidate = path / f"{name}{suffix}"
            if candidate.exists():
                return candidate
        raise InvalidArgumentError(f"No saved file for '{name}' under {path}")

    def noisy_image(self, path: str, sigma: float) -> GrayImage:
        """
        Noisy version of an input; every coder at the same σ sees the same noise.

        With ``settings.noisy`` the saved noisy image is loaded instead of drawing new noise.
        """
        key = (path, sigma)
        if key not in self._noisy:
            clean = self.clean_image(path)
            stem = f"{Path(path).stem}_sigma{sigma:g}"
            if self.settings.noisy is not None:
                source = self.saved_file(self.settings.noisy, stem, (".npy", ".pgm", ".png"))
                noisy = read_noisy(source)
                if noisy.shape != clean.shape:
                    raise InvalidArgumentError(
                        f"Noisy image {source} is {noisy.width}x{noisy.height}, "
                        f"expected {clean.width}x{clean.height}"
                    )
                self.logger.info(f"Loaded noisy image for {stem} from {source}")
            else:
                noisy = add_gaussian_noise(clean, NoiseSpec(sigma, self.settings.seed))
                if self.settings.save_noisy:
                    noisy_dir = self.out_dir / "noisy"
                    write_pgm(noisy, noisy_dir / f"{stem}.pgm")
                    np.save(noisy_dir / f"{stem}.npy", noisy.pixels)
            self._noisy[key] = noisy
            self.noisy_psnr.append({
                'image': Path(path).stem, 'sigma': sigma, 'noisy_psnr_db': psnr(noisy, clean)
            })
        return self._noisy[key]

    def saved_dictionary(self, job: BenchmarkJob) -> Optional[Dictionary]:
        """Dictionary from ``settings.dictionary`` for this job, or None to train one."""
        if self.settings.dictionary is None:
            return None
        source = self.saved_file(self.settings.dictionary, job.stem, (".csv",))
        key = str(source)
        if key not in self._dictionaries:
            self._dictionaries[key] = load_dictionary(source)
            self.logger.info(f"Loaded dictionary for {job.label} from {source}")
        return self._dictionaries[key]

    def resolve_lambda(self, sigma: float) -> Optional[float]:
        """Explicit λ, or the calibrated one for this σ."""
        if self.settings.lam is not None:
            return self.settings.lam
        if sigma not in self._lambdas:
            calibration = self.settings.calibration_image or self.settings.inputs[0]
            clean = self.clean_image(calibration)
            noisy = self.noisy_image(calibration, sigma)
            config = self.settings.denoise_config(CoderType.LASSO, sigma, lam=sigma)
            best, rows = calibrate_lambda(clean, noisy, config, label=f"{Path(calibration).stem}/calibrate")
            self._lambdas[sigma] = best
            self.calibration_rows.extend(rows)
        return self._lambdas[sigma]

    def run_job(self, job: BenchmarkJob) -> Dict[str, Any]:
        """
        Run one job and append its record.

        Returns:
            Status dictionary ('success' with the record, or 'failed' with the error)
        """
        try:
            clean = self.clean_image(job.image_path)
            noisy = self.noisy_image(job.image_path, job.sigma)
            lam = self.resolve_lambda(job.sigma) if job.coder is CoderType.LASSO else None
            saved = self.saved_dictionary(job)

            # Job time excludes λ calibration and file loading
            started = time.perf_counter()
            config = self.settings.denoise_config(job.coder, job.sigma, lam=lam)
            pipeline = DenoisePipeline(config, label=job.label, progress=self.progress)
            denoised, report, dictionary = pipeline.run(noisy, clean=clean, dictionary=saved)
            seconds = time.perf_counter() - started

            if self.settings.emit_images:
                write_image(denoised, self.out_dir / "images" / f"{job.stem}.{self.settings.image_format}")
            if self.settings.save_dictionary:
                save_dictionary(dictionary, self.out_dir / "dictionaries" / f"{job.stem}.csv")
            reports_dir = self.out_dir / "reports"
            reports_dir.mkdir(parents=True, exist_ok=True)
            (reports_dir / f"{job.stem}.json").write_text(report.to_json(), encoding='utf-8')

            record = BenchmarkRecord(
                image=job.image_name,
                sigma=job.sigma,
                coder=job.coder.value,
                t0=config.coder_config.sparsity if job.coder is not CoderType.LASSO else None,
                lam=report.lam,
                psnr_db=report.psnr_db,
                ssim=report.ssim,
                seconds=seconds,
                converged_frac=report.coding.converged_fraction,
                seed=self.settings.seed,
            )
            self.writer.append(record)
            return {'job': job.label, 'status': 'success', 'record': record}

        except Exception as e:
            error_msg = f"Job '{job.label}' failed: {str(e)}"
            self.logger.error(error_msg)
            failure = {
                'job': job.label,
                'status': 'failed',
                'error': str(e),
                'timestamp': datetime.now().isoformat()
            }
            self.failures.append(failure)
            return failure

    def run_all(self) -> Dict[str, Any]:
        """
        Run every job of the spec.

        Returns:
            Summary with per-job results and the failure list
        """
        self.writer.open()
        jobs = self.jobs()
        self.logger.info(f"Running {len(jobs)} jobs")
        results = [self.run_job(job) for job in jobs]

        if self.noisy_psnr:
            self.writer.write_noisy_psnr(self.noisy_psnr)
        if self.calibration_rows:
            self.writer.write_table(self.calibration_rows, "lambda_calibration.csv")

        succeeded = sum(1 for r in results if r['status'] == 'success')
        return {
            'jobs': len(jobs),
            'succeeded': succeeded,
            'failed': len(jobs) - succeeded,
            'results': results,
            'failures': list(self.failures),
        }

    def sweep_sparsity(self, image_path: str, t0_values: List[int]) -> Dict[str, Any]:
        """
        PDAS PSNR over a grid of sparsity levels at every σ of the spec.

        Args:
            image_path: Image to sweep on
            t0_values: Sparsity levels to try

        Returns:
            Rows of (sigma, t0, psnr_db), the best T₀ per σ and any failures
        """
        name = Path(image_path).stem
        rows: List[Dict[str, Any]] = []
        best: Dict[float, int] = {}
        for sigma in self.settings.sigmas:
            sigma = float(sigma)
            best_psnr = -np.inf
            for t0 in t0_values:
                label = f"{name}/sigma={sigma:g}/t0={t0}"
                try:
                    clean = self.clean_image(image_path)
                    noisy = self.noisy_image(image_path, sigma)
                    config = self.settings.denoise_config(CoderType.PDAS, sigma)
                    config.coder_config = PdasConfig(sparsity=t0, seed=self.settings.seed)
                    config.train.coder_config = config.coder_config
                    _, report, _ = DenoisePipeline(config, label=label, progress=self.progress).run(
                        noisy, clean=clean
                    )
                except Exception as e:
                    self.logger.error(f"Sweep point '{label}' failed: {str(e)}")
                    self.failures.append({
                        'job': label, 'status': 'failed', 'error': str(e),
                        'timestamp': datetime.now().isoformat()
                    })
                    continue
                rows.append({'image': name, 'sigma': sigma, 't0': t0, 'psnr_db': report.psnr_db})
                if report.psnr_db > best_psnr:
                    best_psnr, best[sigma] = report.psnr_db, t0
        return {'rows': rows, 'best': best, 'failures': list(self.failures)}
