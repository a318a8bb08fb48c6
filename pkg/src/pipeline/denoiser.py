import logging
from dataclasses import replace
from typing import Optional, Tuple, List, Dict, Any

import numpy as np
from tqdm import tqdm

from .patches import extract_patches, sample_training_patches, reconstruct_from_patches
from ..coders.batch import encode_patches
from ..coders.factory.coder_factory import CoderFactory
from ..config.coder_configs import CoderType, LassoConfig, lambda_grid
from ..config.settings import DenoiseConfig
from ..data.models import Dictionary, GrayImage, PatchSet, DenoiseReport, CoderStats
from ..learning.ksvd import KsvdTrainer
from ..metrics.quality import psnr, ssim
from ..utils.errors import require
from ..utils.logger import StageLogger

# Patches coded per batch during reconstruction; bounds the dense K×batch code matrix
CODING_BLOCK = 16384


class DenoisePipeline:
    """
    Per-image denoiser: learns a dictionary on a sample of the noisy
    image's own patches, codes every overlapping patch and averages the
    estimates back into the image.
    """

    def __init__(self, config: DenoiseConfig, label: str = "image", progress: bool = False):
        """
        Initialize the pipeline.

        Args:
            config: Run configuration
            label: Run label used in log lines
            progress: Show a progress bar while coding
        """
        config.validate()
        self.config = config
        self.label = label
        self.progress = progress
        self.logger = logging.getLogger(f"{__name__}.DenoisePipeline")

    def train_dictionary(self, patch_set: PatchSet):
        """Sample training patches and run K-SVD on them."""
        config = self.config
        count = min(config.train_patches, patch_set.count)
        if count < config.train_patches:
            self.logger.warning(
                f"{self.label}: only {patch_set.count} patches available, "
                f"training on {count} instead of {config.train_patches}"
            )
        training = sample_training_patches(patch_set, count, seed=config.seed)
        return KsvdTrainer(config.train).train(training, progress=self.progress)

    def code_patches(self, signals: np.ndarray, dictionary: Dictionary) -> Tuple[np.ndarray, CoderStats]:
        """Code all signals in blocks and return their reconstructions D·x."""
        coder = CoderFactory.create_coder(self.config.coder, self.config.coder_config)
        estimates = np.empty_like(signals)
        parts: List[CoderStats] = []

        starts = range(0, signals.shape[1], CODING_BLOCK)
        if self.progress:
            starts = tqdm(starts, desc=f"{coder.name} coding", unit="block")
        for start in starts:
            stop = min(start + CODING_BLOCK, signals.shape[1])
            codes, stats = encode_patches(
                coder, signals[:, start:stop], dictionary, threads=self.config.threads, offset=start
            )
            estimates[:, start:stop] = dictionary.atoms @ codes
            parts.append(stats)
        return estimates, CoderStats.merge(parts)

    def run(
        self,
        noisy: GrayImage,
        clean: Optional[GrayImage] = None,
        dictionary: Optional[Dictionary] = None
    ) -> Tuple[GrayImage, DenoiseReport, Dictionary]:
        """
        Denoise one image.

        Args:
            noisy: Noisy input
            clean: Ground truth; when given the report carries PSNR and SSIM
            dictionary: Pretrained dictionary (skips training)

        Returns:
            Denoised image, run report and the dictionary used
        """
        config = self.config
        timings: Dict[str, float] = {}

        patch_set = extract_patches(noisy, config.patch_edge, config.stride)
        signals = np.array(patch_set.patches)
        means = None
        if config.remove_mean:
            means = signals.mean(axis=0)
            signals -= means

        train_report = None
        stage = StageLogger(self.label, "train")
        if dictionary is None:
            stage.log_start(patches=patch_set.count, atoms=config.train.num_atoms)
            dictionary, train_report = self.train_dictionary(patch_set.with_patches(signals))
            stage.log_success("Dictionary trained", iterations=len(train_report.iterations),
                              final_error=f"{train_report.objectives[-1]:.6g}")
            timings['train'] = stage.log_completion()['duration_seconds']
        else:
            require(dictionary.n == patch_set.n,
                    f"Dictionary atoms have length {dictionary.n}, patches have {patch_set.n} pixels")
            self.logger.info(f"{self.label}: using the given {dictionary.n}x{dictionary.num_atoms} dictionary")
            timings['train'] = 0.0

        stage = StageLogger(self.label, "code")
        stage.log_start(patches=patch_set.count, coder=config.coder.value)
        estimates, coding = self.code_patches(signals, dictionary)
        stage.log_success("Patches coded", mean_iterations=f"{coding.mean_iterations:.2f}")
        if coding.converged_fraction < 1.0:
            stage.log_warning("Some patches hit the iteration cap",
                              converged_fraction=f"{coding.converged_fraction:.4f}")
        timings['code'] = stage.log_completion()['duration_seconds']

        if means is not None:
            estimates += means

        stage = StageLogger(self.label, "reconstruct")
        stage.log_start(blend=f"{config.blend_weight:.4g}")
        denoised = reconstruct_from_patches(noisy, patch_set.with_patches(estimates), config.blend_weight)
        timings['reconstruct'] = stage.log_completion()['duration_seconds']

        report = DenoiseReport(
            config=config.to_dict(),
            train=train_report,
            coding=coding,
            timings=timings,
            blend=config.blend_weight,
            lam=config.coder_config.lam if isinstance(config.coder_config, LassoConfig) else None,
        )
        if clean is not None:
            report.psnr_db = psnr(denoised, clean)
            report.ssim = ssim(denoised, clean)
            self.logger.info(f"{self.label}: PSNR {report.psnr_db:.4f} dB, SSIM {report.ssim:.6f}")
        return denoised, report, dictionary


def denoise(
    noisy: GrayImage,
    config: DenoiseConfig,
    clean: Optional[GrayImage] = None,
    label: str = "image"
) -> Tuple[GrayImage, DenoiseReport]:
    """Denoise one image with a dictionary trained on its own patches."""
    denoised, report, _ = DenoisePipeline(config, label=label).run(noisy, clean=clean)
    return denoised, report


def calibrate_lambda(
    clean: GrayImage,
    noisy: GrayImage,
    config: DenoiseConfig,
    grid: Optional[List[float]] = None,
    label: str = "calibration"
) -> Tuple[float, List[Dict[str, Any]]]:
    """
    Pick the LASSO penalty from {2^k·σ} that maximizes PSNR on a calibration image.

    Args:
        clean: Calibration image
        noisy: Its noisy version
        config: Base configuration (its coder settings are replaced)
        grid: Candidate penalties (defaults to the 2^k·σ grid)
        label: Run label

    Returns:
        Best λ (the first one on ties) and one row per candidate
    """
    logger = logging.getLogger(f"{__name__}.calibrate_lambda")
    candidates = grid if grid is not None else lambda_grid(config.sigma)
    rows = []
    best_lam, best_psnr = None, -np.inf
    for lam in candidates:
        coder_config = LassoConfig(lam=lam)
        train = replace(config.train, coder=CoderType.LASSO, coder_config=coder_config)
        candidate = replace(config, coder=CoderType.LASSO, coder_config=coder_config, train=train)
        _, report = denoise(noisy, candidate, clean=clean, label=f"{label}/lambda={lam:g}")
        rows.append({'sigma': config.sigma, 'lambda': lam, 'psnr_db': report.psnr_db})
        if report.psnr_db > best_psnr:
            best_lam, best_psnr = lam, report.psnr_db
    logger.info(f"Calibrated lambda={best_lam:g} at sigma={config.sigma:g} (PSNR {best_psnr:.4f} dB)")
    return best_lam, rows
