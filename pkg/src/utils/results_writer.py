import logging
import threading
from pathlib import Path
from typing import List, Dict, Any, Iterable, Optional

import numpy as np
import pandas as pd

from ..data.models import BenchmarkRecord, CSV_COLUMNS

RESULTS_STEM = "results"
SUMMARY_FILE = "summary.csv"
NOISY_PSNR_FILE = "noisy_psnr.csv"
SUPPORTED_FORMATS = ("csv", "json")


class ResultsWriter:
    """
    Serialized appender for benchmark records.

    Every append rewrites the record files under a lock, so the files on
    disk always hold every record appended so far.
    """

    def __init__(self, out_dir: str, formats: Iterable[str] = SUPPORTED_FORMATS):
        """
        Initialize the writer.

        Args:
            out_dir: Output directory
            formats: Any of 'csv', 'json'
        """
        self.out_dir = Path(out_dir)
        self.formats = [f for f in formats if f in SUPPORTED_FORMATS]
        self.records: List[BenchmarkRecord] = []
        self._lock = threading.Lock()
        self.logger = logging.getLogger(f"{__name__}.ResultsWriter")

    @property
    def csv_path(self) -> Path:
        return self.out_dir / f"{RESULTS_STEM}.csv"

    @property
    def json_path(self) -> Path:
        return self.out_dir / f"{RESULTS_STEM}.json"

    def to_dataframe(self) -> pd.DataFrame:
        """Records as a frame with exactly CSV_COLUMNS; t0 stays integral next to LASSO rows."""
        frame = pd.DataFrame([r.to_row() for r in self.records], columns=CSV_COLUMNS)
        frame['t0'] = frame['t0'].astype("Int64")
        return frame

    def _flush(self) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        df = self.to_dataframe()
        if "csv" in self.formats:
            df.to_csv(self.csv_path, index=False)
        if "json" in self.formats:
            df.to_json(self.json_path, orient='records', indent=2)

    def open(self) -> None:
        """Write empty record files with the header."""
        with self._lock:
            self._flush()

    def append(self, record: BenchmarkRecord) -> None:
        """Add one record and rewrite the record files."""
        with self._lock:
            self.records.append(record)
            self._flush()
        self.logger.debug(f"Recorded {record.image} sigma={record.sigma} coder={record.coder}")

    def write_table(self, rows: List[Dict[str, Any]], file_name: str,
                    columns: Optional[List[str]] = None) -> Path:
        """Write an auxiliary CSV table (e.g. a sparsity sweep)."""
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / file_name
        frame = pd.DataFrame(rows, columns=columns)
        frame.replace({np.inf: "inf", -np.inf: "-inf"}).to_csv(path, index=False)
        return path

    def summary(self) -> pd.DataFrame:
        """
        Per (σ, coder) averages over images plus the per-image PDAS − OMP
        PSNR difference at each σ.
        """
        df = self.to_dataframe()
        if df.empty:
            return pd.DataFrame(columns=['image', 'sigma', 'coder', 'images', 'psnr_db', 'ssim', 'seconds'])

        df['psnr_db'] = pd.to_numeric(df['psnr_db'].replace({'inf': np.inf}), errors='coerce')
        averages = (
            df.groupby(['sigma', 'coder'], sort=True)
            .agg(images=('image', 'count'), psnr_db=('psnr_db', 'mean'),
                 ssim=('ssim', 'mean'), seconds=('seconds', 'mean'))
            .reset_index()
        )
        averages['image'] = 'Average'

        coders = set(df['coder'])
        if {'pdas', 'omp'} <= coders:
            wide = df.pivot_table(index=['image', 'sigma'], columns='coder', values='psnr_db', aggfunc='mean')
            difference = (wide['pdas'] - wide['omp']).rename('psnr_gain_db').reset_index()
            difference['coder'] = 'pdas-omp'
            averages = pd.concat([averages, difference], ignore_index=True, sort=False)
        leading = ['image', 'sigma', 'coder']
        return averages[leading + [c for c in averages.columns if c not in leading]]

    def write_summary(self) -> Path:
        """Write summary.csv."""
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / SUMMARY_FILE
        self.summary().replace({np.inf: "inf", -np.inf: "-inf"}).to_csv(path, index=False)
        return path

    def write_noisy_psnr(self, rows: List[Dict[str, Any]]) -> Path:
        """Write noisy_psnr.csv: PSNR of each noisy input against its clean image."""
        return self.write_table(rows, NOISY_PSNR_FILE, columns=['image', 'sigma', 'noisy_psnr_db'])
