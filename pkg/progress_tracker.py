"""
Progress Tracker Module
=======================
Progress tracking and ordered parallel execution for experiment cells
(one cell = one N, one theta, one residue class, one random trial).

Features:
- Ordered worker pool: results come back in input order whatever the
  completion order, so tables are deterministic
- tqdm progress bars on stderr (silent when stderr is not a terminal)
- Per-cell timing and error capture with a final report
- Default parallelism from the WWLAB_WORKERS environment variable
"""

import os
import sys
import time
import threading
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict
from typing import Any, Callable, Dict, List, Optional, Sequence

from tqdm import tqdm

from utils import setup_logger


WORKERS_ENV = 'WWLAB_WORKERS'


@dataclass
class CellResult:
    """Result of running a single experiment cell."""
    label: str
    status: str  # 'success', 'failed'
    processing_time: float
    error_message: Optional[str] = None


def default_workers() -> int:
    """Parallelism from WWLAB_WORKERS, defaulting to 1."""
    raw = os.environ.get(WORKERS_ENV, '1')
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


class ProgressTracker:
    """
    Progress tracker for experiment cells.

    Collects per-cell results under a lock and prints a final report to stderr.
    """

    def __init__(self, name: str = 'experiment'):
        """
        Initialize the progress tracker.

        Args:
            name: Label used in log lines and the final report
        """
        self.name = name
        self.logger = setup_logger('progress_tracker')
        self.start_time = time.time()
        self.results: List[CellResult] = []
        self.cells_successful = 0
        self.cells_failed = 0
        self._lock = threading.Lock()

    def record(self, result: CellResult) -> None:
        """Record the outcome of one cell."""
        with self._lock:
            self.results.append(result)
            if result.status == 'success':
                self.cells_successful += 1
            else:
                self.cells_failed += 1
                self.logger.error(f"{self.name}: cell {result.label} failed: {result.error_message}")

    def _format_time(self, seconds: float) -> str:
        """Format time duration in human-readable format."""
        if seconds < 60:
            return f"{seconds:.1f}s"
        if seconds < 3600:
            return f"{seconds / 60:.1f}m"
        return f"{seconds / 3600:.1f}h"

    def get_progress_summary(self) -> Dict[str, Any]:
        """Summary dictionary of the run so far."""
        with self._lock:
            return {
                'name': self.name,
                'cells': len(self.results),
                'successful': self.cells_successful,
                'failed': self.cells_failed,
                'elapsed': time.time() - self.start_time,
                'failures': [asdict(r) for r in self.results if r.status != 'success'],
            }

    def print_final_report(self, stream=None) -> None:
        """Print the final report (stderr by default, never the data stream)."""
        stream = stream or sys.stderr
        summary = self.get_progress_summary()
        print("=" * 60, file=stream)
        print(f"{self.name.upper()} REPORT", file=stream)
        print("=" * 60, file=stream)
        print(f"Cells: {summary['cells']}  successful: {summary['successful']}  "
              f"failed: {summary['failed']}", file=stream)
        print(f"Elapsed: {self._format_time(summary['elapsed'])}", file=stream)
        for failure in summary['failures'][:10]:
            print(f"  failed {failure['label']}: {failure['error_message']}", file=stream)
        print("=" * 60, file=stream)


def run_cells(fn: Callable[[Any], Any], cells: Sequence[Any], workers: int = 1,
              desc: Optional[str] = None, tracker: Optional[ProgressTracker] = None) -> List[Any]:
    """
    Run `fn` over `cells`, returning results in input order.

    Args:
        fn: Picklable callable (module-level function or functools.partial of one)
        cells: Inputs, one per cell
        workers: Process count; 1 runs inline
        desc: Progress bar label
        tracker: Optional tracker receiving per-cell results

    Returns:
        List of fn(cell) in the order of `cells`
    """
    cells = list(cells)
    results: List[Any] = []
    bar = tqdm(total=len(cells), desc=desc, disable=None, file=sys.stderr, leave=False)
    try:
        if workers <= 1 or len(cells) <= 1:
            for cell in cells:
                start = time.time()
                try:
                    results.append(fn(cell))
                except Exception as exc:
                    if tracker is not None:
                        tracker.record(CellResult(str(cell), 'failed', time.time() - start, str(exc)))
                    raise
                if tracker is not None:
                    tracker.record(CellResult(str(cell), 'success', time.time() - start))
                bar.update(1)
        else:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                start = time.time()
                for cell, value in zip(cells, executor.map(fn, cells)):
                    results.append(value)
                    if tracker is not None:
                        tracker.record(CellResult(str(cell), 'success', time.time() - start))
                    bar.update(1)
    finally:
        bar.close()
    return results
