"""Concurrent execution of sweep members in worker processes."""

import asyncio
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional

from config.settings import settings
from src.cli.config import RunConfig, parse_config
from src.utils.logging_config import get_logger

logger = get_logger(__name__)


def run_worker(config_json: str, out_dir: str) -> Dict[str, Any]:
    """Process entry point; errors come back as data since not every one pickles."""
    from src.cli.commands import execute_run

    try:
        summary = execute_run(parse_config(config_json), Path(out_dir))
        summary["success"] = True
        return summary
    except Exception as e:
        return {"success": False, "error": str(e), "directory": out_dir}


class SweepOrchestrator:
    """Runs independent configurations concurrently, one directory per member."""

    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max(1, max_workers or settings.els_threads)

    async def run_member(
        self,
        executor: ProcessPoolExecutor,
        semaphore: asyncio.Semaphore,
        index: int,
        config: RunConfig,
        out_dir: Path,
    ) -> Dict[str, Any]:
        directory = out_dir / f"run_{index:03d}"
        async with semaphore:
            logger.info(f"Sweep member {index}: starting in {directory}")
            loop = asyncio.get_running_loop()
            try:
                result = await loop.run_in_executor(
                    executor, run_worker, config.model_dump_json(), str(directory)
                )
            except Exception as e:
                logger.error(f"Sweep member {index} crashed: {e}")
                return {"success": False, "error": str(e), "directory": str(directory)}

        if result["success"]:
            logger.info(f"Sweep member {index}: done")
        else:
            logger.error(f"Sweep member {index} failed: {result['error']}")
        return result

    async def run_sweep(self, configs: List[RunConfig], out_dir: Path) -> List[Dict[str, Any]]:
        """Results come back in the order of ``configs``."""
        out_dir = Path(out_dir)
        semaphore = asyncio.Semaphore(self.max_workers)
        logger.info(f"Running {len(configs)} sweep members on {self.max_workers} workers")
        with ProcessPoolExecutor(max_workers=self.max_workers) as executor:
            tasks = [
                self.run_member(executor, semaphore, index, config, out_dir)
                for index, config in enumerate(configs)
            ]
            return list(await asyncio.gather(*tasks))
