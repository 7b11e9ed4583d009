import time
import multiprocessing as mp
from typing import Callable, Iterable, List, Optional
from tqdm.auto import tqdm

from . import logger, progress_enabled

_cores = mp.cpu_count()


def MultiProcessPipeline(data_iterator: Iterable, funct: Callable, num_cores: Optional[int] = None, desc: str = 'Processing') -> List:
    """Map `funct` over `data_iterator` in worker processes.

    Results come back in input order (`imap`). `funct` must be picklable (module level).
    """
    items = list(data_iterator)
    num_cores = max(1, min(num_cores or _cores, len(items) or 1))
    start = time.time()
    out = []
    pbar = tqdm(total=len(items), desc=f'{desc} using {num_cores} Cores', disable=(not progress_enabled()))

    if num_cores == 1:
        results = map(funct, items)
        pool = None
    else:
        pool = mp.Pool(num_cores)
        results = pool.imap(funct, items)
    try:
        for res in results:
            pbar.update()
            out.append(res)
    finally:
        if pool is not None:
            pool.close()
            pool.join()
        pbar.close()

    end = time.time() - start
    if out:
        logger.info(f'Completed Processing {len(out)} Items in {end / 60:.2f} mins')
    return out
