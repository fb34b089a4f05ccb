import hashlib
import os
import sys
import multiprocessing as mp
import numpy as np

from loguru import logger


def build_logger_config(log_dir: str=None) -> dict:
    """
    The loguru configuration of the command line tools: coloured messages
    on stderr and JSON records in <log_dir>/dec2d.log.

    @param log_dir: [`str`] Defaults to $DEC2D_LOG_DIR, then 'logs'
    @return: [`dict`] Keyword arguments for `logger.configure`
    """
    if log_dir is None:
        log_dir = os.environ.get('DEC2D_LOG_DIR', 'logs')
    return {
        "handlers": [
            {"sink": sys.stderr, "colorize": True, "format":
                "<green>{time}</green> <level>{message}</level>"},
            {"sink": os.path.join(log_dir, "dec2d.log"),
                "serialize": True, # Write logs as JSONs
                "enqueue": True}, # Makes logging queue based and thread safe
        ]
    }


def configure_logging(config: dict=None) -> None:
    """
    Install the loguru handlers used by the command line tools.

    Library code only ever calls `logger.<level>`; nothing is configured
    at import time.

    @param config: [`dict`] A loguru configuration, defaults to
        `build_logger_config()` evaluated now
    @return: [`None`]
    """
    logger.configure(**(build_logger_config() if config is None else config))


def thread_count() -> int:
    """
    Number of worker processes allowed for element-local construction,
    read from the DEC2D_THREADS environment variable.

    @return: [`int`] At least 1; 1 means run serially
    """
    value = os.environ.get('DEC2D_THREADS', '1')
    try:
        threads = int(value)
    except ValueError:
        logger.warning(f'Ignoring non-integer DEC2D_THREADS={value!r}')
        return 1
    return max(1, min(threads, mp.cpu_count()))


def parallelize(queries, operation, chunksize, *args):
    """
    Splits queries into chunks of chunksize and then uses a pool to
    parallelize operation on the query chunks. Results come back in
    chunk order, so reductions over them are deterministic.

    @param queries: [`sequence`] Items (or an array whose leading axis is
        split) passed to operation in chunks
    @param operation: [`callable`] Function applied to each chunk; must be
        picklable when more than one process is used
    @param chunksize: [`int`] How many queries each call handles
    @param args: Extra positional arguments forwarded to every call
    @return: [`list`] The result of operation for each chunk
    """
    chunked_queries = [queries[i:i + chunksize]
                       for i in np.arange(0, len(queries), chunksize)]
    processes = thread_count()
    if processes == 1 or len(chunked_queries) < 2:
        return [operation(chunk, *args) for chunk in chunked_queries]
    with mp.Pool(min(processes, len(chunked_queries))) as pool:
        # If operation requires extra args, use pool.starmap instead of pool.map
        if args:
            results = pool.starmap(operation,
                [(chunk, *args) for chunk in chunked_queries])
        else:
            results = pool.map(operation, chunked_queries)
    return results


def array_digest(values, rel_zero: float=1e-12, digits: int=9) -> str:
    """
    Short hash of a float array that is stable under round-off: entries
    below rel_zero times the largest magnitude count as zero and the rest
    are rounded to `digits` significant digits before hashing.

    @param values: [`np.ndarray`] Any float array
    @param rel_zero: [`float`] Relative threshold below which entries are 0
    @param digits: [`int`] Significant digits kept
    @return: [`str`] The first 16 hex characters of a sha256 digest
    """
    values = np.asarray(values, dtype=float).ravel()
    scale = np.max(np.abs(values)) if values.size else 0.0
    cleaned = np.where(np.abs(values) <= rel_zero * scale, 0.0, values)
    text = ' '.join(f'{v:.{digits - 1}e}' for v in cleaned + 0.0)
    return hashlib.sha256(text.encode('ascii')).hexdigest()[:16]
